#include "diffract/commands.hpp"

#include "diffract/errors.hpp"
#include "diffract/reference1d.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace diffract {

namespace {

using json = nlohmann::json;

constexpr double kOracleTolerance = 1e-10;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string coord(const Vec& p, int i) { return i < p.size() ? num(p[i]) : std::string(); }

std::string point_label(const Vec& p) {
  std::string s;
  for (Eigen::Index i = 0; i < p.size(); ++i) s += (i ? ";" : "") + short_num(p[i]);
  return s;
}

json point_json(const Vec& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

json result_json(const EstimatorResult& r) {
  return {{"estimate", r.mean},         {"stderr", r.std_error},
          {"paths", r.paths},           {"excluded", r.excluded},
          {"cap_exceeded", r.cap_exceeded}, {"crossings", r.crossings},
          {"corrections", r.corrections}, {"seconds", r.seconds}};
}

EstimatorResult run_estimator(const ExperimentConfig& c, const std::shared_ptr<const CoefficientField>& field,
                              const RunConfig& run, const Vec& x0, const ScalarField& payoff) {
  if (c.problem == Problem::Elliptic) return estimate_elliptic_exit(field, run, x0, payoff);
  if (run.domain) return estimate_parabolic_bounded(field, run, x0, payoff);
  return estimate_parabolic(field, run, x0, payoff);
}

std::string flagged_note(const EstimatorResult& r, const std::string& where) {
  std::ostringstream os;
  os << "warning: " << where << ": " << r.excluded << " of " << r.paths
     << " paths excluded (" << 100.0 * r.excluded_fraction() << "%, " << r.cap_exceeded
     << " over the step cap)\n";
  return os.str();
}

std::vector<double> step_list(const ExperimentConfig& c) {
  if (!c.h_list.empty()) return c.h_list;
  return {base_step(c)};
}

CommandOutput finish(std::ostringstream& csv, std::string summary, json doc, int exit_code) {
  doc["exit_code"] = exit_code;
  return {csv.str(), std::move(summary), doc.dump(2) + "\n", exit_code};
}

}  // namespace

std::optional<double> resolve_reference(const ExperimentConfig& c, std::size_t i) {
  if (std::holds_alternative<std::string>(c.reference)) {
    if (c.dim != 1 || c.problem != Problem::Parabolic || c.domain != "none") {
      throw ConfigError("reference1d needs a one-dimensional whole-line parabolic problem");
    }
    const Coefficient1D a = c.preset == "constant"
                                ? Coefficient1D::piecewise_constant(c.value, c.value)
                                : Coefficient1D::piecewise_constant(c.a_plus, c.a_minus);
    const ScalarField payoff = make_payoff(c);
    const auto u0 = [&payoff](double x) { return payoff(make_vec({x})); };
    return oracle_value(a, u0, *c.T, c.points.at(i)[0]);
  }
  return reference_for(c, i);
}

CommandOutput cmd_estimate(const ExperimentConfig& c, unsigned workers) {
  const auto field = make_field(c);
  const ScalarField payoff = make_payoff(c);
  RunConfig run = make_run(c, base_step(c));
  run.workers = workers;

  std::ostringstream csv;
  csv << "point_x,point_y,h,N,estimate,stderr,crossings,corrections,excluded,seconds\n";
  std::string summary;
  json rows = json::array();
  int exit_code = kExitOk;
  for (const Vec& x0 : c.points) {
    const EstimatorResult r = run_estimator(c, field, run, x0, payoff);
    csv << coord(x0, 0) << ',' << coord(x0, 1) << ',' << num(run.h) << ',' << run.paths << ','
        << num(r.mean) << ',' << num(r.std_error) << ',' << r.crossings << ',' << r.corrections
        << ',' << r.excluded << ',' << num(r.seconds) << '\n';
    summary += "point (" + point_label(x0) + "): " + short_num(r.mean) + " +/- " +
               short_num(r.std_error) + "\n";
    if (r.flagged()) {
      summary += flagged_note(r, "point (" + point_label(x0) + ")");
      exit_code = kExitNumerical;
    }
    json row = result_json(r);
    row["point"] = point_json(x0);
    row["h"] = run.h;
    rows.push_back(row);
  }
  return finish(csv, summary, {{"command", "estimate"}, {"rows", rows}}, exit_code);
}

CommandOutput cmd_converge(const ExperimentConfig& c, unsigned workers) {
  if (c.h_list.size() < 2) throw ConfigError("converge needs h_list with at least two step sizes");
  if (c.points.size() != 1) throw ConfigError("converge takes exactly one point");
  const auto reference = resolve_reference(c, 0);
  if (!reference) throw ConfigError("converge needs a reference value");
  const auto field = make_field(c);
  const ScalarField payoff = make_payoff(c);
  const Vec& x0 = c.points.front();

  int exit_code = kExitOk;
  std::string warnings;
  const ConvergenceTable table = tabulate_convergence(c.h_list, *reference, [&](double h) {
    RunConfig run = make_run(c, h);
    run.workers = workers;
    EstimatorResult r = run_estimator(c, field, run, x0, payoff);
    if (r.flagged()) {
      warnings += flagged_note(r, "h = " + short_num(h));
      exit_code = kExitNumerical;
    }
    return r;
  });

  std::ostringstream csv;
  csv << "# preset=" << c.preset << " point=" << point_label(x0) << " N=" << c.N
      << " seed=" << c.seed << " reference=" << num(*reference) << '\n';
  csv << "h,estimate,error,stderr,resolved,excluded,seconds\n";
  json rows = json::array();
  for (const ConvergenceRow& row : table.rows) {
    csv << num(row.h) << ',' << num(row.estimate) << ',' << num(row.error) << ','
        << num(row.std_error) << ',' << (row.resolved ? 1 : 0) << ',' << row.result.excluded << ','
        << num(row.result.seconds) << '\n';
    json j = result_json(row.result);
    j["h"] = row.h;
    j["error"] = row.error;
    j["resolved"] = row.resolved;
    rows.push_back(j);
  }

  std::string summary;
  json doc = {{"command", "converge"}, {"reference", *reference}, {"rows", rows},
              {"resolved_points", table.resolved_points}};
  if (table.resolved_points >= 2) {
    summary = "slope " + num(table.slope) + " over " + std::to_string(table.resolved_points) +
              " resolved points\n";
    doc["slope"] = table.slope;
  } else {
    summary = "noise-dominated: " + std::to_string(table.resolved_points) + " of " +
              std::to_string(table.rows.size()) +
              " step sizes have |error| > 3 stderr; no slope fitted\n";
    doc["slope"] = nullptr;
    doc["noise_dominated"] = true;
  }
  return finish(csv, warnings + summary, doc, exit_code);
}

CommandOutput cmd_compare(const ExperimentConfig& c, unsigned workers) {
  const auto field = make_field(c);
  const ScalarField payoff = make_payoff(c);

  std::ostringstream csv;
  csv << "point_x,point_y,h,N,transformed,transformed_stderr,regularized,regularized_stderr,"
         "reference,seconds\n";
  std::string summary;
  json rows = json::array();
  int exit_code = kExitOk;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const Vec& x0 = c.points[i];
    const auto reference = resolve_reference(c, i);
    for (double h : step_list(c)) {
      RunConfig run = make_run(c, h);
      run.workers = workers;
      run.scheme = SchemeKind::Transformed;
      const EstimatorResult tr = run_estimator(c, field, run, x0, payoff);
      run.scheme = SchemeKind::Regularized;
      const EstimatorResult rg = run_estimator(c, field, run, x0, payoff);
      csv << coord(x0, 0) << ',' << coord(x0, 1) << ',' << num(h) << ',' << run.paths << ','
          << num(tr.mean) << ',' << num(tr.std_error) << ',' << num(rg.mean) << ','
          << num(rg.std_error) << ',' << (reference ? num(*reference) : std::string()) << ','
          << num(tr.seconds + rg.seconds) << '\n';
      summary += "point (" + point_label(x0) + "), h = " + short_num(h) + ": transformed " +
                 short_num(tr.mean) + ", regularized " + short_num(rg.mean);
      if (reference) summary += ", reference " + short_num(*reference);
      summary += "\n";
      for (const auto* r : {&tr, &rg}) {
        if (r->flagged()) {
          summary += flagged_note(*r, "point (" + point_label(x0) + ")");
          exit_code = kExitNumerical;
        }
      }
      json row = {{"point", point_json(x0)}, {"h", h}, {"transformed", result_json(tr)},
                  {"regularized", result_json(rg)}};
      row["reference"] = reference ? json(*reference) : json(nullptr);
      rows.push_back(row);
    }
  }
  return finish(csv, summary, {{"command", "compare"}, {"rows", rows}}, exit_code);
}

CommandOutput cmd_oracle1d(const ExperimentConfig& c, unsigned workers) {
  if (c.dim != 1 || c.preset == "paper-example-2d") {
    throw ConfigError("oracle1d needs a one-dimensional piecewise-constant preset");
  }
  if (c.problem != Problem::Parabolic) throw ConfigError("oracle1d runs a fixed horizon; set T");
  const auto field = make_field(c);
  RunConfig run = make_run(c, base_step(c));
  run.workers = workers;

  std::ostringstream csv;
  csv << "point_x,h,paths,steps,max_discrepancy,crossings,pass,seconds\n";
  std::string summary;
  json rows = json::array();
  bool all_pass = true;
  for (const Vec& x0 : c.points) {
    const PathwiseReport r = oracle1d_discrepancy(field, run, x0[0]);
    const bool pass = r.max_discrepancy <= kOracleTolerance;
    all_pass = all_pass && pass;
    csv << num(x0[0]) << ',' << num(run.h) << ',' << r.paths << ',' << r.steps << ','
        << num(r.max_discrepancy) << ',' << r.crossings << ',' << (pass ? 1 : 0) << ','
        << num(r.seconds) << '\n';
    summary += "x0 = " + short_num(x0[0]) + ": max pathwise discrepancy " +
               short_num(r.max_discrepancy) + " over " + std::to_string(r.paths) + " paths x " +
               std::to_string(r.steps) + " steps (" + std::to_string(r.crossings) +
               " crossings): " + (pass ? "pass" : "FAIL") + "\n";
    rows.push_back({{"point", point_json(x0)},
                    {"max_discrepancy", r.max_discrepancy},
                    {"paths", r.paths},
                    {"steps", r.steps},
                    {"crossings", r.crossings},
                    {"pass", pass},
                    {"seconds", r.seconds}});
  }
  return finish(csv, summary, {{"command", "oracle1d"}, {"tolerance", kOracleTolerance}, {"rows", rows}},
                all_pass ? kExitOk : kExitNumerical);
}

CommandOutput cmd_diagnose(const ExperimentConfig& c, unsigned workers) {
  if (c.problem != Problem::Parabolic) throw ConfigError("diagnose runs a fixed horizon; set T");
  const auto field = make_field(c);
  const std::vector<double> hs =
      c.h_list.empty() ? std::vector<double>{1e-3, 2.5e-4, 6.25e-5} : c.h_list;
  for (double h : hs) steps_for(*c.T, h);

  std::ostringstream csv;
  csv << "point_x,point_y,h,N,S,stderr,ratio,excluded,seconds\n";
  std::string summary;
  json rows = json::array();
  int exit_code = kExitOk;
  for (const Vec& x0 : c.points) {
    std::optional<double> previous;
    for (double h : hs) {
      RunConfig run = make_run(c, h);
      run.workers = workers;
      const EstimatorResult r = occupation_diagnostic(field, run, x0, c.c);
      // NaN on the first row, where there is nothing to compare with
      const double ratio = previous && *previous != 0.0 ? r.mean / *previous : std::nan("");
      const bool has_ratio = !std::isnan(ratio);
      csv << coord(x0, 0) << ',' << coord(x0, 1) << ',' << num(h) << ',' << run.paths << ','
          << num(r.mean) << ',' << num(r.std_error) << ',' << (has_ratio ? num(ratio) : std::string())
          << ',' << r.excluded << ',' << num(r.seconds) << '\n';
      summary += "point (" + point_label(x0) + "), h = " + short_num(h) + ": S = " +
                 short_num(r.mean) + (has_ratio ? ", ratio " + short_num(ratio) : std::string()) + "\n";
      if (r.flagged()) {
        summary += flagged_note(r, "h = " + short_num(h));
        exit_code = kExitNumerical;
      }
      json row = result_json(r);
      row["point"] = point_json(x0);
      row["h"] = h;
      row["ratio"] = nullptr;
      if (has_ratio) row["ratio"] = ratio;
      rows.push_back(row);
      previous = r.mean;
    }
  }
  return finish(csv, summary, {{"command", "diagnose"}, {"c", c.c}, {"rows", rows}}, exit_code);
}

}  // namespace diffract
