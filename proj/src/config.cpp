#include "diffract/config.hpp"

#include "diffract/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace diffract {

namespace {

using json = nlohmann::json;

const std::set<std::string> kKeys = {
    "preset", "scheme",  "problem",        "points",   "T",     "n",       "h",
    "N",      "seed",    "epsilon_rule",   "domain",   "output", "a_plus", "a_minus",
    "value",  "dim",     "payoff",         "h_list",   "reference", "c",   "shift",
    "step_cap_time",     "apply_correction"};

[[noreturn]] void fail(const std::string& what) { throw ConfigError("config: " + what); }

double positive(const json& j, const char* key) {
  if (!j.is_number()) fail(std::string(key) + " must be a number");
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) fail(std::string(key) + " must be positive and finite");
  return v;
}

std::int64_t positive_int(const json& j, const char* key) {
  if (!j.is_number_integer() && !(j.is_number_float() && j.get<double>() == std::floor(j.get<double>()))) {
    fail(std::string(key) + " must be an integer");
  }
  const auto v = j.is_number_integer() ? j.get<std::int64_t>()
                                       : static_cast<std::int64_t>(j.get<double>());
  if (v < 1) fail(std::string(key) + " must be >= 1");
  return v;
}

std::string text(const json& j, const char* key) {
  if (!j.is_string()) fail(std::string(key) + " must be a string");
  return j.get<std::string>();
}

Vec point(const json& j) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim)) {
    fail("each point must be an array of 1 to 3 numbers");
  }
  Vec p(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail("point coordinates must be numbers");
    p[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return p;
}

int preset_dim(const ExperimentConfig& c) {
  if (c.preset == "paper-example-2d") return 2;
  if (c.preset == "piecewise-constant-1d") return 1;
  return c.dim;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("top level must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (!kKeys.contains(key)) fail("unknown key '" + key + "'");
  }
  for (const char* key : {"preset", "points"}) {
    if (!doc.contains(key)) fail(std::string("missing required key '") + key + "'");
  }

  ExperimentConfig c;
  c.preset = text(doc["preset"], "preset");
  if (c.preset != "paper-example-2d" && c.preset != "piecewise-constant-1d" && c.preset != "constant") {
    fail("unknown preset '" + c.preset +
         "' (expected paper-example-2d, piecewise-constant-1d or constant)");
  }
  if (doc.contains("scheme")) c.scheme = parse_scheme(text(doc["scheme"], "scheme"));
  if (doc.contains("problem")) {
    const std::string p = text(doc["problem"], "problem");
    if (p == "parabolic") {
      c.problem = Problem::Parabolic;
    } else if (p == "elliptic") {
      c.problem = Problem::Elliptic;
    } else {
      fail("problem must be 'parabolic' or 'elliptic'");
    }
  }
  if (doc.contains("a_plus")) c.a_plus = positive(doc["a_plus"], "a_plus");
  if (doc.contains("a_minus")) c.a_minus = positive(doc["a_minus"], "a_minus");
  if (doc.contains("value")) c.value = positive(doc["value"], "value");
  if (doc.contains("dim")) {
    c.dim = static_cast<int>(positive_int(doc["dim"], "dim"));
    if (c.dim > 2) fail("dim must be 1 or 2");
  }
  c.dim = preset_dim(c);

  if (!doc["points"].is_array() || doc["points"].empty()) fail("points must be a non-empty array");
  for (const auto& p : doc["points"]) {
    c.points.push_back(point(p));
    if (c.points.back().size() != c.dim) {
      fail("point dimension does not match the preset (expected " + std::to_string(c.dim) + ")");
    }
  }

  if (doc.contains("T")) c.T = positive(doc["T"], "T");
  if (doc.contains("n")) c.n = positive_int(doc["n"], "n");
  if (doc.contains("h")) c.h = positive(doc["h"], "h");
  if (c.n && doc.contains("h")) fail("give either n or h, not both");
  if (c.problem == Problem::Parabolic && !c.T) fail("missing required key 'T' for a parabolic problem");
  if (c.problem == Problem::Elliptic && c.n) fail("n only applies to parabolic problems; use h");
  if (doc.contains("N")) c.N = positive_int(doc["N"], "N");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) fail("seed must be a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("epsilon_rule")) c.epsilon_rule = text(doc["epsilon_rule"], "epsilon_rule");
  c.epsilon = EpsilonRule::parse(c.epsilon_rule);

  c.domain = c.preset == "paper-example-2d" ? "unit-disc" : "none";
  if (doc.contains("domain")) c.domain = text(doc["domain"], "domain");
  if (c.domain != "unit-disc" && c.domain != "none") fail("domain must be 'unit-disc' or 'none'");
  if (c.domain == "unit-disc" && c.dim != 2) fail("the unit disc needs a two-dimensional preset");
  if (c.problem == Problem::Elliptic && c.domain == "none") fail("an elliptic problem needs a domain");
  if (doc.contains("output")) c.output = text(doc["output"], "output");

  if (doc.contains("payoff")) {
    c.payoff = text(doc["payoff"], "payoff");
    if (c.payoff != "example" && c.payoff != "step" && c.payoff != "square" && c.payoff != "one") {
      fail("payoff must be one of example, step, square, one");
    }
  }
  if (c.payoff == "example" && c.preset != "paper-example-2d") fail("payoff 'example' needs paper-example-2d");

  if (doc.contains("h_list")) {
    if (!doc["h_list"].is_array() || doc["h_list"].empty()) fail("h_list must be a non-empty array");
    for (const auto& h : doc["h_list"]) c.h_list.push_back(positive(h, "h_list entry"));
  }
  if (doc.contains("reference")) {
    const json& r = doc["reference"];
    if (r.is_number()) {
      c.reference = r.get<double>();
    } else if (r.is_string()) {
      if (r.get<std::string>() != "reference1d") fail("reference string must be 'reference1d'");
      if (c.preset == "paper-example-2d") fail("reference1d only applies to one-dimensional presets");
      c.reference = r.get<std::string>();
    } else if (r.is_array()) {
      if (r.size() != c.points.size()) fail("reference list must have one value per point");
      std::vector<double> values;
      for (const auto& v : r) {
        if (!v.is_number()) fail("reference values must be numbers");
        values.push_back(v.get<double>());
      }
      c.reference = std::move(values);
    } else {
      fail("reference must be a number, a list of numbers or 'reference1d'");
    }
  }
  if (doc.contains("c")) c.c = positive(doc["c"], "c");
  if (doc.contains("shift")) {
    if (!doc["shift"].is_number() || doc["shift"].get<double>() < 0.0) fail("shift must be >= 0");
    c.shift = doc["shift"].get<double>();
  }
  if (doc.contains("step_cap_time")) c.step_cap_time = positive(doc["step_cap_time"], "step_cap_time");
  if (doc.contains("apply_correction")) {
    if (!doc["apply_correction"].is_boolean()) fail("apply_correction must be a boolean");
    c.apply_correction = doc["apply_correction"].get<bool>();
  }

  if (c.scheme == SchemeKind::Oracle1D && c.preset == "paper-example-2d") {
    fail("the oracle1d scheme needs a one-dimensional piecewise-constant preset");
  }
  if (c.problem == Problem::Parabolic) {
    if (!c.n) steps_for(*c.T, c.h);
    for (double h : c.h_list) steps_for(*c.T, h);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::shared_ptr<const CoefficientField> make_field(const ExperimentConfig& c) {
  if (c.preset == "paper-example-2d") return presets::paper_example_2d();
  if (c.preset == "piecewise-constant-1d") return presets::piecewise_constant_1d(c.a_plus, c.a_minus);
  return presets::constant(c.dim, c.value);
}

std::shared_ptr<const BoundedDomain> make_domain(const ExperimentConfig& c) {
  if (c.domain == "unit-disc") return std::make_shared<DiscDomain>();
  return nullptr;
}

ScalarField make_payoff(const ExperimentConfig& c) {
  std::string name = c.payoff;
  if (name.empty()) {
    name = c.preset == "paper-example-2d" ? "example" : c.preset == "piecewise-constant-1d" ? "step" : "square";
  }
  if (name == "example") {
    if (c.problem == Problem::Elliptic) {
      return [](const Vec& x) { return std::sin(3.0 * x[0]) + std::cos(4.0 * x[1]); };
    }
    return [](const Vec& x) { return 10.0 * (1.0 - x.squaredNorm()); };
  }
  if (name == "step") return [](const Vec& x) { return x[0] > 0.0 ? 1.0 : 0.0; };
  if (name == "square") return [](const Vec& x) { return x.squaredNorm(); };
  return [](const Vec&) { return 1.0; };
}

std::int64_t steps_for(double T, double h) {
  const double ratio = T / h;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * n) {
    std::ostringstream os;
    os << "config: T = " << T << " is not an integer multiple of h = " << h;
    throw ConfigError(os.str());
  }
  return static_cast<std::int64_t>(n);
}

RunConfig make_run(const ExperimentConfig& c, double h) {
  RunConfig run;
  if (c.problem == Problem::Parabolic) {
    run = RunConfig::parabolic(*c.T, steps_for(*c.T, h));
  } else {
    run = RunConfig::elliptic(h);
  }
  run.paths = c.N;
  run.seed = c.seed;
  run.scheme = c.scheme;
  run.epsilon = c.epsilon;
  run.scheme_options.apply_correction = c.apply_correction;
  run.domain = make_domain(c);
  run.shift_constant = c.shift;
  run.step_cap_time = c.step_cap_time;
  return run;
}

double base_step(const ExperimentConfig& c) {
  if (c.n) return *c.T / static_cast<double>(*c.n);
  return c.h;
}

std::optional<double> reference_for(const ExperimentConfig& c, std::size_t i) {
  if (const auto* v = std::get_if<double>(&c.reference)) return *v;
  if (const auto* v = std::get_if<std::vector<double>>(&c.reference)) return v->at(i);
  return std::nullopt;
}

}  // namespace diffract
