#include "diffract/montecarlo.hpp"

#include "diffract/errors.hpp"
#include "diffract/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <regex>
#include <sstream>
#include <thread>

namespace diffract {

const char* to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Transformed: return "transformed";
    case SchemeKind::Regularized: return "regularized";
    case SchemeKind::Oracle1D: return "oracle1d";
  }
  return "?";
}

SchemeKind parse_scheme(const std::string& name) {
  if (name == "transformed") return SchemeKind::Transformed;
  if (name == "regularized") return SchemeKind::Regularized;
  if (name == "oracle1d") return SchemeKind::Oracle1D;
  throw ConfigError("unknown scheme '" + name + "' (expected transformed, regularized or oracle1d)");
}

double EpsilonRule::operator()(double h) const {
  if (fixed) return *fixed;
  return scale * std::pow(h, exponent);
}

EpsilonRule EpsilonRule::parse(const std::string& text) {
  static const std::regex power(R"(^\s*(?:([0-9.eE+-]+)\s*\*\s*)?h\s*\^\s*([0-9.eE+-]+)\s*$)");
  std::smatch m;
  EpsilonRule rule;
  try {
    if (std::regex_match(text, m, power)) {
      rule.scale = m[1].matched ? std::stod(m[1].str()) : 1.0;
      rule.exponent = std::stod(m[2].str());
      if (!(rule.scale > 0.0) || !(rule.exponent > 0.0)) throw ConfigError("");
      return rule;
    }
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size() || !(value > 0.0)) throw ConfigError("");
    rule.fixed = value;
    return rule;
  } catch (const std::exception&) {
    throw ConfigError("invalid epsilon rule '" + text + "' (expected e.g. \"h^0.25\" or a positive number)");
  }
}

// ---------------------------------------------------------------------------

DiscDomain::DiscDomain(Vec center, double radius) : center_(std::move(center)), radius_(radius) {
  if (!(radius_ > 0.0)) throw std::invalid_argument("DiscDomain: radius must be positive");
}

Vec DiscDomain::outward_normal(const Vec& x) const {
  Vec r = x - center_;
  const double len = r.norm();
  if (len == 0.0) {
    Vec e = Vec::Zero(center_.size());
    e[0] = 1.0;
    return e;
  }
  return r / len;
}

Vec DiscDomain::project_to_boundary(const Vec& x) const {
  return center_ + radius_ * outward_normal(x);
}

// ---------------------------------------------------------------------------

RunConfig RunConfig::parabolic(double T, std::int64_t n) {
  RunConfig c;
  c.steps = n;
  c.h = T / static_cast<double>(n);
  return c;
}

RunConfig RunConfig::elliptic(double h) {
  RunConfig c;
  c.h = h;
  c.steps = 1;
  return c;
}

void RunConfig::validate() const {
  if (!(h > 0.0)) throw ConfigError("step size must be positive");
  if (steps < 1) throw ConfigError("number of steps must be >= 1");
  if (paths < 1) throw ConfigError("number of paths must be >= 1");
  if (!(shift_constant >= 0.0)) throw ConfigError("boundary shift constant must be >= 0");
  if (!(step_cap_time > 0.0)) throw ConfigError("step cap time must be positive");
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::int64_t kBlockSize = 256;

struct Moments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.n) / total;
    m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
  }
};

struct BlockStats {
  Moments moments;
  std::int64_t excluded = 0;
  std::int64_t cap_exceeded = 0;
  std::int64_t crossings = 0;
  std::int64_t corrections = 0;
};

// Per-run path kernel: scheme dispatch plus the boundary-shift test.
class PathKernel {
 public:
  struct Path {
    SchemeState state;
    double y = 0.0;  // transformed coordinate, oracle1d only
  };

  PathKernel(std::shared_ptr<const CoefficientField> field, const RunConfig& config)
      : field_(std::move(field)), config_(config), sqrt_h_(std::sqrt(config.h)) {
    config_.validate();
    if (!field_) throw ConfigError("missing coefficient field");
    dim_ = field_->dim();
    if (config_.domain && config_.domain->dim() != dim_) {
      throw ConfigError("domain dimension does not match the coefficient field");
    }
    sigma_bound_ = std::sqrt(2.0 * field_->bounds().Lambda);
    switch (config_.scheme) {
      case SchemeKind::Transformed: break;
      case SchemeKind::Regularized:
        regularized_.emplace(field_, config_.epsilon(config_.h));
        break;
      case SchemeKind::Oracle1D: {
        if (dim_ != 1 || !field_->branch(Side::Plus).constant ||
            !field_->branch(Side::Minus).constant) {
          throw ConfigError("the oracle1d scheme needs a one-dimensional piecewise-constant field");
        }
        const Vec origin = Vec::Zero(1);
        phi_.emplace(field_->evaluate(origin, Side::Plus)(0, 0),
                     field_->evaluate(origin, Side::Minus)(0, 0));
        break;
      }
    }
  }

  int dim() const { return dim_; }
  double h() const { return config_.h; }
  const Interface& interface() const { return field_->interface(); }

  Path start(const Vec& x0) const {
    if (x0.size() != dim_) throw ConfigError("start point dimension does not match the field");
    Path p{initial_state(field_->interface(), x0), 0.0};
    if (phi_) p.y = phi_->to_y(x0[0]);
    return p;
  }

  void advance(Path& p, GaussianSource& normal, PathOutcome& out) const {
    StepPlan plan{config_.h, Vec(dim_)};
    for (int j = 0; j < dim_; ++j) plan.dW[j] = sqrt_h_ * normal();
    if (phi_) {
      const Side before = p.state.side;
      p.y = phi_->step(p.y, plan.dW[0]);
      p.state.position[0] = phi_->to_x(p.y);
      p.state.side = p.y >= 0.0 ? Side::Plus : Side::Minus;
      ++p.state.step;
      if (p.state.side != before) {
        ++out.crossings;
        ++out.corrections;
      }
      return;
    }
    StepOutcome step = regularized_
                           ? regularized_step(p.state, plan, *regularized_)
                           : transformed_step(p.state, plan, *field_, config_.scheme_options);
    out.crossings += step.crossed ? 1 : 0;
    out.corrections += step.corrected ? 1 : 0;
    p.state = std::move(step.next);
  }

  /// True once the path has left the shifted domain.
  bool killed(const Path& p) const {
    const BoundedDomain& domain = *config_.domain;
    const Vec& x = p.state.position;
    const double dist = domain.distance_to_boundary(x);
    if (dist <= 0.0) return true;
    const double scale = config_.shift_constant * sqrt_h_;
    if (dist > scale * sigma_bound_) return false;
    const Mat sigma = regularized_ ? regularized_->sigma(x) : field_->sigma(x, p.state.side);
    return dist <= scale * (sigma.transpose() * domain.outward_normal(x)).norm();
  }

  const RunConfig& config() const { return config_; }

 private:
  std::shared_ptr<const CoefficientField> field_;
  RunConfig config_;
  double sqrt_h_;
  int dim_ = 0;
  double sigma_bound_ = 0.0;
  std::optional<RegularizedField> regularized_;
  std::optional<PhiTransform1D> phi_;
};

template <class Body>
std::function<PathOutcome(std::uint64_t)> guarded(std::uint64_t seed, Body body) {
  return [seed, body](std::uint64_t path) {
    PathOutcome out;
    GaussianSource normal(seed, path);
    try {
      body(normal, out);
    } catch (const NumericalError&) {
      out.excluded = true;
    }
    return out;
  };
}

}  // namespace

EstimatorResult run_paths(std::int64_t paths, unsigned workers,
                          const std::function<PathOutcome(std::uint64_t)>& path) {
  if (paths < 1) throw ConfigError("number of paths must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const std::int64_t blocks = (paths + kBlockSize - 1) / kBlockSize;
  std::vector<BlockStats> stats(static_cast<std::size_t>(blocks));
  std::atomic<std::int64_t> next{0};

  auto work = [&] {
    for (std::int64_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
      BlockStats& s = stats[static_cast<std::size_t>(b)];
      const std::int64_t end = std::min(paths, (b + 1) * kBlockSize);
      for (std::int64_t i = b * kBlockSize; i < end; ++i) {
        const PathOutcome o = path(static_cast<std::uint64_t>(i));
        s.crossings += o.crossings;
        s.corrections += o.corrections;
        if (o.excluded || o.cap_exceeded) {
          ++s.excluded;
          s.cap_exceeded += o.cap_exceeded ? 1 : 0;
          continue;
        }
        s.moments.add(o.value);
      }
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, blocks));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  BlockStats total;
  for (const BlockStats& s : stats) {
    total.moments.merge(s.moments);
    total.excluded += s.excluded;
    total.cap_exceeded += s.cap_exceeded;
    total.crossings += s.crossings;
    total.corrections += s.corrections;
  }

  EstimatorResult r;
  r.paths = paths;
  r.excluded = total.excluded;
  r.cap_exceeded = total.cap_exceeded;
  r.crossings = total.crossings;
  r.corrections = total.corrections;
  r.mean = total.moments.mean;
  if (total.moments.n > 1) {
    const double n = static_cast<double>(total.moments.n);
    r.std_error = std::sqrt(total.moments.m2 / (n - 1.0) / n);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

EstimatorResult estimate_parabolic(std::shared_ptr<const CoefficientField> field,
                                   const RunConfig& config, const Vec& x0, const ScalarField& u0) {
  if (config.domain) throw ConfigError("estimate_parabolic is a whole-space estimator; use the bounded one");
  const PathKernel kernel(std::move(field), config);
  const auto start = kernel.start(x0);
  return run_paths(config.paths, config.workers,
                   guarded(config.seed, [&](GaussianSource& normal, PathOutcome& out) {
                     auto p = start;
                     for (std::int64_t k = 0; k < config.steps; ++k) kernel.advance(p, normal, out);
                     out.value = u0(p.state.position);
                   }));
}

EstimatorResult estimate_parabolic_bounded(std::shared_ptr<const CoefficientField> field,
                                           const RunConfig& config, const Vec& x0,
                                           const ScalarField& u0) {
  if (!config.domain) throw ConfigError("estimate_parabolic_bounded needs a domain");
  const PathKernel kernel(std::move(field), config);
  const auto start = kernel.start(x0);
  return run_paths(config.paths, config.workers,
                   guarded(config.seed, [&](GaussianSource& normal, PathOutcome& out) {
                     auto p = start;
                     for (std::int64_t k = 0; k < config.steps; ++k) {
                       kernel.advance(p, normal, out);
                       if (kernel.killed(p)) {
                         out.value = 0.0;
                         return;
                       }
                     }
                     out.value = u0(p.state.position);
                   }));
}

EstimatorResult estimate_elliptic_exit(std::shared_ptr<const CoefficientField> field,
                                       const RunConfig& config, const Vec& x0,
                                       const ScalarField& f) {
  if (!config.domain) throw ConfigError("estimate_elliptic_exit needs a domain");
  const PathKernel kernel(std::move(field), config);
  const auto start = kernel.start(x0);
  const auto cap = static_cast<std::int64_t>(std::ceil(config.step_cap_time / config.h));
  const BoundedDomain& domain = *config.domain;
  return run_paths(config.paths, config.workers,
                   guarded(config.seed, [&](GaussianSource& normal, PathOutcome& out) {
                     auto p = start;
                     for (std::int64_t k = 0; k < cap; ++k) {
                       kernel.advance(p, normal, out);
                       if (kernel.killed(p)) {
                         out.value = f(domain.project_to_boundary(p.state.position));
                         return;
                       }
                     }
                     out.cap_exceeded = true;
                   }));
}

EstimatorResult occupation_diagnostic(std::shared_ptr<const CoefficientField> field,
                                      const RunConfig& config, const Vec& x0, double c) {
  if (!(c > 0.0)) throw ConfigError("occupation constant c must be positive");
  const PathKernel kernel(std::move(field), config);
  const auto start = kernel.start(x0);
  const double h = config.h;
  return run_paths(config.paths, config.workers,
                   guarded(config.seed, [&](GaussianSource& normal, PathOutcome& out) {
                     auto p = start;
                     double sum = 0.0;
                     for (std::int64_t i = 0; i < config.steps; ++i) {
                       const double d = kernel.interface().signed_distance(p.state.position);
                       sum += std::exp(-c * d * d / h);
                       kernel.advance(p, normal, out);
                       if (config.domain && kernel.killed(p)) break;
                     }
                     out.value = h * sum;
                   }));
}

// ---------------------------------------------------------------------------

std::pair<double, double> fit_loglog(std::span<const double> h, std::span<const double> error) {
  if (h.size() != error.size() || h.size() < 2) {
    throw std::invalid_argument("fit_loglog: need at least two (h, error) pairs");
  }
  const double n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(std::abs(error[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_loglog: step sizes must differ");
  const double slope = (n * sxy - sx * sy) / denom;
  return {slope, (sy - slope * sx) / n};
}

ConvergenceTable tabulate_convergence(std::span<const double> hs, double reference,
                                      const std::function<EstimatorResult(double)>& estimate) {
  ConvergenceTable table;
  std::vector<double> fit_h, fit_err;
  for (double h : hs) {
    ConvergenceRow row;
    row.h = h;
    row.result = estimate(h);
    row.estimate = row.result.mean;
    row.error = row.estimate - reference;
    row.std_error = row.result.std_error;
    row.resolved = std::abs(row.error) > 3.0 * row.std_error;
    if (row.resolved) {
      fit_h.push_back(h);
      fit_err.push_back(row.error);
    }
    table.rows.push_back(row);
  }
  table.resolved_points = static_cast<int>(fit_h.size());
  if (fit_h.size() < 2) {
    table.slope = table.intercept = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::tie(table.slope, table.intercept) = fit_loglog(fit_h, fit_err);
  }
  return table;
}

ConvergenceTable convergence_study(std::span<const double> hs, double reference,
                                   const std::function<EstimatorResult(double)>& estimate) {
  ConvergenceTable table = tabulate_convergence(hs, reference, estimate);
  if (table.resolved_points < 2) {
    std::ostringstream os;
    os << "only " << table.resolved_points << " of " << hs.size()
       << " step sizes have |error| > 3 stderr; increase the number of paths";
    throw InsufficientResolution(os.str());
  }
  return table;
}

PathwiseReport oracle1d_discrepancy(std::shared_ptr<const CoefficientField> field,
                                    const RunConfig& config, double x0) {
  config.validate();
  if (!field || field->dim() != 1 || !field->branch(Side::Plus).constant ||
      !field->branch(Side::Minus).constant) {
    throw ConfigError("oracle1d_discrepancy needs a one-dimensional piecewise-constant field");
  }
  const Vec origin = Vec::Zero(1);
  const PhiTransform1D phi(field->evaluate(origin, Side::Plus)(0, 0),
                           field->evaluate(origin, Side::Minus)(0, 0));
  const double sqrt_h = std::sqrt(config.h);
  const Vec start = make_vec({x0});
  std::vector<double> worst(static_cast<std::size_t>(config.paths), 0.0);
  const EstimatorResult r =
      run_paths(config.paths, config.workers, [&](std::uint64_t path) {
        PathOutcome out;
        GaussianSource normal(config.seed, path);
        SchemeState state = initial_state(field->interface(), start);
        double y = phi.to_y(x0);
        double m = 0.0;
        StepPlan plan{config.h, Vec(1)};
        try {
          for (std::int64_t k = 0; k < config.steps; ++k) {
            plan.dW[0] = sqrt_h * normal();
            StepOutcome step = transformed_step(state, plan, *field, config.scheme_options);
            out.crossings += step.crossed ? 1 : 0;
            out.corrections += step.corrected ? 1 : 0;
            state = std::move(step.next);
            y = phi.step(y, plan.dW[0]);
            m = std::max(m, std::abs(state.position[0] - phi.to_x(y)));
          }
        } catch (const NumericalError&) {
          // a path the transformed scheme cannot follow is a discrepancy
          m = std::numeric_limits<double>::infinity();
        }
        worst[path] = m;
        return out;
      });
  PathwiseReport report;
  report.max_discrepancy = *std::max_element(worst.begin(), worst.end());
  report.paths = config.paths;
  report.steps = config.steps;
  report.crossings = r.crossings;
  report.seconds = r.seconds;
  return report;
}

}  // namespace diffract
