#pragma once

#include "diffract/coefficients.hpp"
#include "diffract/scheme.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace diffract {

enum class SchemeKind { Transformed, Regularized, Oracle1D };

const char* to_string(SchemeKind kind);
SchemeKind parse_scheme(const std::string& name);

/// Regularisation half-width as a function of the step: eps = scale * h^exponent,
/// unless a fixed value is given.
struct EpsilonRule {
  double scale = 1.0;
  double exponent = 0.25;
  std::optional<double> fixed;

  double operator()(double h) const;
  /// Parses "h^p", "c*h^p" or a plain number.
  static EpsilonRule parse(const std::string& text);
};

/// Bounded domain for killed and exit-time estimators.
class BoundedDomain {
 public:
  virtual ~BoundedDomain() = default;
  virtual int dim() const = 0;
  /// Signed distance to the boundary, positive inside.
  virtual double distance_to_boundary(const Vec& x) const = 0;
  virtual Vec outward_normal(const Vec& x) const = 0;
  virtual Vec project_to_boundary(const Vec& x) const = 0;
  bool contains(const Vec& x) const { return distance_to_boundary(x) > 0.0; }
};

/// Open ball; the default is the unit disc.
class DiscDomain final : public BoundedDomain {
 public:
  explicit DiscDomain(Vec center = Vec::Zero(2), double radius = 1.0);

  int dim() const override { return static_cast<int>(center_.size()); }
  double distance_to_boundary(const Vec& x) const override {
    return radius_ - (x - center_).norm();
  }
  Vec outward_normal(const Vec& x) const override;
  Vec project_to_boundary(const Vec& x) const override;

 private:
  Vec center_;
  double radius_;
};

struct RunConfig {
  double h = 1e-4;
  /// Number of steps of the parabolic horizon (T = h * steps).
  std::int64_t steps = 1;
  std::int64_t paths = 100000;
  std::uint64_t seed = 1;
  SchemeKind scheme = SchemeKind::Transformed;
  EpsilonRule epsilon;
  SchemeOptions scheme_options;
  /// Killing domain; null means the whole space.
  std::shared_ptr<const BoundedDomain> domain;
  /// Paths are killed once dist(x, boundary) <= shift_constant |sigma^T n| sqrt(h).
  double shift_constant = 0.5826;
  /// Exit problems stop a path after ceil(step_cap_time / h) steps.
  double step_cap_time = 50.0;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned workers = 0;

  double horizon() const { return h * static_cast<double>(steps); }
  static RunConfig parabolic(double T, std::int64_t n);
  static RunConfig elliptic(double h);
  void validate() const;
};

struct EstimatorResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t paths = 0;
  std::int64_t excluded = 0;
  std::int64_t cap_exceeded = 0;
  std::int64_t crossings = 0;
  std::int64_t corrections = 0;
  double seconds = 0.0;

  double excluded_fraction() const {
    return paths > 0 ? static_cast<double>(excluded) / static_cast<double>(paths) : 0.0;
  }
  /// More than 1% of the paths were excluded.
  bool flagged() const { return excluded_fraction() > 0.01; }
};

/// What a single simulated path contributes to an estimator.
struct PathOutcome {
  double value = 0.0;
  bool excluded = false;
  bool cap_exceeded = false;
  std::int64_t crossings = 0;
  std::int64_t corrections = 0;
};

/// Runs `paths` independent path functions over a worker pool. Path i is
/// handed its index; results are reduced block by block in path order, so
/// the result does not depend on the number of workers.
EstimatorResult run_paths(std::int64_t paths, unsigned workers,
                          const std::function<PathOutcome(std::uint64_t)>& path);

/// E u0(X_T) on the whole space.
EstimatorResult estimate_parabolic(std::shared_ptr<const CoefficientField> field,
                                   const RunConfig& config, const Vec& x0, const ScalarField& u0);

/// E u0(X_T) 1{T <= tau}, paths killed when they leave the shifted domain.
EstimatorResult estimate_parabolic_bounded(std::shared_ptr<const CoefficientField> field,
                                           const RunConfig& config, const Vec& x0,
                                           const ScalarField& u0);

/// E f(X_tau), f evaluated at the boundary projection of the exit position.
EstimatorResult estimate_elliptic_exit(std::shared_ptr<const CoefficientField> field,
                                       const RunConfig& config, const Vec& x0,
                                       const ScalarField& f);

/// h sum_{i<n} E exp(-c d(X_{t_i}, Gamma)^2 / h). Killed paths stop contributing.
EstimatorResult occupation_diagnostic(std::shared_ptr<const CoefficientField> field,
                                      const RunConfig& config, const Vec& x0, double c);

struct PathwiseReport {
  double max_discrepancy = 0.0;
  std::int64_t paths = 0;
  std::int64_t steps = 0;
  std::int64_t crossings = 0;
  double seconds = 0.0;
};

/// Drives the transformed scheme and the phi-transform scheme with the same
/// increments from x0 and returns the largest |difference| over all paths and
/// steps. `field` must be a one-dimensional piecewise-constant field.
PathwiseReport oracle1d_discrepancy(std::shared_ptr<const CoefficientField> field,
                                    const RunConfig& config, double x0);

struct ConvergenceRow {
  double h = 0.0;
  double estimate = 0.0;
  double error = 0.0;
  double std_error = 0.0;
  bool resolved = false;  // |error| > 3 stderr
  EstimatorResult result;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  /// NaN when fewer than two rows are resolved.
  double slope = 0.0;
  double intercept = 0.0;
  int resolved_points = 0;
};

/// Least-squares slope and intercept of log|error| against log h.
std::pair<double, double> fit_loglog(std::span<const double> h, std::span<const double> error);

/// Runs `estimate` at each step size and fits the error order over the
/// resolved points, if there are at least two.
ConvergenceTable tabulate_convergence(std::span<const double> hs, double reference,
                                      const std::function<EstimatorResult(double)>& estimate);

/// As tabulate_convergence, but throws InsufficientResolution when fewer than
/// two points are resolved.
ConvergenceTable convergence_study(std::span<const double> hs, double reference,
                                   const std::function<EstimatorResult(double)>& estimate);

}  // namespace diffract
