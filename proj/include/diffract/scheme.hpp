#pragma once

#include "diffract/coefficients.hpp"
#include "diffract/geometry.hpp"

#include <cstdint>

namespace diffract {

/// Position of a simulated path at grid time t_k, with its branch label
/// (interface points carry the plus label).
struct SchemeState {
  Vec position;
  Side side = Side::Plus;
  std::int64_t step = 0;
};

SchemeState initial_state(const Interface& gamma, const Vec& x0);

/// One time step of size h driven by the Brownian increment dW ~ N(0, h I).
struct StepPlan {
  double h = 0.0;
  Vec dW;
};

struct StepOutcome {
  SchemeState next;
  bool crossed = false;    // the Euler proposal landed on the opposite open side
  bool corrected = false;  // an interface correction was applied
};

struct SchemeOptions {
  /// Negative control: when false, crossings are accepted uncorrected
  /// (plain Euler on the discontinuous field).
  bool apply_correction = true;
};

/// x + sigma(x) dW + drift(x) h, with sigma and drift of the state's branch.
Vec euler_increment(const SchemeState& state, const StepPlan& plan, const CoefficientField& field);

/// Euler step followed, when the proposal crosses the interface, by the
/// co-normal rescaling of the overshoot: a crossing from the plus side is
/// projected along gamma_+ and re-emitted along gamma_-, and vice versa.
StepOutcome transformed_step(const SchemeState& state, const StepPlan& plan,
                             const CoefficientField& field, const SchemeOptions& options = {});

/// Plain Euler step on the regularised field; never corrected.
StepOutcome regularized_step(const SchemeState& state, const StepPlan& plan,
                             const RegularizedField& field);

/// One-dimensional scheme on the transformed variable y = phi(x), with
/// phi(x) = a_minus x for x > 0 and a_plus x for x < 0 and zero drift. Only
/// meaningful for piecewise-constant coefficients.
class PhiTransform1D {
 public:
  PhiTransform1D(double a_plus, double a_minus);

  double to_y(double x) const { return x >= 0.0 ? a_minus_ * x : a_plus_ * x; }
  double to_x(double y) const { return y >= 0.0 ? y / a_minus_ : y / a_plus_; }

  /// Advances y by (a_- sigma_+ 1{y >= 0} + a_+ sigma_- 1{y < 0}) dW.
  /// y = 0 uses the plus coefficient, matching the closed plus side.
  double step(double y, double dW) const {
    return y + (y >= 0.0 ? plus_gain_ : minus_gain_) * dW;
  }

 private:
  double a_plus_;
  double a_minus_;
  double plus_gain_;
  double minus_gain_;
};

struct PhiStepResult {
  double y;
  double x;
};

PhiStepResult phi_transform_step(double y, const StepPlan& plan, double a_plus, double a_minus);

}  // namespace diffract
