#include "diffract/scheme.hpp"

#include <cmath>
#include <stdexcept>

namespace diffract {

SchemeState initial_state(const Interface& gamma, const Vec& x0) {
  return {x0, branch_of(gamma.side(x0)), 0};
}

Vec euler_increment(const SchemeState& state, const StepPlan& plan, const CoefficientField& field) {
  const Side branch = branch_of(state.side);
  return state.position + field.sigma(state.position, branch) * plan.dW +
         field.drift(state.position, branch) * plan.h;
}

StepOutcome transformed_step(const SchemeState& state, const StepPlan& plan,
                             const CoefficientField& field, const SchemeOptions& options) {
  const Interface& gamma = field.interface();
  const Side from = branch_of(state.side);
  Vec proposal = euler_increment(state, plan, field);
  const Side landed = gamma.side(proposal);

  StepOutcome out;
  out.next.step = state.step + 1;
  if (landed == Side::On || landed == from || !options.apply_correction) {
    out.crossed = landed != Side::On && landed != from;
    out.next.side = branch_of(landed);
    out.next.position = std::move(proposal);
    return out;
  }

  out.crossed = true;
  const double transversality = field.bounds().lambda * (1.0 - 1e-9);
  auto plus = [&field](const Vec& y) { return field.conormal_plus(y); };
  auto minus = [&field](const Vec& y) { return field.conormal_minus(y); };
  Vec corrected = from == Side::Plus
                      ? gamma.crossing_correction(proposal, plus, minus, transversality)
                      : gamma.crossing_correction(proposal, minus, plus, transversality);
  out.corrected = true;
  out.next.side = branch_of(gamma.side(corrected));
  out.next.position = std::move(corrected);
  return out;
}

StepOutcome regularized_step(const SchemeState& state, const StepPlan& plan,
                             const RegularizedField& field) {
  const Interface& gamma = field.base().interface();
  StepOutcome out;
  out.next.position =
      state.position + field.sigma(state.position) * plan.dW + field.drift(state.position) * plan.h;
  out.next.side = branch_of(gamma.side(out.next.position));
  out.next.step = state.step + 1;
  out.crossed = out.next.side != branch_of(state.side);
  return out;
}

PhiTransform1D::PhiTransform1D(double a_plus, double a_minus)
    : a_plus_(a_plus),
      a_minus_(a_minus),
      plus_gain_(a_minus * std::sqrt(2.0 * a_plus)),
      minus_gain_(a_plus * std::sqrt(2.0 * a_minus)) {
  if (!(a_plus > 0.0) || !(a_minus > 0.0)) {
    throw std::invalid_argument("PhiTransform1D: coefficients must be positive");
  }
}

PhiStepResult phi_transform_step(double y, const StepPlan& plan, double a_plus, double a_minus) {
  const PhiTransform1D phi(a_plus, a_minus);
  const double next = phi.step(y, plan.dW[0]);
  return {next, phi.to_x(next)};
}

}  // namespace diffract
