#pragma once

#include "diffract/coefficients.hpp"
#include "diffract/montecarlo.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace diffract {

enum class Problem { Parabolic, Elliptic };

/// An experiment file. Everything is checked by `parse_config` before any
/// path is simulated; unknown keys are rejected.
struct ExperimentConfig {
  std::string preset;  // "paper-example-2d", "piecewise-constant-1d" or "constant"
  SchemeKind scheme = SchemeKind::Transformed;
  Problem problem = Problem::Parabolic;
  std::vector<Vec> points;
  std::optional<double> T;
  std::optional<std::int64_t> n;
  double h = 1e-4;
  std::int64_t N = 100000;
  std::uint64_t seed = 1;
  std::string epsilon_rule = "h^0.25";
  EpsilonRule epsilon;
  std::string domain;  // "unit-disc" or "none"
  std::optional<std::string> output;

  // preset parameters
  double a_plus = 2.0;
  double a_minus = 1.0;
  double value = 0.5;
  int dim = 2;

  /// "example", "step", "square" or "one"; empty selects the preset default.
  std::string payoff;
  std::vector<double> h_list;
  /// Reference values: one number for all points, one per point, or the
  /// string "reference1d" (Crank-Nicolson oracle, 1D presets only).
  std::variant<std::monostate, double, std::vector<double>, std::string> reference;
  double c = 0.5;
  double shift = 0.5826;
  double step_cap_time = 50.0;
  bool apply_correction = true;
};

/// Parses and validates a JSON experiment document. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

std::shared_ptr<const CoefficientField> make_field(const ExperimentConfig& config);
std::shared_ptr<const BoundedDomain> make_domain(const ExperimentConfig& config);
/// u0 for parabolic problems, boundary data f for elliptic ones.
ScalarField make_payoff(const ExperimentConfig& config);

/// Number of steps for horizon T at step h. Throws ConfigError unless T / h
/// is an integer up to 1e-9 relative.
std::int64_t steps_for(double T, double h);

/// Run parameters for step h (T from the config for parabolic problems).
RunConfig make_run(const ExperimentConfig& config, double h);

/// Step used by `estimate`: T / n when n is given, otherwise h.
double base_step(const ExperimentConfig& config);

/// Reference value for point i, if one is configured.
std::optional<double> reference_for(const ExperimentConfig& config, std::size_t i);

}  // namespace diffract
