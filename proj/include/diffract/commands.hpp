#pragma once

#include "diffract/config.hpp"

#include <string>

namespace diffract {

/// What a subcommand produced. `csv` is the artifact, `summary` a short
/// human-readable report and `json` the same report as a JSON document.
struct CommandOutput {
  std::string csv;
  std::string summary;
  std::string json;
  int exit_code = 0;
};

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNumerical = 2;

/// One row per point: the configured estimator at the configured step.
CommandOutput cmd_estimate(const ExperimentConfig& config, unsigned workers = 0);

/// Error against the reference over h_list for a single point, with the
/// fitted order (or "noise-dominated" when fewer than two errors exceed
/// three standard errors).
CommandOutput cmd_converge(const ExperimentConfig& config, unsigned workers = 0);

/// Transformed and regularised schemes side by side, same seeds.
CommandOutput cmd_compare(const ExperimentConfig& config, unsigned workers = 0);

/// Pathwise agreement of the transformed and phi-transform schemes; fails
/// (exit 2) when the largest discrepancy exceeds 1e-10.
CommandOutput cmd_oracle1d(const ExperimentConfig& config, unsigned workers = 0);

/// Occupation sum S(h) over h_list with the ratio to the previous row.
CommandOutput cmd_diagnose(const ExperimentConfig& config, unsigned workers = 0);

/// Reference value at point i: the configured number or the 1D oracle.
std::optional<double> resolve_reference(const ExperimentConfig& config, std::size_t i);

}  // namespace diffract
