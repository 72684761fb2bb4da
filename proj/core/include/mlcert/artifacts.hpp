#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "mlcert/bsv.hpp"
#include "mlcert/requirements.hpp"

namespace mlcert {

// Shortest decimal form that round-trips to the same double; keeps CSV and
// JSON artifacts byte-stable across runs.
std::string format_double(double value);

nlohmann::json trial_to_json(const Trial& trial);
Trial trial_from_json(const nlohmann::json& j);

// The self-contained run artifact: resolved config, seed, every trial, the
// failure report, surrogate hyperparameters, and the verdict when a hazard
// assessment was supplied. Re-running from this document reproduces the
// byte-identical artifact.
nlohmann::json run_artifact_json(const BsvState& state, const FailureReport& report,
                                 const nlohmann::json& resolved_config,
                                 const std::optional<VerificationVerdict>& verdict);

// Rebuilds a BsvState from a run artifact by refitting the surrogate on the
// recorded trials.
BsvState state_from_run_artifact(const nlohmann::json& artifact);

// CSV dump of (coordinates, mean, variance) at every grid cell center.
void write_grid_csv(std::ostream& out, const OddSpace& space, const GridSpec& grid,
                    const GpSurrogate& surrogate);

// 8-bit binary PGM of the posterior mean over a 2-D grid. The first grid
// dimension runs left to right, the second bottom to top.
void write_heatmap_pgm(std::ostream& out, const GridSpec& grid, const GpSurrogate& surrogate);

} // namespace mlcert
