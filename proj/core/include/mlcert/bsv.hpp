#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mlcert/grid.hpp"
#include "mlcert/odd.hpp"
#include "mlcert/surrogate.hpp"
#include "mlcert/sut.hpp"

namespace mlcert {

// The three acquisition heads evaluated every iteration: explore where the
// surrogate is uncertain, refine the failure boundary, and sample likely
// failures weighted by the operational density.
enum class AcquisitionKind {
    kUncertaintyExploration,
    kBoundaryRefinement,
    kFailureDistributionSampling,
};

struct BsvState {
    OddSpace space;
    GpSurrogate surrogate;
    std::vector<Trial> trials;
    std::size_t iteration = 0;
    std::uint64_t seed = 0;
};

struct MostLikelyFailure {
    OddPoint point;
    double odd_density = 0.0;
    double mean = 0.0;
};

struct FailureReport {
    double p_fail = 0.0;
    std::size_t num_evaluations = 0;
    std::vector<GridCell> boundary_cells; // populated for 2-D spaces
    std::optional<MostLikelyFailure> most_likely_failure;
    std::vector<std::size_t> grid_resolution;
};

// Failure-probability surface being integrated; the surrogate's posterior
// mean in production, an analytic indicator in tests.
using MeanFn = std::function<double(const OddPoint&)>;

// Raised when the SUT fails mid-run; carries the consistent state built up
// to that point.
class BsvRunError : public HarnessError {
public:
    BsvRunError(const std::string& message, BsvState state)
        : HarnessError(message), partial_state(std::move(state)) {}
    BsvState partial_state;
};

// Argmax of the acquisition score over the candidate grid; ties break to
// the lowest grid index. An empty surrogate yields a seeded uniform pick.
OddPoint acquire_next(const BsvState& state, AcquisitionKind kind,
                      std::span<const OddPoint> grid);

// Runs `iterations` rounds of three acquisitions each (3 SUT evaluations
// per iteration). The three points of one iteration are acquired from the
// iteration-start surrogate, so they may be evaluated concurrently; updates
// are applied in the fixed acquisition order. Deterministic given the seed
// and a deterministic SUT.
BsvState bsv_run(const OddSpace& space, const SutDescriptor& sut, std::size_t iterations,
                 const std::vector<std::size_t>& grid_resolution, std::uint64_t seed,
                 const KernelParams& params = {}, double prior_mean = 0.5,
                 std::size_t workers = 1);

// Midpoint-rule quadrature of mean(x) * density(x) over the grid.
double integrate_failure_probability(const OddSpace& space, const GridSpec& grid,
                                     const MeanFn& mean);

// Monte Carlo mean of mean(x) under the operational density.
double monte_carlo_failure_probability(const OddSpace& space, const MeanFn& mean,
                                       std::size_t draws, std::uint64_t seed);

// Cells where the surface crosses `level` between adjacent cell centers.
// Restricted to 2-D spaces in this version.
std::vector<GridCell> extract_boundary(const OddSpace& space, const GridSpec& grid,
                                       const MeanFn& mean, double level = 0.5);
std::vector<GridCell> extract_boundary(const BsvState& state,
                                       const std::vector<std::size_t>& grid_resolution,
                                       double level = 0.5);

// Argmax of mean(x) * density(x) over the grid; ties break to the lowest
// grid index.
MostLikelyFailure most_likely_failure(const OddSpace& space, const GridSpec& grid,
                                      const MeanFn& mean);
MostLikelyFailure most_likely_failure(const BsvState& state,
                                      const std::vector<std::size_t>& grid_resolution);

// Full report: quadrature for up to 3 continuous dimensions, Monte Carlo
// with 1e5 draws beyond that. Requires at least one trial.
FailureReport estimate_pfail(const BsvState& state,
                             const std::vector<std::size_t>& grid_resolution);

// Report for an arbitrary surface; the core of estimate_pfail, exposed so
// analytic surfaces can be integrated directly.
FailureReport build_failure_report(const OddSpace& space,
                                   const std::vector<std::size_t>& grid_resolution,
                                   const MeanFn& mean, std::size_t num_evaluations,
                                   std::uint64_t seed);

MeanFn surrogate_mean_fn(const GpSurrogate& surrogate);

} // namespace mlcert
