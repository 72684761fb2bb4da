#include "mlcert/bsv.hpp"

#include <algorithm>
#include <cmath>

#include "mlcert/error.hpp"
#include "mlcert/rng.hpp"

namespace mlcert {

namespace {

constexpr std::size_t kMonteCarloDraws = 100000;

std::size_t kind_index(AcquisitionKind kind) {
    switch (kind) {
    case AcquisitionKind::kUncertaintyExploration:
        return 0;
    case AcquisitionKind::kBoundaryRefinement:
        return 1;
    case AcquisitionKind::kFailureDistributionSampling:
        return 2;
    }
    return 0;
}

} // namespace

MeanFn surrogate_mean_fn(const GpSurrogate& surrogate) {
    return [&surrogate](const OddPoint& p) { return surrogate.predict(p).mean; };
}

OddPoint acquire_next(const BsvState& state, AcquisitionKind kind,
                      std::span<const OddPoint> grid) {
    if (grid.empty()) {
        throw ConfigError("acquisition candidate grid is empty");
    }
    if (!state.surrogate.fitted() || state.surrogate.num_observations() == 0) {
        // No data yet: every candidate scores alike, pick uniformly by seed.
        UniformSource rng(derive_seed(state.seed, state.iteration * 3 + kind_index(kind)));
        return grid[rng.next_index(grid.size())];
    }

    const auto predictions = state.surrogate.predict_batch(grid);
    double best = -1.0;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double score = 0.0;
        switch (kind) {
        case AcquisitionKind::kUncertaintyExploration:
            score = predictions[i].variance;
            break;
        case AcquisitionKind::kBoundaryRefinement:
            score = predictions[i].mean * (1.0 - predictions[i].mean) *
                    std::sqrt(predictions[i].variance);
            break;
        case AcquisitionKind::kFailureDistributionSampling:
            score = predictions[i].mean * state.space.density(grid[i]);
            break;
        }
        if (score > best) {
            best = score;
            best_index = i;
        }
    }
    return grid[best_index];
}

BsvState bsv_run(const OddSpace& space, const SutDescriptor& sut, std::size_t iterations,
                 const std::vector<std::size_t>& grid_resolution, std::uint64_t seed,
                 const KernelParams& params, double prior_mean, std::size_t workers) {
    if (iterations < 1) {
        throw ConfigError("bsv run needs at least one iteration");
    }
    if (!space.all_continuous()) {
        throw UnsupportedDimensionError(
            "bsv runs over continuous dimensions only; restrict categorical dimensions first");
    }
    const GridSpec grid(space, grid_resolution);
    const std::vector<OddPoint> candidates = grid.centers();

    BsvState state{space, GpSurrogate::fit(space, {}, {}, params, prior_mean), {}, 0, seed};
    Sut session(sut);

    static constexpr AcquisitionKind kOrder[] = {
        AcquisitionKind::kUncertaintyExploration,
        AcquisitionKind::kBoundaryRefinement,
        AcquisitionKind::kFailureDistributionSampling,
    };

    for (std::size_t iteration = 1; iteration <= iterations; ++iteration) {
        state.iteration = iteration;
        std::vector<OddPoint> picks;
        picks.reserve(3);
        for (AcquisitionKind kind : kOrder) {
            picks.push_back(acquire_next(state, kind, candidates));
        }

        std::vector<Trial> outcomes;
        try {
            outcomes = session.evaluate_batch(picks, workers);
        } catch (BatchError& e) {
            for (Trial& trial : e.completed) {
                trial.iteration = iteration;
                state.surrogate =
                    state.surrogate.updated(trial.point, trial.failure ? 1.0 : 0.0);
                state.trials.push_back(std::move(trial));
            }
            throw BsvRunError(std::string("SUT failed during iteration ") +
                                  std::to_string(iteration) + ": " + e.what(),
                              std::move(state));
        }
        for (Trial& trial : outcomes) {
            trial.iteration = iteration;
            state.surrogate = state.surrogate.updated(trial.point, trial.failure ? 1.0 : 0.0);
            state.trials.push_back(std::move(trial));
        }
    }
    return state;
}

double integrate_failure_probability(const OddSpace& space, const GridSpec& grid,
                                     const MeanFn& mean) {
    double total = 0.0;
    for (std::size_t i = 0; i < grid.num_cells(); ++i) {
        const OddPoint center = grid.center(i);
        total += mean(center) * space.density(center) * grid.cell_volume();
    }
    return total;
}

double monte_carlo_failure_probability(const OddSpace& space, const MeanFn& mean,
                                       std::size_t draws, std::uint64_t seed) {
    if (draws == 0) {
        throw ConfigError("monte carlo estimate needs at least one draw");
    }
    const std::vector<OddPoint> points = space.sample(draws, seed);
    double total = 0.0;
    for (const OddPoint& p : points) {
        total += mean(p);
    }
    return total / static_cast<double>(draws);
}

std::vector<GridCell> extract_boundary(const OddSpace& space, const GridSpec& grid,
                                       const MeanFn& mean, double level) {
    if (grid.num_dimensions() != 2) {
        throw UnsupportedDimensionError("boundary extraction supports exactly 2 dimensions");
    }
    const std::size_t nx = grid.resolution()[0];
    const std::size_t ny = grid.resolution()[1];
    std::vector<double> values(grid.num_cells());
    for (std::size_t i = 0; i < grid.num_cells(); ++i) {
        values[i] = mean(grid.center(i));
    }
    // A cell is on the boundary when the surface crosses the level between
    // its center and a 4-neighbor's center. The strict sign product keeps
    // the test symmetric under (mean, level) -> (1 - mean, 1 - level).
    std::vector<char> marked(grid.num_cells(), 0);
    auto flat = [&](std::size_t ix, std::size_t iy) { return ix * ny + iy; };
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const std::size_t here = flat(ix, iy);
            const double a = values[here] - level;
            if (ix + 1 < nx) {
                const std::size_t right = flat(ix + 1, iy);
                if (a * (values[right] - level) < 0.0) {
                    marked[here] = 1;
                    marked[right] = 1;
                }
            }
            if (iy + 1 < ny) {
                const std::size_t up = flat(ix, iy + 1);
                if (a * (values[up] - level) < 0.0) {
                    marked[here] = 1;
                    marked[up] = 1;
                }
            }
        }
    }
    std::vector<GridCell> cells;
    for (std::size_t i = 0; i < grid.num_cells(); ++i) {
        if (marked[i]) {
            cells.push_back(grid.cell(i));
        }
    }
    return cells;
}

std::vector<GridCell> extract_boundary(const BsvState& state,
                                       const std::vector<std::size_t>& grid_resolution,
                                       double level) {
    const GridSpec grid(state.space, grid_resolution);
    return extract_boundary(state.space, grid, surrogate_mean_fn(state.surrogate), level);
}

MostLikelyFailure most_likely_failure(const OddSpace& space, const GridSpec& grid,
                                      const MeanFn& mean) {
    double best = -1.0;
    MostLikelyFailure result;
    for (std::size_t i = 0; i < grid.num_cells(); ++i) {
        const OddPoint center = grid.center(i);
        const double mu = mean(center);
        const double density = space.density(center);
        const double score = mu * density;
        if (score > best) {
            best = score;
            result = {center, density, mu};
        }
    }
    return result;
}

MostLikelyFailure most_likely_failure(const BsvState& state,
                                      const std::vector<std::size_t>& grid_resolution) {
    if (state.trials.empty()) {
        throw InsufficientDataError("most likely failure needs at least one trial");
    }
    const GridSpec grid(state.space, grid_resolution);
    return most_likely_failure(state.space, grid, surrogate_mean_fn(state.surrogate));
}

FailureReport build_failure_report(const OddSpace& space,
                                   const std::vector<std::size_t>& grid_resolution,
                                   const MeanFn& mean, std::size_t num_evaluations,
                                   std::uint64_t seed) {
    const GridSpec grid(space, grid_resolution);
    FailureReport report;
    report.num_evaluations = num_evaluations;
    report.grid_resolution = grid.resolution();
    if (grid.num_dimensions() <= 3) {
        report.p_fail = integrate_failure_probability(space, grid, mean);
    } else {
        report.p_fail =
            monte_carlo_failure_probability(space, mean, kMonteCarloDraws, derive_seed(seed, 0));
    }
    report.p_fail = std::clamp(report.p_fail, 0.0, 1.0);
    if (grid.num_dimensions() == 2) {
        report.boundary_cells = extract_boundary(space, grid, mean);
    }
    if (grid.num_dimensions() <= 3) {
        report.most_likely_failure = most_likely_failure(space, grid, mean);
    }
    return report;
}

FailureReport estimate_pfail(const BsvState& state,
                             const std::vector<std::size_t>& grid_resolution) {
    if (state.trials.empty()) {
        throw InsufficientDataError("failure probability estimate needs at least one trial");
    }
    return build_failure_report(state.space, grid_resolution,
                                surrogate_mean_fn(state.surrogate), state.trials.size(),
                                state.seed);
}

} // namespace mlcert
