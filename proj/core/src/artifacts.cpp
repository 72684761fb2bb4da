#include "mlcert/artifacts.hpp"

#include <charconv>
#include <ostream>

#include <nlohmann/json.hpp>

#include "mlcert/error.hpp"

namespace mlcert {

std::string format_double(double value) {
    char buffer[32];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) {
        throw DomainError("failed to format double");
    }
    return std::string(buffer, ptr);
}

nlohmann::json trial_to_json(const Trial& trial) {
    nlohmann::json j{{"point", odd_point_to_json(trial.point)},
                     {"failure", trial.failure},
                     {"iteration", trial.iteration}};
    if (trial.severity) {
        j["severity"] = *trial.severity;
    }
    return j;
}

Trial trial_from_json(const nlohmann::json& j) {
    Trial trial;
    trial.point = odd_point_from_json(j.at("point"));
    trial.failure = j.at("failure").get<bool>();
    trial.iteration = j.at("iteration").get<std::size_t>();
    if (j.contains("severity")) {
        trial.severity = j["severity"].get<double>();
    }
    return trial;
}

nlohmann::json run_artifact_json(const BsvState& state, const FailureReport& report,
                                 const nlohmann::json& resolved_config,
                                 const std::optional<VerificationVerdict>& verdict) {
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& trial : state.trials) {
        trials.push_back(trial_to_json(trial));
    }
    nlohmann::json j{{"config", resolved_config},
                     {"seed", state.seed},
                     {"iterations", state.iteration},
                     {"trials", std::move(trials)},
                     {"surrogate",
                      {{"signal_variance", state.surrogate.params().signal_variance},
                       {"length_scales", state.surrogate.params().length_scales},
                       {"noise", state.surrogate.params().noise},
                       {"prior_mean", state.surrogate.prior_mean()}}},
                     {"report", failure_report_to_json(report)}};
    if (verdict) {
        j["verdict"] = verdict->to_json();
    }
    return j;
}

BsvState state_from_run_artifact(const nlohmann::json& artifact) {
    const auto& config = artifact.at("config");
    OddSpace space = odd_space_from_json(config.at("odd"));

    std::vector<Trial> trials;
    std::vector<OddPoint> points;
    std::vector<double> outcomes;
    for (const auto& t : artifact.at("trials")) {
        Trial trial = trial_from_json(t);
        points.push_back(trial.point);
        outcomes.push_back(trial.failure ? 1.0 : 0.0);
        trials.push_back(std::move(trial));
    }

    KernelParams params;
    double prior_mean = 0.5;
    if (artifact.contains("surrogate")) {
        const auto& s = artifact["surrogate"];
        params.signal_variance = s.value("signal_variance", params.signal_variance);
        params.length_scales = s.value("length_scales", params.length_scales);
        params.noise = s.value("noise", params.noise);
        prior_mean = s.value("prior_mean", prior_mean);
    }

    std::size_t iteration = 0;
    for (const auto& trial : trials) {
        iteration = std::max(iteration, trial.iteration);
    }

    BsvState state{std::move(space), GpSurrogate(), std::move(trials), iteration,
                   artifact.value("seed", std::uint64_t{0})};
    state.surrogate = GpSurrogate::fit(state.space, points, outcomes, params, prior_mean);
    return state;
}

void write_grid_csv(std::ostream& out, const OddSpace& space, const GridSpec& grid,
                    const GpSurrogate& surrogate) {
    (void)space;
    for (std::size_t d = 0; d < grid.num_dimensions(); ++d) {
        out << grid.dimension_names()[d] << ',';
    }
    out << "mean,variance\n";
    const auto centers = grid.centers();
    const auto predictions = surrogate.predict_batch(centers);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const auto multi = grid.multi_index(i);
        for (std::size_t d = 0; d < grid.num_dimensions(); ++d) {
            out << format_double(grid.coordinate(d, multi[d])) << ',';
        }
        out << format_double(predictions[i].mean) << ',' << format_double(predictions[i].variance)
            << '\n';
    }
}

void write_heatmap_pgm(std::ostream& out, const GridSpec& grid, const GpSurrogate& surrogate) {
    if (grid.num_dimensions() != 2) {
        throw UnsupportedDimensionError("heatmap output needs a 2-D grid");
    }
    const std::size_t nx = grid.resolution()[0];
    const std::size_t ny = grid.resolution()[1];
    const auto predictions = surrogate.predict_batch(grid.centers());
    out << "P5\n" << nx << ' ' << ny << "\n255\n";
    for (std::size_t row = 0; row < ny; ++row) {
        const std::size_t iy = ny - 1 - row; // bottom-left origin
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double mu = predictions[ix * ny + iy].mean;
            const auto value = static_cast<unsigned char>(mu * 255.0 + 0.5);
            out.put(static_cast<char>(value));
        }
    }
}

} // namespace mlcert
