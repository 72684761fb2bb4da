#include "mlcert/requirements.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "mlcert/digest.hpp"
#include "mlcert/error.hpp"

namespace mlcert {

std::string to_string(SeverityClass severity) {
    switch (severity) {
    case SeverityClass::kCatastrophic:
        return "catastrophic";
    case SeverityClass::kHazardous:
        return "hazardous";
    case SeverityClass::kMajor:
        return "major";
    case SeverityClass::kMinor:
        return "minor";
    case SeverityClass::kNoEffect:
        return "no-effect";
    }
    return "major";
}

SeverityClass severity_class_from_string(const std::string& s) {
    if (s == "catastrophic") {
        return SeverityClass::kCatastrophic;
    }
    if (s == "hazardous") {
        return SeverityClass::kHazardous;
    }
    if (s == "major") {
        return SeverityClass::kMajor;
    }
    if (s == "minor") {
        return SeverityClass::kMinor;
    }
    if (s == "no-effect") {
        return SeverityClass::kNoEffect;
    }
    throw SchemaError("unknown severity class '" + s + "'");
}

std::string to_string(Dal dal) {
    switch (dal) {
    case Dal::kA:
        return "A";
    case Dal::kB:
        return "B";
    case Dal::kC:
        return "C";
    case Dal::kD:
        return "D";
    case Dal::kE:
        return "E";
    }
    return "C";
}

Dal dal_from_string(const std::string& s) {
    if (s == "A") {
        return Dal::kA;
    }
    if (s == "B") {
        return Dal::kB;
    }
    if (s == "C") {
        return Dal::kC;
    }
    if (s == "D") {
        return Dal::kD;
    }
    if (s == "E") {
        return Dal::kE;
    }
    throw SchemaError("unknown DAL '" + s + "'");
}

DalTable DalTable::builtin() {
    DalTable table;
    table.set(Dal::kC, "per approach", 1e-4);
    return table;
}

void DalTable::set(Dal dal, const std::string& exposure, double requirement) {
    if (!(requirement > 0.0 && requirement < 1.0)) {
        throw ConfigError("failure-probability requirement must lie in (0, 1)");
    }
    entries_[{dal, exposure}] = requirement;
}

double DalTable::threshold(Dal dal, const std::string& exposure) const {
    auto it = entries_.find({dal, exposure});
    if (it == entries_.end()) {
        throw ConfigError("no requirement configured for DAL " + to_string(dal) +
                          " with exposure '" + exposure + "'");
    }
    return it->second;
}

bool DalTable::contains(Dal dal, const std::string& exposure) const {
    return entries_.count({dal, exposure}) > 0;
}

nlohmann::json DalTable::to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [key, value] : entries_) {
        entries.push_back({{"dal", to_string(key.first)},
                           {"exposure", key.second},
                           {"p_fail", value}});
    }
    return {{"entries", std::move(entries)}};
}

DalTable DalTable::from_json(const nlohmann::json& j) {
    DalTable table;
    for (const auto& entry : j.at("entries")) {
        table.set(dal_from_string(entry.at("dal").get<std::string>()),
                  entry.at("exposure").get<std::string>(), entry.at("p_fail").get<double>());
    }
    return table;
}

double dal_threshold(const DalTable& table, Dal dal, const std::string& exposure) {
    return table.threshold(dal, exposure);
}

nlohmann::json HazardAssessment::to_json() const {
    return {{"function_name", function_name},
            {"severity_class", to_string(severity_class)},
            {"dal", to_string(dal)},
            {"p_fail_requirement", p_fail_requirement},
            {"exposure", exposure}};
}

HazardAssessment HazardAssessment::from_json(const nlohmann::json& j, const DalTable& table) {
    HazardAssessment a;
    a.function_name = j.at("function_name").get<std::string>();
    a.severity_class = severity_class_from_string(j.at("severity_class").get<std::string>());
    a.dal = dal_from_string(j.at("dal").get<std::string>());
    a.exposure = j.value("exposure", std::string("per approach"));
    if (j.contains("p_fail_requirement")) {
        a.p_fail_requirement = j["p_fail_requirement"].get<double>();
    } else {
        a.p_fail_requirement = table.threshold(a.dal, a.exposure);
    }
    if (!(a.p_fail_requirement > 0.0 && a.p_fail_requirement < 1.0)) {
        throw ConfigError("assessment requirement must lie in (0, 1)");
    }
    return a;
}

nlohmann::json VerificationVerdict::to_json() const {
    return {{"pass", pass},
            {"estimated", estimated},
            {"required", required},
            {"margin", margin},
            {"provenance", provenance}};
}

nlohmann::json failure_report_to_json(const FailureReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : report.boundary_cells) {
        cells.push_back({{"index", cell.index}, {"lower", cell.lower}, {"upper", cell.upper}});
    }
    nlohmann::json j{{"p_fail", report.p_fail},
                     {"num_evaluations", report.num_evaluations},
                     {"grid_resolution", report.grid_resolution},
                     {"boundary_cells", std::move(cells)}};
    if (report.most_likely_failure) {
        j["most_likely_failure"] = {
            {"point", odd_point_to_json(report.most_likely_failure->point)},
            {"odd_density", report.most_likely_failure->odd_density},
            {"mean", report.most_likely_failure->mean}};
    }
    return j;
}

FailureReport failure_report_from_json(const nlohmann::json& j) {
    FailureReport report;
    report.p_fail = j.at("p_fail").get<double>();
    report.num_evaluations = j.at("num_evaluations").get<std::size_t>();
    report.grid_resolution = j.value("grid_resolution", std::vector<std::size_t>{});
    if (j.contains("boundary_cells")) {
        for (const auto& c : j["boundary_cells"]) {
            GridCell cell;
            cell.index = c.at("index").get<std::vector<std::size_t>>();
            cell.lower = c.at("lower").get<std::vector<double>>();
            cell.upper = c.at("upper").get<std::vector<double>>();
            report.boundary_cells.push_back(std::move(cell));
        }
    }
    if (j.contains("most_likely_failure")) {
        const auto& m = j["most_likely_failure"];
        report.most_likely_failure = MostLikelyFailure{
            odd_point_from_json(m.at("point")), m.at("odd_density").get<double>(),
            m.at("mean").get<double>()};
    }
    return report;
}

VerificationVerdict verify_requirement(const FailureReport& report,
                                       const HazardAssessment& assessment) {
    if (!(report.p_fail >= 0.0 && report.p_fail <= 1.0)) {
        throw DomainError("report p_fail must lie in [0, 1]");
    }
    VerificationVerdict verdict;
    verdict.estimated = report.p_fail;
    verdict.required = assessment.p_fail_requirement;
    verdict.pass = report.p_fail <= assessment.p_fail_requirement;
    verdict.margin = report.p_fail / assessment.p_fail_requirement;
    verdict.provenance = sha256_hex(failure_report_to_json(report).dump());
    return verdict;
}

std::optional<RestrictionRecommendation> recommend_restriction(
    const BsvState& state, const HazardAssessment& assessment, std::string_view dimension,
    const std::vector<std::size_t>& grid_resolution) {
    const std::size_t n_continuous = state.space.num_continuous();
    if (n_continuous < 1 || n_continuous > 2) {
        throw UnsupportedDimensionError(
            "restriction search supports 1 or 2 continuous dimensions");
    }
    const auto& dim = state.space.dimension(dimension);
    if (!dim.is_continuous()) {
        throw InvalidRestrictionError("cannot interval-restrict a categorical dimension");
    }
    const double lower = dim.continuous().lower();
    const double upper = dim.continuous().upper();

    std::size_t dim_resolution = 0;
    {
        const GridSpec grid(state.space, grid_resolution);
        for (std::size_t d = 0; d < grid.num_dimensions(); ++d) {
            if (grid.dimension_names()[d] == dimension) {
                dim_resolution = grid.resolution()[d];
            }
        }
    }
    const double width = (upper - lower) / static_cast<double>(dim_resolution);
    const MeanFn mean = surrogate_mean_fn(state.surrogate);

    // Cutoff candidates are cell edges, scanned from the identity interval
    // downward so the first feasible cutoff is the least restrictive one.
    for (std::size_t k = dim_resolution; k >= 1; --k) {
        const double cutoff = (k == dim_resolution)
                                  ? upper
                                  : lower + static_cast<double>(k) * width;
        const OddSpace restricted = state.space.restricted(dimension, lower, cutoff);
        const GridSpec grid(restricted, grid_resolution);
        const double projected = integrate_failure_probability(restricted, grid, mean);
        if (projected <= assessment.p_fail_requirement) {
            return RestrictionRecommendation{std::string(dimension), lower, cutoff, projected};
        }
    }
    return std::nullopt;
}

} // namespace mlcert
