#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "mlcert/bsv.hpp"

namespace mlcert {

enum class SeverityClass { kCatastrophic, kHazardous, kMajor, kMinor, kNoEffect };
enum class Dal { kA, kB, kC, kD, kE };

std::string to_string(SeverityClass severity);
SeverityClass severity_class_from_string(const std::string& s);
std::string to_string(Dal dal);
Dal dal_from_string(const std::string& s);

// Configurable (DAL, exposure) -> failure-probability requirement table.
// Ships with the single built-in entry (C, "per approach") -> 1e-4; every
// other pairing must come from user configuration.
class DalTable {
public:
    static DalTable builtin();

    void set(Dal dal, const std::string& exposure, double requirement);
    double threshold(Dal dal, const std::string& exposure) const; // throws ConfigError
    bool contains(Dal dal, const std::string& exposure) const;

    nlohmann::json to_json() const;
    static DalTable from_json(const nlohmann::json& j);

private:
    std::map<std::pair<Dal, std::string>, double> entries_;
};

double dal_threshold(const DalTable& table, Dal dal, const std::string& exposure);

// Hazard-analysis outcome for one function: its assurance level and the
// failure-probability budget it must meet.
struct HazardAssessment {
    std::string function_name;
    SeverityClass severity_class = SeverityClass::kMajor;
    Dal dal = Dal::kC;
    double p_fail_requirement = 0.0; // in (0, 1)
    std::string exposure = "per approach";

    nlohmann::json to_json() const;
    // Resolves a missing p_fail_requirement from the table.
    static HazardAssessment from_json(const nlohmann::json& j, const DalTable& table);
};

struct VerificationVerdict {
    bool pass = false;
    double estimated = 0.0;
    double required = 0.0;
    double margin = 0.0;     // estimated / required
    std::string provenance;  // digest of the serialized failure report

    nlohmann::json to_json() const;
};

nlohmann::json failure_report_to_json(const FailureReport& report);
FailureReport failure_report_from_json(const nlohmann::json& j);

// Pass iff estimated <= required (inclusive). The provenance digest covers
// the canonical serialization of the report.
VerificationVerdict verify_requirement(const FailureReport& report,
                                       const HazardAssessment& assessment);

struct RestrictionRecommendation {
    std::string dimension;
    double lower = 0.0;
    double upper = 0.0;
    double projected_p_fail = 0.0;
};

// Scans upper cutoffs (grid cell edges) on the named dimension and returns
// the least restrictive one whose projected failure probability meets the
// requirement, or nullopt when no cutoff does. The projected value is the
// quadrature estimate on the restricted space with the existing surrogate.
std::optional<RestrictionRecommendation> recommend_restriction(
    const BsvState& state, const HazardAssessment& assessment, std::string_view dimension,
    const std::vector<std::size_t>& grid_resolution);

} // namespace mlcert
