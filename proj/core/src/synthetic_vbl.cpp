#include "mlcert/synthetic_vbl.hpp"

#include "mlcert/error.hpp"

namespace mlcert {

double synthetic_vbl_threshold(double glideslope_deg, const SyntheticVblConfig& config) {
    const double offset = glideslope_deg - config.ref_glideslope_deg;
    return config.base_distance_nm - config.curvature_per_deg2 * offset * offset;
}

std::pair<bool, double> synthetic_vbl(const OddPoint& point, const SyntheticVblConfig& config) {
    const double glideslope = point.at(kGlideslopeDimension);
    const double distance = point.at(kDistanceDimension);
    const double threshold = synthetic_vbl_threshold(glideslope, config);
    const double severity = distance - threshold;
    return {severity > 0.0, severity};
}

} // namespace mlcert
