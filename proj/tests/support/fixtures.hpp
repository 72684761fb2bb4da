#pragma once

#include "mlcert/odd.hpp"
#include "mlcert/synthetic_vbl.hpp"

namespace fixtures {

// The two-dimensional glideslope/distance operational domain used across
// the suite: alpha ~ N(3, 0.3, [1, 7]) degrees, d ~ N(0, 1.5, [0, 4]) nm.
inline mlcert::OddSpace vbl_space() {
    std::vector<mlcert::OddDimension> dims;
    dims.emplace_back(mlcert::kGlideslopeDimension, "degrees",
                      mlcert::TruncatedNormal(3.0, 0.3, 1.0, 7.0));
    dims.emplace_back(mlcert::kDistanceDimension, "nautical miles",
                      mlcert::TruncatedNormal(0.0, 1.5, 0.0, 4.0));
    return mlcert::OddSpace(std::move(dims), "approach");
}

inline mlcert::OddPoint vbl_point(double glideslope_deg, double distance_nm) {
    mlcert::OddPoint p;
    p.set(mlcert::kGlideslopeDimension, glideslope_deg);
    p.set(mlcert::kDistanceDimension, distance_nm);
    return p;
}

} // namespace fixtures
