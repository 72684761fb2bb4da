#pragma once

#include <utility>

#include "mlcert/odd.hpp"

namespace mlcert {

// Synthetic stand-in for a vision-based-landing runway detector. Failures
// occur beyond a glideslope-dependent distance threshold, giving an analytic
// failure boundary that tests and demos can check against.
struct SyntheticVblConfig {
    double base_distance_nm = 2.5;    // failure threshold at the reference glideslope
    double curvature_per_deg2 = 0.2;  // how fast the threshold shrinks off-reference
    double ref_glideslope_deg = 3.0;
};

// Dimension names the oracle reads from the evaluation point.
inline constexpr const char* kGlideslopeDimension = "glideslope_deg";
inline constexpr const char* kDistanceDimension = "distance_nm";

// Distance threshold at a given glideslope: failures happen strictly beyond it.
double synthetic_vbl_threshold(double glideslope_deg, const SyntheticVblConfig& config = {});

// failure iff distance > threshold(glideslope); severity is the signed
// distance to the failure boundary. Deterministic and noise-free.
std::pair<bool, double> synthetic_vbl(const OddPoint& point,
                                      const SyntheticVblConfig& config = {});

} // namespace mlcert
