#pragma once

#include <cstdint>
#include <vector>

namespace mlcert {

double standard_normal_pdf(double z);

// Phi(z) computed through erfc so both tails keep full relative precision.
double standard_normal_cdf(double z);

// Normal distribution truncated to [lower, upper]. Density integrates to 1
// over the interval and is exactly 0 outside it. Immutable after
// construction.
class TruncatedNormal {
public:
    TruncatedNormal(double mu, double sigma, double lower, double upper);

    double mu() const { return mu_; }
    double sigma() const { return sigma_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }

    double pdf(double x) const;

    // 0 at lower, 1 at upper, strictly increasing in between.
    double cdf(double x) const;

    // Inverse cdf. Bracketed Newton iteration, |cdf(x) - u| <= 1e-12 where
    // the density allows it, bisection fallback in the far tails.
    double quantile(double u) const;

    // Inverse-CDF sampling; bit-reproducible for a given seed.
    std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

    // Closed-form moments of the truncated distribution.
    double mean() const;
    double variance() const;

    // Probability mass the parent normal assigns to [lower, upper].
    double truncation_mass() const { return mass_; }

private:
    double mu_;
    double sigma_;
    double lower_;
    double upper_;
    double mass_; // Phi(beta) - Phi(alpha), cached
};

} // namespace mlcert
