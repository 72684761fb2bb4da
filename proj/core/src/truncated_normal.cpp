#include "mlcert/truncated_normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mlcert/error.hpp"
#include "mlcert/rng.hpp"

namespace mlcert {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

// Phi(b) - Phi(a) for a <= b without catastrophic cancellation: when both
// endpoints sit in the same tail the difference is taken between the small
// erfc values instead of between numbers close to 1.
double normal_interval_mass(double a, double b) {
    if (a >= 0.0) {
        return 0.5 * (std::erfc(a * kInvSqrt2) - std::erfc(b * kInvSqrt2));
    }
    if (b <= 0.0) {
        return 0.5 * (std::erfc(-b * kInvSqrt2) - std::erfc(-a * kInvSqrt2));
    }
    return standard_normal_cdf(b) - standard_normal_cdf(a);
}

} // namespace

double standard_normal_pdf(double z) {
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double standard_normal_cdf(double z) {
    return 0.5 * std::erfc(-z * kInvSqrt2);
}

TruncatedNormal::TruncatedNormal(double mu, double sigma, double lower, double upper)
    : mu_(mu), sigma_(sigma), lower_(lower), upper_(upper) {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(lower) ||
        !std::isfinite(upper)) {
        throw DomainError("truncated normal parameters must be finite");
    }
    if (sigma <= 0.0) {
        throw DomainError("truncated normal sigma must be > 0, got " + std::to_string(sigma));
    }
    if (!(lower < upper)) {
        throw DomainError("truncated normal requires lower < upper, got [" +
                          std::to_string(lower) + ", " + std::to_string(upper) + "]");
    }
    const double alpha = (lower_ - mu_) / sigma_;
    const double beta = (upper_ - mu_) / sigma_;
    mass_ = normal_interval_mass(alpha, beta);
    if (!(mass_ > 0.0)) {
        throw DomainError("truncation interval carries no probability mass");
    }
}

double TruncatedNormal::pdf(double x) const {
    if (!std::isfinite(x)) {
        throw DomainError("pdf argument must be finite");
    }
    if (x < lower_ || x > upper_) {
        return 0.0;
    }
    return standard_normal_pdf((x - mu_) / sigma_) / (sigma_ * mass_);
}

double TruncatedNormal::cdf(double x) const {
    if (!std::isfinite(x)) {
        throw DomainError("cdf argument must be finite");
    }
    if (x <= lower_) {
        return 0.0;
    }
    if (x >= upper_) {
        return 1.0;
    }
    const double alpha = (lower_ - mu_) / sigma_;
    const double z = (x - mu_) / sigma_;
    const double c = normal_interval_mass(alpha, z) / mass_;
    return std::clamp(c, 0.0, 1.0);
}

double TruncatedNormal::quantile(double u) const {
    if (!std::isfinite(u) || u < 0.0 || u > 1.0) {
        throw DomainError("quantile argument must lie in [0, 1]");
    }
    if (u == 0.0) {
        return lower_;
    }
    if (u == 1.0) {
        return upper_;
    }

    double lo = lower_;
    double hi = upper_;
    // Start from the linear interpolant; Newton converges in a handful of
    // steps anywhere the density is not vanishing.
    double x = lower_ + u * (upper_ - lower_);
    constexpr int kMaxIterations = 200;
    constexpr double kTolerance = 1e-12;
    for (int i = 0; i < kMaxIterations; ++i) {
        const double f = cdf(x) - u;
        if (std::abs(f) <= kTolerance) {
            return x;
        }
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        const double d = pdf(x);
        double next = (d > 0.0) ? x - f / d : x;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi); // Newton left the bracket; bisect
        }
        if (next == x || hi - lo <= std::numeric_limits<double>::epsilon() *
                                        std::max(1.0, std::abs(x))) {
            return next;
        }
        x = next;
    }
    return x;
}

std::vector<double> TruncatedNormal::sample(std::size_t n, std::uint64_t seed) const {
    std::vector<double> out;
    out.reserve(n);
    UniformSource rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(quantile(rng.next_unit()));
    }
    return out;
}

double TruncatedNormal::mean() const {
    const double alpha = (lower_ - mu_) / sigma_;
    const double beta = (upper_ - mu_) / sigma_;
    const double num = standard_normal_pdf(alpha) - standard_normal_pdf(beta);
    return mu_ + sigma_ * num / mass_;
}

double TruncatedNormal::variance() const {
    const double alpha = (lower_ - mu_) / sigma_;
    const double beta = (upper_ - mu_) / sigma_;
    const double pa = standard_normal_pdf(alpha);
    const double pb = standard_normal_pdf(beta);
    const double term1 = (alpha * pa - beta * pb) / mass_;
    const double term2 = (pa - pb) / mass_;
    return sigma_ * sigma_ * (1.0 + term1 - term2 * term2);
}

} // namespace mlcert
