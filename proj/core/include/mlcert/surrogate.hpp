#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mlcert/odd.hpp"

namespace mlcert {

// Squared-exponential kernel hyperparameters. Length scales are expressed in
// normalized coordinates (each continuous dimension mapped to [0, 1] by its
// truncation interval).
struct KernelParams {
    double signal_variance = 0.25;
    std::vector<double> length_scales; // empty -> 0.2 per dimension
    double noise = 1e-6;               // floored at 1e-12
};

// Gaussian-process regression over ODD points with binary failure outcomes.
// Posterior mean is clamped to [0, 1] so it reads as a failure probability.
// A fitted surrogate is immutable; updates produce a new value.
class GpSurrogate {
public:
    struct Prediction {
        double mean;
        double variance;
    };

    GpSurrogate() = default;

    // Duplicate inputs (identical normalized coordinates) are merged by
    // averaging their outcomes to keep the kernel matrix nonsingular.
    static GpSurrogate fit(const OddSpace& space, std::span<const OddPoint> points,
                           std::span<const double> outcomes, KernelParams params = {},
                           double prior_mean = 0.5);

    // Refit on the training set extended by one observation.
    GpSurrogate updated(const OddPoint& point, double outcome) const;

    Prediction predict(const OddPoint& point) const;
    std::vector<Prediction> predict_batch(std::span<const OddPoint> points) const;

    bool fitted() const { return !dimension_names_.empty(); }
    std::size_t num_observations() const { return raw_outcomes_.size(); }
    std::size_t num_training_points() const { return train_outputs_.size(); }
    double prior_mean() const { return prior_mean_; }
    const KernelParams& params() const { return params_; }
    const std::vector<std::string>& dimension_names() const { return dimension_names_; }

    // Checkpoint: normalized inputs, outcomes, hyperparameters, prior mean,
    // and the normalization intervals. The factorization is recomputed on
    // load, so checkpoints round-trip exactly.
    nlohmann::json to_json() const;
    static GpSurrogate from_json(const nlohmann::json& j);

private:
    std::vector<double> normalize(const OddPoint& point) const;
    void factorize();
    double kernel(std::span<const double> a, std::span<const double> b) const;

    // Normalization transform (continuous dimensions of the fitting space).
    std::vector<std::string> dimension_names_;
    std::vector<double> lowers_;
    std::vector<double> uppers_;

    // Raw observations in normalized coordinates, kept so updates can refit.
    std::vector<std::vector<double>> raw_inputs_;
    std::vector<double> raw_outcomes_;

    // Merged training set and cached factorization.
    std::vector<std::vector<double>> train_inputs_;
    std::vector<double> train_outputs_;
    std::vector<double> chol_;  // row-major lower-triangular factor of K + noise I
    std::vector<double> alpha_; // (K + noise I)^-1 (y - prior)
    double effective_noise_ = 0.0;

    KernelParams params_;
    double prior_mean_ = 0.5;
};

} // namespace mlcert
