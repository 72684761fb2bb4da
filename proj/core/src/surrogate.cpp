#include "mlcert/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mlcert/error.hpp"

namespace mlcert {

namespace {

constexpr double kMinNoise = 1e-12;
constexpr int kMaxJitterEscalations = 8;

} // namespace

double GpSurrogate::kernel(std::span<const double> a, std::span<const double> b) const {
    double q = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = (a[j] - b[j]) / params_.length_scales[j];
        q += d * d;
    }
    return params_.signal_variance * std::exp(-0.5 * q);
}

std::vector<double> GpSurrogate::normalize(const OddPoint& point) const {
    std::vector<double> x(dimension_names_.size());
    for (std::size_t j = 0; j < dimension_names_.size(); ++j) {
        const double v = point.at(dimension_names_[j]);
        x[j] = (v - lowers_[j]) / (uppers_[j] - lowers_[j]);
    }
    return x;
}

GpSurrogate GpSurrogate::fit(const OddSpace& space, std::span<const OddPoint> points,
                             std::span<const double> outcomes, KernelParams params,
                             double prior_mean) {
    if (points.size() != outcomes.size()) {
        throw FitError("points and outcomes must have the same length");
    }
    GpSurrogate gp;
    for (std::size_t i : space.continuous_indices()) {
        const auto& dim = space.dimensions()[i];
        gp.dimension_names_.push_back(dim.name());
        gp.lowers_.push_back(dim.continuous().lower());
        gp.uppers_.push_back(dim.continuous().upper());
    }
    if (gp.dimension_names_.empty()) {
        throw UnsupportedDimensionError("surrogate needs at least one continuous dimension");
    }
    if (params.length_scales.empty()) {
        params.length_scales.assign(gp.dimension_names_.size(), 0.2);
    }
    if (params.length_scales.size() != gp.dimension_names_.size()) {
        throw FitError("length scale count does not match continuous dimension count");
    }
    for (double l : params.length_scales) {
        if (!(l > 0.0)) {
            throw FitError("length scales must be > 0");
        }
    }
    if (!(params.signal_variance > 0.0)) {
        throw FitError("signal variance must be > 0");
    }
    params.noise = std::max(params.noise, kMinNoise);
    gp.params_ = std::move(params);
    gp.prior_mean_ = prior_mean;

    gp.raw_inputs_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        gp.raw_inputs_.push_back(gp.normalize(points[i]));
        gp.raw_outcomes_.push_back(outcomes[i]);
    }
    gp.factorize();
    return gp;
}

void GpSurrogate::factorize() {
    // Merge bit-identical normalized inputs by averaging their outcomes.
    std::map<std::vector<double>, std::pair<double, std::size_t>> merged;
    std::vector<std::vector<double>> order;
    for (std::size_t i = 0; i < raw_inputs_.size(); ++i) {
        auto [it, inserted] = merged.try_emplace(raw_inputs_[i], std::pair<double, std::size_t>{0.0, 0});
        if (inserted) {
            order.push_back(raw_inputs_[i]);
        }
        it->second.first += raw_outcomes_[i];
        it->second.second += 1;
    }
    train_inputs_.clear();
    train_outputs_.clear();
    for (const auto& key : order) {
        const auto& [sum, count] = merged.at(key);
        train_inputs_.push_back(key);
        train_outputs_.push_back(sum / static_cast<double>(count));
    }

    const auto n = static_cast<Eigen::Index>(train_inputs_.size());
    chol_.clear();
    alpha_.clear();
    effective_noise_ = params_.noise;
    if (n == 0) {
        return;
    }

    Eigen::MatrixXd base(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double k = kernel(train_inputs_[static_cast<std::size_t>(i)],
                                    train_inputs_[static_cast<std::size_t>(j)]);
            base(i, j) = k;
            base(j, i) = k;
        }
    }

    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = params_.noise;
    for (int attempt = 0; attempt <= kMaxJitterEscalations; ++attempt) {
        Eigen::MatrixXd K = base;
        K.diagonal().array() += jitter;
        llt.compute(K);
        if (llt.info() == Eigen::Success) {
            effective_noise_ = jitter;
            break;
        }
        if (attempt == kMaxJitterEscalations) {
            throw FitError("kernel matrix is not positive definite after jitter escalation");
        }
        jitter *= 10.0;
    }

    Eigen::VectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        residual(i) = train_outputs_[static_cast<std::size_t>(i)] - prior_mean_;
    }
    const Eigen::VectorXd alpha = llt.solve(residual);
    const Eigen::MatrixXd L = llt.matrixL();
    alpha_.assign(alpha.data(), alpha.data() + n);
    chol_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            chol_[static_cast<std::size_t>(i * n + j)] = L(i, j);
        }
    }
}

GpSurrogate GpSurrogate::updated(const OddPoint& point, double outcome) const {
    if (!fitted()) {
        throw FitError("cannot update an unfitted surrogate");
    }
    GpSurrogate next = *this;
    next.raw_inputs_.push_back(normalize(point));
    next.raw_outcomes_.push_back(outcome);
    next.factorize();
    return next;
}

GpSurrogate::Prediction GpSurrogate::predict(const OddPoint& point) const {
    return predict_batch(std::span<const OddPoint>(&point, 1)).front();
}

std::vector<GpSurrogate::Prediction> GpSurrogate::predict_batch(
    std::span<const OddPoint> points) const {
    if (!fitted()) {
        throw FitError("surrogate is not fitted");
    }
    const std::size_t n = train_outputs_.size();
    const std::size_t m = points.size();
    std::vector<Prediction> out;
    out.reserve(m);
    if (n == 0) {
        for (std::size_t i = 0; i < m; ++i) {
            out.push_back({std::clamp(prior_mean_, 0.0, 1.0), params_.signal_variance});
        }
        return out;
    }

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        L(chol_.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::Map<const Eigen::VectorXd> alpha(alpha_.data(), static_cast<Eigen::Index>(n));

    Eigen::VectorXd kstar(static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < m; ++p) {
        const std::vector<double> x = normalize(points[p]);
        for (std::size_t i = 0; i < n; ++i) {
            kstar(static_cast<Eigen::Index>(i)) = kernel(x, train_inputs_[i]);
        }
        const double mean_raw = prior_mean_ + kstar.dot(alpha);
        const Eigen::VectorXd v =
            L.triangularView<Eigen::Lower>().solve(kstar);
        const double variance = std::max(0.0, params_.signal_variance - v.squaredNorm());
        out.push_back({std::clamp(mean_raw, 0.0, 1.0), variance});
    }
    return out;
}

nlohmann::json GpSurrogate::to_json() const {
    if (!fitted()) {
        throw FitError("cannot checkpoint an unfitted surrogate");
    }
    nlohmann::json dims = nlohmann::json::array();
    for (std::size_t j = 0; j < dimension_names_.size(); ++j) {
        dims.push_back({{"name", dimension_names_[j]},
                        {"lower", lowers_[j]},
                        {"upper", uppers_[j]}});
    }
    return nlohmann::json{
        {"normalized_inputs", raw_inputs_},
        {"outcomes", raw_outcomes_},
        {"hyperparameters",
         {{"signal_variance", params_.signal_variance},
          {"length_scales", params_.length_scales},
          {"noise", params_.noise}}},
        {"prior_mean", prior_mean_},
        {"dimensions", std::move(dims)},
    };
}

GpSurrogate GpSurrogate::from_json(const nlohmann::json& j) {
    GpSurrogate gp;
    try {
        for (const auto& d : j.at("dimensions")) {
            gp.dimension_names_.push_back(d.at("name").get<std::string>());
            gp.lowers_.push_back(d.at("lower").get<double>());
            gp.uppers_.push_back(d.at("upper").get<double>());
        }
        gp.raw_inputs_ = j.at("normalized_inputs").get<std::vector<std::vector<double>>>();
        gp.raw_outcomes_ = j.at("outcomes").get<std::vector<double>>();
        const auto& hp = j.at("hyperparameters");
        gp.params_.signal_variance = hp.at("signal_variance").get<double>();
        gp.params_.length_scales = hp.at("length_scales").get<std::vector<double>>();
        gp.params_.noise = hp.at("noise").get<double>();
        gp.prior_mean_ = j.at("prior_mean").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed surrogate checkpoint: ") + e.what());
    }
    if (gp.raw_inputs_.size() != gp.raw_outcomes_.size()) {
        throw SchemaError("surrogate checkpoint input/outcome length mismatch");
    }
    for (const auto& x : gp.raw_inputs_) {
        if (x.size() != gp.dimension_names_.size()) {
            throw SchemaError("surrogate checkpoint input dimensionality mismatch");
        }
    }
    gp.factorize();
    return gp;
}

} // namespace mlcert
