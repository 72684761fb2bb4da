#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

double simpson(const std::function<double(double)>& f, double a, double b,
               std::size_t intervals) {
    if (intervals % 2 == 1) {
        ++intervals;
    }
    const double h = (b - a) / static_cast<double>(intervals);
    double total = f(a) + f(b);
    for (std::size_t i = 1; i < intervals; ++i) {
        const double x = a + h * static_cast<double>(i);
        total += f(x) * ((i % 2 == 1) ? 4.0 : 2.0);
    }
    return total * h / 3.0;
}

namespace {

double phi(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double Phi(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

} // namespace

TruncatedMoments truncated_normal_moments(double mu, double sigma, double lower, double upper) {
    const double a = (lower - mu) / sigma;
    const double b = (upper - mu) / sigma;
    const double z = Phi(b) - Phi(a);
    const double mean = mu + sigma * (phi(a) - phi(b)) / z;
    const double t1 = (a * phi(a) - b * phi(b)) / z;
    const double t2 = (phi(a) - phi(b)) / z;
    const double variance = sigma * sigma * (1.0 + t1 - t2 * t2);
    return {mean, variance};
}

std::vector<double> rejection_sample(double mu, double sigma, double lower, double upper,
                                     std::size_t n, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(mu, sigma);
    std::vector<double> out;
    out.reserve(n);
    while (out.size() < n) {
        const double x = normal(engine);
        if (x >= lower && x <= upper) {
            out.push_back(x);
        }
    }
    return out;
}

namespace {

double sq_exp_kernel(const std::vector<double>& a, const std::vector<double>& b,
                     double signal_variance, const std::vector<double>& length_scales) {
    double q = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = (a[j] - b[j]) / length_scales[j];
        q += d * d;
    }
    return signal_variance * std::exp(-0.5 * q);
}

// Solve A x = rhs by Gaussian elimination with partial pivoting.
std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::abs(A[row][col]) > std::abs(A[pivot][col])) {
                pivot = row;
            }
        }
        std::swap(A[col], A[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        if (A[col][col] == 0.0) {
            throw std::runtime_error("singular system in oracle solve");
        }
        for (std::size_t row = col + 1; row < n; ++row) {
            const double factor = A[row][col] / A[col][col];
            for (std::size_t k = col; k < n; ++k) {
                A[row][k] -= factor * A[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t row = n; row-- > 0;) {
        double sum = rhs[row];
        for (std::size_t k = row + 1; k < n; ++k) {
            sum -= A[row][k] * x[k];
        }
        x[row] = sum / A[row][row];
    }
    return x;
}

} // namespace

GpOracleResult gp_posterior(const std::vector<std::vector<double>>& inputs,
                            const std::vector<double>& outputs, double signal_variance,
                            const std::vector<double>& length_scales, double noise,
                            double prior_mean, const std::vector<double>& query) {
    const std::size_t n = inputs.size();
    if (n == 0) {
        return {prior_mean, signal_variance};
    }
    std::vector<std::vector<double>> K(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            K[i][j] = sq_exp_kernel(inputs[i], inputs[j], signal_variance, length_scales);
        }
        K[i][i] += noise;
    }
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) {
        residual[i] = outputs[i] - prior_mean;
    }
    std::vector<double> kstar(n);
    for (std::size_t i = 0; i < n; ++i) {
        kstar[i] = sq_exp_kernel(inputs[i], query, signal_variance, length_scales);
    }
    const std::vector<double> alpha = solve_dense(K, residual);
    const std::vector<double> beta = solve_dense(K, kstar);
    double mean = prior_mean;
    double reduction = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += kstar[i] * alpha[i];
        reduction += kstar[i] * beta[i];
    }
    return {mean, std::max(0.0, signal_variance - reduction)};
}

double average_precision_bruteforce(const std::vector<mlcert::ImageSample>& samples,
                                    mlcert::SimilarityKind kind,
                                    const mlcert::ApConfig& config) {
    using mlcert::Detection;
    using mlcert::GroundTruthAnnotation;

    std::size_t total_gt = 0;
    for (const auto& s : samples) {
        total_gt += s.ground_truths.size();
    }

    auto sim = [&](const Detection& d, const GroundTruthAnnotation& g) {
        if (kind == mlcert::SimilarityKind::kIoU) {
            return mlcert::iou(d.box, g.box);
        }
        bool visible = false;
        for (const auto& kp : g.keypoints) {
            visible = visible || kp.visibility > 0;
        }
        return visible ? mlcert::oks(d, g, config.oks_k) : 0.0;
    };

    double ap_sum = 0.0;
    for (double threshold : config.thresholds) {
        // (confidence, image, tp) for every surviving detection.
        struct Entry {
            double confidence;
            bool tp;
        };
        std::vector<Entry> entries;
        for (const auto& sample : samples) {
            // gate, order by confidence (stable), cap
            std::vector<std::size_t> order;
            for (std::size_t i = 0; i < sample.detections.size(); ++i) {
                if (sample.detections[i].confidence >= config.confidence_floor) {
                    order.push_back(i);
                }
            }
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return sample.detections[a].confidence > sample.detections[b].confidence;
            });
            if (order.size() > config.max_detections) {
                order.resize(config.max_detections);
            }
            std::vector<bool> used(sample.ground_truths.size(), false);
            for (std::size_t i : order) {
                double best = -1.0;
                std::ptrdiff_t pick = -1;
                for (std::size_t g = 0; g < sample.ground_truths.size(); ++g) {
                    if (used[g]) {
                        continue;
                    }
                    const double s = sim(sample.detections[i], sample.ground_truths[g]);
                    if (s >= threshold && s > best) {
                        best = s;
                        pick = static_cast<std::ptrdiff_t>(g);
                    }
                }
                if (pick >= 0) {
                    used[static_cast<std::size_t>(pick)] = true;
                }
                entries.push_back({sample.detections[i].confidence, pick >= 0});
            }
        }
        std::stable_sort(entries.begin(), entries.end(),
                         [](const Entry& a, const Entry& b) { return a.confidence > b.confidence; });

        if (total_gt == 0) {
            continue; // AP(t) = 0
        }
        double ap_t = 0.0;
        for (int r = 0; r <= 100; ++r) {
            const double target = static_cast<double>(r) / 100.0;
            double best_precision = 0.0;
            double tp = 0.0;
            double seen = 0.0;
            for (const auto& e : entries) {
                seen += 1.0;
                if (e.tp) {
                    tp += 1.0;
                }
                const double recall = tp / static_cast<double>(total_gt);
                if (recall >= target) {
                    best_precision = std::max(best_precision, tp / seen);
                }
            }
            ap_t += best_precision / 101.0;
        }
        ap_sum += ap_t;
    }
    return ap_sum / static_cast<double>(config.thresholds.size());
}

double mc_failure_probability_2d(double mu1, double sigma1, double lo1, double hi1,
                                 double mu2, double sigma2, double lo2, double hi2,
                                 const std::function<bool(double, double)>& fails,
                                 std::size_t draws, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> n1(mu1, sigma1);
    std::normal_distribution<double> n2(mu2, sigma2);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        double x1 = n1(engine);
        while (x1 < lo1 || x1 > hi1) {
            x1 = n1(engine);
        }
        double x2 = n2(engine);
        while (x2 < lo2 || x2 > hi2) {
            x2 = n2(engine);
        }
        if (fails(x1, x2)) {
            ++failures;
        }
    }
    return static_cast<double>(failures) / static_cast<double>(draws);
}

} // namespace oracle
