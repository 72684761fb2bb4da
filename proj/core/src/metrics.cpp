#include "mlcert/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mlcert/error.hpp"
#include "mlcert/grid.hpp"

namespace mlcert {

void BoundingBox::validate() const {
    if (!(x_min < x_max) || !(y_min < y_max)) {
        throw DomainError("bounding box must satisfy x_min < x_max and y_min < y_max");
    }
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    a.validate();
    b.validate();
    const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0.0 || iy <= 0.0) {
        return 0.0;
    }
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

double oks(const Detection& detection, const GroundTruthAnnotation& gt,
           std::span<const double> k_constants) {
    if (k_constants.size() != gt.keypoints.size()) {
        throw SchemaError("need one OKS constant per keypoint");
    }
    double total = 0.0;
    std::size_t visible = 0;
    for (std::size_t i = 0; i < gt.keypoints.size(); ++i) {
        if (gt.keypoints[i].visibility <= 0) {
            continue;
        }
        const double dx = detection.keypoints[i].x - gt.keypoints[i].x;
        const double dy = detection.keypoints[i].y - gt.keypoints[i].y;
        const double d2 = dx * dx + dy * dy;
        const double scale = 2.0 * gt.area * k_constants[i] * k_constants[i];
        total += std::exp(-d2 / scale);
        ++visible;
    }
    if (visible == 0) {
        throw UndefinedMetricError("OKS undefined: ground truth has no visible keypoints");
    }
    return total / static_cast<double>(visible);
}

ApConfig ApConfig::for_kind(SimilarityKind kind) {
    ApConfig config;
    config.max_detections = (kind == SimilarityKind::kIoU) ? 100 : 20;
    return config;
}

namespace {

double similarity(SimilarityKind kind, const Detection& det, const GroundTruthAnnotation& gt,
                  const ApConfig& config) {
    if (kind == SimilarityKind::kIoU) {
        return iou(det.box, gt.box);
    }
    bool any_visible = false;
    for (const auto& kp : gt.keypoints) {
        any_visible = any_visible || kp.visibility > 0;
    }
    if (!any_visible) {
        return 0.0; // unmatched rather than undefined inside AP
    }
    return oks(det, gt, config.oks_k);
}

// Area under the precision-recall curve with precision interpolated at 101
// evenly spaced recall points.
double interpolated_ap(const std::vector<double>& precision, const std::vector<double>& recall) {
    double total = 0.0;
    for (int r = 0; r <= 100; ++r) {
        const double target = static_cast<double>(r) / 100.0;
        double best = 0.0;
        for (std::size_t i = 0; i < recall.size(); ++i) {
            if (recall[i] >= target) {
                best = std::max(best, precision[i]);
            }
        }
        total += best;
    }
    return total / 101.0;
}

} // namespace

ApResult average_precision(std::span<const ImageSample> samples, SimilarityKind kind,
                           const ApConfig& config) {
    std::size_t total_gt = 0;
    std::size_t total_detections = 0;
    for (const auto& sample : samples) {
        total_gt += sample.ground_truths.size();
        total_detections += sample.detections.size();
    }
    if (total_gt == 0 && total_detections == 0) {
        throw UndefinedMetricError("average precision undefined: no detections and no ground truth");
    }

    // Confidence gate, then per-image confidence ordering (stable on input
    // index), then the per-image detection cap.
    struct Kept {
        const Detection* det;
        std::size_t image;
    };
    std::vector<std::vector<Kept>> kept(samples.size());
    for (std::size_t img = 0; img < samples.size(); ++img) {
        std::vector<Kept> list;
        for (const auto& det : samples[img].detections) {
            if (det.confidence >= config.confidence_floor) {
                list.push_back({&det, img});
            }
        }
        std::stable_sort(list.begin(), list.end(), [](const Kept& a, const Kept& b) {
            return a.det->confidence > b.det->confidence;
        });
        if (list.size() > config.max_detections) {
            list.resize(config.max_detections);
        }
        kept[img] = std::move(list);
    }

    ApResult result;
    double sum = 0.0;
    for (double threshold : config.thresholds) {
        // Greedy one-to-one matching per image: in confidence order each
        // detection claims the unmatched ground truth with the best
        // similarity meeting the threshold.
        std::vector<Kept> flat;
        std::vector<char> is_tp;
        for (std::size_t img = 0; img < samples.size(); ++img) {
            const auto& gts = samples[img].ground_truths;
            std::vector<char> claimed(gts.size(), 0);
            for (const auto& entry : kept[img]) {
                double best_sim = -1.0;
                std::ptrdiff_t best_gt = -1;
                for (std::size_t g = 0; g < gts.size(); ++g) {
                    if (claimed[g]) {
                        continue;
                    }
                    const double s = similarity(kind, *entry.det, gts[g], config);
                    if (s >= threshold && s > best_sim) {
                        best_sim = s;
                        best_gt = static_cast<std::ptrdiff_t>(g);
                    }
                }
                flat.push_back(entry);
                if (best_gt >= 0) {
                    claimed[static_cast<std::size_t>(best_gt)] = 1;
                    is_tp.push_back(1);
                } else {
                    is_tp.push_back(0);
                }
            }
        }

        // Global confidence ordering across images (stable).
        std::vector<std::size_t> order(flat.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return flat[a].det->confidence > flat[b].det->confidence;
        });

        std::vector<double> precision;
        std::vector<double> recall;
        double tp = 0.0;
        double fp = 0.0;
        for (std::size_t i : order) {
            if (is_tp[i]) {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            precision.push_back(tp / (tp + fp));
            recall.push_back(total_gt > 0 ? tp / static_cast<double>(total_gt) : 0.0);
        }
        const double ap_t = (total_gt > 0) ? interpolated_ap(precision, recall) : 0.0;
        result.per_threshold.emplace_back(threshold, ap_t);
        sum += ap_t;
    }
    result.ap = config.thresholds.empty() ? 0.0 : sum / static_cast<double>(config.thresholds.size());
    return result;
}

double r_squared(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) {
        throw SchemaError("predictions and targets must have the same length");
    }
    if (targets.size() < 2) {
        throw UndefinedMetricError("r_squared needs at least two targets");
    }
    double mean = 0.0;
    for (double t : targets) {
        mean += t;
    }
    mean /= static_cast<double>(targets.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        ss_tot += (targets[i] - mean) * (targets[i] - mean);
        ss_res += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
    }
    if (ss_tot == 0.0) {
        throw UndefinedMetricError("r_squared undefined: targets have zero variance");
    }
    return 1.0 - ss_res / ss_tot;
}

double coverage_indicator(std::span<const OddPoint> training_points, const OddSpace& space,
                          const std::vector<std::size_t>& grid_resolution, double radius) {
    if (!(radius > 0.0)) {
        throw DomainError("coverage radius must be > 0");
    }
    const GridSpec grid(space, grid_resolution);
    const auto names = grid.dimension_names();

    auto normalized = [&](const OddPoint& p) {
        std::vector<double> x(names.size());
        for (std::size_t d = 0; d < names.size(); ++d) {
            x[d] = (p.at(names[d]) - grid.dimension_lower(d)) /
                   (grid.dimension_upper(d) - grid.dimension_lower(d));
        }
        return x;
    };
    std::vector<std::vector<double>> train;
    train.reserve(training_points.size());
    for (const auto& p : training_points) {
        train.push_back(normalized(p));
    }

    const double r2 = radius * radius;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < grid.num_cells(); ++i) {
        const auto center = normalized(grid.center(i));
        for (const auto& t : train) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < center.size(); ++d) {
                d2 += (center[d] - t[d]) * (center[d] - t[d]);
            }
            if (d2 <= r2) {
                ++covered;
                break;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(grid.num_cells());
}

} // namespace mlcert
