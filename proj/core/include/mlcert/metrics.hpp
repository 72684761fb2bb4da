#pragma once

#include <array>
#include <span>
#include <vector>

#include "mlcert/odd.hpp"

namespace mlcert {

struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double area() const { return (x_max - x_min) * (y_max - y_min); }
    void validate() const; // throws DomainError on degenerate boxes
};

double iou(const BoundingBox& a, const BoundingBox& b);

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    int visibility = 1; // 0 invisible, 1 visible
};

// One detected runway: box, the four corner keypoints, confidence.
struct Detection {
    BoundingBox box;
    std::array<Keypoint, 4> keypoints;
    double confidence = 0.0;
};

struct GroundTruthAnnotation {
    BoundingBox box;
    std::array<Keypoint, 4> keypoints;
    double area = 0.0; // box area, kept explicit for the OKS scale
};

// Object keypoint similarity: mean over visible ground-truth keypoints of
// exp(-d_i^2 / (2 * area * k_i^2)). Throws UndefinedMetricError when no
// keypoint is visible.
double oks(const Detection& detection, const GroundTruthAnnotation& gt,
           std::span<const double> k_constants);

enum class SimilarityKind { kIoU, kOks };

struct ApConfig {
    std::vector<double> thresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                      0.75, 0.80, 0.85, 0.90, 0.95};
    std::size_t max_detections = 100; // 100 for boxes, 20 for keypoints
    double confidence_floor = 0.7;
    std::array<double, 4> oks_k = {0.05, 0.05, 0.05, 0.05};

    static ApConfig for_kind(SimilarityKind kind);
};

struct ImageSample {
    std::vector<Detection> detections;
    std::vector<GroundTruthAnnotation> ground_truths;
};

struct ApResult {
    double ap = 0.0;
    std::vector<std::pair<double, double>> per_threshold; // (threshold, AP)
};

// COCO-style average precision: detections below the confidence floor are
// discarded, at most max_detections per image are kept in confidence order,
// matching is greedy one-to-one per threshold, and precision is interpolated
// at 101 recall points before averaging over thresholds.
ApResult average_precision(std::span<const ImageSample> samples, SimilarityKind kind,
                           const ApConfig& config = {});

// 1 - SS_res / SS_tot. Needs >= 2 targets with nonzero variance.
double r_squared(std::span<const double> predictions, std::span<const double> targets);

// Fraction of grid cells whose center lies within `radius` (normalized
// Euclidean distance over the continuous dimensions) of a training point.
double coverage_indicator(std::span<const OddPoint> training_points, const OddSpace& space,
                          const std::vector<std::size_t>& grid_resolution, double radius);

} // namespace mlcert
