#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mlcert/bsv.hpp"
#include "mlcert/digest.hpp"
#include "mlcert/grid.hpp"
#include "mlcert/metrics.hpp"
#include "mlcert/odd.hpp"
#include "mlcert/surrogate.hpp"
#include "mlcert/synthetic_vbl.hpp"

namespace {

mlcert::OddSpace vbl_space() {
    std::vector<mlcert::OddDimension> dims;
    dims.emplace_back(mlcert::kGlideslopeDimension, "degrees",
                      mlcert::TruncatedNormal(3.0, 0.3, 1.0, 7.0));
    dims.emplace_back(mlcert::kDistanceDimension, "nautical miles",
                      mlcert::TruncatedNormal(0.0, 1.5, 0.0, 4.0));
    return mlcert::OddSpace(std::move(dims), "approach");
}

mlcert::GpSurrogate fitted_surrogate(std::size_t n) {
    const auto space = vbl_space();
    const auto points = space.sample(n, 7);
    std::vector<double> outcomes;
    outcomes.reserve(n);
    for (const auto& p : points) {
        outcomes.push_back(mlcert::synthetic_vbl(p).first ? 1.0 : 0.0);
    }
    return mlcert::GpSurrogate::fit(space, points, outcomes);
}

void TruncnormSample(benchmark::State& state) {
    const mlcert::TruncatedNormal dist(0.0, 1.5, 0.0, 4.0);
    for (auto _ : state) {
        auto samples = dist.sample(static_cast<std::size_t>(state.range(0)), 42);
        benchmark::DoNotOptimize(samples);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(TruncnormSample)->Range(1024, 1 << 17);

void GpFit(benchmark::State& state) {
    const auto space = vbl_space();
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto points = space.sample(n, 7);
    std::vector<double> outcomes;
    for (const auto& p : points) {
        outcomes.push_back(mlcert::synthetic_vbl(p).first ? 1.0 : 0.0);
    }
    for (auto _ : state) {
        auto gp = mlcert::GpSurrogate::fit(space, points, outcomes);
        benchmark::DoNotOptimize(gp);
    }
}
BENCHMARK(GpFit)->Arg(30)->Arg(60)->Arg(120)->Arg(240);

void GpPredictGrid(benchmark::State& state) {
    const auto space = vbl_space();
    const auto gp = fitted_surrogate(120);
    const mlcert::GridSpec grid(space, static_cast<std::size_t>(state.range(0)));
    const auto centers = grid.centers();
    for (auto _ : state) {
        auto predictions = gp.predict_batch(centers);
        benchmark::DoNotOptimize(predictions);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(centers.size()));
}
BENCHMARK(GpPredictGrid)->Arg(25)->Arg(50)->Arg(100);

void PfailQuadrature(benchmark::State& state) {
    const auto space = vbl_space();
    const auto gp = fitted_surrogate(120);
    const mlcert::GridSpec grid(space, static_cast<std::size_t>(state.range(0)));
    const auto mean = mlcert::surrogate_mean_fn(gp);
    for (auto _ : state) {
        auto p = mlcert::integrate_failure_probability(space, grid, mean);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(PfailQuadrature)->Arg(50)->Arg(100)->Arg(200);

void Sha256Digest(benchmark::State& state) {
    std::vector<unsigned char> payload(static_cast<std::size_t>(state.range(0)));
    std::mt19937_64 rng(5);
    for (auto& b : payload) {
        b = static_cast<unsigned char>(rng());
    }
    for (auto _ : state) {
        auto digest = mlcert::sha256_hex(payload);
        benchmark::DoNotOptimize(digest);
    }
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(Sha256Digest)->Range(1 << 10, 1 << 20);

void AveragePrecisionEval(benchmark::State& state) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<mlcert::ImageSample> samples(static_cast<std::size_t>(state.range(0)));
    for (auto& sample : samples) {
        for (int g = 0; g < 2; ++g) {
            mlcert::GroundTruthAnnotation gt;
            const double x = 200.0 * u(rng);
            const double y = 200.0 * u(rng);
            gt.box = {x, y, x + 50.0, y + 30.0};
            gt.area = gt.box.area();
            for (auto& kp : gt.keypoints) {
                kp = {x + 25.0 * u(rng), y + 15.0 * u(rng), 1};
            }
            sample.ground_truths.push_back(gt);
            mlcert::Detection det;
            det.box = {x + u(rng), y + u(rng), x + 50.0 + u(rng), y + 30.0 + u(rng)};
            det.confidence = 0.7 + 0.3 * u(rng);
            det.keypoints = gt.keypoints;
            sample.detections.push_back(det);
        }
    }
    for (auto _ : state) {
        auto result = mlcert::average_precision(
            samples, mlcert::SimilarityKind::kIoU,
            mlcert::ApConfig::for_kind(mlcert::SimilarityKind::kIoU));
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(AveragePrecisionEval)->Arg(16)->Arg(64)->Arg(256);

} // namespace

BENCHMARK_MAIN();
