#include "idxcast/forest.hpp"
#include "idxcast/gaussian_process.hpp"
#include "idxcast/lstm.hpp"
#include "idxcast/preprocess.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace idxcast;

preprocess::WindowedDataset sine_windows(std::size_t n, std::size_t window) {
    Rng rng(3);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = std::sin(0.12 * static_cast<double>(i)) + 0.05 * rng.uniform(-1, 1);
    return preprocess::make_windows(values, {}, window);
}

void BM_ForestFit(benchmark::State& state) {
    const auto data = sine_windows(static_cast<std::size_t>(state.range(0)), 5);
    forest::ForestConfig cfg;
    cfg.n_estimators = 50;
    cfg.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(forest::fit_forest(data, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForestFit)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_LstmEpoch(benchmark::State& state) {
    const auto data = sine_windows(1000, 5);
    lstm::LstmConfig cfg;
    cfg.window_size = 5;
    cfg.units = static_cast<std::size_t>(state.range(0));
    cfg.epochs = 1;
    cfg.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(lstm::fit_lstm(data, cfg));
}
BENCHMARK(BM_LstmEpoch)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_GpFitPredict(benchmark::State& state) {
    const auto n = state.range(0);
    Rng rng(5);
    Eigen::MatrixXd points(n, 4);
    Eigen::VectorXd scores(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) points(i, j) = rng.uniform01();
        scores(i) = points.row(i).squaredNorm();
    }
    Eigen::VectorXd query = Eigen::VectorXd::Constant(4, 0.5);
    for (auto _ : state) {
        const auto gp = tune::gp_fit(points, scores);
        benchmark::DoNotOptimize(tune::expected_improvement(gp, query, scores.minCoeff()));
    }
}
BENCHMARK(BM_GpFitPredict)->Arg(20)->Arg(80);

}  // namespace
BENCHMARK_MAIN();
