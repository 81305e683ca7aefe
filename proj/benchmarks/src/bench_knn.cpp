#include <benchmark/benchmark.h>

#include "pointseg/cloud.hpp"
#include "pointseg/knn.hpp"

namespace {

void BM_knn_brute(benchmark::State& state) {
    const auto cloud = pointseg::uniform_cloud(static_cast<std::size_t>(state.range(0)), 100.0, 7);
    for (auto _ : state) {
        auto idx = pointseg::knn(cloud, cloud, 16, pointseg::KnnBackend::brute_force);
        benchmark::DoNotOptimize(idx.indices.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_knn_brute)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

void BM_knn_grid(benchmark::State& state) {
    const auto cloud = pointseg::uniform_cloud(static_cast<std::size_t>(state.range(0)), 100.0, 7);
    for (auto _ : state) {
        auto idx = pointseg::knn(cloud, cloud, 16, pointseg::KnnBackend::grid);
        benchmark::DoNotOptimize(idx.indices.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_knn_grid)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

void BM_nearest_one(benchmark::State& state) {
    const auto reference =
        pointseg::uniform_cloud(static_cast<std::size_t>(state.range(0)), 100.0, 7);
    const auto queries = pointseg::uniform_cloud(1024, 100.0, 8);
    for (auto _ : state) {
        auto idx = pointseg::nearest_one(reference, queries);
        benchmark::DoNotOptimize(idx.indices.data());
    }
}
BENCHMARK(BM_nearest_one)->RangeMultiplier(4)->Range(1024, 65536);

}  // namespace

BENCHMARK_MAIN();
