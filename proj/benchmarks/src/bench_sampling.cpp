#include <benchmark/benchmark.h>

#include "pointseg/cloud.hpp"
#include "pointseg/samplers.hpp"

namespace {

void BM_random_sample(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto cloud = pointseg::uniform_cloud(n, 100.0, 7);
    for (auto _ : state) {
        auto r = pointseg::random_sample(cloud, n / 4, 11);
        benchmark::DoNotOptimize(r.selected.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_random_sample)->RangeMultiplier(8)->Range(1024, 524288)->Complexity();

void BM_farthest_point_sample(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto cloud = pointseg::uniform_cloud(n, 100.0, 7);
    for (auto _ : state) {
        auto r = pointseg::farthest_point_sample(cloud, n / 4);
        benchmark::DoNotOptimize(r.selected.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_farthest_point_sample)->RangeMultiplier(4)->Range(1024, 16384)->Complexity();

void BM_inverse_density_sample(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto cloud = pointseg::uniform_cloud(n, 100.0, 7);
    for (auto _ : state) {
        auto r = pointseg::inverse_density_sample(cloud, n / 4);
        benchmark::DoNotOptimize(r.selected.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_inverse_density_sample)->RangeMultiplier(4)->Range(1024, 65536)->Complexity();

void BM_crs_sample(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto cloud = pointseg::uniform_cloud(n, 100.0, 7);
    const auto features = pointseg::cloud_features(cloud);
    const std::vector<double> scores(n, 1.0 / static_cast<double>(n));
    for (auto _ : state) {
        auto r = pointseg::crs_sample(features, 3, scores, n / 4, 1.0, 11);
        benchmark::DoNotOptimize(r.soft_vectors.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_crs_sample)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

}  // namespace

BENCHMARK_MAIN();
