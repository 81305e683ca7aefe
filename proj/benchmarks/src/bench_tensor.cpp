#include <benchmark/benchmark.h>

#include <vector>

#include "pointseg/nn.hpp"
#include "pointseg/rng.hpp"
#include "pointseg/tensor.hpp"

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
    pointseg::Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform() - 0.5;
    return v;
}

void BM_affine_forward(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const std::size_t d = 32;
    const auto x = pointseg::Tensor::constant(random_values(n * d, 1), {n, d});
    const auto w = pointseg::Tensor::constant(random_values(d * d, 2), {d, d});
    const auto b = pointseg::Tensor::constant(random_values(d, 3), {d});
    for (auto _ : state) {
        auto y = pointseg::affine(x, w, b);
        benchmark::DoNotOptimize(y.values().data());
    }
}
BENCHMARK(BM_affine_forward)->RangeMultiplier(4)->Range(256, 16384);

void BM_affine_train_step(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const std::size_t d = 32;
    const auto x = pointseg::Tensor::constant(random_values(n * d, 1), {n, d});
    auto w = pointseg::Tensor::parameter(random_values(d * d, 2), {d, d});
    auto b = pointseg::Tensor::parameter(random_values(d, 3), {d});
    for (auto _ : state) {
        auto loss = pointseg::sum_all(pointseg::leaky_relu(pointseg::affine(x, w, b)));
        loss.backward();
        benchmark::DoNotOptimize(w.grad().data());
        w.zero_grad();
        b.zero_grad();
    }
}
BENCHMARK(BM_affine_train_step)->RangeMultiplier(4)->Range(256, 4096);

void BM_softmax_middle(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto x = pointseg::Tensor::constant(random_values(n * 16 * 8, 1), {n, 16, 8});
    for (auto _ : state) {
        auto y = pointseg::softmax_middle(x);
        benchmark::DoNotOptimize(y.values().data());
    }
}
BENCHMARK(BM_softmax_middle)->RangeMultiplier(4)->Range(256, 16384);

}  // namespace

BENCHMARK_MAIN();
