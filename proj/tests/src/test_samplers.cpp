#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "pointseg/cloud.hpp"
#include "pointseg/errors.hpp"
#include "pointseg/rng.hpp"
#include "pointseg/samplers.hpp"

#include "oracles.hpp"

using namespace pointseg;

namespace {

PointCloud line_cloud(const std::vector<double>& xs) {
    PointCloud cloud;
    for (double x : xs) {
        cloud.positions.push_back(x);
        cloud.positions.push_back(0.0);
        cloud.positions.push_back(0.0);
    }
    return cloud;
}

}  // namespace

TEST_SUITE_BEGIN("samplers");

TEST_CASE("random sample basics") {
    const PointCloud cloud = uniform_cloud(40, 4.0, 5);

    SUBCASE("k equal to n yields a permutation") {
        const SampleResult r = random_sample(cloud, 40, 9);
        std::set<std::uint32_t> seen(r.selected.begin(), r.selected.end());
        CHECK(seen.size() == 40);
        CHECK(*seen.begin() == 0);
        CHECK(*seen.rbegin() == 39);
    }
    SUBCASE("deterministic per seed") {
        CHECK(random_sample(cloud, 10, 9).selected == random_sample(cloud, 10, 9).selected);
        CHECK(random_sample(cloud, 10, 9).selected != random_sample(cloud, 10, 10).selected);
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(random_sample(cloud, 41, 9), ArgumentError);
        CHECK_THROWS_AS(random_sample(cloud, 0, 9), ArgumentError);
    }
}

TEST_CASE("random sample selects each index with the plan's frequency") {
    const std::size_t n = 10000;
    const std::size_t k = 2500;
    const std::size_t rounds = 2000;
    std::vector<std::uint32_t> hits(n, 0);
    for (std::uint64_t seed = 0; seed < rounds; ++seed) {
        for (std::uint32_t i : random_indices(n, k, seed)) hits[i]++;
    }
    std::uint64_t total = 0;
    std::uint32_t lo = hits[0];
    std::uint32_t hi = hits[0];
    for (std::uint32_t h : hits) {
        total += h;
        lo = std::min(lo, h);
        hi = std::max(hi, h);
    }
    CHECK(total == rounds * k);
    // Per index the hit count is Binomial(2000, 0.25): mean 500, sd 19.4.
    // The band is just over five sigmas, comfortable for 10000 indices.
    CHECK(lo / static_cast<double>(rounds) >= 0.20);
    CHECK(hi / static_cast<double>(rounds) <= 0.30);
}

TEST_CASE("farthest point sampling on a line") {
    const PointCloud cloud = line_cloud({0.0, 1.0, 2.0, 10.0});
    const SampleResult r = farthest_point_sample(cloud, 2, 0);
    CHECK(r.selected == std::vector<std::uint32_t>{0, 3});

    CHECK(farthest_point_sample(cloud, 1, 2).selected == std::vector<std::uint32_t>{2});
    CHECK_THROWS_AS(farthest_point_sample(cloud, 2, 4), ArgumentError);
}

TEST_CASE("farthest point sampling equals the recompute oracle") {
    Rng rng(77);
    for (int round = 0; round < 30; ++round) {
        const std::size_t n = 2 + rng.below(300);
        const std::size_t k = 1 + rng.below(n);
        const std::size_t start = rng.below(n);
        const PointCloud cloud = uniform_cloud(n, 6.0, 500 + round);
        CHECK(farthest_point_sample(cloud, k, start).selected ==
              oracles::fps_recompute(cloud, k, start));
    }
}

TEST_CASE("farthest point sampling max-min property holds on every prefix") {
    const PointCloud cloud = uniform_cloud(150, 5.0, 31);
    const std::vector<std::uint32_t> sel = farthest_point_sample(cloud, 60, 3).selected;
    const double* p = cloud.positions.data();
    for (std::size_t m = 1; m < sel.size(); ++m) {
        const auto min_to_prefix = [&](std::size_t i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; ++j) {
                best = std::min(best, oracles::dist(p + 3 * i, p + 3 * sel[j]));
            }
            return best;
        };
        std::set<std::uint32_t> chosen(sel.begin(), sel.begin() + m);
        const double picked = min_to_prefix(sel[m]);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (!chosen.count(static_cast<std::uint32_t>(i))) {
                CHECK(min_to_prefix(i) <= picked);
            }
        }
    }
}

TEST_CASE("farthest point coverage beats random coverage on most seeds") {
    const PointCloud cloud = uniform_cloud(1000, 10.0, 4);
    const double* p = cloud.positions.data();
    const auto covering_radius = [&](const std::vector<std::uint32_t>& sample) {
        double worst = 0.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (std::uint32_t s : sample) {
                nearest = std::min(nearest, oracles::dist(p + 3 * i, p + 3 * s));
            }
            worst = std::max(worst, nearest);
        }
        return worst;
    };
    int fps_wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const double fps = covering_radius(farthest_point_sample(cloud, 50, seed % 1000).selected);
        const double rs = covering_radius(random_indices(cloud.size(), 50, seed));
        if (fps <= rs) ++fps_wins;
    }
    CHECK(fps_wins >= 95);
}

TEST_CASE("inverse density on a line") {
    const PointCloud cloud = line_cloud({0.0, 1.0, 2.0, 100.0});
    const SampleResult r = inverse_density_sample(cloud, 2, 2);
    // Distance sums to the 2 nearest others are [3, 2, 3, 197]; the two
    // densest points win, the 0-vs-2 tie resolving to the lower index.
    CHECK(r.selected == std::vector<std::uint32_t>{1, 0});

    const SampleResult sparse = inverse_density_sample(cloud, 2, 2, true);
    CHECK(sparse.selected == std::vector<std::uint32_t>{3, 0});
}

TEST_CASE("coincident points fall back to index order") {
    const PointCloud cloud = line_cloud({4.0, 4.0, 4.0, 4.0, 4.0});
    const SampleResult r = inverse_density_sample(cloud, 3, 2);
    CHECK(r.selected == std::vector<std::uint32_t>{0, 1, 2});
}

TEST_CASE("inverse density equals the sort oracle") {
    Rng rng(99);
    for (int round = 0; round < 20; ++round) {
        const std::size_t n = 3 + rng.below(400);
        const std::size_t k = 1 + rng.below(n);
        const std::size_t t = 1 + rng.below(std::min<std::size_t>(n - 1, 20));
        const PointCloud cloud = uniform_cloud(n, 6.0, 700 + round);
        for (bool invert : {false, true}) {
            CHECK(inverse_density_sample(cloud, k, t, invert).selected ==
                  oracles::idis_sort(cloud, k, t, invert));
        }
    }
    const PointCloud cloud = uniform_cloud(10, 5.0, 1);
    CHECK_THROWS_AS(inverse_density_sample(cloud, 2, 10), ArgumentError);
}

TEST_CASE("noise-free relaxation with uniform scores averages all rows") {
    const std::size_t n = 8;
    const std::vector<double> features = oracles::random_values(n * 2, 13);
    const std::vector<double> scores(n, 1.0 / n);
    const SampleResult r = crs_sample(features, 2, scores, 3, 0.7, 0, true);
    REQUIRE(r.soft_width == 2);
    REQUIRE(r.soft_vectors.size() == 6);
    double mean0 = 0.0;
    double mean1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean0 += features[2 * i] / n;
        mean1 += features[2 * i + 1] / n;
    }
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(r.soft_vectors[2 * j] == doctest::Approx(mean0).epsilon(1e-12));
        CHECK(r.soft_vectors[2 * j + 1] == doctest::Approx(mean1).epsilon(1e-12));
    }
}

TEST_CASE("noise-free relaxation sharpens to the best row as tau shrinks") {
    const std::vector<double> features = {10.0, -3.0, 2.0, 5.0};
    const std::vector<double> scores = {0.1, 0.9};
    const SampleResult r = crs_sample(features, 2, scores, 1, 0.01, 0, true);
    CHECK(std::abs(r.soft_vectors[0] - 2.0) < 1e-6);
    CHECK(std::abs(r.soft_vectors[1] - 5.0) < 1e-6);
}

TEST_CASE("relaxation weights stay normalized under noise") {
    // A constant-1 feature column sums the weights, exposing them through
    // the public interface.
    Rng rng(55);
    for (int round = 0; round < 50; ++round) {
        const std::size_t n = 2 + rng.below(60);
        std::vector<double> features = oracles::random_values(n * 3, 900 + round);
        for (std::size_t i = 0; i < n; ++i) features[3 * i + 2] = 1.0;
        std::vector<double> scores = oracles::random_values(n, 1900 + round, 0.1, 1.0);
        double total = 0.0;
        for (double s : scores) total += s;
        for (double& s : scores) s /= total;
        const SampleResult r = crs_sample(features, 3, scores, 4, 0.5, round);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(std::abs(r.soft_vectors[3 * j + 2] - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("relaxation argument validation") {
    const std::vector<double> features = {1.0, 2.0};
    CHECK_THROWS_AS(crs_sample(features, 1, std::vector<double>{0.5, 0.5}, 1, 0.0, 0),
                    ArgumentError);
    CHECK_THROWS_AS(crs_sample(features, 1, std::vector<double>{0.9, 0.3}, 1, 1.0, 0),
                    ArgumentError);
    CHECK_THROWS_AS(crs_sample(features, 1, std::vector<double>{1.0, -0.1}, 1, 1.0, 0),
                    ArgumentError);
}

TEST_CASE("cloud_features lays out positions then attributes") {
    PointCloud cloud;
    cloud.positions = {1, 2, 3, 4, 5, 6};
    cloud.attributes = {0.5, 0.25};
    cloud.attr_width = 1;
    CHECK(cloud_features(cloud) == std::vector<double>{1, 2, 3, 0.5, 4, 5, 6, 0.25});
}

TEST_CASE("method names round trip") {
    for (SampleMethod m :
         {SampleMethod::rs, SampleMethod::fps, SampleMethod::idis, SampleMethod::crs}) {
        CHECK(sample_method_from_name(sample_method_name(m)) == m);
    }
    CHECK(sample_method_from_name("fps") == SampleMethod::fps);
    CHECK(!sample_method_from_name("nosuch").has_value());
}

TEST_CASE("benchmark emits one row per cell with the documented header") {
    const std::vector<BenchmarkRow> rows = run_decimation_benchmark(
        {200, 400}, DecimationPlan{}, {SampleMethod::rs, SampleMethod::idis});
    REQUIRE(rows.size() == 4);
    for (const BenchmarkRow& row : rows) {
        CHECK(row.status == "ok");
        CHECK(row.steps == 5);
        CHECK(row.step_ratio == 0.25);
        CHECK(row.elapsed_s >= 0.0);
    }
    const std::string csv = benchmark_csv(rows);
    CHECK(csv.substr(0, csv.find('\n')) ==
          "method,n_points,step_ratio,steps,elapsed_s,peak_bytes,status");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(csv.find("RS,200,") != std::string::npos);
    CHECK(csv.find("IDIS,400,") != std::string::npos);
}

TEST_CASE("benchmark marks over-budget cells as timeouts") {
    BenchmarkOptions options;
    options.time_budget_s = 1e-7;
    const std::vector<BenchmarkRow> rows =
        run_decimation_benchmark({3000}, DecimationPlan{}, {SampleMethod::fps}, options);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].status == "timeout");
}

TEST_CASE("benchmark caps the relaxation weight matrix by memory budget") {
    BenchmarkOptions options;
    options.memory_budget_bytes = 1 << 20;
    const std::vector<BenchmarkRow> rows =
        run_decimation_benchmark({2000}, DecimationPlan{}, {SampleMethod::crs}, options);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].status == "timeout");
    // First step would materialize 2000 x 500 weights; the projected bytes
    // are reported even though the matrix was never allocated.
    CHECK(rows[0].peak_bytes >= 2000u * 500u * 8u);
}

TEST_CASE("benchmark validates its inputs") {
    CHECK_THROWS_AS(run_decimation_benchmark({}, DecimationPlan{}, {SampleMethod::rs}),
                    ArgumentError);
    CHECK_THROWS_AS(run_decimation_benchmark({100, 50}, DecimationPlan{}, {SampleMethod::rs}),
                    ArgumentError);
    DecimationPlan bad;
    bad.ratio = 1.5;
    CHECK_THROWS_AS(run_decimation_benchmark({100}, bad, {SampleMethod::rs}), ArgumentError);
}

TEST_SUITE_END();
