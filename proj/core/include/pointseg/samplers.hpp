#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pointseg/cloud.hpp"
#include "pointseg/knn.hpp"

namespace pointseg {

// Wall-clock budget shared by the long-running samplers; they poll it at a
// coarse granularity and raise TimeoutError when it has passed.
class Deadline {
public:
    static Deadline after_seconds(double seconds) {
        Deadline d;
        d.at_ = std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(seconds));
        return d;
    }

    bool expired() const { return std::chrono::steady_clock::now() >= at_; }

private:
    std::chrono::steady_clock::time_point at_;
};

// Output of one sampler call. Index-based strategies fill `selected`
// (k entries, no duplicates, in selection order); the continuous relaxation
// fills `soft_vectors` with k rows of `soft_width` columns instead. Every
// call also reports its own wall-clock time and peak transient allocation.
struct SampleResult {
    std::vector<std::uint32_t> selected;
    std::vector<double> soft_vectors;
    std::size_t soft_width = 0;
    double elapsed = 0.0;
    std::size_t peak_bytes = 0;
};

// Iterated downsampling schedule: `steps` rounds, each retaining
// ceil(ratio * current size) points.
struct DecimationPlan {
    std::size_t steps = 5;
    double ratio = 0.25;
};

// k distinct indices in [0, n) drawn uniformly without replacement, in
// selection order. Cost is O(k) regardless of n (a sparse Fisher-Yates
// shuffle), which is the property the decimation benchmark demonstrates.
std::vector<std::uint32_t> random_indices(std::size_t n, std::size_t k, std::uint64_t seed);

// random_indices over a cloud, with timing and allocation accounting.
SampleResult random_sample(const PointCloud& cloud, std::size_t k, std::uint64_t seed);

// Greedy max-min coverage: selected[0] = start, every later pick maximizes
// the minimum distance to everything picked so far, ties toward the lower
// index. O(N*k). An optional deadline aborts mid-run with TimeoutError.
SampleResult farthest_point_sample(const PointCloud& cloud, std::size_t k, std::size_t start = 0,
                                   const Deadline* deadline = nullptr);

// Distance-sum density proxy: rho(i) = sum of distances to the t nearest
// neighbors (self excluded). Points are ranked by ascending rho (densest
// first), ties toward the lower index, and the top k are returned. `invert`
// flips the polarity to prefer sparse points.
SampleResult inverse_density_sample(const PointCloud& cloud, std::size_t k, std::size_t t = 16,
                                    bool invert = false,
                                    KnnBackend backend = KnnBackend::automatic,
                                    const Deadline* deadline = nullptr);

// Differentiable soft selection: each of the k outputs is a convex
// combination of all n feature rows with weights
// softmax_i((log scores[i] + g_i) / tau), g drawn per output vector from
// Gumbel(0,1) (all zeros in noise-free mode). Materializes the full n x k
// weight matrix, which is the memory footprint the benchmark measures.
// `features` is row-major n x width; `scores` must be strictly positive and
// sum to 1 within 1e-6.
SampleResult crs_sample(std::span<const double> features, std::size_t width,
                        std::span<const double> scores, std::size_t k, double tau,
                        std::uint64_t seed, bool noise_free = false,
                        const Deadline* deadline = nullptr);

// Row-major n x (3 + attr_width) matrix of positions followed by attributes,
// the feature layout crs_sample consumes.
std::vector<double> cloud_features(const PointCloud& cloud);

enum class SampleMethod { rs, fps, idis, crs };

const char* sample_method_name(SampleMethod method);

// Parses "RS" / "FPS" / "IDIS" / "CRS" (case-insensitive); empty optional on
// anything else.
std::optional<SampleMethod> sample_method_from_name(const std::string& name);

struct BenchmarkOptions {
    double time_budget_s = 300.0;
    // CRS cells whose weight matrix would not fit are aborted up front; the
    // projected bytes still land in peak_bytes so the row documents the cost.
    std::size_t memory_budget_bytes = std::size_t{2} << 30;
    std::uint64_t seed = 0;
    double extent = 100.0;
    std::size_t fps_start = 0;
    std::size_t idis_t = 16;
    bool idis_invert = false;
    double crs_tau = 1.0;
};

struct BenchmarkRow {
    SampleMethod method = SampleMethod::rs;
    std::size_t n_points = 0;
    double step_ratio = 0.0;
    std::size_t steps = 0;
    double elapsed_s = 0.0;
    std::size_t peak_bytes = 0;
    std::string status;  // "ok" or "timeout"
};

// One cell per (size, method): generate a seeded uniform cloud, run the plan
// to completion or until the time budget expires, and record total elapsed
// time plus peak transient allocation across the steps. Sizes must be sorted
// ascending. Cells run sequentially so timings stay clean.
std::vector<BenchmarkRow> run_decimation_benchmark(const std::vector<std::size_t>& cloud_sizes,
                                                   const DecimationPlan& plan,
                                                   const std::vector<SampleMethod>& methods,
                                                   const BenchmarkOptions& options = {});

// CSV with header method,n_points,step_ratio,steps,elapsed_s,peak_bytes,status.
std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

}  // namespace pointseg
