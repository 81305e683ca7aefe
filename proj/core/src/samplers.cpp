#include "pointseg/samplers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <unordered_map>

#include "pointseg/errors.hpp"
#include "pointseg/memtrack.hpp"
#include "pointseg/rng.hpp"

namespace pointseg {

namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void check_k(std::size_t k, std::size_t n, const char* who) {
    if (k == 0) throw ArgumentError(std::string(who) + ": k must be positive");
    if (k > n) {
        throw ArgumentError(std::string(who) + ": k=" + std::to_string(k) + " exceeds " +
                            std::to_string(n) + " points");
    }
}

inline double dist(const double* a, const double* b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

std::vector<std::uint32_t> random_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
    check_k(k, n, "random_indices");
    // Sparse Fisher-Yates: only the touched slots of the virtual permutation
    // are stored, so the cost is O(k) however large n is.
    using Map = std::unordered_map<std::uint64_t, std::uint32_t, std::hash<std::uint64_t>,
                                   std::equal_to<std::uint64_t>,
                                   TrackingAllocator<std::pair<const std::uint64_t, std::uint32_t>>>;
    Map displaced;
    displaced.reserve(2 * k);
    Rng rng(derive_seed(seed, 0x7a9d));
    std::vector<std::uint32_t> selected(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::uint64_t r = j + rng.below(n - j);
        auto it = displaced.find(r);
        const std::uint32_t picked =
            it == displaced.end() ? static_cast<std::uint32_t>(r) : it->second;
        auto jt = displaced.find(j);
        const std::uint32_t at_j =
            jt == displaced.end() ? static_cast<std::uint32_t>(j) : jt->second;
        displaced[r] = at_j;
        selected[j] = picked;
    }
    return selected;
}

SampleResult random_sample(const PointCloud& cloud, std::size_t k, std::uint64_t seed) {
    check_k(k, cloud.size(), "random_sample");
    SampleResult result;
    const Stopwatch timer;
    AllocScope scope;
    result.selected = random_indices(cloud.size(), k, seed);
    result.elapsed = timer.seconds();
    result.peak_bytes = scope.peak_bytes();
    return result;
}

SampleResult farthest_point_sample(const PointCloud& cloud, std::size_t k, std::size_t start,
                                   const Deadline* deadline) {
    const std::size_t n = cloud.size();
    check_k(k, n, "farthest_point_sample");
    if (start >= n) throw ArgumentError("farthest_point_sample: start index out of range");

    SampleResult result;
    const Stopwatch timer;
    AllocScope scope;
    {
        const double* p = cloud.positions.data();
        tracked_vector<double> min_dist(n, std::numeric_limits<double>::infinity());
        tracked_vector<char> taken(n, 0);
        result.selected.reserve(k);
        std::size_t current = start;
        result.selected.push_back(static_cast<std::uint32_t>(current));
        taken[current] = 1;
        for (std::size_t m = 1; m < k; ++m) {
            if (deadline && deadline->expired()) {
                throw TimeoutError("farthest_point_sample: time budget exceeded");
            }
            const double* c = p + 3 * current;
            double best = -1.0;
            std::size_t best_idx = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = dist(p + 3 * i, c);
                if (d < min_dist[i]) min_dist[i] = d;
                if (!taken[i] && min_dist[i] > best) {
                    best = min_dist[i];
                    best_idx = i;
                }
            }
            current = best_idx;
            result.selected.push_back(static_cast<std::uint32_t>(current));
            taken[current] = 1;
        }
    }
    result.elapsed = timer.seconds();
    result.peak_bytes = scope.peak_bytes();
    return result;
}

SampleResult inverse_density_sample(const PointCloud& cloud, std::size_t k, std::size_t t,
                                    bool invert, KnnBackend backend, const Deadline* deadline) {
    const std::size_t n = cloud.size();
    check_k(k, n, "inverse_density_sample");
    if (t == 0) throw ArgumentError("inverse_density_sample: t must be positive");
    if (t >= n) {
        throw ArgumentError("inverse_density_sample: t=" + std::to_string(t) +
                            " must be below the cloud size " + std::to_string(n));
    }

    SampleResult result;
    const Stopwatch timer;
    AllocScope scope;
    {
        tracked_vector<double> rho(n, 0.0);
        {
            const NeighborIndex nbr = knn_excluding_self(cloud, t, backend);
            const ScopedTrackedBytes account(nbr.indices.size() * sizeof(std::uint32_t) +
                                             nbr.distances.size() * sizeof(double));
            for (std::size_t i = 0; i < n; ++i) {
                double sum = 0.0;
                for (double d : nbr.row_distances(i)) sum += d;
                rho[i] = sum;
            }
        }
        if (deadline && deadline->expired()) {
            throw TimeoutError("inverse_density_sample: time budget exceeded");
        }

        // Rank by inverse density: ascending rho keeps the densest points;
        // `invert` prefers the sparse end instead. Ties go to lower indices,
        // so coincident clouds (rho identically 0) fall back to index order.
        tracked_vector<std::uint32_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (rho[a] != rho[b]) return invert ? rho[a] > rho[b] : rho[a] < rho[b];
            return a < b;
        });
        result.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    }
    result.elapsed = timer.seconds();
    result.peak_bytes = scope.peak_bytes();
    return result;
}

SampleResult crs_sample(std::span<const double> features, std::size_t width,
                        std::span<const double> scores, std::size_t k, double tau,
                        std::uint64_t seed, bool noise_free, const Deadline* deadline) {
    const std::size_t n = scores.size();
    if (n == 0) throw ArgumentError("crs_sample: empty scores");
    if (width == 0 || features.size() != n * width) {
        throw ArgumentError("crs_sample: features must be an n x width matrix");
    }
    if (k == 0) throw ArgumentError("crs_sample: k must be positive");
    if (!(tau > 0.0)) throw ArgumentError("crs_sample: tau must be positive");
    double score_sum = 0.0;
    for (double s : scores) {
        if (!(s > 0.0)) throw ArgumentError("crs_sample: scores must be strictly positive");
        score_sum += s;
    }
    if (std::abs(score_sum - 1.0) > 1e-6) {
        throw ArgumentError("crs_sample: scores must sum to 1 (got " + std::to_string(score_sum) +
                            ")");
    }

    SampleResult result;
    const Stopwatch timer;
    AllocScope scope;
    {
        Rng rng(derive_seed(seed, 0x6b1));
        tracked_vector<double> log_s(n);
        for (std::size_t i = 0; i < n; ++i) log_s[i] = std::log(scores[i]);

        // The full k x n weight matrix is materialized on purpose: its size
        // is the memory cost this strategy pays at scale.
        tracked_vector<double> weights(k * n);
        result.soft_vectors.assign(k * width, 0.0);
        result.soft_width = width;
        for (std::size_t j = 0; j < k; ++j) {
            if (deadline && deadline->expired()) {
                throw TimeoutError("crs_sample: time budget exceeded");
            }
            double* w = weights.data() + j * n;
            double zmax = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                const double g = noise_free ? 0.0 : rng.gumbel();
                w[i] = (log_s[i] + g) / tau;
                if (w[i] > zmax) zmax = w[i];
            }
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                w[i] = std::exp(w[i] - zmax);
                total += w[i];
            }
            double* y = result.soft_vectors.data() + j * width;
            for (std::size_t i = 0; i < n; ++i) {
                w[i] /= total;
                const double* f = features.data() + i * width;
                for (std::size_t c = 0; c < width; ++c) y[c] += w[i] * f[c];
            }
        }
    }
    result.elapsed = timer.seconds();
    result.peak_bytes = scope.peak_bytes();
    return result;
}

std::vector<double> cloud_features(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    const std::size_t width = 3 + cloud.attr_width;
    std::vector<double> features(n * width);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = features.data() + i * width;
        for (int d = 0; d < 3; ++d) row[d] = cloud.positions[3 * i + d];
        for (std::size_t a = 0; a < cloud.attr_width; ++a) {
            row[3 + a] = cloud.attributes[cloud.attr_width * i + a];
        }
    }
    return features;
}

const char* sample_method_name(SampleMethod method) {
    switch (method) {
        case SampleMethod::rs: return "RS";
        case SampleMethod::fps: return "FPS";
        case SampleMethod::idis: return "IDIS";
        case SampleMethod::crs: return "CRS";
    }
    return "?";
}

std::optional<SampleMethod> sample_method_from_name(const std::string& name) {
    std::string upper;
    for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (upper == "RS") return SampleMethod::rs;
    if (upper == "FPS") return SampleMethod::fps;
    if (upper == "IDIS") return SampleMethod::idis;
    if (upper == "CRS") return SampleMethod::crs;
    return std::nullopt;
}

namespace {

std::size_t step_size(std::size_t n, double ratio) {
    const double exact = static_cast<double>(n) * ratio;
    auto k = static_cast<std::size_t>(std::ceil(exact));
    return std::clamp<std::size_t>(k, 1, n);
}

// Applies the plan for one method, mutating nothing outside; throws
// TimeoutError when the deadline passes mid-step.
void run_cell(const PointCloud& input, SampleMethod method, const DecimationPlan& plan,
              const BenchmarkOptions& options, const Deadline& deadline) {
    PointCloud current = input;
    // Keeps the live intermediate cloud visible to the allocation counters
    // (PointCloud itself uses untracked storage).
    std::unique_ptr<ScopedTrackedBytes> held;

    for (std::size_t step = 0; step < plan.steps; ++step) {
        const std::size_t n = current.size();
        const std::size_t k = step_size(n, plan.ratio);
        const std::uint64_t step_seed = derive_seed(options.seed, 0xbe + step);

        if (method == SampleMethod::crs) {
            const std::size_t projected = n * k * sizeof(double);
            if (projected > options.memory_budget_bytes) {
                // Too large to materialize; record what it would have cost
                // and stop the cell the same way a slow cell stops.
                memtrack::on_virtual_alloc(projected);
                throw TimeoutError("crs cell exceeds the memory budget");
            }
            const std::vector<double> features = cloud_features(current);
            const ScopedTrackedBytes feat_bytes(features.size() * sizeof(double));
            const std::size_t width = 3 + current.attr_width;
            const std::vector<double> scores(n, 1.0 / static_cast<double>(n));
            SampleResult soft =
                crs_sample(features, width, scores, k, options.crs_tau, step_seed,
                           /*noise_free=*/false, &deadline);
            PointCloud next;
            next.positions.resize(3 * k);
            next.attr_width = current.attr_width;
            next.attributes.resize(current.attr_width * k);
            for (std::size_t j = 0; j < k; ++j) {
                const double* row = soft.soft_vectors.data() + j * width;
                for (int d = 0; d < 3; ++d) next.positions[3 * j + d] = row[d];
                for (std::size_t a = 0; a < current.attr_width; ++a) {
                    next.attributes[current.attr_width * j + a] = row[3 + a];
                }
            }
            auto next_held = std::make_unique<ScopedTrackedBytes>(
                (next.positions.size() + next.attributes.size()) * sizeof(double));
            current = std::move(next);
            held = std::move(next_held);
            continue;
        }

        SampleResult picked;
        switch (method) {
            case SampleMethod::rs:
                picked = random_sample(current, k, step_seed);
                break;
            case SampleMethod::fps:
                picked = farthest_point_sample(current, k,
                                               std::min(options.fps_start, n - 1), &deadline);
                break;
            case SampleMethod::idis: {
                const std::size_t t = std::min(options.idis_t, n - 1);
                if (t == 0) {
                    picked.selected = {0};
                } else {
                    picked = inverse_density_sample(current, k, t, options.idis_invert,
                                                    KnnBackend::automatic, &deadline);
                }
                break;
            }
            case SampleMethod::crs:
                break;  // handled above
        }
        PointCloud next = current.select(picked.selected);
        auto next_held = std::make_unique<ScopedTrackedBytes>(
            (next.positions.size() + next.attributes.size()) * sizeof(double));
        current = std::move(next);
        held = std::move(next_held);
    }
}

}  // namespace

std::vector<BenchmarkRow> run_decimation_benchmark(const std::vector<std::size_t>& cloud_sizes,
                                                   const DecimationPlan& plan,
                                                   const std::vector<SampleMethod>& methods,
                                                   const BenchmarkOptions& options) {
    if (cloud_sizes.empty()) throw ArgumentError("run_decimation_benchmark: no sizes given");
    if (methods.empty()) throw ArgumentError("run_decimation_benchmark: no methods given");
    if (!std::is_sorted(cloud_sizes.begin(), cloud_sizes.end())) {
        throw ArgumentError("run_decimation_benchmark: sizes must be sorted ascending");
    }
    if (plan.steps < 1) throw ArgumentError("run_decimation_benchmark: plan needs steps >= 1");
    if (!(plan.ratio > 0.0 && plan.ratio < 1.0)) {
        throw ArgumentError("run_decimation_benchmark: plan needs 0 < ratio < 1");
    }

    std::vector<BenchmarkRow> rows;
    rows.reserve(cloud_sizes.size() * methods.size());
    for (std::size_t si = 0; si < cloud_sizes.size(); ++si) {
        const std::size_t n = cloud_sizes[si];
        if (n == 0) throw ArgumentError("run_decimation_benchmark: sizes must be positive");
        const PointCloud fixture =
            uniform_cloud(n, options.extent, derive_seed(options.seed, 0xc10d + si));
        for (SampleMethod method : methods) {
            BenchmarkRow row;
            row.method = method;
            row.n_points = n;
            row.step_ratio = plan.ratio;
            row.steps = plan.steps;

            const Deadline deadline = Deadline::after_seconds(options.time_budget_s);
            AllocScope scope;
            const Stopwatch timer;
            try {
                run_cell(fixture, method, plan, options, deadline);
                row.status = "ok";
            } catch (const TimeoutError&) {
                row.status = "timeout";
            }
            row.elapsed_s = timer.seconds();
            row.peak_bytes = scope.peak_bytes();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
    std::string out = "method,n_points,step_ratio,steps,elapsed_s,peak_bytes,status\n";
    char buf[160];
    for (const BenchmarkRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%zu,%g,%zu,%.6f,%zu,%s\n",
                      sample_method_name(row.method), row.n_points, row.step_ratio, row.steps,
                      row.elapsed_s, row.peak_bytes, row.status.c_str());
        out += buf;
    }
    return out;
}

}  // namespace pointseg
