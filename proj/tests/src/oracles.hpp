#pragma once

// Independent reference implementations the tests compare against. Each is
// written in the most direct way possible, favoring obviousness over speed,
// and shares nothing with the library code paths it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "pointseg/cloud.hpp"
#include "pointseg/rng.hpp"

namespace oracles {

inline double dist2(const double* a, const double* b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

inline double dist(const double* a, const double* b) { return std::sqrt(dist2(a, b)); }

struct KnnRows {
    std::size_t k = 0;
    std::vector<std::uint32_t> indices;
    std::vector<double> distances;
};

// Full sort of every reference point per query, ties by lower index.
inline KnnRows knn_full_sort(const pointseg::PointCloud& reference,
                             const pointseg::PointCloud& queries, std::size_t k) {
    KnnRows out;
    out.k = k;
    const std::size_t n = reference.size();
    std::vector<std::pair<double, std::uint32_t>> all(n);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (std::size_t i = 0; i < n; ++i) {
            all[i] = {dist2(reference.positions.data() + 3 * i, queries.positions.data() + 3 * q),
                      static_cast<std::uint32_t>(i)};
        }
        std::sort(all.begin(), all.end());
        for (std::size_t j = 0; j < k; ++j) {
            out.indices.push_back(all[j].second);
            out.distances.push_back(std::sqrt(all[j].first));
        }
    }
    return out;
}

// Greedy farthest-point selection recomputing every min-distance from
// scratch at each step. O(k^2 N), trustworthy by inspection.
inline std::vector<std::uint32_t> fps_recompute(const pointseg::PointCloud& cloud, std::size_t k,
                                                std::size_t start) {
    const std::size_t n = cloud.size();
    const double* p = cloud.positions.data();
    std::vector<std::uint32_t> selected{static_cast<std::uint32_t>(start)};
    std::vector<char> taken(n, 0);
    taken[start] = 1;
    while (selected.size() < k) {
        double best = -1.0;
        std::size_t best_idx = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            double nearest = std::numeric_limits<double>::infinity();
            for (std::uint32_t s : selected) {
                nearest = std::min(nearest, dist(p + 3 * i, p + 3 * s));
            }
            if (nearest > best) {
                best = nearest;
                best_idx = i;
            }
        }
        selected.push_back(static_cast<std::uint32_t>(best_idx));
        taken[best_idx] = 1;
    }
    return selected;
}

// Density-rank sampler by explicit full sort: rho is the sum of distances to
// the t nearest other points (ascending distance order, ties by index).
inline std::vector<std::uint32_t> idis_sort(const pointseg::PointCloud& cloud, std::size_t k,
                                            std::size_t t, bool invert) {
    const std::size_t n = cloud.size();
    const double* p = cloud.positions.data();
    std::vector<double> rho(n, 0.0);
    std::vector<std::pair<double, std::uint32_t>> others;
    for (std::size_t i = 0; i < n; ++i) {
        others.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            others.emplace_back(dist2(p + 3 * i, p + 3 * j), static_cast<std::uint32_t>(j));
        }
        std::sort(others.begin(), others.end());
        double sum = 0.0;
        for (std::size_t j = 0; j < t; ++j) sum += std::sqrt(others[j].first);
        rho[i] = sum;
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (rho[a] != rho[b]) return invert ? rho[a] > rho[b] : rho[a] < rho[b];
        return a < b;
    });
    order.resize(k);
    return order;
}

// Per-class counts tallied point by point, averaged exactly as documented.
struct MetricsRecount {
    std::vector<std::uint64_t> confusion;
    std::vector<double> iou;  // NaN when the class appears nowhere
    double miou = 0.0;
    double oa = 0.0;
    double macc = 0.0;
};

inline MetricsRecount recount_metrics(const std::vector<std::int32_t>& truth,
                                      const std::vector<std::int32_t>& predicted,
                                      std::size_t n_class) {
    MetricsRecount r;
    r.confusion.assign(n_class * n_class, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        r.confusion[static_cast<std::size_t>(truth[i]) * n_class +
                    static_cast<std::size_t>(predicted[i])]++;
    }
    r.iou.assign(n_class, std::numeric_limits<double>::quiet_NaN());
    double iou_sum = 0.0;
    double recall_sum = 0.0;
    std::uint64_t agree = 0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < n_class; ++c) {
        std::uint64_t tp = 0;
        std::uint64_t fp = 0;
        std::uint64_t fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool t = static_cast<std::size_t>(truth[i]) == c;
            const bool p = static_cast<std::size_t>(predicted[i]) == c;
            if (t && p) ++tp;
            if (!t && p) ++fp;
            if (t && !p) ++fn;
        }
        agree += tp;
        if (tp + fp + fn > 0) {
            r.iou[c] = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
        }
        if (tp + fn > 0) {
            ++present;
            iou_sum += r.iou[c];
            recall_sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
        }
    }
    if (!truth.empty()) r.oa = static_cast<double>(agree) / static_cast<double>(truth.size());
    if (present > 0) {
        r.miou = iou_sum / static_cast<double>(present);
        r.macc = recall_sum / static_cast<double>(present);
    }
    return r;
}

// Relative error with a unit floor, the formula quoted by the gradient
// checks: |a-b| / max(|a|, |b|, 0.01).
inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 0.01});
}

inline std::vector<double> random_values(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
    pointseg::Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = lo + (hi - lo) * rng.uniform();
    return v;
}

}  // namespace oracles
