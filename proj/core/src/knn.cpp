#include "pointseg/knn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "pointseg/errors.hpp"
#include "pointseg/memtrack.hpp"

namespace pointseg {

namespace {

constexpr std::uint32_t kNoExclude = std::numeric_limits<std::uint32_t>::max();

inline double dist2(const double* a, const double* b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

struct Candidate {
    double d2;
    std::uint32_t idx;
};

// Lexicographic (distance, index): the deterministic tie-break rule.
inline bool better(const Candidate& a, const Candidate& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.idx < b.idx);
}

// Fixed-capacity best-k set; worst candidate on top of the heap.
class BestK {
public:
    explicit BestK(std::size_t k) : k_(k) { heap_.reserve(k); }

    bool full() const { return heap_.size() == k_; }
    const Candidate& worst() const { return heap_.front(); }

    void offer(Candidate c) {
        if (heap_.size() < k_) {
            heap_.push_back(c);
            std::push_heap(heap_.begin(), heap_.end(), better);
        } else if (better(c, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), better);
            heap_.back() = c;
            std::push_heap(heap_.begin(), heap_.end(), better);
        }
    }

    // Drain into ascending (distance, index) order.
    void emit(std::uint32_t* indices, double* distances) {
        std::sort_heap(heap_.begin(), heap_.end(), better);
        for (std::size_t i = 0; i < heap_.size(); ++i) {
            indices[i] = heap_[i].idx;
            distances[i] = std::sqrt(heap_[i].d2);
        }
        heap_.clear();
    }

private:
    std::size_t k_;
    std::vector<Candidate> heap_;
};

void brute_query(const PointCloud& reference, const double* q, std::size_t k,
                 std::uint32_t exclude, std::uint32_t* indices, double* distances) {
    BestK best(k);
    const double* ref = reference.positions.data();
    const std::size_t n = reference.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::uint32_t>(i) == exclude) continue;
        best.offer({dist2(q, ref + 3 * i), static_cast<std::uint32_t>(i)});
    }
    best.emit(indices, distances);
}

class UniformGrid {
public:
    explicit UniformGrid(const PointCloud& reference) : cloud_(reference) {
        const std::size_t n = reference.size();
        const double* p = reference.positions.data();
        lo_ = {p[0], p[1], p[2]};
        hi_ = lo_;
        for (std::size_t i = 1; i < n; ++i) {
            for (int d = 0; d < 3; ++d) {
                lo_[d] = std::min(lo_[d], p[3 * i + d]);
                hi_[d] = std::max(hi_[d], p[3 * i + d]);
            }
        }
        double max_extent = 0.0;
        for (int d = 0; d < 3; ++d) max_extent = std::max(max_extent, hi_[d] - lo_[d]);
        h_ = max_extent / std::max(1.0, std::cbrt(static_cast<double>(n)));
        if (!(h_ > 0.0)) h_ = 1.0;  // degenerate cloud, single cell
        for (int d = 0; d < 3; ++d) {
            dims_[d] = std::max<std::int64_t>(
                1, static_cast<std::int64_t>(std::floor((hi_[d] - lo_[d]) / h_)) + 1);
        }

        const std::size_t n_cells =
            static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
        cell_start_.assign(n_cells + 1, 0);
        std::vector<std::uint32_t, TrackingAllocator<std::uint32_t>> cell_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            cell_of[i] = static_cast<std::uint32_t>(cell_index(coords_of(p + 3 * i)));
            ++cell_start_[cell_of[i] + 1];
        }
        for (std::size_t c = 0; c < n_cells; ++c) cell_start_[c + 1] += cell_start_[c];
        point_ids_.resize(n);
        std::vector<std::uint32_t, TrackingAllocator<std::uint32_t>> cursor(
            cell_start_.begin(), cell_start_.end() - 1);
        // Fill in index order so cell contents stay index-sorted.
        for (std::size_t i = 0; i < n; ++i) point_ids_[cursor[cell_of[i]]++] = static_cast<std::uint32_t>(i);
    }

    void query(const double* q, std::size_t k, std::uint32_t exclude, std::uint32_t* indices,
               double* distances) const {
        BestK best(k);
        const double* p = cloud_.positions.data();
        const std::array<std::int64_t, 3> c0 = coords_of(q);

        std::int64_t max_ring = 0;
        for (int d = 0; d < 3; ++d) {
            max_ring = std::max(max_ring, std::max(c0[d], dims_[d] - 1 - c0[d]));
        }

        auto scan_cell = [&](std::int64_t cx, std::int64_t cy, std::int64_t cz) {
            if (cx < 0 || cy < 0 || cz < 0 || cx >= dims_[0] || cy >= dims_[1] || cz >= dims_[2]) {
                return;
            }
            const std::size_t cell = cell_index({cx, cy, cz});
            for (std::uint32_t s = cell_start_[cell]; s < cell_start_[cell + 1]; ++s) {
                const std::uint32_t i = point_ids_[s];
                if (i == exclude) continue;
                best.offer({dist2(q, p + 3 * i), i});
            }
        };

        for (std::int64_t r = 0; r <= max_ring; ++r) {
            if (r == 0) {
                scan_cell(c0[0], c0[1], c0[2]);
            } else {
                for (std::int64_t dx = -r; dx <= r; ++dx) {
                    for (std::int64_t dy = -r; dy <= r; ++dy) {
                        if (std::max(std::llabs(dx), std::llabs(dy)) == r) {
                            for (std::int64_t dz = -r; dz <= r; ++dz) {
                                scan_cell(c0[0] + dx, c0[1] + dy, c0[2] + dz);
                            }
                        } else {
                            scan_cell(c0[0] + dx, c0[1] + dy, c0[2] - r);
                            scan_cell(c0[0] + dx, c0[1] + dy, c0[2] + r);
                        }
                    }
                }
            }
            if (!best.full()) continue;
            // Any unvisited point lies outside the box of cells within
            // Chebyshev radius r of c0; stop once even the closest approach
            // to that exterior cannot beat the current worst candidate. The
            // 1e-12 slack keeps rounding of the bound from stopping early.
            const double gap = exterior_gap(q, c0, r);
            if (gap > 0.0 && gap * gap * (1.0 - 1e-12) > best.worst().d2) break;
        }
        best.emit(indices, distances);
    }

private:
    std::array<std::int64_t, 3> coords_of(const double* p) const {
        std::array<std::int64_t, 3> c;
        for (int d = 0; d < 3; ++d) {
            auto v = static_cast<std::int64_t>(std::floor((p[d] - lo_[d]) / h_));
            c[d] = std::clamp<std::int64_t>(v, 0, dims_[d] - 1);
        }
        return c;
    }

    std::size_t cell_index(const std::array<std::int64_t, 3>& c) const {
        return static_cast<std::size_t>((c[0] * dims_[1] + c[1]) * dims_[2] + c[2]);
    }

    // Distance from q to the complement of the geometric box spanned by the
    // cells within Chebyshev radius r of c0 (0 when q lies outside the box).
    double exterior_gap(const double* q, const std::array<std::int64_t, 3>& c0,
                        std::int64_t r) const {
        double gap = std::numeric_limits<double>::infinity();
        for (int d = 0; d < 3; ++d) {
            const double box_lo = lo_[d] + static_cast<double>(c0[d] - r) * h_;
            const double box_hi = lo_[d] + static_cast<double>(c0[d] + r + 1) * h_;
            gap = std::min(gap, std::min(q[d] - box_lo, box_hi - q[d]));
        }
        return std::max(gap, 0.0);
    }

    const PointCloud& cloud_;
    std::array<double, 3> lo_{}, hi_{};
    std::array<std::int64_t, 3> dims_{};
    double h_ = 1.0;
    std::vector<std::uint32_t, TrackingAllocator<std::uint32_t>> cell_start_;
    std::vector<std::uint32_t, TrackingAllocator<std::uint32_t>> point_ids_;
};

NeighborIndex knn_impl(const PointCloud& reference, const PointCloud& queries, std::size_t k,
                       KnnBackend backend, bool exclude_self) {
    if (reference.size() == 0) throw ArgumentError("knn: empty reference cloud");
    if (queries.size() == 0) throw ArgumentError("knn: empty query cloud");
    if (k == 0) throw ArgumentError("knn: k must be positive");
    const std::size_t capacity = reference.size() - (exclude_self ? 1 : 0);
    if (k > capacity) {
        throw ArgumentError("knn: k=" + std::to_string(k) + " exceeds the " +
                            std::to_string(capacity) + " available reference points");
    }

    NeighborIndex out;
    out.q = queries.size();
    out.k = k;
    out.indices.resize(out.q * k);
    out.distances.resize(out.q * k);

    const bool use_grid = backend == KnnBackend::grid ||
                          (backend == KnnBackend::automatic && reference.size() >= 512);
    const double* q = queries.positions.data();
    if (use_grid) {
        UniformGrid grid(reference);
        for (std::size_t i = 0; i < out.q; ++i) {
            const std::uint32_t exclude =
                exclude_self ? static_cast<std::uint32_t>(i) : kNoExclude;
            grid.query(q + 3 * i, k, exclude, out.indices.data() + k * i,
                       out.distances.data() + k * i);
        }
    } else {
        for (std::size_t i = 0; i < out.q; ++i) {
            const std::uint32_t exclude =
                exclude_self ? static_cast<std::uint32_t>(i) : kNoExclude;
            brute_query(reference, q + 3 * i, k, exclude, out.indices.data() + k * i,
                        out.distances.data() + k * i);
        }
    }
    return out;
}

}  // namespace

NeighborIndex knn(const PointCloud& reference, const PointCloud& queries, std::size_t k,
                  KnnBackend backend) {
    return knn_impl(reference, queries, k, backend, false);
}

NeighborIndex nearest_one(const PointCloud& reference, const PointCloud& queries,
                          KnnBackend backend) {
    return knn_impl(reference, queries, 1, backend, false);
}

NeighborIndex knn_excluding_self(const PointCloud& cloud, std::size_t k, KnnBackend backend) {
    return knn_impl(cloud, cloud, k, backend, true);
}

}  // namespace pointseg
