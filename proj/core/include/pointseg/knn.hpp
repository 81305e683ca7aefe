#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pointseg/cloud.hpp"

namespace pointseg {

// K nearest neighbors for each query point: indices is row-major Q x K into
// the reference cloud, distances the matching Euclidean distances, ascending
// per row. Ties are broken toward the lower reference index, so results are
// fully deterministic.
struct NeighborIndex {
    std::size_t q = 0;
    std::size_t k = 0;
    std::vector<std::uint32_t> indices;
    std::vector<double> distances;

    std::span<const std::uint32_t> row(std::size_t i) const {
        return {indices.data() + k * i, k};
    }
    std::span<const double> row_distances(std::size_t i) const {
        return {distances.data() + k * i, k};
    }
};

enum class KnnBackend {
    automatic,   // grid for large inputs, brute force for small ones
    brute_force,
    grid,
};

// Exact KNN under the Euclidean metric. Both backends return identical
// results (indices and distances). When the query cloud is the reference
// cloud, each point is its own nearest neighbor. Throws ArgumentError when
// k exceeds the reference size or either cloud is empty.
NeighborIndex knn(const PointCloud& reference, const PointCloud& queries, std::size_t k,
                  KnnBackend backend = KnnBackend::automatic);

// knn with k = 1.
NeighborIndex nearest_one(const PointCloud& reference, const PointCloud& queries,
                          KnnBackend backend = KnnBackend::automatic);

// K nearest neighbors of each point within its own cloud, with the point
// itself left out of its row. Requires k < cloud size.
NeighborIndex knn_excluding_self(const PointCloud& cloud, std::size_t k,
                                 KnnBackend backend = KnnBackend::automatic);

}  // namespace pointseg
