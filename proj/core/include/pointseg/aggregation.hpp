#pragma once

#include <span>
#include <string>
#include <vector>

#include "pointseg/knn.hpp"
#include "pointseg/nn.hpp"

namespace pointseg {

// Which geometric components feed the per-neighbor spatial encoding. The raw
// concatenation widths are 3 / 3 / 6 / 7 / 9 / 10; `full` is
// center, neighbor, center-neighbor offset, and Euclidean distance.
enum class LocSEVariant {
    center_only,
    neighbor_only,
    center_neighbor,
    center_neighbor_dist,
    center_neighbor_rel,
    full,
};

std::size_t locse_raw_width(LocSEVariant variant);
const char* locse_variant_name(LocSEVariant variant);

struct LocSEConfig {
    LocSEVariant variant = LocSEVariant::full;
    std::size_t k = 16;
};

enum class PoolMode { attentive, max, mean, sum };

const char* pool_mode_name(PoolMode mode);

// One residual aggregation block. The block maps d_in to 2*d_out through
// `units` rounds of (spatial encoding + pooling); d_out must be even because
// the internal width is d_out/2.
struct BlockConfig {
    std::size_t units = 2;  // 1, 2 or 3
    PoolMode pooling = PoolMode::attentive;
    LocSEConfig locse;
    bool use_locse = true;
    std::size_t d_out = 16;
    double leaky_slope = 0.2;

    void validate() const;  // throws ConfigError
};

// Neighbor coordinates gathered per query: Q x K x 3, row-major.
std::vector<double> gather_neighbor_positions(std::span<const double> positions,
                                              const NeighborIndex& idx);

// The raw geometric encoding rows (Q*K x raw_width, as a flat buffer) for
// explicit center (Q x 3) and neighbor (Q x K x 3) coordinates.
std::vector<double> raw_relative_encoding(std::span<const double> centers,
                                          std::span<const double> neighbors, std::size_t k,
                                          LocSEVariant variant);

// r[q,k] = MLP(raw encoding row); params.d_in() must equal the variant's raw
// width (ConfigError otherwise). Output width params.d_out() is chosen by the
// caller to match the incoming feature width.
Tensor relative_position_encoding(std::span<const double> centers,
                                  std::span<const double> neighbors, std::size_t k,
                                  LocSEVariant variant, const MlpParams& params,
                                  double leaky_slope = 0.2);

// Augmented neighborhood features r ⊕ f: Q x K x 2d from features Q x d.
Tensor locse(std::span<const double> positions, const Tensor& features, const NeighborIndex& idx,
             const LocSEConfig& cfg, const MlpParams& params, double leaky_slope = 0.2);

// Attention-weighted (or max/mean/sum) reduction over the neighbor axis
// followed by a shared MLP to post_params.d_out(). In attentive mode the
// scores are a linear map D -> D softmaxed over the K neighbors per channel,
// so the weights form a convex combination per (query, channel).
Tensor attentive_pool(const Tensor& fhat, const MlpParams& score_params,
                      const MlpParams& post_params, PoolMode mode, double leaky_slope = 0.2);

// Parameters of one residual block, registered under `prefix`.
struct BlockParams {
    struct Unit {
        MlpParams locse;  // raw_width -> unit input width
        MlpParams score;  // D -> D
        MlpParams post;   // D -> unit output width
    };
    MlpParams pre;  // d_in -> d_out/2, leaky
    std::vector<Unit> units;
    MlpParams post;  // d_out -> 2*d_out, no activation
    MlpParams skip;  // d_in -> 2*d_out, no activation
};

BlockParams make_block_params(ParamStore& store, const std::string& prefix, std::size_t d_in,
                              const BlockConfig& cfg, Rng& rng);

// features N x d_in -> N x 2*d_out: pre-MLP, `units` rounds of
// (LocSE -> pooling) widening to d_out on the last round, post-MLP, plus a
// linear skip from the input; the sum passes through leaky-ReLU. Each round
// gathers one KNN hop, so a u-unit block sees u hops around each point.
Tensor dilated_residual_block(std::span<const double> positions, const Tensor& features,
                              const NeighborIndex& idx, const BlockConfig& cfg,
                              const BlockParams& params);

// Uniformly keeps ceil(n * ratio) rows of both positions and features
// (differentiably for the features).
struct Downsampled {
    std::vector<double> positions;
    Tensor features;
    std::vector<std::uint32_t> kept;
};

Downsampled downsample_layer(std::span<const double> positions, const Tensor& features,
                             double ratio, std::uint64_t seed);

// Each fine point copies the feature of its nearest coarse point, the skip
// feature is concatenated, and a shared MLP mixes the pair.
Tensor upsample_layer(std::span<const double> coarse_positions, const Tensor& coarse_features,
                      std::span<const double> fine_positions, const Tensor& skip_features,
                      const MlpParams& params, double leaky_slope = 0.2,
                      KnnBackend backend = KnnBackend::automatic);

// Writes a score-MLP weight matrix as plain CSV (row-major, one row per
// line, full double precision).
void dump_attention_matrix(const MlpParams& score_params, const std::string& path);

}  // namespace pointseg
