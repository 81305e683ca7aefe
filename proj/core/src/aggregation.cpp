#include "pointseg/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "pointseg/errors.hpp"
#include "pointseg/samplers.hpp"

namespace pointseg {

std::size_t locse_raw_width(LocSEVariant variant) {
    switch (variant) {
        case LocSEVariant::center_only: return 3;
        case LocSEVariant::neighbor_only: return 3;
        case LocSEVariant::center_neighbor: return 6;
        case LocSEVariant::center_neighbor_dist: return 7;
        case LocSEVariant::center_neighbor_rel: return 9;
        case LocSEVariant::full: return 10;
    }
    throw ArgumentError("unknown spatial-encoding variant");
}

const char* locse_variant_name(LocSEVariant variant) {
    switch (variant) {
        case LocSEVariant::center_only: return "center_only";
        case LocSEVariant::neighbor_only: return "neighbor_only";
        case LocSEVariant::center_neighbor: return "center_neighbor";
        case LocSEVariant::center_neighbor_dist: return "center_neighbor_dist";
        case LocSEVariant::center_neighbor_rel: return "center_neighbor_rel";
        case LocSEVariant::full: return "full";
    }
    return "?";
}

const char* pool_mode_name(PoolMode mode) {
    switch (mode) {
        case PoolMode::attentive: return "attentive";
        case PoolMode::max: return "max";
        case PoolMode::mean: return "mean";
        case PoolMode::sum: return "sum";
    }
    return "?";
}

void BlockConfig::validate() const {
    if (units < 1 || units > 3) throw ConfigError("block units must be 1, 2 or 3");
    if (d_out < 2 || d_out % 2 != 0) {
        throw ConfigError("block d_out must be even and at least 2 (internal width is d_out/2)");
    }
    if (locse.k < 1) throw ConfigError("neighbor count k must be at least 1");
}

std::vector<double> gather_neighbor_positions(std::span<const double> positions,
                                              const NeighborIndex& idx) {
    const std::size_t n = positions.size() / 3;
    std::vector<double> out(idx.indices.size() * 3);
    for (std::size_t r = 0; r < idx.indices.size(); ++r) {
        const std::uint32_t i = idx.indices[r];
        if (i >= n) throw IndexError("neighbor index out of range of the position array");
        out[3 * r] = positions[3 * i];
        out[3 * r + 1] = positions[3 * i + 1];
        out[3 * r + 2] = positions[3 * i + 2];
    }
    return out;
}

std::vector<double> raw_relative_encoding(std::span<const double> centers,
                                          std::span<const double> neighbors, std::size_t k,
                                          LocSEVariant variant) {
    if (k == 0) throw ShapeError("raw_relative_encoding: k must be positive");
    if (centers.size() % 3 != 0) throw ShapeError("raw_relative_encoding: centers must be Q x 3");
    const std::size_t q_n = centers.size() / 3;
    if (neighbors.size() != q_n * k * 3) {
        throw ShapeError("raw_relative_encoding: neighbors must be Q x K x 3");
    }

    const std::size_t width = locse_raw_width(variant);
    std::vector<double> out(q_n * k * width);
    for (std::size_t q = 0; q < q_n; ++q) {
        const double* c = centers.data() + 3 * q;
        for (std::size_t j = 0; j < k; ++j) {
            const double* nb = neighbors.data() + 3 * (q * k + j);
            const double rel[3] = {c[0] - nb[0], c[1] - nb[1], c[2] - nb[2]};
            const double d = std::sqrt(rel[0] * rel[0] + rel[1] * rel[1] + rel[2] * rel[2]);
            double* row = out.data() + (q * k + j) * width;
            switch (variant) {
                case LocSEVariant::center_only:
                    row[0] = c[0]; row[1] = c[1]; row[2] = c[2];
                    break;
                case LocSEVariant::neighbor_only:
                    row[0] = nb[0]; row[1] = nb[1]; row[2] = nb[2];
                    break;
                case LocSEVariant::center_neighbor:
                    row[0] = c[0]; row[1] = c[1]; row[2] = c[2];
                    row[3] = nb[0]; row[4] = nb[1]; row[5] = nb[2];
                    break;
                case LocSEVariant::center_neighbor_dist:
                    row[0] = c[0]; row[1] = c[1]; row[2] = c[2];
                    row[3] = nb[0]; row[4] = nb[1]; row[5] = nb[2];
                    row[6] = d;
                    break;
                case LocSEVariant::center_neighbor_rel:
                    row[0] = c[0]; row[1] = c[1]; row[2] = c[2];
                    row[3] = nb[0]; row[4] = nb[1]; row[5] = nb[2];
                    row[6] = rel[0]; row[7] = rel[1]; row[8] = rel[2];
                    break;
                case LocSEVariant::full:
                    row[0] = c[0]; row[1] = c[1]; row[2] = c[2];
                    row[3] = nb[0]; row[4] = nb[1]; row[5] = nb[2];
                    row[6] = rel[0]; row[7] = rel[1]; row[8] = rel[2];
                    row[9] = d;
                    break;
            }
        }
    }
    return out;
}

Tensor relative_position_encoding(std::span<const double> centers,
                                  std::span<const double> neighbors, std::size_t k,
                                  LocSEVariant variant, const MlpParams& params,
                                  double leaky_slope) {
    const std::size_t width = locse_raw_width(variant);
    if (params.d_in() != width) {
        throw ConfigError(std::string("spatial encoding MLP expects d_in ") +
                          std::to_string(params.d_in()) + " but variant " +
                          locse_variant_name(variant) + " produces " + std::to_string(width));
    }
    std::vector<double> raw = raw_relative_encoding(centers, neighbors, k, variant);
    const std::size_t q_n = centers.size() / 3;
    Tensor raw_t = Tensor::constant(std::move(raw), {q_n, k, width});
    return shared_mlp(raw_t, params, Activation::leaky_relu, leaky_slope);
}

Tensor locse(std::span<const double> positions, const Tensor& features, const NeighborIndex& idx,
             const LocSEConfig& cfg, const MlpParams& params, double leaky_slope) {
    if (features.rank() != 2) throw ShapeError("locse: features must be Q x d");
    const std::size_t q_n = features.extent(0);
    const std::size_t d = features.extent(1);
    if (positions.size() != 3 * q_n) {
        throw ShapeError("locse: positions and features describe different point counts");
    }
    if (idx.q != q_n) throw ShapeError("locse: neighbor index built over a different point set");
    if (params.d_out() != d) {
        throw ConfigError("locse: encoding width " + std::to_string(params.d_out()) +
                          " must equal the feature width " + std::to_string(d));
    }

    const std::vector<double> neighbors = gather_neighbor_positions(positions, idx);
    Tensor r = relative_position_encoding(positions, neighbors, idx.k, cfg.variant, params,
                                          leaky_slope);
    Tensor f = gather_neighbors(features, idx.indices, idx.k);
    return concat_lastaxis(r, f);
}

Tensor attentive_pool(const Tensor& fhat, const MlpParams& score_params,
                      const MlpParams& post_params, PoolMode mode, double leaky_slope) {
    if (fhat.rank() != 3) throw ShapeError("attentive_pool: input must be Q x K x D");
    const std::size_t d = fhat.extent(2);
    if (post_params.d_in() != d) {
        throw ShapeError("attentive_pool: post MLP d_in does not match feature width");
    }

    Tensor pooled;
    switch (mode) {
        case PoolMode::attentive: {
            if (score_params.d_in() != d || score_params.d_out() != d) {
                throw ShapeError("attentive_pool: score MLP must map D -> D");
            }
            Tensor scores = softmax_middle(affine(fhat, score_params.weight, score_params.bias));
            pooled = sum_middle(mul(fhat, scores));
            break;
        }
        case PoolMode::max: pooled = max_middle(fhat); break;
        case PoolMode::mean: pooled = mean_middle(fhat); break;
        case PoolMode::sum: pooled = sum_middle(fhat); break;
    }
    return shared_mlp(pooled, post_params, Activation::leaky_relu, leaky_slope);
}

BlockParams make_block_params(ParamStore& store, const std::string& prefix, std::size_t d_in,
                              const BlockConfig& cfg, Rng& rng) {
    cfg.validate();
    if (d_in == 0) throw ConfigError("block input width must be positive");
    const std::size_t d_mid = cfg.d_out / 2;

    BlockParams p;
    p.pre = store.add_mlp(prefix + ".pre", d_in, d_mid, rng);
    for (std::size_t u = 0; u < cfg.units; ++u) {
        const std::string unit_prefix = prefix + ".unit" + std::to_string(u);
        const std::size_t fhat_width = cfg.use_locse ? 2 * d_mid : d_mid;
        const std::size_t out_width = (u + 1 == cfg.units) ? cfg.d_out : d_mid;
        BlockParams::Unit unit;
        if (cfg.use_locse) {
            unit.locse = store.add_mlp(unit_prefix + ".locse",
                                       locse_raw_width(cfg.locse.variant), d_mid, rng);
        }
        if (cfg.pooling == PoolMode::attentive) {
            unit.score = store.add_mlp(unit_prefix + ".score", fhat_width, fhat_width, rng);
        }
        unit.post = store.add_mlp(unit_prefix + ".post", fhat_width, out_width, rng);
        p.units.push_back(std::move(unit));
    }
    p.post = store.add_mlp(prefix + ".post", cfg.d_out, 2 * cfg.d_out, rng);
    p.skip = store.add_mlp(prefix + ".skip", d_in, 2 * cfg.d_out, rng);
    return p;
}

Tensor dilated_residual_block(std::span<const double> positions, const Tensor& features,
                              const NeighborIndex& idx, const BlockConfig& cfg,
                              const BlockParams& params) {
    cfg.validate();
    if (features.rank() != 2) throw ShapeError("residual block: features must be N x d_in");
    if (params.units.size() != cfg.units) {
        throw ConfigError("residual block: parameter set was built for a different unit count");
    }

    Tensor x = shared_mlp(features, params.pre, Activation::leaky_relu, cfg.leaky_slope);
    for (std::size_t u = 0; u < cfg.units; ++u) {
        Tensor fhat = cfg.use_locse
                          ? locse(positions, x, idx, cfg.locse, params.units[u].locse,
                                  cfg.leaky_slope)
                          : gather_neighbors(x, idx.indices, idx.k);
        x = attentive_pool(fhat, params.units[u].score, params.units[u].post, cfg.pooling,
                           cfg.leaky_slope);
    }
    Tensor main = affine(x, params.post.weight, params.post.bias);
    Tensor skip = affine(features, params.skip.weight, params.skip.bias);
    return leaky_relu(add(main, skip), cfg.leaky_slope);
}

Downsampled downsample_layer(std::span<const double> positions, const Tensor& features,
                             double ratio, std::uint64_t seed) {
    if (features.rank() != 2) throw ShapeError("downsample: features must be N x d");
    const std::size_t n = features.extent(0);
    if (n == 0) throw ArgumentError("downsample: empty input");
    if (positions.size() != 3 * n) {
        throw ShapeError("downsample: positions and features describe different point counts");
    }
    if (!(ratio > 0.0 && ratio < 1.0)) throw ArgumentError("downsample: ratio must be in (0, 1)");

    const auto k = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(static_cast<double>(n) * ratio)), 1, n);
    Downsampled out;
    out.kept = random_indices(n, k, seed);
    out.positions.resize(3 * k);
    for (std::size_t i = 0; i < k; ++i) {
        for (int d = 0; d < 3; ++d) out.positions[3 * i + d] = positions[3 * out.kept[i] + d];
    }
    out.features = gather_rows(features, out.kept);
    return out;
}

Tensor upsample_layer(std::span<const double> coarse_positions, const Tensor& coarse_features,
                      std::span<const double> fine_positions, const Tensor& skip_features,
                      const MlpParams& params, double leaky_slope, KnnBackend backend) {
    if (coarse_features.rank() != 2 || skip_features.rank() != 2) {
        throw ShapeError("upsample: features must be rank 2");
    }
    if (coarse_positions.size() != 3 * coarse_features.extent(0)) {
        throw ShapeError("upsample: coarse positions and features disagree");
    }
    if (fine_positions.size() != 3 * skip_features.extent(0)) {
        throw ShapeError("upsample: fine positions and skip features disagree");
    }

    PointCloud coarse;
    coarse.positions.assign(coarse_positions.begin(), coarse_positions.end());
    PointCloud fine;
    fine.positions.assign(fine_positions.begin(), fine_positions.end());
    const NeighborIndex nn = nearest_one(coarse, fine, backend);

    Tensor copied = gather_rows(coarse_features, nn.indices);
    Tensor cat = concat_lastaxis(copied, skip_features);
    return shared_mlp(cat, params, Activation::leaky_relu, leaky_slope);
}

void dump_attention_matrix(const MlpParams& score_params, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const std::size_t rows = score_params.d_in();
    const std::size_t cols = score_params.d_out();
    const auto values = score_params.weight.values();
    char buf[40];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", values[r * cols + c]);
            out << buf;
            if (c + 1 < cols) out << ',';
        }
        out << '\n';
    }
    if (!out) throw IoError("short write to " + path);
}

}  // namespace pointseg
