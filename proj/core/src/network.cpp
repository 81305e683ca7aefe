#include "pointseg/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pointseg/errors.hpp"
#include "pointseg/knn.hpp"
#include "pointseg/rng.hpp"

namespace pointseg {

BlockConfig NetworkConfig::block_config(std::size_t layer) const {
    if (layer >= layers()) throw ArgumentError("block_config: layer index out of range");
    BlockConfig b;
    b.units = units;
    b.pooling = pooling;
    b.locse = {locse_variant, k};
    b.use_locse = use_locse;
    b.d_out = encoder_widths[layer] / 2;
    b.leaky_slope = leaky_slope;
    return b;
}

void NetworkConfig::validate() const {
    if (d_in != 3 && d_in != 4 && d_in != 6) {
        throw ConfigError("d_in must be 3 (xyz), 4 (xyz+intensity) or 6 (xyz+rgb)");
    }
    if (n_class < 2) throw ConfigError("n_class must be at least 2");
    if (input_width < 1) throw ConfigError("input_width must be positive");
    if (encoder_widths.empty()) throw ConfigError("at least one encoder layer is required");
    for (std::size_t w : encoder_widths) {
        if (w < 4 || w % 4 != 0) {
            throw ConfigError("encoder widths must be multiples of 4 (block internals run at "
                              "a quarter width)");
        }
    }
    if (!std::is_sorted(encoder_widths.begin(), encoder_widths.end())) {
        throw ConfigError("encoder widths must be non-decreasing");
    }
    if (!(decimation > 0.0 && decimation < 1.0)) {
        throw ConfigError("decimation must be in (0, 1)");
    }
    if (k < 1) throw ConfigError("k must be at least 1");
    if (units < 1 || units > 3) throw ConfigError("units must be 1, 2 or 3");
    if (!(leaky_slope >= 0.0) || !std::isfinite(leaky_slope)) {
        throw ConfigError("leaky_slope must be a finite non-negative value");
    }
    if (head_widths.empty()) throw ConfigError("head_widths must not be empty");
    for (std::size_t w : head_widths) {
        if (w < 1) throw ConfigError("head widths must be positive");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
}

Network build_network(const NetworkConfig& cfg) {
    cfg.validate();
    Network net;
    net.cfg_ = cfg;
    Rng rng(derive_seed(cfg.seed, 0x9a7a));

    net.input_mlp_ = net.store_.add_mlp("input", cfg.d_in, cfg.input_width, rng);
    std::size_t width = cfg.input_width;
    for (std::size_t l = 0; l < cfg.layers(); ++l) {
        net.blocks_.push_back(make_block_params(net.store_, "encoder" + std::to_string(l + 1),
                                                width, cfg.block_config(l), rng));
        width = cfg.encoder_widths[l];
    }

    const std::size_t n_layers = cfg.layers();
    for (std::size_t j = 1; j <= n_layers; ++j) {
        const std::size_t skip_width =
            j < n_layers ? cfg.encoder_widths[n_layers - 1 - j] : cfg.encoder_widths[0];
        net.decoder_.push_back(net.store_.add_mlp("decoder" + std::to_string(j),
                                                  width + skip_width, skip_width, rng));
        width = skip_width;
    }

    for (std::size_t i = 0; i < cfg.head_widths.size(); ++i) {
        net.head_.push_back(net.store_.add_mlp("head" + std::to_string(i + 1), width,
                                               cfg.head_widths[i], rng));
        width = cfg.head_widths[i];
    }
    net.classifier_ = net.store_.add_mlp("classifier", width, cfg.n_class, rng);
    return net;
}

namespace {

// Raw input channels per d_in: xyz, optionally followed by the attributes.
Tensor input_features(const PointCloud& cloud, std::size_t d_in) {
    const std::size_t expected_attrs = d_in - 3;
    if (cloud.attr_width != expected_attrs) {
        throw ArgumentError("network expects d_in=" + std::to_string(d_in) + " (" +
                            std::to_string(expected_attrs) + " attribute channels) but the cloud has " +
                            std::to_string(cloud.attr_width));
    }
    const std::size_t n = cloud.size();
    std::vector<double> rows(n * d_in);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = rows.data() + i * d_in;
        for (int d = 0; d < 3; ++d) row[d] = cloud.positions[3 * i + d];
        for (std::size_t a = 0; a < expected_attrs; ++a) {
            row[3 + a] = cloud.attributes[cloud.attr_width * i + a];
        }
    }
    return Tensor::constant(std::move(rows), {n, d_in});
}

NeighborIndex self_knn(const std::vector<double>& positions, std::size_t k) {
    PointCloud pc;
    pc.positions = positions;
    const std::size_t k_eff = std::min(k, pc.size());
    return knn(pc, pc, k_eff);
}

}  // namespace

Tensor Network::forward(const PointCloud& cloud, ForwardMode mode, std::uint64_t seed,
                        ForwardTrace* trace) const {
    const std::size_t n = cloud.size();
    if (n < 16) {
        throw ArgumentError("forward needs at least 16 points, got " + std::to_string(n));
    }
    const std::size_t n_layers = cfg_.layers();

    ForwardTrace local;
    ForwardTrace& tr = trace ? *trace : local;
    tr = ForwardTrace{};
    tr.input_points = n;
    tr.input_width = cfg_.input_width;
    tr.dropout_active = mode == ForwardMode::train && cfg_.dropout > 0.0;

    Tensor x = shared_mlp(input_features(cloud, cfg_.d_in), input_mlp_,
                          Activation::leaky_relu, cfg_.leaky_slope);

    // level_positions[l] holds the coordinates at resolution level l
    // (level 0 is the input); level_skips[l-1] holds the decimated features
    // entering level l, consumed by the decoder on the way back up.
    std::vector<std::vector<double>> level_positions;
    level_positions.push_back(cloud.positions);
    std::vector<Tensor> level_skips;
    Tensor full_res_skip;

    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::vector<double>& pos = level_positions[l];
        const NeighborIndex idx = self_knn(pos, cfg_.k);
        x = dilated_residual_block(pos, x, idx, cfg_.block_config(l), blocks_[l]);
        tr.block_widths.push_back(x.extent(1));
        if (l == 0) full_res_skip = x;

        Downsampled ds = downsample_layer(pos, x, cfg_.decimation,
                                          derive_seed(seed, 0x5a00 + l));
        x = ds.features;
        level_positions.push_back(std::move(ds.positions));
        tr.encoder_counts.push_back(level_positions.back().size() / 3);
        if (l + 1 < n_layers) level_skips.push_back(x);
    }

    for (std::size_t j = 1; j <= n_layers; ++j) {
        const std::vector<double>& coarse = level_positions[n_layers - j + 1];
        const std::vector<double>& fine = level_positions[n_layers - j];
        const Tensor& skip = j < n_layers ? level_skips[n_layers - j - 1] : full_res_skip;
        x = upsample_layer(coarse, x, fine, skip, decoder_[j - 1], cfg_.leaky_slope);
        tr.decoder_counts.push_back(fine.size() / 3);
    }

    for (const MlpParams& mlp : head_) {
        x = shared_mlp(x, mlp, Activation::leaky_relu, cfg_.leaky_slope);
        tr.head_widths.push_back(x.extent(1));
    }
    x = dropout(x, cfg_.dropout, derive_seed(seed, 0xd000), mode == ForwardMode::train);
    Tensor logits = affine(x, classifier_.weight, classifier_.bias);
    tr.head_widths.push_back(logits.extent(1));
    tr.output_points = logits.extent(0);
    return logits;
}

std::vector<std::int32_t> Network::predict(const PointCloud& cloud, std::uint64_t seed) const {
    const Tensor logits = forward(cloud, ForwardMode::infer, seed);
    const std::size_t n = logits.extent(0);
    const std::size_t c_n = logits.extent(1);
    const auto values = logits.values();
    std::vector<std::int32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = values.data() + i * c_n;
        std::size_t best = 0;
        for (std::size_t c = 1; c < c_n; ++c) {
            if (row[c] > row[best]) best = c;
        }
        labels[i] = static_cast<std::int32_t>(best);
    }
    return labels;
}

std::vector<std::string> Network::dump_attention_matrices(const std::string& directory) const {
    if (cfg_.pooling != PoolMode::attentive) {
        throw ConfigError("attention matrices exist only under attentive pooling");
    }
    std::vector<std::string> paths;
    for (std::size_t l = 0; l < blocks_.size(); ++l) {
        std::string path = directory + "/layer" + std::to_string(l + 1) + "_W.csv";
        dump_attention_matrix(blocks_[l].units.front().score, path);
        paths.push_back(std::move(path));
    }
    return paths;
}

namespace {

std::vector<double> inverse_frequency_weights(std::span<const PointCloud> scenes,
                                              std::size_t n_class) {
    std::vector<double> counts(n_class, 0.0);
    double total = 0.0;
    for (const PointCloud& scene : scenes) {
        for (std::int32_t label : *scene.labels) {
            counts[static_cast<std::size_t>(label)] += 1.0;
            total += 1.0;
        }
    }
    std::vector<double> weights(n_class, 0.0);
    for (std::size_t c = 0; c < n_class; ++c) {
        if (counts[c] > 0.0) {
            weights[c] = total / (static_cast<double>(n_class) * counts[c]);
        }
    }
    return weights;
}

void require_labels(const PointCloud& scene, std::size_t n_class, const char* who) {
    if (!scene.labels) throw ArgumentError(std::string(who) + ": scene has no labels");
    for (std::int32_t label : *scene.labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= n_class) {
            throw DataError(std::string(who) + ": label " + std::to_string(label) +
                            " outside [0, " + std::to_string(n_class) + ")");
        }
    }
}

}  // namespace

TrainReport train(Network& net, std::span<const PointCloud> scenes, const TrainOptions& options,
                  AdamState& adam) {
    if (scenes.empty()) throw ArgumentError("train: empty dataset");
    const NetworkConfig& cfg = net.config();
    for (const PointCloud& scene : scenes) require_labels(scene, cfg.n_class, "train");

    std::vector<double> class_weights;
    if (options.weight_classes) class_weights = inverse_frequency_weights(scenes, cfg.n_class);

    TrainReport report;
    std::vector<std::size_t> order(scenes.size());
    for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed(cfg.seed, 0xe90c + epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }

        ConfusionAccumulator acc(cfg.n_class);
        double loss_sum = 0.0;
        const double epoch_lr = adam.lr;
        for (std::size_t si : order) {
            const PointCloud& scene = scenes[si];
            const std::uint64_t step_seed =
                derive_seed(cfg.seed, epoch * 0xf4243 + si);
            const Tensor logits = net.forward(scene, ForwardMode::train, step_seed);
            Tensor loss = softmax_cross_entropy(logits, *scene.labels, class_weights);
            const double loss_value = loss.scalar();
            if (!std::isfinite(loss_value)) {
                throw OptimizationError("training diverged: non-finite loss at epoch " +
                                        std::to_string(epoch) + ", scene " + std::to_string(si));
            }
            loss_sum += loss_value;

            net.params().zero_grad();
            loss.backward();
            adam_step(net.params(), adam);

            // Training mIoU reuses the train-mode logits (dropout noise and
            // all); it tracks progress, not final quality.
            const std::size_t c_n = cfg.n_class;
            const auto values = logits.values();
            std::vector<std::int32_t> preds(scene.size());
            for (std::size_t i = 0; i < scene.size(); ++i) {
                const double* row = values.data() + i * c_n;
                std::size_t best = 0;
                for (std::size_t c = 1; c < c_n; ++c) {
                    if (row[c] > row[best]) best = c;
                }
                preds[i] = static_cast<std::int32_t>(best);
            }
            acc.add(*scene.labels, preds);
        }
        lr_decay(adam, options.lr_decay);

        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_loss = loss_sum / static_cast<double>(scenes.size());
        stats.lr = epoch_lr;
        stats.train_miou = acc.finalize().miou;
        report.epochs.push_back(stats);
    }
    return report;
}

SegmentationMetrics evaluate(const Network& net, std::span<const PointCloud> scenes) {
    if (scenes.empty()) throw ArgumentError("evaluate: empty dataset");
    const NetworkConfig& cfg = net.config();
    ConfusionAccumulator acc(cfg.n_class);
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        require_labels(scenes[i], cfg.n_class, "evaluate");
        const std::vector<std::int32_t> preds =
            net.predict(scenes[i], derive_seed(cfg.seed, 0xeba1 + i));
        acc.add(*scenes[i].labels, preds);
    }
    return acc.finalize();
}

}  // namespace pointseg
