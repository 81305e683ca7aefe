#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pointseg/aggregation.hpp"
#include "pointseg/cloud.hpp"
#include "pointseg/metrics.hpp"
#include "pointseg/nn.hpp"

namespace pointseg {

// Complete description of the encoder-decoder. encoder_widths are the block
// output widths per encoder layer; each must be divisible by 4 because a
// block internally narrows to a quarter of its output width. The input MLP
// lifts raw channels to input_width before the first block.
struct NetworkConfig {
    std::size_t d_in = 3;  // 3 = xyz, 4 = xyz+intensity, 6 = xyz+rgb
    std::size_t n_class = 3;
    std::size_t input_width = 8;
    std::vector<std::size_t> encoder_widths = {32, 128, 256, 512};
    double decimation = 0.25;
    std::size_t k = 16;
    std::size_t units = 2;
    PoolMode pooling = PoolMode::attentive;
    LocSEVariant locse_variant = LocSEVariant::full;
    bool use_locse = true;
    double leaky_slope = 0.2;
    std::vector<std::size_t> head_widths = {64, 32};
    double dropout = 0.5;
    std::uint64_t seed = 0;

    std::size_t layers() const { return encoder_widths.size(); }
    BlockConfig block_config(std::size_t layer) const;
    void validate() const;  // throws ConfigError
};

enum class ForwardMode { train, infer };

// Shape evidence recorded by one forward pass.
struct ForwardTrace {
    std::size_t input_points = 0;
    std::size_t input_width = 0;
    std::vector<std::size_t> encoder_counts;  // point counts after each downsample
    std::vector<std::size_t> block_widths;    // block output widths per layer
    std::vector<std::size_t> decoder_counts;  // point counts restored per decoder step
    std::vector<std::size_t> head_widths;     // including the final class count
    std::size_t output_points = 0;
    bool dropout_active = false;
};

class Network {
public:
    const NetworkConfig& config() const { return cfg_; }
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }
    std::size_t parameter_count() const { return store_.value_count(); }

    // Per-point class logits (N x n_class). Train mode activates dropout;
    // the per-layer random decimation derives from `seed` in both modes, so
    // identical (weights, cloud, mode, seed) gives identical logits.
    // Requires cloud.size() >= 16 and attributes matching d_in.
    Tensor forward(const PointCloud& cloud, ForwardMode mode, std::uint64_t seed,
                   ForwardTrace* trace = nullptr) const;

    // Argmax labels in infer mode (ties to the lower class index).
    std::vector<std::int32_t> predict(const PointCloud& cloud, std::uint64_t seed = 0) const;

    // One weight-matrix CSV per encoder layer, named layer<i>_W.csv
    // (1-based), written into `directory`. Returns the file paths.
    std::vector<std::string> dump_attention_matrices(const std::string& directory) const;

private:
    friend Network build_network(const NetworkConfig& cfg);
    NetworkConfig cfg_;
    ParamStore store_;
    MlpParams input_mlp_;
    std::vector<BlockParams> blocks_;
    std::vector<MlpParams> decoder_;
    std::vector<MlpParams> head_;
    MlpParams classifier_;
};

// Allocates and deterministically initializes all parameters from cfg.seed.
Network build_network(const NetworkConfig& cfg);

struct TrainOptions {
    std::size_t epochs = 50;
    double lr_decay = 0.95;  // multiplied into the Adam lr after each epoch
    // Inverse-frequency class weighting of the loss (off by default).
    bool weight_classes = false;
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double lr = 0.0;
    double train_miou = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
};

// Epochs of single-scene steps (forward, loss, backward, Adam update) with
// the learning rate multiplied by lr_decay after every epoch. Scene order is
// reshuffled deterministically per epoch from the network seed. Throws
// OptimizationError naming epoch and scene on a non-finite loss.
TrainReport train(Network& net, std::span<const PointCloud> scenes, const TrainOptions& options,
                  AdamState& adam);

// Confusion over all scenes in infer mode.
SegmentationMetrics evaluate(const Network& net, std::span<const PointCloud> scenes);

}  // namespace pointseg
