#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pointseg/rng.hpp"
#include "pointseg/tensor.hpp"

namespace pointseg {

// Weights of one shared (pointwise) affine layer.
struct MlpParams {
    Tensor weight;  // d_in x d_out
    Tensor bias;    // d_out

    std::size_t d_in() const { return weight.extent(0); }
    std::size_t d_out() const { return weight.extent(1); }
};

// Fan-in scaled initialization: weight entries uniform in (-1/sqrt(d_in),
// 1/sqrt(d_in)), bias zero. Deterministic in the rng stream.
MlpParams init_mlp(std::size_t d_in, std::size_t d_out, Rng& rng);

// Affine map over the last axis followed by the chosen activation.
Tensor shared_mlp(const Tensor& x, const MlpParams& p, Activation activation,
                  double leaky_slope = 0.2);

struct NamedParam {
    std::string name;
    Tensor tensor;
};

// Ordered, uniquely named set of trainable tensors. The registration order
// is the canonical order used by the optimizer state and the checkpoint
// format.
class ParamStore {
public:
    // Registers and returns the tensor; duplicate names are an error.
    Tensor add(const std::string& name, Tensor t);

    // Registers "<prefix>.weight" and "<prefix>.bias" freshly initialized.
    MlpParams add_mlp(const std::string& prefix, std::size_t d_in, std::size_t d_out, Rng& rng);

    const std::vector<NamedParam>& items() const { return items_; }
    std::size_t count() const { return items_.size(); }

    // Total number of scalar values across all parameters.
    std::size_t value_count() const;

    const NamedParam* find(const std::string& name) const;

    void zero_grad();

private:
    std::vector<NamedParam> items_;
};

// Adam with the conventional defaults and bias correction; `lr` is mutable
// state so the epoch decay composes.
struct AdamState {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;

    struct Moments {
        std::vector<double> m;
        std::vector<double> v;
    };
    // Parallel to ParamStore registration order; sized on the first step.
    std::vector<Moments> moments;
};

// One bias-corrected update over every parameter in the store. Parameters
// whose gradient was never touched this step are treated as zero-gradient.
// Throws OptimizationError naming the parameter on a non-finite gradient.
void adam_step(ParamStore& params, AdamState& state);

// Multiplies the learning rate by `factor` (the per-epoch 5% decay).
void lr_decay(AdamState& state, double factor = 0.95);

}  // namespace pointseg
