#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace pointseg {

namespace detail {
struct Node;
}

// Dense row-major 64-bit tensor with reverse-mode differentiation. A Tensor
// is a cheap handle onto a graph node; ops build the graph and backward()
// walks it in reverse topological order. Gradients accumulate into every
// reachable node that requires them (parameters, and anything computed from
// parameters).
class Tensor {
public:
    Tensor() = default;

    static Tensor constant(std::vector<double> values, std::vector<std::size_t> shape);
    static Tensor parameter(std::vector<double> values, std::vector<std::size_t> shape);
    static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const std::vector<std::size_t>& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t extent(std::size_t axis) const;
    std::size_t size() const;

    std::span<const double> values() const;
    // Mutable access is for leaf initialization and optimizer updates only;
    // writing to an interior node would desynchronize the recorded graph.
    std::span<double> values_mut();

    bool requires_grad() const;
    // Gradient accumulated by the last backward(); empty span when this node
    // was not reached or does not require gradients.
    std::span<const double> grad() const;
    std::span<double> grad_mut();
    void zero_grad();

    // The single element of a scalar tensor.
    double scalar() const;

    // Reverse-mode sweep seeded with d(self)/d(self) = 1; self must be scalar.
    void backward();

private:
    friend struct detail::Node;
    friend class TensorOps;
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    std::shared_ptr<detail::Node> node_;
};

enum class Activation { none, leaky_relu };

// Elementwise ops require identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

// max(x, slope * x) elementwise.
Tensor leaky_relu(const Tensor& x, double slope = 0.2);

// x @ weight + bias over the last axis: [... x d_in] -> [... x d_out] with
// weight [d_in x d_out], bias [d_out], applied identically to every leading
// slice (the "shared" in shared MLP).
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Concatenation along the last axis; all leading extents must agree.
Tensor concat_lastaxis(const Tensor& a, const Tensor& b);

// Numerically stable softmax over the last axis.
Tensor softmax_lastaxis(const Tensor& x);

// Rank-3 [Q x K x D] ops over the middle (neighbor) axis.
Tensor softmax_middle(const Tensor& x);
Tensor sum_middle(const Tensor& x);
Tensor mean_middle(const Tensor& x);
// Ties resolve to the lowest k so backward is deterministic.
Tensor max_middle(const Tensor& x);

// out[q*k + j, :] = features[indices[q*k + j], :], reshaped to [Q x K x d];
// backward scatter-adds. indices.size() must be a multiple of k.
Tensor gather_neighbors(const Tensor& features, std::span<const std::uint32_t> indices,
                        std::size_t k);

// Row gather: [N x d] -> [R x d].
Tensor gather_rows(const Tensor& features, std::span<const std::uint32_t> rows);

// Inverted dropout: in active mode zeroes each element with probability
// `rate` and rescales survivors by 1/(1-rate); inactive mode is the
// identity. Mask is deterministic in `seed`.
Tensor dropout(const Tensor& x, double rate, std::uint64_t seed, bool active);

// Sum of all elements, as a scalar tensor.
Tensor sum_all(const Tensor& x);

// Mean negative log-likelihood of labels under softmax(logits[N x C]),
// fused and max-shifted for stability. Optional per-class weights turn it
// into a weighted mean (divided by the summed weight of the labels present).
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::int32_t> labels,
                             std::span<const double> class_weights = {});

}  // namespace pointseg
