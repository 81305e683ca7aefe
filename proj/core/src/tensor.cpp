#include "pointseg/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <unordered_set>

#include "pointseg/errors.hpp"
#include "pointseg/rng.hpp"

namespace pointseg {

namespace detail {

struct Node {
    std::vector<std::size_t> shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;
};

}  // namespace detail

namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

std::size_t shape_size(std::span<const std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

void ensure_grad(Node& n) {
    if (n.grad.empty()) n.grad.assign(n.values.size(), 0.0);
}

NodePtr new_node(std::vector<std::size_t> shape) {
    auto node = std::make_shared<Node>();
    node->values.resize(shape_size(shape));
    node->shape = std::move(shape);
    return node;
}

}  // namespace

// Crossing point between the public handle and graph internals.
class TensorOps {
public:
    static Tensor wrap(NodePtr node) { return Tensor(std::move(node)); }

    static const NodePtr& node(const Tensor& t) {
        if (!t.node_) throw Error("operation on an undefined tensor");
        return t.node_;
    }
};

namespace {

const NodePtr& node_of(const Tensor& t) { return TensorOps::node(t); }

// Finalizes an op node: wires parents and the backward closure only when a
// gradient can actually flow.
Tensor finish(NodePtr out, std::vector<NodePtr> parents, std::function<void(Node&)> backprop) {
    bool needs = false;
    for (const NodePtr& p : parents) needs = needs || p->requires_grad;
    out->requires_grad = needs;
    if (needs) {
        out->parents = std::move(parents);
        out->backprop = std::move(backprop);
    }
    return TensorOps::wrap(std::move(out));
}

void check_same_shape(const Node& a, const Node& b, const char* who) {
    if (a.shape != b.shape) {
        throw ShapeError(std::string(who) + ": operand shapes differ");
    }
}

// Leading extents (all but the last axis) must agree.
void check_same_leading(const Node& a, const Node& b, const char* who) {
    if (a.shape.size() != b.shape.size()) {
        throw ShapeError(std::string(who) + ": operand ranks differ");
    }
    for (std::size_t i = 0; i + 1 < a.shape.size(); ++i) {
        if (a.shape[i] != b.shape[i]) {
            throw ShapeError(std::string(who) + ": leading extents differ");
        }
    }
}

std::array<std::size_t, 3> rank3_extents(const Node& x, const char* who) {
    if (x.shape.size() != 3) throw ShapeError(std::string(who) + ": expects a rank-3 tensor");
    return {x.shape[0], x.shape[1], x.shape[2]};
}

}  // namespace

Tensor Tensor::constant(std::vector<double> values, std::vector<std::size_t> shape) {
    if (values.size() != shape_size(shape)) {
        throw ShapeError("tensor literal: value count does not match shape");
    }
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    return TensorOps::wrap(std::move(node));
}

Tensor Tensor::parameter(std::vector<double> values, std::vector<std::size_t> shape) {
    Tensor t = constant(std::move(values), std::move(shape));
    t.node_->requires_grad = true;
    return t;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    // Sized before the move; as call arguments the two expressions have no
    // guaranteed evaluation order.
    std::vector<double> values(shape_size(shape), 0.0);
    Tensor t = constant(std::move(values), std::move(shape));
    t.node_->requires_grad = requires_grad;
    return t;
}

const std::vector<std::size_t>& Tensor::shape() const { return node_of(*this)->shape; }

std::size_t Tensor::extent(std::size_t axis) const {
    const auto& s = shape();
    if (axis >= s.size()) throw ArgumentError("tensor extent: axis out of range");
    return s[axis];
}

std::size_t Tensor::size() const { return node_of(*this)->values.size(); }

std::span<const double> Tensor::values() const { return node_of(*this)->values; }

std::span<double> Tensor::values_mut() { return node_of(*this)->values; }

bool Tensor::requires_grad() const { return node_of(*this)->requires_grad; }

std::span<const double> Tensor::grad() const { return node_of(*this)->grad; }

std::span<double> Tensor::grad_mut() {
    Node& n = *node_of(*this);
    ensure_grad(n);
    return n.grad;
}

void Tensor::zero_grad() { node_of(*this)->grad.clear(); }

double Tensor::scalar() const {
    const Node& n = *node_of(*this);
    if (n.values.size() != 1) throw ShapeError("scalar() on a non-scalar tensor");
    return n.values[0];
}

void Tensor::backward() {
    Node* root = node_of(*this).get();
    if (root->values.size() != 1) throw ShapeError("backward() needs a scalar root");
    if (!root->requires_grad) {
        throw Error("backward() on a graph with no differentiable inputs");
    }

    // Post-order DFS emits inputs before consumers; the reverse is the
    // backprop order. Only gradient-requiring nodes participate.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    struct Frame {
        Node* n;
        std::size_t next;
    };
    std::vector<Frame> stack{{root, 0}};
    seen.insert(root);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.n->parents.size()) {
            Node* p = f.n->parents[f.next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.n);
            stack.pop_back();
        }
    }

    ensure_grad(*root);
    root->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop && !n->grad.empty()) n->backprop(*n);
    }
}

Tensor add(const Tensor& a, const Tensor& b) {
    const NodePtr& na = node_of(a);
    const NodePtr& nb = node_of(b);
    check_same_shape(*na, *nb, "add");
    NodePtr out = new_node(na->shape);
    for (std::size_t i = 0; i < out->values.size(); ++i) {
        out->values[i] = na->values[i] + nb->values[i];
    }
    return finish(out, {na, nb}, [na, nb](Node& self) {
        if (na->requires_grad) {
            ensure_grad(*na);
            for (std::size_t i = 0; i < self.grad.size(); ++i) na->grad[i] += self.grad[i];
        }
        if (nb->requires_grad) {
            ensure_grad(*nb);
            for (std::size_t i = 0; i < self.grad.size(); ++i) nb->grad[i] += self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    const NodePtr& na = node_of(a);
    const NodePtr& nb = node_of(b);
    check_same_shape(*na, *nb, "mul");
    NodePtr out = new_node(na->shape);
    for (std::size_t i = 0; i < out->values.size(); ++i) {
        out->values[i] = na->values[i] * nb->values[i];
    }
    return finish(out, {na, nb}, [na, nb](Node& self) {
        if (na->requires_grad) {
            ensure_grad(*na);
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                na->grad[i] += self.grad[i] * nb->values[i];
            }
        }
        if (nb->requires_grad) {
            ensure_grad(*nb);
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                nb->grad[i] += self.grad[i] * na->values[i];
            }
        }
    });
}

Tensor leaky_relu(const Tensor& x, double slope) {
    const NodePtr& nx = node_of(x);
    NodePtr out = new_node(nx->shape);
    for (std::size_t i = 0; i < out->values.size(); ++i) {
        const double v = nx->values[i];
        out->values[i] = v >= 0.0 ? v : slope * v;
    }
    return finish(out, {nx}, [nx, slope](Node& self) {
        if (!nx->requires_grad) return;
        ensure_grad(*nx);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            nx->grad[i] += self.grad[i] * (nx->values[i] >= 0.0 ? 1.0 : slope);
        }
    });
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    const NodePtr& nx = node_of(x);
    const NodePtr& nw = node_of(weight);
    const NodePtr& nb = node_of(bias);
    if (nw->shape.size() != 2) throw ShapeError("affine: weight must be d_in x d_out");
    const std::size_t d_in = nw->shape[0];
    const std::size_t d_out = nw->shape[1];
    if (nx->shape.empty() || nx->shape.back() != d_in) {
        throw ShapeError("affine: input last extent " +
                         std::to_string(nx->shape.empty() ? 0 : nx->shape.back()) +
                         " does not match weight d_in " + std::to_string(d_in));
    }
    if (nb->shape.size() != 1 || nb->shape[0] != d_out) {
        throw ShapeError("affine: bias must have extent d_out");
    }

    std::vector<std::size_t> out_shape = nx->shape;
    out_shape.back() = d_out;
    NodePtr out = new_node(std::move(out_shape));
    const std::size_t m_rows = nx->values.size() / d_in;
    {
        const double* xv = nx->values.data();
        const double* wv = nw->values.data();
        const double* bv = nb->values.data();
        double* ov = out->values.data();
        for (std::size_t m = 0; m < m_rows; ++m) {
            double* orow = ov + m * d_out;
            for (std::size_t j = 0; j < d_out; ++j) orow[j] = bv[j];
            const double* xrow = xv + m * d_in;
            for (std::size_t i = 0; i < d_in; ++i) {
                const double xi = xrow[i];
                const double* wrow = wv + i * d_out;
                for (std::size_t j = 0; j < d_out; ++j) orow[j] += xi * wrow[j];
            }
        }
    }
    return finish(out, {nx, nw, nb}, [nx, nw, nb, m_rows, d_in, d_out](Node& self) {
        const double* g = self.grad.data();
        if (nx->requires_grad) {
            ensure_grad(*nx);
            double* dx = nx->grad.data();
            const double* wv = nw->values.data();
            for (std::size_t m = 0; m < m_rows; ++m) {
                const double* grow = g + m * d_out;
                double* dxrow = dx + m * d_in;
                for (std::size_t i = 0; i < d_in; ++i) {
                    const double* wrow = wv + i * d_out;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < d_out; ++j) acc += grow[j] * wrow[j];
                    dxrow[i] += acc;
                }
            }
        }
        if (nw->requires_grad) {
            ensure_grad(*nw);
            double* dw = nw->grad.data();
            const double* xv = nx->values.data();
            for (std::size_t m = 0; m < m_rows; ++m) {
                const double* xrow = xv + m * d_in;
                const double* grow = g + m * d_out;
                for (std::size_t i = 0; i < d_in; ++i) {
                    const double xi = xrow[i];
                    double* dwrow = dw + i * d_out;
                    for (std::size_t j = 0; j < d_out; ++j) dwrow[j] += xi * grow[j];
                }
            }
        }
        if (nb->requires_grad) {
            ensure_grad(*nb);
            double* db = nb->grad.data();
            for (std::size_t m = 0; m < m_rows; ++m) {
                const double* grow = g + m * d_out;
                for (std::size_t j = 0; j < d_out; ++j) db[j] += grow[j];
            }
        }
    });
}

Tensor concat_lastaxis(const Tensor& a, const Tensor& b) {
    const NodePtr& na = node_of(a);
    const NodePtr& nb = node_of(b);
    if (na->shape.empty()) throw ShapeError("concat: scalar operands are not supported");
    check_same_leading(*na, *nb, "concat");
    const std::size_t la = na->shape.back();
    const std::size_t lb = nb->shape.back();
    std::vector<std::size_t> out_shape = na->shape;
    out_shape.back() = la + lb;
    NodePtr out = new_node(std::move(out_shape));
    const std::size_t rows = na->values.size() / std::max<std::size_t>(la, 1);
    for (std::size_t r = 0; r < rows; ++r) {
        double* orow = out->values.data() + r * (la + lb);
        std::copy_n(na->values.data() + r * la, la, orow);
        std::copy_n(nb->values.data() + r * lb, lb, orow + la);
    }
    return finish(out, {na, nb}, [na, nb, rows, la, lb](Node& self) {
        const double* g = self.grad.data();
        if (na->requires_grad) {
            ensure_grad(*na);
            for (std::size_t r = 0; r < rows; ++r) {
                const double* grow = g + r * (la + lb);
                double* da = na->grad.data() + r * la;
                for (std::size_t i = 0; i < la; ++i) da[i] += grow[i];
            }
        }
        if (nb->requires_grad) {
            ensure_grad(*nb);
            for (std::size_t r = 0; r < rows; ++r) {
                const double* grow = g + r * (la + lb) + la;
                double* db = nb->grad.data() + r * lb;
                for (std::size_t i = 0; i < lb; ++i) db[i] += grow[i];
            }
        }
    });
}

Tensor softmax_lastaxis(const Tensor& x) {
    const NodePtr& nx = node_of(x);
    if (nx->shape.empty() || nx->shape.back() == 0) {
        throw ShapeError("softmax: empty last axis");
    }
    const std::size_t width = nx->shape.back();
    const std::size_t rows = nx->values.size() / width;
    NodePtr out = new_node(nx->shape);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xrow = nx->values.data() + r * width;
        double* yrow = out->values.data() + r * width;
        double m = xrow[0];
        for (std::size_t i = 1; i < width; ++i) m = std::max(m, xrow[i]);
        double total = 0.0;
        for (std::size_t i = 0; i < width; ++i) {
            yrow[i] = std::exp(xrow[i] - m);
            total += yrow[i];
        }
        for (std::size_t i = 0; i < width; ++i) yrow[i] /= total;
    }
    // The backward reads the saved outputs through `self`; capturing the
    // output node itself would create a shared_ptr cycle.
    return finish(out, {nx}, [nx, rows, width](Node& self) {
        if (!nx->requires_grad) return;
        ensure_grad(*nx);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* y = self.values.data() + r * width;
            const double* g = self.grad.data() + r * width;
            double* dx = nx->grad.data() + r * width;
            double dot = 0.0;
            for (std::size_t i = 0; i < width; ++i) dot += g[i] * y[i];
            for (std::size_t i = 0; i < width; ++i) dx[i] += y[i] * (g[i] - dot);
        }
    });
}

Tensor softmax_middle(const Tensor& x) {
    const NodePtr& nx = node_of(x);
    const auto [q_n, k_n, d_n] = rank3_extents(*nx, "softmax_middle");
    if (k_n == 0) throw ShapeError("softmax_middle: empty middle axis");
    NodePtr out = new_node(nx->shape);
    for (std::size_t q = 0; q < q_n; ++q) {
        const double* xq = nx->values.data() + q * k_n * d_n;
        double* yq = out->values.data() + q * k_n * d_n;
        for (std::size_t d = 0; d < d_n; ++d) {
            double m = xq[d];
            for (std::size_t k = 1; k < k_n; ++k) m = std::max(m, xq[k * d_n + d]);
            double total = 0.0;
            for (std::size_t k = 0; k < k_n; ++k) {
                const double e = std::exp(xq[k * d_n + d] - m);
                yq[k * d_n + d] = e;
                total += e;
            }
            for (std::size_t k = 0; k < k_n; ++k) yq[k * d_n + d] /= total;
        }
    }
    return finish(out, {nx}, [nx, q_n, k_n, d_n](Node& self) {
        if (!nx->requires_grad) return;
        ensure_grad(*nx);
        for (std::size_t q = 0; q < q_n; ++q) {
            const std::size_t base = q * k_n * d_n;
            const double* y = self.values.data() + base;
            const double* g = self.grad.data() + base;
            double* dx = nx->grad.data() + base;
            for (std::size_t d = 0; d < d_n; ++d) {
                double dot = 0.0;
                for (std::size_t k = 0; k < k_n; ++k) dot += g[k * d_n + d] * y[k * d_n + d];
                for (std::size_t k = 0; k < k_n; ++k) {
                    dx[k * d_n + d] += y[k * d_n + d] * (g[k * d_n + d] - dot);
                }
            }
        }
    });
}

Tensor sum_middle(const Tensor& x) {
    const NodePtr& nx = node_of(x);
    const auto [q_n, k_n, d_n] = rank3_extents(*nx, "sum_middle");
    NodePtr out = new_node({q_n, d_n});
    for (std::size_t q = 0; q < q_n; ++q) {
        const double* xq = nx->values.data() + q * k_n * d_n;
        double* oq = out->values.data() + q * d_n;
        for (std::size_t k = 0; k < k_n; ++k) {
            for (std::size_t d = 0; d < d_n; ++d) oq[d] += xq[k * d_n + d];
        }
    }
    return finish(out, {nx}, [nx, q_n, k_n, d_n](Node& self) {
        if (!nx->requires_grad) return;
        ensure_grad(*nx);
        for (std::size_t q = 0; q < q_n; ++q) {
            const double* gq = self.grad.data() + q * d_n;
            double* dxq = nx->grad.data() + q * k_n * d_n;
            for (std::size_t k = 0; k < k_n; ++k) {
                for (std::size_t d = 0; d < d_n; ++d) dxq[k * d_n + d] += gq[d];
            }
        }
    });
}

Tensor mean_middle(const Tensor& x) {
    const NodePtr& nx = node_of(x);
    const auto [q_n, k_n, d_n] = rank3_extents(*nx, "mean_middle");
    if (k_n == 0) throw ShapeError("mean_middle: empty middle axis");
    NodePtr out = new_node({q_n, d_n});
    const double inv_k = 1.0 / static_cast<double>(k_n);
    for (std::size_t q = 0; q < q_n; ++q) {
        const double* xq = nx->values.data() + q * k_n * d_n;
        double* oq = out->values.data() + q * d_n;
        for (std::size_t k = 0; k < k_n; ++k) {
            for (std::size_t d = 0; d < d_n; ++d) oq[d] += xq[k * d_n + d];
        }
        for (std::size_t d = 0; d < d_n; ++d) oq[d] *= inv_k;
    }
    return finish(out, {nx}, [nx, q_n, k_n, d_n, inv_k](Node& self) {
        if (!nx->requires_grad) return;
        ensure_grad(*nx);
        for (std::size_t q = 0; q < q_n; ++q) {
            const double* gq = self.grad.data() + q * d_n;
            double* dxq = nx->grad.data() + q * k_n * d_n;
            for (std::size_t k = 0; k < k_n; ++k) {
                for (std::size_t d = 0; d < d_n; ++d) dxq[k * d_n + d] += gq[d] * inv_k;
            }
        }
    });
}

Tensor max_middle(const Tensor& x) {
    const NodePtr& nx = node_of(x);
    const auto [q_n, k_n, d_n] = rank3_extents(*nx, "max_middle");
    if (k_n == 0) throw ShapeError("max_middle: empty middle axis");
    NodePtr out = new_node({q_n, d_n});
    auto argmax = std::make_shared<std::vector<std::uint32_t>>(q_n * d_n, 0);
    for (std::size_t q = 0; q < q_n; ++q) {
        const double* xq = nx->values.data() + q * k_n * d_n;
        double* oq = out->values.data() + q * d_n;
        std::uint32_t* aq = argmax->data() + q * d_n;
        for (std::size_t d = 0; d < d_n; ++d) {
            double best = xq[d];
            std::uint32_t best_k = 0;
            for (std::size_t k = 1; k < k_n; ++k) {
                if (xq[k * d_n + d] > best) {
                    best = xq[k * d_n + d];
                    best_k = static_cast<std::uint32_t>(k);
                }
            }
            oq[d] = best;
            aq[d] = best_k;
        }
    }
    return finish(out, {nx}, [nx, argmax, q_n, k_n, d_n](Node& self) {
        if (!nx->requires_grad) return;
        ensure_grad(*nx);
        for (std::size_t q = 0; q < q_n; ++q) {
            const double* gq = self.grad.data() + q * d_n;
            const std::uint32_t* aq = argmax->data() + q * d_n;
            double* dxq = nx->grad.data() + q * k_n * d_n;
            for (std::size_t d = 0; d < d_n; ++d) dxq[aq[d] * d_n + d] += gq[d];
        }
    });
}

Tensor gather_neighbors(const Tensor& features, std::span<const std::uint32_t> indices,
                        std::size_t k) {
    const NodePtr& nf = node_of(features);
    if (nf->shape.size() != 2) throw ShapeError("gather_neighbors: features must be N x d");
    if (k == 0 || indices.size() % k != 0) {
        throw ShapeError("gather_neighbors: index count must be a positive multiple of k");
    }
    const std::size_t n = nf->shape[0];
    const std::size_t d = nf->shape[1];
    const std::size_t q_n = indices.size() / k;
    auto idx = std::make_shared<std::vector<std::uint32_t>>(indices.begin(), indices.end());
    for (std::uint32_t i : *idx) {
        if (i >= n) {
            throw IndexError("gather_neighbors: index " + std::to_string(i) +
                             " out of range for " + std::to_string(n) + " rows");
        }
    }
    NodePtr out = new_node({q_n, k, d});
    for (std::size_t r = 0; r < idx->size(); ++r) {
        std::copy_n(nf->values.data() + (*idx)[r] * d, d, out->values.data() + r * d);
    }
    return finish(out, {nf}, [nf, idx, d](Node& self) {
        if (!nf->requires_grad) return;
        ensure_grad(*nf);
        for (std::size_t r = 0; r < idx->size(); ++r) {
            const double* g = self.grad.data() + r * d;
            double* dst = nf->grad.data() + (*idx)[r] * d;
            for (std::size_t c = 0; c < d; ++c) dst[c] += g[c];
        }
    });
}

Tensor gather_rows(const Tensor& features, std::span<const std::uint32_t> rows) {
    const NodePtr& nf = node_of(features);
    if (nf->shape.size() != 2) throw ShapeError("gather_rows: features must be N x d");
    const std::size_t n = nf->shape[0];
    const std::size_t d = nf->shape[1];
    auto idx = std::make_shared<std::vector<std::uint32_t>>(rows.begin(), rows.end());
    for (std::uint32_t i : *idx) {
        if (i >= n) {
            throw IndexError("gather_rows: index " + std::to_string(i) + " out of range for " +
                             std::to_string(n) + " rows");
        }
    }
    NodePtr out = new_node({idx->size(), d});
    for (std::size_t r = 0; r < idx->size(); ++r) {
        std::copy_n(nf->values.data() + (*idx)[r] * d, d, out->values.data() + r * d);
    }
    return finish(out, {nf}, [nf, idx, d](Node& self) {
        if (!nf->requires_grad) return;
        ensure_grad(*nf);
        for (std::size_t r = 0; r < idx->size(); ++r) {
            const double* g = self.grad.data() + r * d;
            double* dst = nf->grad.data() + (*idx)[r] * d;
            for (std::size_t c = 0; c < d; ++c) dst[c] += g[c];
        }
    });
}

Tensor dropout(const Tensor& x, double rate, std::uint64_t seed, bool active) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout: rate must be in [0, 1)");
    if (!active || rate == 0.0) return x;
    const NodePtr& nx = node_of(x);
    const double keep_scale = 1.0 / (1.0 - rate);
    auto mask = std::make_shared<std::vector<double>>(nx->values.size());
    Rng rng(derive_seed(seed, 0xd40));
    for (double& m : *mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
    NodePtr out = new_node(nx->shape);
    for (std::size_t i = 0; i < out->values.size(); ++i) {
        out->values[i] = nx->values[i] * (*mask)[i];
    }
    return finish(out, {nx}, [nx, mask](Node& self) {
        if (!nx->requires_grad) return;
        ensure_grad(*nx);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            nx->grad[i] += self.grad[i] * (*mask)[i];
        }
    });
}

Tensor sum_all(const Tensor& x) {
    const NodePtr& nx = node_of(x);
    NodePtr out = new_node({});
    double total = 0.0;
    for (double v : nx->values) total += v;
    out->values[0] = total;
    return finish(out, {nx}, [nx](Node& self) {
        if (!nx->requires_grad) return;
        ensure_grad(*nx);
        const double g = self.grad[0];
        for (double& dv : nx->grad) dv += g;
    });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::int32_t> labels,
                             std::span<const double> class_weights) {
    const NodePtr& nl = node_of(logits);
    if (nl->shape.size() != 2) throw ShapeError("cross_entropy: logits must be N x C");
    const std::size_t n = nl->shape[0];
    const std::size_t c_n = nl->shape[1];
    if (labels.size() != n) throw ShapeError("cross_entropy: one label per logit row required");
    if (!class_weights.empty() && class_weights.size() != c_n) {
        throw ArgumentError("cross_entropy: class_weights must have one entry per class");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c_n) {
            throw DataError("cross_entropy: label " + std::to_string(labels[i]) + " at row " +
                            std::to_string(i) + " outside [0, " + std::to_string(c_n) + ")");
        }
    }

    // Fused stable form: loss_i = lse(z_i) - z_i[label], optionally weighted.
    auto probs = std::make_shared<std::vector<double>>();
    if (nl->requires_grad) probs->resize(n * c_n);
    auto row_weights = std::make_shared<std::vector<double>>(n, 1.0);
    double total_loss = 0.0;
    double total_weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* z = nl->values.data() + i * c_n;
        double m = z[0];
        for (std::size_t c = 1; c < c_n; ++c) m = std::max(m, z[c]);
        double sum_exp = 0.0;
        for (std::size_t c = 0; c < c_n; ++c) sum_exp += std::exp(z[c] - m);
        const double lse = m + std::log(sum_exp);
        const double w = class_weights.empty()
                             ? 1.0
                             : class_weights[static_cast<std::size_t>(labels[i])];
        (*row_weights)[i] = w;
        total_loss += w * (lse - z[static_cast<std::size_t>(labels[i])]);
        total_weight += w;
        if (nl->requires_grad) {
            double* p = probs->data() + i * c_n;
            for (std::size_t c = 0; c < c_n; ++c) p[c] = std::exp(z[c] - lse);
        }
    }
    if (!(total_weight > 0.0)) {
        throw ArgumentError("cross_entropy: class weights of the present labels sum to 0");
    }

    NodePtr out = new_node({});
    out->values[0] = total_loss / total_weight;
    auto labels_copy = std::make_shared<std::vector<std::int32_t>>(labels.begin(), labels.end());
    return finish(out, {nl},
                  [nl, probs, row_weights, labels_copy, n, c_n, total_weight](Node& self) {
                      if (!nl->requires_grad) return;
                      ensure_grad(*nl);
                      const double g = self.grad[0] / total_weight;
                      for (std::size_t i = 0; i < n; ++i) {
                          const double gw = g * (*row_weights)[i];
                          const double* p = probs->data() + i * c_n;
                          double* dz = nl->grad.data() + i * c_n;
                          for (std::size_t c = 0; c < c_n; ++c) dz[c] += gw * p[c];
                          dz[static_cast<std::size_t>((*labels_copy)[i])] -= gw;
                      }
                  });
}

}  // namespace pointseg
