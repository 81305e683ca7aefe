#include "pointseg/nn.hpp"

#include <cmath>

#include "pointseg/errors.hpp"

namespace pointseg {

MlpParams init_mlp(std::size_t d_in, std::size_t d_out, Rng& rng) {
    if (d_in == 0 || d_out == 0) throw ArgumentError("init_mlp: zero layer width");
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_in));
    std::vector<double> w(d_in * d_out);
    for (double& v : w) v = rng.uniform(-scale, scale);
    MlpParams p;
    p.weight = Tensor::parameter(std::move(w), {d_in, d_out});
    p.bias = Tensor::parameter(std::vector<double>(d_out, 0.0), {d_out});
    return p;
}

Tensor shared_mlp(const Tensor& x, const MlpParams& p, Activation activation,
                  double leaky_slope) {
    Tensor y = affine(x, p.weight, p.bias);
    return activation == Activation::leaky_relu ? leaky_relu(y, leaky_slope) : y;
}

Tensor ParamStore::add(const std::string& name, Tensor t) {
    if (name.empty()) throw ArgumentError("parameter name must not be empty");
    if (find(name)) throw ArgumentError("duplicate parameter name: " + name);
    items_.push_back({name, t});
    return t;
}

MlpParams ParamStore::add_mlp(const std::string& prefix, std::size_t d_in, std::size_t d_out,
                              Rng& rng) {
    MlpParams p = init_mlp(d_in, d_out, rng);
    add(prefix + ".weight", p.weight);
    add(prefix + ".bias", p.bias);
    return p;
}

std::size_t ParamStore::value_count() const {
    std::size_t total = 0;
    for (const NamedParam& item : items_) total += item.tensor.size();
    return total;
}

const NamedParam* ParamStore::find(const std::string& name) const {
    for (const NamedParam& item : items_) {
        if (item.name == name) return &item;
    }
    return nullptr;
}

void ParamStore::zero_grad() {
    for (NamedParam& item : items_) item.tensor.zero_grad();
}

void adam_step(ParamStore& params, AdamState& state) {
    if (state.moments.empty()) {
        state.moments.resize(params.count());
        for (std::size_t i = 0; i < params.count(); ++i) {
            const std::size_t n = params.items()[i].tensor.size();
            state.moments[i].m.assign(n, 0.0);
            state.moments[i].v.assign(n, 0.0);
        }
    }
    if (state.moments.size() != params.count()) {
        throw ArgumentError("adam_step: optimizer state does not match the parameter store");
    }

    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    for (std::size_t i = 0; i < params.count(); ++i) {
        NamedParam item = params.items()[i];
        auto values = item.tensor.values_mut();
        const auto grad = item.tensor.grad();
        AdamState::Moments& mo = state.moments[i];
        if (mo.m.size() != values.size()) {
            throw ArgumentError("adam_step: moment shape mismatch for " + item.name);
        }
        for (std::size_t j = 0; j < values.size(); ++j) {
            const double g = j < grad.size() ? grad[j] : 0.0;
            if (!std::isfinite(g)) {
                throw OptimizationError("non-finite gradient in parameter " + item.name);
            }
            mo.m[j] = state.beta1 * mo.m[j] + (1.0 - state.beta1) * g;
            mo.v[j] = state.beta2 * mo.v[j] + (1.0 - state.beta2) * g * g;
            const double m_hat = mo.m[j] / bc1;
            const double v_hat = mo.v[j] / bc2;
            values[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

void lr_decay(AdamState& state, double factor) {
    if (!(factor > 0.0)) throw ArgumentError("lr_decay: factor must be positive");
    state.lr *= factor;
}

}  // namespace pointseg
