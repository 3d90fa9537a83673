#include "edgeoff/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "edgeoff/common/error.hpp"
#include "edgeoff/common/text.hpp"

namespace edgeoff::nn {

Dense Dense::create(ParamStore& store, const std::string& name, std::size_t in, std::size_t out) {
    Dense d;
    d.w = store.add(name + ".w", in, out);
    d.b = store.add(name + ".b", 1, out);
    d.in = in;
    d.out = out;
    return d;
}

Tensor2 Dense::forward(const ParamStore& store, const Tensor2& x) const {
    if (x.cols() != in) {
        throw ShapeError("dense '" + store[w].name + "': input has " + std::to_string(x.cols()) +
                         " columns, weight expects " + std::to_string(in));
    }
    Tensor2 y = matmul(x, store[w].value);
    const auto& bias = store[b].value;
    for (std::size_t r = 0; r < y.rows(); ++r) {
        for (std::size_t c = 0; c < out; ++c) y(r, c) += bias(0, c);
    }
    return y;
}

Tensor2 Dense::backward(ParamStore& store, const Tensor2& x, const Tensor2& dy) const {
    if (dy.cols() != out || dy.rows() != x.rows()) {
        throw ShapeError("dense '" + store[w].name + "' backward: upstream gradient shape mismatch");
    }
    matmul_tn_acc(x, dy, store[w].grad);
    auto& db = store[b].grad;
    for (std::size_t r = 0; r < dy.rows(); ++r) {
        for (std::size_t c = 0; c < out; ++c) db(0, c) += dy(r, c);
    }
    return matmul_nt(dy, store[w].value);
}

Tensor2 relu(const Tensor2& x) {
    Tensor2 y = x;
    for (auto& v : y.values()) v = v > 0.0 ? v : 0.0;
    return y;
}

Tensor2 relu_backward(const Tensor2& y, const Tensor2& dy) {
    require_same_shape(y, dy, "relu_backward");
    Tensor2 dx = dy;
    for (std::size_t k = 0; k < dx.size(); ++k) {
        if (!(y.data()[k] > 0.0)) dx.data()[k] = 0.0;
    }
    return dx;
}

Tensor2 sigmoid(const Tensor2& x) {
    Tensor2 y = x;
    for (auto& v : y.values()) {
        if (v >= 0.0) {
            v = 1.0 / (1.0 + std::exp(-v));
        } else {
            const double e = std::exp(v);
            v = e / (1.0 + e);
        }
    }
    return y;
}

Tensor2 sigmoid_backward(const Tensor2& y, const Tensor2& dy) {
    require_same_shape(y, dy, "sigmoid_backward");
    Tensor2 dx = dy;
    for (std::size_t k = 0; k < dx.size(); ++k) dx.data()[k] *= y.data()[k] * (1.0 - y.data()[k]);
    return dx;
}

Tensor2 softmax_rows(const Tensor2& x) {
    Tensor2 y(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto in = x.row(r);
        auto out = y.row(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double total = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) {
            out[c] = std::exp(in[c] - mx);
            total += out[c];
        }
        for (auto& v : out) v /= total;
    }
    return y;
}

Tensor2 log_softmax_rows(const Tensor2& x) {
    Tensor2 y(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto in = x.row(r);
        auto out = y.row(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double total = 0.0;
        for (double v : in) total += std::exp(v - mx);
        const double lse = mx + std::log(total);
        for (std::size_t c = 0; c < in.size(); ++c) out[c] = in[c] - lse;
    }
    return y;
}

Tensor2 softmax_backward(const Tensor2& p, const Tensor2& dp) {
    require_same_shape(p, dp, "softmax_backward");
    Tensor2 dx(p.rows(), p.cols());
    for (std::size_t r = 0; r < p.rows(); ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < p.cols(); ++c) dot += p(r, c) * dp(r, c);
        for (std::size_t c = 0; c < p.cols(); ++c) dx(r, c) = p(r, c) * (dp(r, c) - dot);
    }
    return dx;
}

Tensor2 log_softmax_backward(const Tensor2& logp, const Tensor2& dlogp) {
    require_same_shape(logp, dlogp, "log_softmax_backward");
    Tensor2 dx(logp.rows(), logp.cols());
    for (std::size_t r = 0; r < logp.rows(); ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < logp.cols(); ++c) total += dlogp(r, c);
        for (std::size_t c = 0; c < logp.cols(); ++c) dx(r, c) = dlogp(r, c) - std::exp(logp(r, c)) * total;
    }
    return dx;
}

Tensor2 dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) throw ParameterError("dropout rate " + format_double(rate) + " outside [0, 1)");
    Tensor2 mask(rows, cols, 1.0);
    if (rate == 0.0) return mask;
    const double keep = 1.0 / (1.0 - rate);
    for (auto& v : mask.values()) v = rng.uniform() < rate ? 0.0 : keep;
    return mask;
}

Tensor2 relaxed_one_hot(const Tensor2& logits, const Tensor2& noise, double temperature) {
    if (!(temperature > 0.0)) {
        throw ParameterError("relaxation temperature must be > 0, got " + format_double(temperature));
    }
    require_same_shape(logits, noise, "relaxed_one_hot");
    Tensor2 z = logits;
    for (std::size_t k = 0; k < z.size(); ++k) z.data()[k] = (z.data()[k] + noise.data()[k]) / temperature;
    return softmax_rows(z);
}

Tensor2 relaxed_one_hot_backward(const Tensor2& y, const Tensor2& dy, double temperature) {
    Tensor2 dx = softmax_backward(y, dy);
    scale_inplace(dx, 1.0 / temperature);
    return dx;
}

GumbelSample gumbel_softmax(const Tensor2& logits, double temperature, Rng& rng) {
    if (!(temperature > 0.0)) {
        throw ParameterError("relaxation temperature must be > 0, got " + format_double(temperature));
    }
    GumbelSample out;
    out.noise = Tensor2(logits.rows(), logits.cols());
    for (auto& v : out.noise.values()) v = rng.gumbel();
    out.sample = relaxed_one_hot(logits, out.noise, temperature);
    return out;
}

std::size_t argmax_row(const Tensor2& t, std::size_t row) {
    const auto r = t.row(row);
    std::size_t best = 0;
    for (std::size_t c = 1; c < r.size(); ++c) {
        if (r[c] > r[best]) best = c;
    }
    return best;
}

}  // namespace edgeoff::nn
