/**
 * @file layers.hpp
 * @brief Dense layer, activations, softmax family, dropout and relaxed sampling.
 *
 * Every forward has a matching backward that takes the cached forward
 * quantities and the upstream gradient. Parameter gradients accumulate into
 * the store; input gradients are returned.
 */
#pragma once

#include <cstddef>
#include <string>

#include "edgeoff/common/rng.hpp"
#include "edgeoff/nn/param_store.hpp"
#include "edgeoff/nn/tensor.hpp"

namespace edgeoff::nn {

/// y = x W + b with W (in x out) registered as "<name>.w" and b (1 x out) as "<name>.b".
struct Dense {
    std::size_t w = 0;
    std::size_t b = 0;
    std::size_t in = 0;
    std::size_t out = 0;

    static Dense create(ParamStore& store, const std::string& name, std::size_t in, std::size_t out);

    Tensor2 forward(const ParamStore& store, const Tensor2& x) const;
    /// Accumulates dW and db; returns dx.
    Tensor2 backward(ParamStore& store, const Tensor2& x, const Tensor2& dy) const;
};

Tensor2 relu(const Tensor2& x);
/// Gradient through relu given its output y.
Tensor2 relu_backward(const Tensor2& y, const Tensor2& dy);
Tensor2 sigmoid(const Tensor2& x);
Tensor2 sigmoid_backward(const Tensor2& y, const Tensor2& dy);

Tensor2 softmax_rows(const Tensor2& x);
Tensor2 log_softmax_rows(const Tensor2& x);
/// Gradient through softmax given its output p.
Tensor2 softmax_backward(const Tensor2& p, const Tensor2& dp);
/// Gradient through log-softmax given its output log p.
Tensor2 log_softmax_backward(const Tensor2& logp, const Tensor2& dlogp);

/// Inverted-dropout multipliers: 0 with probability `rate`, else 1 / (1 - rate).
Tensor2 dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng);

/// softmax((logits + noise) / temperature) row by row. Throws ParameterError if temperature <= 0.
Tensor2 relaxed_one_hot(const Tensor2& logits, const Tensor2& noise, double temperature);
Tensor2 relaxed_one_hot_backward(const Tensor2& y, const Tensor2& dy, double temperature);

struct GumbelSample {
    Tensor2 noise;
    Tensor2 sample;
};

/// Draws standard Gumbel noise from `rng` and relaxes.
GumbelSample gumbel_softmax(const Tensor2& logits, double temperature, Rng& rng);

/// Index of the row maximum; ties go to the lower index.
std::size_t argmax_row(const Tensor2& t, std::size_t row);

}  // namespace edgeoff::nn
