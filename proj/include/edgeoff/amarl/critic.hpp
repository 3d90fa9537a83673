/**
 * @file critic.hpp
 * @brief Shared attentive dueling critic.
 *
 * Rows are grouped sample-major: row b * I + i is agent i of sample b.
 *
 *   x_i   = [o_i, a_i, h_c,i]
 *   e_i   = relu(x_i W_enc + b_enc)               (dropout on e when a mask is given)
 *   w_i   = attention(query e_i, keys {e_j : j != i})   (zero in the ablation)
 *   z_i   = relu([e_i, w_i] W_head + b_head)
 *   V_i   = z_i W_v + b_v,  A_i = z_i W_a + b_a
 *   Q_i   = V_i + <a_i, A_i - mean(A_i)>
 *
 * An agent without a task has a = 0 and is scored by V alone.
 */
#pragma once

#include <cstddef>
#include <optional>

#include "edgeoff/nn/attention.hpp"
#include "edgeoff/nn/layers.hpp"
#include "edgeoff/nn/param_store.hpp"

namespace edgeoff::amarl {

struct CriticInput {
    nn::Tensor2 obs;
    nn::Tensor2 actions;
    nn::Tensor2 context;
};

/// Encoded and projected key rows, shared by several query passes.
struct CriticKeys {
    std::size_t rows = 0;
    nn::AttentionKeys attention;
};

struct CriticCache {
    nn::Tensor2 x;
    nn::Tensor2 e_relu;
    nn::Tensor2 mask;
    nn::Tensor2 e;
    bool separate_keys = false;
    nn::AttentionCache attention;
    nn::Tensor2 head_in;
    nn::Tensor2 z;
    nn::Tensor2 advantage;
    nn::Tensor2 actions;
    nn::Tensor2 values;
};

class Critic {
public:
    Critic() = default;
    static Critic create(nn::ParamStore& store, std::size_t obs_dim, std::size_t actions, std::size_t hidden,
                         std::size_t heads, bool attention);

    bool has_attention() const noexcept { return attention_.has_value(); }
    std::size_t obs_dim() const noexcept { return obs_dim_; }
    std::size_t actions() const noexcept { return actions_; }

    /// Fixed key set for `forward`; no gradient reaches it.
    CriticKeys encode_keys(const nn::ParamStore& store, const CriticInput& keys) const;

    /// Q per row (n x 1). With `keys` given, queries come from `input` and the
    /// attended set from `keys`. With `query_slot` also given, `input` holds only
    /// that agent's rows (one per sample) and Q is returned for those rows.
    nn::Tensor2 forward(const nn::ParamStore& store, const CriticInput& input, std::size_t agents, CriticCache& cache,
                        const nn::Tensor2* mask = nullptr, const CriticKeys* keys = nullptr,
                        std::optional<std::size_t> query_slot = std::nullopt) const;

    /// Accumulates parameter gradients and returns dQ/d(actions) for the query-side rows.
    /// With separate keys only the query path is differentiated.
    nn::Tensor2 backward(nn::ParamStore& store, const CriticCache& cache, const nn::Tensor2& dq) const;

    /// V + A - mean(A) for every action, from a cached forward (n x actions).
    static nn::Tensor2 action_values(const CriticCache& cache);

private:
    std::size_t obs_dim_ = 0;
    std::size_t actions_ = 0;
    std::size_t hidden_ = 0;
    nn::Dense encoder_;
    std::optional<nn::MultiHeadAttention> attention_;
    nn::Dense head_;
    nn::Dense value_;
    nn::Dense advantage_;
};

/// Combines value and advantage outputs for given action weights.
nn::Tensor2 dueling_combine(const nn::Tensor2& values, const nn::Tensor2& advantages, const nn::Tensor2& actions);

}  // namespace edgeoff::amarl
