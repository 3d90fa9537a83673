#include "edgeoff/amarl/critic.hpp"

#include "edgeoff/common/error.hpp"

namespace edgeoff::amarl {

using nn::Tensor2;

namespace {

Tensor2 stack_input(const CriticInput& in, std::size_t obs_dim, std::size_t actions) {
    if (in.obs.cols() != obs_dim || in.context.cols() != obs_dim || in.actions.cols() != actions) {
        throw ShapeError("critic: input widths do not match the network");
    }
    if (in.actions.rows() != in.obs.rows() || in.context.rows() != in.obs.rows()) {
        throw ShapeError("critic: observation, action and context row counts differ");
    }
    return nn::hconcat(nn::hconcat(in.obs, in.actions), in.context);
}

}  // namespace

Critic Critic::create(nn::ParamStore& store, std::size_t obs_dim, std::size_t actions, std::size_t hidden,
                      std::size_t heads, bool attention) {
    Critic c;
    c.obs_dim_ = obs_dim;
    c.actions_ = actions;
    c.hidden_ = hidden;
    c.encoder_ = nn::Dense::create(store, "critic.encoder", 2 * obs_dim + actions, hidden);
    if (attention) c.attention_ = nn::MultiHeadAttention::create(store, "critic.attention", hidden, heads);
    c.head_ = nn::Dense::create(store, "critic.head", 2 * hidden, hidden);
    c.value_ = nn::Dense::create(store, "critic.value", hidden, 1);
    c.advantage_ = nn::Dense::create(store, "critic.advantage", hidden, actions);
    return c;
}

Tensor2 dueling_combine(const Tensor2& values, const Tensor2& advantages, const Tensor2& actions) {
    nn::require_same_shape(advantages, actions, "dueling_combine");
    Tensor2 q(values.rows(), 1);
    const std::size_t A = advantages.cols();
    for (std::size_t r = 0; r < values.rows(); ++r) {
        double mean = 0.0;
        for (std::size_t k = 0; k < A; ++k) mean += advantages(r, k);
        mean /= static_cast<double>(A);
        double sel = 0.0;
        for (std::size_t k = 0; k < A; ++k) sel += actions(r, k) * (advantages(r, k) - mean);
        q(r, 0) = values(r, 0) + sel;
    }
    return q;
}

CriticKeys Critic::encode_keys(const nn::ParamStore& store, const CriticInput& keys) const {
    CriticKeys out;
    out.rows = keys.obs.rows();
    if (attention_) {
        out.attention = attention_->project_keys(store, nn::relu(encoder_.forward(store, stack_input(keys, obs_dim_, actions_))));
    }
    return out;
}

Tensor2 Critic::forward(const nn::ParamStore& store, const CriticInput& input, std::size_t agents, CriticCache& cache,
                        const Tensor2* mask, const CriticKeys* keys, std::optional<std::size_t> query_slot) const {
    const std::size_t n = input.obs.rows();
    if (query_slot) {
        if (!keys) throw ShapeError("critic: a query slot needs a key set");
        if (*query_slot >= agents || keys->rows != n * agents) {
            throw ShapeError("critic: key set does not hold one group per query row");
        }
    } else if (agents == 0 || n % agents != 0) {
        throw ShapeError("critic: row count is not a multiple of the agent count");
    }
    cache.x = stack_input(input, obs_dim_, actions_);
    cache.actions = input.actions;
    cache.e_relu = nn::relu(encoder_.forward(store, cache.x));
    if (mask) {
        cache.mask = *mask;
        cache.e = nn::hadamard(cache.e_relu, *mask);
    } else {
        cache.mask = Tensor2();
        cache.e = cache.e_relu;
    }
    cache.separate_keys = keys != nullptr;
    Tensor2 omega(n, hidden_);
    if (attention_) {
        if (keys) {
            if (!query_slot && keys->rows != n) throw ShapeError("critic: key set and query set differ in row count");
            omega = attention_->forward(store, cache.e, keys->attention, agents, true, &cache.attention, query_slot);
        } else {
            omega = attention_->forward(store, cache.e, cache.e, agents, true, &cache.attention);
        }
    }
    cache.head_in = nn::hconcat(cache.e, omega);
    cache.z = nn::relu(head_.forward(store, cache.head_in));
    cache.values = value_.forward(store, cache.z);
    cache.advantage = advantage_.forward(store, cache.z);
    return dueling_combine(cache.values, cache.advantage, input.actions);
}

Tensor2 Critic::action_values(const CriticCache& cache) {
    Tensor2 out = cache.advantage;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        double mean = 0.0;
        for (std::size_t k = 0; k < out.cols(); ++k) mean += out(r, k);
        mean /= static_cast<double>(out.cols());
        for (std::size_t k = 0; k < out.cols(); ++k) out(r, k) = cache.values(r, 0) + out(r, k) - mean;
    }
    return out;
}

Tensor2 Critic::backward(nn::ParamStore& store, const CriticCache& cache, const Tensor2& dq) const {
    const std::size_t n = cache.x.rows();
    const std::size_t A = actions_;
    if (dq.rows() != n || dq.cols() != 1) throw ShapeError("critic backward: dQ must be n x 1");

    Tensor2 dvalues = dq;
    Tensor2 dadv(n, A);
    Tensor2 dactions(n, A);
    for (std::size_t r = 0; r < n; ++r) {
        double mean_adv = 0.0;
        double mean_act = 0.0;
        for (std::size_t k = 0; k < A; ++k) {
            mean_adv += cache.advantage(r, k);
            mean_act += cache.actions(r, k);
        }
        mean_adv /= static_cast<double>(A);
        mean_act /= static_cast<double>(A);
        for (std::size_t k = 0; k < A; ++k) {
            dadv(r, k) = dq(r, 0) * (cache.actions(r, k) - mean_act);
            dactions(r, k) = dq(r, 0) * (cache.advantage(r, k) - mean_adv);
        }
    }
    Tensor2 dz = value_.backward(store, cache.z, dvalues);
    nn::add_inplace(dz, advantage_.backward(store, cache.z, dadv));
    const Tensor2 dhead_in = head_.backward(store, cache.head_in, nn::relu_backward(cache.z, dz));
    Tensor2 de = nn::slice_cols(dhead_in, 0, hidden_);
    if (attention_) {
        const Tensor2 domega = nn::slice_cols(dhead_in, hidden_, hidden_);
        auto [dq_in, dkv_in] = attention_->backward(store, cache.attention, domega);
        nn::add_inplace(de, dq_in);
        if (!cache.separate_keys) nn::add_inplace(de, dkv_in);
    }
    if (!cache.mask.empty()) de = nn::hadamard(de, cache.mask);
    const Tensor2 dx = encoder_.backward(store, cache.x, nn::relu_backward(cache.e_relu, de));
    nn::add_into_cols(dactions, nn::slice_cols(dx, obs_dim_, A), 0);
    return dactions;
}

}  // namespace edgeoff::amarl
