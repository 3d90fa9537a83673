#include "edgeoff/amarl/actor.hpp"

#include "edgeoff/common/error.hpp"

namespace edgeoff::amarl {

using nn::Tensor2;

Actor Actor::create(nn::ParamStore& store, std::size_t obs_dim, std::size_t hidden, std::size_t actions) {
    Actor a;
    a.input_ = nn::Dense::create(store, "actor.input", obs_dim, hidden);
    a.gate_ = nn::Dense::create(store, "actor.gate", 2 * hidden, hidden);
    a.output_ = nn::Dense::create(store, "actor.output", hidden, actions);
    return a;
}

Tensor2 Actor::forward(const nn::ParamStore& store, const Tensor2& obs, const Tensor2& hidden_in, ActorCache& cache,
                       const Tensor2* mask) const {
    if (obs.cols() != obs_dim()) {
        throw ShapeError("actor: observation has " + std::to_string(obs.cols()) + " entries, expected " +
                         std::to_string(obs_dim()));
    }
    if (hidden_in.rows() != obs.rows() || hidden_in.cols() != hidden()) {
        throw ShapeError("actor: hidden state shape does not match the batch");
    }
    cache.obs = obs;
    cache.hidden_in = hidden_in;
    cache.u = nn::relu(input_.forward(store, obs));
    if (mask) {
        cache.mask = *mask;
        cache.u_dropped = nn::hadamard(cache.u, *mask);
    } else {
        cache.mask = Tensor2();
        cache.u_dropped = cache.u;
    }
    cache.gate_in = nn::hconcat(cache.u_dropped, hidden_in);
    cache.gate = nn::sigmoid(gate_.forward(store, cache.gate_in));
    cache.hidden_out = Tensor2(obs.rows(), hidden());
    for (std::size_t k = 0; k < cache.hidden_out.size(); ++k) {
        const double g = cache.gate.data()[k];
        cache.hidden_out.data()[k] = g * cache.u_dropped.data()[k] + (1.0 - g) * hidden_in.data()[k];
    }
    return output_.forward(store, cache.hidden_out);
}

void Actor::backward(nn::ParamStore& store, const ActorCache& cache, const Tensor2& dlogits) const {
    const Tensor2 dh = output_.backward(store, cache.hidden_out, dlogits);
    Tensor2 dgate(dh.rows(), dh.cols());
    Tensor2 du(dh.rows(), dh.cols());
    for (std::size_t k = 0; k < dh.size(); ++k) {
        dgate.data()[k] = dh.data()[k] * (cache.u_dropped.data()[k] - cache.hidden_in.data()[k]);
        du.data()[k] = dh.data()[k] * cache.gate.data()[k];
    }
    const Tensor2 dgate_in = gate_.backward(store, cache.gate_in, nn::sigmoid_backward(cache.gate, dgate));
    nn::add_into_cols(du, nn::slice_cols(dgate_in, 0, hidden()), 0);
    if (!cache.mask.empty()) du = nn::hadamard(du, cache.mask);
    input_.backward(store, cache.obs, nn::relu_backward(cache.u, du));
}

nn::ParamStore make_actor_store(Actor& actor, std::size_t obs_dim, std::size_t hidden, std::size_t actions,
                                std::uint64_t seed) {
    nn::ParamStore store;
    actor = Actor::create(store, obs_dim, hidden, actions);
    nn::init_glorot(store, seed);
    return store;
}

ActorPolicy::ActorPolicy(const Actor& actor, const nn::ParamStore& store, std::uint64_t seed, std::size_t ied)
    : actor_(&actor), store_(&store), seed_(seed), ied_(ied), hidden_(actor.hidden(), 0.0) {}

void ActorPolicy::reset_episode(std::uint64_t episode) {
    rng_ = Rng(derive_seed(derive_seed(seed_, streams::kPolicy, episode), ied_));
    std::fill(hidden_.begin(), hidden_.end(), 0.0);
    before_ = hidden_;
}

int ActorPolicy::act(const agent::AgentView& view) {
    before_ = hidden_;
    const auto obs = Tensor2::from(1, view.observation.size(), {view.observation.begin(), view.observation.end()});
    const auto h = Tensor2::from(1, hidden_.size(), hidden_);
    ActorCache cache;
    const Tensor2 logits = actor_->forward(*store_, obs, h, cache);
    hidden_ = cache.hidden_out.values();
    if (!view.explore) return static_cast<int>(nn::argmax_row(logits, 0));
    // Gumbel-max: an exact sample from softmax(logits). Drawn every interval
    // so the stream does not depend on which intervals carry a task.
    Tensor2 perturbed = logits;
    for (auto& v : perturbed.values()) v += rng_.gumbel();
    return static_cast<int>(nn::argmax_row(perturbed, 0));
}

agent::PolicySet make_actor_policies(const Actor& actor, const std::vector<nn::ParamStore>& stores,
                                     std::uint64_t seed) {
    agent::PolicySet set;
    for (std::size_t i = 0; i < stores.size(); ++i) set.push_back(std::make_unique<ActorPolicy>(actor, stores[i], seed, i));
    return set;
}

}  // namespace edgeoff::amarl
