/**
 * @file actor.hpp
 * @brief Per-agent gated recurrent actor and its decentralized policy wrapper.
 *
 *   u  = relu(o W_in + b_in)                 (dropout on u when a mask is given)
 *   g  = sigmoid([u, h] W_gate + b_gate)
 *   h' = g * u + (1 - g) * h
 *   logits = h' W_out + b_out
 *
 * h enters as a constant: no gradient flows into the previous step.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "edgeoff/agent/rollout.hpp"
#include "edgeoff/common/rng.hpp"
#include "edgeoff/nn/layers.hpp"
#include "edgeoff/nn/param_store.hpp"

namespace edgeoff::amarl {

struct ActorCache {
    nn::Tensor2 obs;
    nn::Tensor2 hidden_in;
    nn::Tensor2 u;
    nn::Tensor2 mask;
    nn::Tensor2 u_dropped;
    nn::Tensor2 gate_in;
    nn::Tensor2 gate;
    nn::Tensor2 hidden_out;
};

class Actor {
public:
    Actor() = default;
    static Actor create(nn::ParamStore& store, std::size_t obs_dim, std::size_t hidden, std::size_t actions);

    std::size_t obs_dim() const noexcept { return input_.in; }
    std::size_t hidden() const noexcept { return input_.out; }
    std::size_t actions() const noexcept { return output_.out; }

    /// Rows are independent samples. `mask`, when given, multiplies u.
    nn::Tensor2 forward(const nn::ParamStore& store, const nn::Tensor2& obs, const nn::Tensor2& hidden_in,
                        ActorCache& cache, const nn::Tensor2* mask = nullptr) const;
    /// Accumulates parameter gradients.
    void backward(nn::ParamStore& store, const ActorCache& cache, const nn::Tensor2& dlogits) const;

private:
    nn::Dense input_;
    nn::Dense gate_;
    nn::Dense output_;
};

/// Builds a fresh store holding one actor, Glorot-initialized from `seed`.
nn::ParamStore make_actor_store(Actor& actor, std::size_t obs_dim, std::size_t hidden, std::size_t actions,
                                std::uint64_t seed);

/// Drives one IED from its own observation. Explore mode samples from the
/// softmax policy (Gumbel-max); otherwise takes the argmax.
class ActorPolicy : public agent::AgentPolicy {
public:
    ActorPolicy(const Actor& actor, const nn::ParamStore& store, std::uint64_t seed, std::size_t ied);

    void reset_episode(std::uint64_t episode) override;
    int act(const agent::AgentView& view) override;
    std::vector<double> hidden_before_act() const override { return before_; }

private:
    const Actor* actor_;
    const nn::ParamStore* store_;
    std::uint64_t seed_;
    std::size_t ied_;
    Rng rng_;
    std::vector<double> hidden_;
    std::vector<double> before_;
};

agent::PolicySet make_actor_policies(const Actor& actor, const std::vector<nn::ParamStore>& stores,
                                     std::uint64_t seed);

}  // namespace edgeoff::amarl
