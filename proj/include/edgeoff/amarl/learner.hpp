/**
 * @file learner.hpp
 * @brief Centralized training: soft targets, critic regression, policy updates.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "edgeoff/agent/rollout.hpp"
#include "edgeoff/amarl/actor.hpp"
#include "edgeoff/amarl/config.hpp"
#include "edgeoff/amarl/critic.hpp"
#include "edgeoff/amarl/replay.hpp"
#include "edgeoff/sim/system.hpp"

namespace edgeoff::amarl {

struct Networks {
    Actor actor;
    Critic critic;
    std::vector<nn::ParamStore> actors;
    std::vector<nn::ParamStore> target_actors;
    nn::ParamStore critic_store;
    nn::ParamStore target_critic;
};

/// Online networks initialized from `seed`; targets start as exact copies.
Networks make_networks(std::size_t agents, std::size_t num_ess, const TrainConfig& config, std::uint64_t seed);

/// y = r + gamma * (1 - done) * (q_next - entropy_weight * logp_next).
double soft_target(double reward, double gamma, double q_next, double entropy_weight, double logp_next, bool done);

/// Per-row regression targets (batch.size * agents). Next actions are sampled
/// from the target actors with Gaussian logit noise (sigma, clipped) drawn from
/// `noise_rng` and a Gumbel-max draw from `sample_rng`.
std::vector<double> compute_targets(const Networks& net, const Batch& batch, const TrainConfig& config,
                                    Rng& noise_rng, Rng& sample_rng);

/// Sum over agents of the batch-mean squared error. When `store_grads` is set
/// the gradient is accumulated into `critic_store`.
double critic_loss(const Critic& critic, nn::ParamStore& critic_store, const Batch& batch,
                   const std::vector<double>& targets, const nn::Tensor2* dropout, bool store_grads);

struct ActorLossInputs {
    /// Gumbel noise per agent (batch x actions) for the relaxed samples.
    std::vector<nn::Tensor2> noise;
    /// Optional dropout masks per agent (batch x hidden).
    std::vector<nn::Tensor2> dropout;
    double temperature = 1.0;
    double entropy_weight = 0.01;
};

/// Per-agent loss mean over steps with a task of (lambda' <a-hat, log pi> - Q_i),
/// where Q_i sees agent i's relaxed action and the stored actions of the rest.
/// Accumulates actor gradients when `store_grads` is set; the critic is not modified.
std::vector<double> actor_losses(const Actor& actor, std::vector<nn::ParamStore>& actors, const Critic& critic,
                                 const nn::ParamStore& critic_store, const Batch& batch,
                                 const ActorLossInputs& inputs, bool store_grads);

struct UpdateStats {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
};

/// One critic step, one step per actor, then Polyak updates of all targets.
UpdateStats update(Networks& net, const Batch& batch, const TrainConfig& config, double temperature, Rng& noise_rng,
                   Rng& dropout_rng);

void soft_update_targets(Networks& net, double tau);

struct EpisodeRecord {
    std::size_t episode = 0;
    agent::EpisodeMetrics metrics;
    std::size_t updates = 0;
    /// Means over this episode's updates; NaN when none ran.
    double critic_loss = 0.0;
    double actor_loss = 0.0;
};

class Trainer {
public:
    Trainer(const sim::SystemConfig& system, const TrainConfig& config);

    std::size_t next_episode() const noexcept { return episode_; }
    bool finished() const noexcept { return episode_ >= config_.episodes; }
    EpisodeRecord run_episode();

    const Networks& networks() const noexcept { return net_; }
    Networks& networks() noexcept { return net_; }
    const ReplayBuffer& replay() const noexcept { return replay_; }
    const TrainConfig& config() const noexcept { return config_; }

    /// Full training state: networks with optimizer moments, targets, replay, counters.
    void save(const std::filesystem::path& dir) const;
    /// Restores a state written by `save`. Throws CompatibilityError on mismatch.
    void load(const std::filesystem::path& dir);

private:
    sim::SystemConfig system_;
    TrainConfig config_;
    sim::SystemState env_;
    Networks net_;
    ReplayBuffer replay_;
    std::size_t episode_ = 0;
    std::size_t over_ceiling_ = 0;
};

using EpisodeCallback = std::function<void(const EpisodeRecord&)>;

struct TrainOptions {
    std::optional<std::filesystem::path> checkpoint_dir;
    /// Continue from the state in `checkpoint_dir` when present.
    bool resume = false;
    EpisodeCallback on_episode;
};

struct TrainResult {
    std::vector<EpisodeRecord> history;
    Networks networks;
};

TrainResult train(const sim::SystemConfig& system, const TrainConfig& config, const TrainOptions& options = {});

}  // namespace edgeoff::amarl
