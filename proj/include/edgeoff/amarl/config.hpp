/**
 * @file config.hpp
 * @brief Learner hyper-parameters.
 */
#pragma once

#include <cstddef>
#include <cstdint>

#include "edgeoff/agent/observation.hpp"

namespace edgeoff::amarl {

struct TrainConfig {
    std::size_t episodes = 5000;
    std::size_t hidden = 32;
    std::size_t heads = 4;
    double lr_actor = 1e-3;
    double lr_critic = 5e-3;
    double gamma = 0.99;
    std::size_t batch = 64;
    double dropout = 0.1;
    /// Weight of the log-policy term (lambda').
    double entropy_weight = 0.01;
    double smoothing_sigma = 0.2;
    double smoothing_clip = 0.5;
    double polyak = 0.01;
    double temperature_start = 1.0;
    double temperature_end = 0.3;
    std::size_t replay_capacity = 20000;
    std::size_t warmup = 5000;
    std::size_t updates_per_episode = 25;
    double grad_clip = 10.0;
    /// Divergence guard: halt after `divergence_patience` consecutive updates above the ceiling.
    double loss_ceiling = 1e6;
    std::size_t divergence_patience = 50;
    double reward_constant = 3.0;
    double critic_memory_decay = 0.8;
    agent::ObservationConfig observation;
    /// False gives the independent-critic ablation (no attention block).
    bool attention = true;
    /// Episodes between checkpoints; 0 writes only the final one.
    std::size_t checkpoint_every = 0;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    double temperature_at(std::size_t episode) const;

    bool operator==(const TrainConfig&) const = default;
};

}  // namespace edgeoff::amarl
