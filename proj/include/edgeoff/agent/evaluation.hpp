/**
 * @file evaluation.hpp
 * @brief Multi-episode evaluation of a fixed policy set.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "edgeoff/agent/rollout.hpp"
#include "edgeoff/sim/config.hpp"

namespace edgeoff::agent {

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

/// Population mean and standard deviation; zeros for an empty input.
MeanStd mean_std(const std::vector<double>& values);

struct EvalReport {
    std::size_t episodes = 0;
    MeanStd reward;
    MeanStd completion_rate;
    MeanStd avg_latency_s;
    MeanStd objective_s;
    std::vector<EpisodeMetrics> per_episode;
};

EvalReport summarize(std::vector<EpisodeMetrics> episodes);

/// Builds the system from (config, seed) and runs episodes
/// [first_episode, first_episode + episodes), resetting between them.
EvalReport evaluate_policies(const sim::SystemConfig& config, std::uint64_t seed, PolicySet& policies,
                             std::size_t episodes, const RolloutOptions& options, std::uint64_t first_episode = 0);

}  // namespace edgeoff::agent
