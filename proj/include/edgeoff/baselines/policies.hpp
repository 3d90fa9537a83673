/**
 * @file policies.hpp
 * @brief Fixed reference policies and the policy tag used to select them.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "edgeoff/agent/rollout.hpp"
#include "edgeoff/amarl/config.hpp"

namespace edgeoff::baselines {

enum class PolicyKind { local_only, random, greedy, round_robin, amarl, independent_critic_ablation };

/// Accepts the tags local-only, random, greedy, round-robin, amarl and
/// independent-critic-ablation. Throws ConfigError otherwise.
PolicyKind parse_policy_kind(std::string_view tag);
std::string_view to_string(PolicyKind kind);
/// True for the policies that need no training.
bool is_heuristic(PolicyKind kind);

int policy_local_only();

/// Uniform over {0..M}; a pure function of its arguments.
int policy_random(std::uint64_t seed, std::size_t ied, std::uint64_t episode, std::int64_t t, std::size_t num_ess);

/// Estimated response latency of each option, local first. Infinity when an
/// uplink has zero rate.
std::vector<double> greedy_estimates(const agent::RawObservation& raw, const sim::SystemState& system, std::size_t ied);

/// argmin of greedy_estimates, ties toward the lower index.
int policy_greedy(const agent::RawObservation& raw, const sim::SystemState& system, std::size_t ied);

/// One policy per IED. Throws ConfigError for the learned kinds.
agent::PolicySet make_heuristic_policies(PolicyKind kind, std::size_t num_ieds, std::size_t num_ess,
                                         std::uint64_t seed);

/// The training setup of the independent-critic ablation: the same loop with
/// the attention path removed.
amarl::TrainConfig ablation_config(amarl::TrainConfig config);

}  // namespace edgeoff::baselines
