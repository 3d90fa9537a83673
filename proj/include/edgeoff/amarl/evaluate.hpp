/**
 * @file evaluate.hpp
 * @brief Decentralized greedy execution of trained actors.
 *
 * This header and its implementation depend only on the actors; the critic
 * is not part of the execution path.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "edgeoff/agent/evaluation.hpp"
#include "edgeoff/agent/observation.hpp"
#include "edgeoff/sim/config.hpp"

namespace edgeoff::amarl {

struct EvalOptions {
    agent::ObservationConfig observation;
    double reward_constant = 3.0;
    std::uint64_t first_episode = 0;
};

/// Loads the actors in `checkpoint_dir` and runs argmax execution.
/// Throws CompatibilityError if the checkpoint does not fit the configuration.
agent::EvalReport evaluate(const std::filesystem::path& checkpoint_dir, const sim::SystemConfig& config,
                           std::size_t episodes, std::uint64_t seed, const EvalOptions& options = {});

}  // namespace edgeoff::amarl
