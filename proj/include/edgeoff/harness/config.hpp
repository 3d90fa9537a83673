/**
 * @file config.hpp
 * @brief Experiment configuration and its text format.
 *
 * Flat key = value lines grouped under [system], [train] and [sweep]
 * sections; keys before the first section are top-level. Lists and ranges
 * are bracketed: `size_range = [0.5, 5]`, `seeds = [1, 2, 3]`. `#` starts a
 * comment. Unset keys keep their defaults (the full-scale deployment and the
 * default learner).
 *
 *   seed = 7
 *   policy = amarl
 *
 *   [system]
 *   num_ieds = 8
 *
 *   [sweep]
 *   axis = task_prob
 *   values = [0.3, 0.5, 0.7, 0.9]
 *   seeds = [1, 2, 3, 4, 5]
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "edgeoff/amarl/config.hpp"
#include "edgeoff/baselines/policies.hpp"
#include "edgeoff/sim/config.hpp"

namespace edgeoff::harness {

enum class SweepAxis { none, task_prob, deadline, num_ieds };

SweepAxis parse_sweep_axis(std::string_view tag);
std::string_view to_string(SweepAxis axis);

struct SweepSpec {
    SweepAxis axis = SweepAxis::none;
    std::vector<double> values;
    /// Empty means the top-level seed alone.
    std::vector<std::uint64_t> seeds;

    bool operator==(const SweepSpec&) const = default;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    baselines::PolicyKind policy = baselines::PolicyKind::amarl;
    std::string output_dir = "runs";
    /// Episodes for simulate and evaluate.
    std::size_t eval_episodes = 100;
    /// Trailing training episodes averaged into the run summary.
    std::size_t final_window = 100;
    sim::SystemConfig system = sim::default_system_config();
    amarl::TrainConfig train;
    SweepSpec sweep;

    /// Throws ConfigError naming the first offending field.
    void validate() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates. Errors carry "<source>:<line>" and the field name.
ExperimentConfig parse_config_text(std::string_view text, const std::string& source = "<config>");
/// Throws IoError when unreadable.
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Every field, in a form parse_config_text reads back to an equal config.
std::string emit_config(const ExperimentConfig& config);

/// Copies the seed into the system and learner configs.
void apply_seed(ExperimentConfig& config, std::uint64_t seed);

/// One sweep point applied to a base configuration.
ExperimentConfig sweep_point(const ExperimentConfig& base, SweepAxis axis, double value);

}  // namespace edgeoff::harness
