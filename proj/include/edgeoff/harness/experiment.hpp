/**
 * @file experiment.hpp
 * @brief Training, simulation, evaluation and sweep runs with their files.
 *
 * A run directory holds:
 *
 *   config.ini     the fully expanded configuration
 *   episodes.csv   episode,mean_reward,completion_rate,avg_latency_s,objective_s,drops,critic_loss,actor_loss
 *   summary.txt    key = value record of the final-window means
 *   timing.txt     wall-clock seconds (kept apart so the other files are reproducible)
 *   checkpoint/    trained networks (train only)
 *   trace.csv      task events of the first episode (simulate only)
 *
 * Loss columns read `nan` for episodes without updates and for fixed policies.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "edgeoff/agent/rollout.hpp"
#include "edgeoff/harness/config.hpp"

namespace edgeoff::harness {

inline constexpr const char* kOutputRootEnv = "EDGEOFF_OUTPUT_ROOT";
inline constexpr const char* kEpisodesHeader =
    "episode,mean_reward,completion_rate,avg_latency_s,objective_s,drops,critic_loss,actor_loss";
inline constexpr const char* kSweepHeader =
    "axis,value,seeds,mean_reward_mean,mean_reward_std,completion_rate_mean,completion_rate_std,"
    "avg_latency_s_mean,avg_latency_s_std,objective_s_mean,objective_s_std";
inline constexpr const char* kSweepRunsHeader = "axis,value,seed,mean_reward,completion_rate,avg_latency_s,objective_s";

struct EpisodeRow {
    std::size_t episode = 0;
    double mean_reward = 0.0;
    double completion_rate = 0.0;
    double avg_latency_s = 0.0;
    double objective_s = 0.0;
    std::size_t drops = 0;
    double critic_loss = 0.0;
    double actor_loss = 0.0;

    /// Nothing was generated: completion reads 1.0 and the objective 0.
    bool no_tasks() const { return completion_rate == 1.0 && objective_s == 0.0 && drops == 0; }
};

EpisodeRow make_row(std::size_t episode, const agent::EpisodeMetrics& m, double critic_loss, double actor_loss);
std::string format_row(const EpisodeRow& row);
/// Throws IoError on a malformed line.
EpisodeRow parse_row(const std::string& line);

struct RunSummary {
    std::string command;
    std::string policy;
    std::uint64_t seed = 0;
    std::size_t episodes = 0;
    /// Episodes averaged into the means below.
    std::size_t window = 0;
    double mean_reward = 0.0;
    double completion_rate = 0.0;
    double avg_latency_s = 0.0;
    double objective_s = 0.0;
    /// Episodes in the window with no generated task.
    std::size_t no_task_episodes = 0;
    double wall_clock_s = 0.0;
    std::string checkpoint;
    std::filesystem::path directory;
};

/// Means of the last `window` rows (all of them when fewer).
RunSummary summarize_rows(const std::vector<EpisodeRow>& rows, std::size_t window);

struct RunOptions {
    /// Continue a training run from its checkpoint.
    bool resume = false;
    /// Progress lines go here when set.
    std::ostream* log = nullptr;
};

/// `dir` when absolute; otherwise under $EDGEOFF_OUTPUT_ROOT if set.
std::filesystem::path resolve_output_dir(const std::filesystem::path& dir);

/// Trains AMARL or the ablation, per the policy tag. Throws ConfigError for fixed policies.
RunSummary run_train(const ExperimentConfig& config, const std::filesystem::path& out, const RunOptions& options = {});

/// Runs a fixed policy for `eval_episodes` episodes.
RunSummary run_simulate(const ExperimentConfig& config, const std::filesystem::path& out,
                        const RunOptions& options = {});

/// Greedy execution of the actors in `<out>/checkpoint`; writes eval_episodes.csv and eval_summary.txt.
RunSummary run_evaluate(const ExperimentConfig& config, const std::filesystem::path& out,
                        const RunOptions& options = {});

/// Every (value, seed) pair as a full run in `<out>/<axis>_<value>/seed_<s>`;
/// sweep.csv gains one row per value as soon as its seeds finish.
std::vector<RunSummary> run_sweep(const ExperimentConfig& config, const std::filesystem::path& out,
                                  const RunOptions& options = {});

void write_summary(const std::filesystem::path& file, const RunSummary& summary);

}  // namespace edgeoff::harness
