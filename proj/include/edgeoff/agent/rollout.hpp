/**
 * @file rollout.hpp
 * @brief Rewards, episode rollouts and the experience records they produce.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "edgeoff/agent/observation.hpp"
#include "edgeoff/sim/system.hpp"

namespace edgeoff::agent {

/// Sum over this interval's finished tasks of IED i: C - latency for a
/// completion, C - (d + penalty) for a drop. Zero if none finished.
double step_reward(std::span<const sim::LatencyRecord> records, std::size_t ied, double reward_constant);

double discounted_return(std::span<const double> rewards, double gamma);

/// What one agent sees when asked to act.
struct AgentView {
    std::size_t ied = 0;
    std::int64_t t = 0;
    bool has_task = false;
    bool explore = false;
    std::span<const double> observation;
    const RawObservation* raw = nullptr;
    /// Read-only system handle for heuristics that use public hardware data
    /// (capacities, valid-queue counts). Learning agents ignore it.
    const sim::SystemState* system = nullptr;
};

class AgentPolicy {
public:
    virtual ~AgentPolicy() = default;
    virtual void reset_episode(std::uint64_t /*episode*/) {}
    /// Called every interval; the return value is used only when `view.has_task`.
    virtual int act(const AgentView& view) = 0;
    /// Recurrent state before the most recent `act`, for replay; empty if stateless.
    virtual std::vector<double> hidden_before_act() const { return {}; }
};

using PolicySet = std::vector<std::unique_ptr<AgentPolicy>>;

struct Experience {
    std::int64_t t = 0;
    std::vector<std::vector<double>> obs;
    std::vector<std::vector<double>> next_obs;
    /// Chosen index per agent, sim::kNoOp when the agent had no task.
    std::vector<int> actions;
    std::vector<double> rewards;
    std::vector<std::uint8_t> has_task;
    std::vector<std::uint8_t> next_has_task;
    std::vector<std::vector<double>> actor_hidden;
    std::vector<std::vector<double>> next_actor_hidden;
    std::vector<std::vector<double>> critic_hidden;
    std::vector<std::vector<double>> next_critic_hidden;
    bool done = false;
};

struct EpisodeMetrics {
    std::size_t intervals = 0;
    std::size_t agents = 0;
    std::vector<double> reward_per_agent;
    /// Sum of all rewards divided by the number of agents.
    double mean_reward = 0.0;
    std::size_t generated = 0;
    std::size_t completed = 0;
    std::size_t dropped = 0;
    std::size_t offloaded = 0;
    /// completed / generated; 1.0 with `no_tasks` set when nothing was generated.
    double completion_rate = 1.0;
    bool no_tasks = false;
    /// Objective (latencies plus drop costs) divided by finished tasks.
    double avg_latency_s = 0.0;
    double objective_s = 0.0;
    std::size_t ignored_actions = 0;

    std::size_t bandwidth_violations = 0;
    std::size_t deadline_violations = 0;
    std::size_t conservation_violations = 0;
    double max_bandwidth_hz = 0.0;
};

struct RolloutOptions {
    ObservationConfig observation;
    double reward_constant = 3.0;
    /// Decay of the critic's running observation summary.
    double critic_memory_decay = 0.8;
    bool explore = false;
    bool record_experience = true;
    /// When set, every task event is appended here.
    std::vector<sim::TaskEvent>* events = nullptr;
};

struct Rollout {
    std::vector<Experience> steps;
    EpisodeMetrics metrics;
};

/// Runs `intervals` intervals from the current state of `env`. One policy per IED.
/// Throws ProtocolError if a policy returns an invalid index for a task.
Rollout rollout(sim::SystemState& env, PolicySet& policies, std::size_t intervals, const RolloutOptions& options);

/// Newline-delimited JSON records {t, i, obs, action, reward}, one per agent per step.
void write_trajectory(std::ostream& out, std::span<const Experience> steps);

}  // namespace edgeoff::agent
