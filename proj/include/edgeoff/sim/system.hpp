/**
 * @file system.hpp
 * @brief Discrete-time edge-offloading environment.
 *
 * One interval t runs, in order:
 *
 *   update_channel_gains -> spawn_tasks -> (agents observe and act)
 *   -> apply_actions -> step_comm_queues -> step_edge_queues
 *   -> step_local_queues -> enforce_deadlines
 *
 * `begin_interval` and `finish_interval` bundle the stages around the agents'
 * decision point. A task may be in flight for at most `deadline_intervals`
 * whole intervals; the end-of-interval check drops it once
 * (t + 1 - born) * dt exceeds its deadline.
 *
 * A SystemState is single-writer. Independent instances share nothing.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "edgeoff/common/rng.hpp"
#include "edgeoff/sim/config.hpp"
#include "edgeoff/sim/task.hpp"

namespace edgeoff::sim {

struct Position {
    double x = 0.0;
    double y = 0.0;
};

struct LocalQueue {
    std::size_t owner = 0;
    std::deque<std::uint64_t> fifo;
    /// tau-hat: boundary at which the device finishes its current backlog.
    std::int64_t last_completion = 0;
};

struct CommQueue {
    std::size_t ied = 0;
    std::size_t es = 0;
    std::size_t channel = 0;
    double backlog_mb = 0.0;
    std::deque<std::uint64_t> fifo;

    bool valid() const noexcept { return !fifo.empty(); }
};

struct EdgeQueue {
    std::size_t es = 0;
    std::size_t ied = 0;
    double backlog_mb = 0.0;
    std::deque<std::uint64_t> fifo;

    bool valid() const noexcept { return !fifo.empty(); }
};

struct RadioState {
    std::vector<Position> ied_positions;
    std::vector<Position> es_positions;
    /// Path-loss coefficients omega[i * M + m] = dist^-rho.
    std::vector<double> largescale;
    /// Mean-normalized gains g-bar[i * M + m] for the current interval.
    std::vector<double> gain;
};

/// Per-task breakdown of the latency objective, emitted when a task finishes.
struct LatencyRecord {
    std::size_t ied = 0;
    std::uint64_t task_id = 0;
    bool offloaded = false;
    bool dropped = false;
    double local_s = 0.0;
    double comm_s = 0.0;
    double edge_s = 0.0;
    /// Contribution to the objective: response latency, or deadline + drop penalty.
    double cost_s = 0.0;
};

struct IntervalMetrics {
    std::int64_t t = 0;
    std::size_t tasks_generated = 0;
    std::size_t tasks_completed = 0;
    std::size_t tasks_dropped = 0;
    std::size_t tasks_in_flight = 0;
    double sum_latency_s = 0.0;
    double objective_term_s = 0.0;
    double bandwidth_allocated_hz = 0.0;
    std::size_t valid_comm_queues = 0;
    std::vector<LatencyRecord> records;
};

struct EdgeArrival {
    std::uint64_t task_id = 0;
    std::size_t ied = 0;
    std::size_t es = 0;
    double size_mb = 0.0;
};

struct Completion {
    std::uint64_t task_id = 0;
    std::size_t ied = 0;
    double latency_s = 0.0;
};

struct Drop {
    std::uint64_t task_id = 0;
    std::size_t ied = 0;
    /// Data discarded (xi) at the moment of abandonment, MB.
    double residual_mb = 0.0;
};

/// Action index convention shared with the agent layer: -1 no task,
/// 0 execute locally, k >= 1 offload to ES k - 1.
inline constexpr int kNoOp = -1;

struct SystemState {
    SystemConfig config;
    std::uint64_t seed = 0;
    std::uint64_t episode = 0;
    std::int64_t clock = 0;

    std::vector<double> ied_gpu_hz;
    std::vector<double> es_gpu_hz;
    RadioState radio;

    /// Every task of the current episode; id is the index.
    std::vector<Task> tasks;
    /// Task generated by each IED in the current interval, if any.
    std::vector<std::optional<std::uint64_t>> fresh;

    std::vector<LocalQueue> local;
    std::vector<CommQueue> comm;  ///< index i * M + m
    std::vector<EdgeQueue> edge;  ///< index i * M + m

    Rng task_rng;
    Rng fade_rng;

    /// Edge tasks drained during the interval their deadline passed; dropped at its end.
    std::vector<std::uint64_t> late_finishers;

    /// Events of the interval in progress.
    std::vector<TaskEvent> events;
    IntervalMetrics current;

    std::size_t total_generated = 0;
    std::size_t total_completed = 0;
    std::size_t total_dropped = 0;
    /// Actions submitted for IEDs that had no task this interval.
    std::size_t ignored_actions = 0;

    std::size_t num_ieds() const noexcept { return config.num_ieds; }
    std::size_t num_ess() const noexcept { return config.num_ess; }
    std::size_t pair_index(std::size_t ied, std::size_t es) const noexcept { return ied * config.num_ess + es; }
    CommQueue& comm_queue(std::size_t ied, std::size_t es) { return comm[pair_index(ied, es)]; }
    const CommQueue& comm_queue(std::size_t ied, std::size_t es) const { return comm[pair_index(ied, es)]; }
    EdgeQueue& edge_queue(std::size_t ied, std::size_t es) { return edge[pair_index(ied, es)]; }
    const EdgeQueue& edge_queue(std::size_t ied, std::size_t es) const { return edge[pair_index(ied, es)]; }
    std::size_t tasks_in_flight() const;
};

/// Builds a fresh system: positions, hardware, RNG streams, empty queues, clock 0.
SystemState new_system(const SystemConfig& config, std::uint64_t seed);

/// Clears queues and tasks and re-derives the task and fading streams for
/// `episode`. Topology and hardware are kept.
void reset_episode(SystemState& state, std::uint64_t episode);

void update_channel_gains(SystemState& state, std::int64_t t);

/// Each IED independently draws one task with probability p.
std::vector<std::uint64_t> spawn_tasks(SystemState& state, std::int64_t t);

/// `actions[i]` follows the kNoOp / 0 / k convention above.
void apply_actions(SystemState& state, std::span<const int> actions);

struct LocalSchedule {
    /// tau = max(tau-hat, t) + ceil(s e / (dt f)).
    std::int64_t completion_boundary = 0;
    bool completes = false;
    /// Interval whose end carries the done or drop event.
    std::int64_t event_interval = 0;
    double local_latency_s = 0.0;
};

/// FIFO completion for a task joining `queue` at interval t. Updates tau-hat:
/// to tau when the task completes, to the abandonment boundary when it starts
/// but cannot finish, unchanged when it is abandoned before starting.
LocalSchedule local_completion_interval(LocalQueue& queue, const Task& task, std::int64_t t, double interval_s,
                                        double gpu_hz);

/// Equal split of the band over `valid_queues`; never sums above `bandwidth_hz`.
double equal_bandwidth_share(double bandwidth_hz, std::size_t valid_queues);

/// Shannon rate in bit/s for a band of `share_hz` at the given linear SNR.
double uplink_rate_bps(double share_hz, double snr);

std::vector<EdgeArrival> step_comm_queues(SystemState& state, std::int64_t t);

/// Puts a task that finished its upload at interval t into edge queue (ied, es).
void enqueue_edge(SystemState& state, std::uint64_t task_id, std::int64_t t);

std::vector<Completion> step_edge_queues(SystemState& state, std::int64_t t);

std::vector<Completion> step_local_queues(SystemState& state, std::int64_t t);

std::vector<Drop> enforce_deadlines(SystemState& state, std::int64_t t);

/// Gains, spawn. Returns the ids of tasks generated this interval.
std::vector<std::uint64_t> begin_interval(SystemState& state);

/// Queue stages, deadline enforcement, metrics; advances the clock.
IntervalMetrics finish_interval(SystemState& state);

/// Sum over intervals of the per-task latency objective (drops cost d + penalty).
double objective_value(std::span<const IntervalMetrics> intervals);

}  // namespace edgeoff::sim
