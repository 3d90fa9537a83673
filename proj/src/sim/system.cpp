#include "edgeoff/sim/system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edgeoff/common/error.hpp"

namespace edgeoff::sim {
namespace {

constexpr double kBitsPerMb = 8e6;
constexpr double kCyclesPerGcycle = 1e9;

struct QueueDrain {
    std::vector<std::uint64_t> finished;
};

/// Shared FIFO drain for the upload and edge stages. The scalar backlog follows
/// q(t) = max(0, q + arrivals - budget); per-task remainders are walked in FIFO
/// order and the last resident task absorbs the scalar so both views agree.
template <typename Remaining>
QueueDrain drain_fifo(std::deque<std::uint64_t>& fifo, double& backlog, double budget_mb, std::vector<Task>& tasks,
                      Remaining remaining) {
    QueueDrain out;
    const double next_backlog = backlog - budget_mb;
    // Remainders within rounding of the budget count as finished.
    if (next_backlog <= 1e-9 * budget_mb) {
        for (std::uint64_t id : fifo) {
            remaining(tasks[id]) = 0.0;
            out.finished.push_back(id);
        }
        fifo.clear();
        backlog = 0.0;
        return out;
    }
    double left = budget_mb;
    while (fifo.size() > 1 && remaining(tasks[fifo.front()]) <= left) {
        Task& head = tasks[fifo.front()];
        left -= remaining(head);
        remaining(head) = 0.0;
        out.finished.push_back(head.id);
        fifo.pop_front();
    }
    Task& head = tasks[fifo.front()];
    if (fifo.size() == 1) {
        remaining(head) = next_backlog;
    } else {
        remaining(head) = std::max(0.0, remaining(head) - left);
    }
    backlog = next_backlog;
    return out;
}

void record_event(SystemState& state, const Task& task, std::int64_t t, EventKind kind, double latency_s) {
    state.events.push_back(TaskEvent{t, task.owner, task.id, kind, latency_s, task.deadline_s});
}

void complete_task(SystemState& state, Task& task, std::int64_t t) {
    task.status = TaskStatus::completed;
    task.finish_interval = t;
    LatencyRecord rec;
    rec.ied = task.owner;
    rec.task_id = task.id;
    rec.offloaded = task.offloaded;
    rec.local_s = task.local_latency_s;
    rec.comm_s = task.comm_latency_s;
    rec.edge_s = task.edge_latency_s;
    rec.cost_s = task.offloaded ? task.comm_latency_s + task.edge_latency_s : task.local_latency_s;
    state.total_completed += 1;
    state.current.tasks_completed += 1;
    state.current.sum_latency_s += rec.cost_s;
    state.current.objective_term_s += rec.cost_s;
    state.current.records.push_back(rec);
    record_event(state, task, t, EventKind::done, rec.cost_s);
}

Drop drop_task(SystemState& state, Task& task, std::int64_t t, double residual_mb) {
    task.status = TaskStatus::dropped;
    task.finish_interval = t;
    LatencyRecord rec;
    rec.ied = task.owner;
    rec.task_id = task.id;
    rec.offloaded = task.offloaded;
    rec.dropped = true;
    rec.cost_s = task.deadline_s + state.config.drop_penalty_s;
    state.total_dropped += 1;
    state.current.tasks_dropped += 1;
    state.current.objective_term_s += rec.cost_s;
    state.current.records.push_back(rec);
    record_event(state, task, t, EventKind::drop,
                 static_cast<double>(t + 1 - task.born_interval) * state.config.interval_s);
    return Drop{task.id, task.owner, residual_mb};
}

bool expired_at(const Task& task, std::int64_t t) { return t + 1 - task.born_interval > task.deadline_intervals; }

}  // namespace

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::gen: return "gen";
        case EventKind::route_local: return "route_local";
        case EventKind::route_es: return "route_es";
        case EventKind::tx_done: return "tx_done";
        case EventKind::done: return "done";
        case EventKind::drop: return "drop";
    }
    return "?";
}

std::string_view to_string(TaskStatus status) {
    switch (status) {
        case TaskStatus::pending: return "pending";
        case TaskStatus::queued_local: return "queued-local";
        case TaskStatus::transmitting: return "transmitting";
        case TaskStatus::queued_edge: return "queued-edge";
        case TaskStatus::completed: return "completed";
        case TaskStatus::dropped: return "dropped";
    }
    return "?";
}

std::int64_t deadline_intervals(double deadline_s, double interval_s) {
    return static_cast<std::int64_t>(std::floor(deadline_s / interval_s + 1e-9));
}

std::int64_t ceil_intervals(double x) {
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(x - 1e-9)));
}

std::size_t SystemState::tasks_in_flight() const {
    std::size_t n = 0;
    for (const auto& q : local) n += q.fifo.size();
    for (const auto& q : comm) n += q.fifo.size();
    for (const auto& q : edge) n += q.fifo.size();
    for (const auto& f : fresh) {
        if (f && tasks[*f].status == TaskStatus::pending) ++n;
    }
    return n;
}

SystemState new_system(const SystemConfig& config, std::uint64_t seed) {
    config.validate();
    SystemState s;
    s.config = config;
    s.config.seed = seed;
    s.seed = seed;
    const std::size_t I = config.num_ieds;
    const std::size_t M = config.num_ess;

    Rng placement(derive_seed(seed, streams::kPlacement));
    s.radio.ied_positions.resize(I);
    s.radio.es_positions.resize(M);
    for (auto& p : s.radio.ied_positions) {
        p.x = placement.uniform(0.0, config.area_m);
        p.y = placement.uniform(0.0, config.area_m);
    }
    for (auto& p : s.radio.es_positions) {
        p.x = placement.uniform(0.0, config.area_m);
        p.y = placement.uniform(0.0, config.area_m);
    }

    Rng hardware(derive_seed(seed, streams::kHardware));
    s.ied_gpu_hz.resize(I);
    s.es_gpu_hz.resize(M);
    for (auto& f : s.ied_gpu_hz) f = hardware.uniform(config.ied_gpu_hz.low, config.ied_gpu_hz.high);
    for (auto& f : s.es_gpu_hz) f = hardware.uniform(config.es_gpu_hz.low, config.es_gpu_hz.high);

    s.radio.largescale.resize(I * M);
    s.radio.gain.assign(I * M, 1.0);
    for (std::size_t i = 0; i < I; ++i) {
        for (std::size_t m = 0; m < M; ++m) {
            const double dx = s.radio.ied_positions[i].x - s.radio.es_positions[m].x;
            const double dy = s.radio.ied_positions[i].y - s.radio.es_positions[m].y;
            // Closer than 1 m is treated as 1 m to keep the power law finite.
            const double dist = std::max(1.0, std::hypot(dx, dy));
            s.radio.largescale[i * M + m] = std::pow(dist, -config.pathloss_exp);
        }
    }

    s.local.resize(I);
    for (std::size_t i = 0; i < I; ++i) s.local[i].owner = i;
    s.comm.resize(I * M);
    s.edge.resize(I * M);
    for (std::size_t i = 0; i < I; ++i) {
        for (std::size_t m = 0; m < M; ++m) {
            auto& c = s.comm[i * M + m];
            c.ied = i;
            c.es = m;
            c.channel = (i * M + m) % config.num_channels;
            auto& e = s.edge[i * M + m];
            e.ied = i;
            e.es = m;
        }
    }
    reset_episode(s, 0);
    return s;
}

void reset_episode(SystemState& state, std::uint64_t episode) {
    state.episode = episode;
    state.clock = 0;
    state.tasks.clear();
    state.fresh.assign(state.config.num_ieds, std::nullopt);
    for (auto& q : state.local) {
        q.fifo.clear();
        q.last_completion = 0;
    }
    for (auto& q : state.comm) {
        q.fifo.clear();
        q.backlog_mb = 0.0;
    }
    for (auto& q : state.edge) {
        q.fifo.clear();
        q.backlog_mb = 0.0;
    }
    state.task_rng = Rng(derive_seed(state.seed, streams::kTasks, episode));
    state.fade_rng = Rng(derive_seed(state.seed, streams::kFading, episode));
    state.events.clear();
    state.late_finishers.clear();
    state.current = IntervalMetrics{};
    state.total_generated = 0;
    state.total_completed = 0;
    state.total_dropped = 0;
    state.ignored_actions = 0;
    std::fill(state.radio.gain.begin(), state.radio.gain.end(), 1.0);
}

void update_channel_gains(SystemState& state, std::int64_t /*t*/) {
    auto& radio = state.radio;
    const std::size_t n = radio.largescale.size();
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double fade = state.config.fading ? state.fade_rng.exponential() : 1.0;
        radio.gain[k] = radio.largescale[k] * fade;
        total += radio.gain[k];
    }
    const double mean = total / static_cast<double>(n);
    for (auto& g : radio.gain) g /= mean;
}

std::vector<std::uint64_t> spawn_tasks(SystemState& state, std::int64_t t) {
    const auto& cfg = state.config;
    std::vector<std::uint64_t> ids;
    std::fill(state.fresh.begin(), state.fresh.end(), std::nullopt);
    for (std::size_t i = 0; i < cfg.num_ieds; ++i) {
        if (!state.task_rng.bernoulli(cfg.task_prob)) continue;
        Task task;
        task.id = state.tasks.size();
        task.owner = i;
        task.born_interval = t;
        task.size_mb = state.task_rng.uniform(cfg.size_mb.low, cfg.size_mb.high);
        task.density = state.task_rng.uniform(cfg.density_gcycles_per_mb.low, cfg.density_gcycles_per_mb.high);
        task.deadline_s = state.task_rng.uniform(cfg.deadline_s.low, cfg.deadline_s.high);
        task.deadline_intervals = deadline_intervals(task.deadline_s, cfg.interval_s);
        state.tasks.push_back(task);
        state.fresh[i] = task.id;
        ids.push_back(task.id);
        state.total_generated += 1;
        state.current.tasks_generated += 1;
        record_event(state, state.tasks.back(), t, EventKind::gen, 0.0);
    }
    return ids;
}

LocalSchedule local_completion_interval(LocalQueue& queue, const Task& task, std::int64_t t, double interval_s,
                                        double gpu_hz) {
    const double work_cycles = task.size_mb * task.density * kCyclesPerGcycle;
    const std::int64_t service = ceil_intervals(work_cycles / (interval_s * gpu_hz));
    const std::int64_t start = std::max(queue.last_completion, t);

    LocalSchedule out;
    out.completion_boundary = start + service;
    out.local_latency_s = static_cast<double>(out.completion_boundary - task.born_interval) * interval_s;
    out.completes = out.completion_boundary - task.born_interval <= task.deadline_intervals;
    if (out.completes) {
        out.event_interval = out.completion_boundary - 1;
        queue.last_completion = out.completion_boundary;
    } else {
        out.event_interval = task.last_live_interval();
        // Started before abandonment: the device is busy until the drop boundary.
        if (start <= task.last_live_interval()) {
            queue.last_completion = std::max(queue.last_completion, task.last_live_interval() + 1);
        }
    }
    return out;
}

void apply_actions(SystemState& state, std::span<const int> actions) {
    const std::size_t I = state.config.num_ieds;
    const std::size_t M = state.config.num_ess;
    if (actions.size() != I) {
        throw ProtocolError("apply_actions: expected " + std::to_string(I) + " actions, got " +
                            std::to_string(actions.size()));
    }
    const std::int64_t t = state.clock;
    for (std::size_t i = 0; i < I; ++i) {
        const int a = actions[i];
        if (a < kNoOp || a > static_cast<int>(M)) {
            throw ProtocolError("apply_actions: IED " + std::to_string(i) + " selected action " + std::to_string(a) +
                                " outside [0, " + std::to_string(M) + "]");
        }
        if (!state.fresh[i] || state.tasks[*state.fresh[i]].status != TaskStatus::pending) {
            if (a != kNoOp) state.ignored_actions += 1;
            continue;
        }
        if (a == kNoOp) {
            throw ProtocolError("apply_actions: IED " + std::to_string(i) + " generated a task but sent no action");
        }
        Task& task = state.tasks[*state.fresh[i]];
        if (a == 0) {
            const auto sched = local_completion_interval(state.local[i], task, t, state.config.interval_s,
                                                         state.ied_gpu_hz[i]);
            task.status = TaskStatus::queued_local;
            task.local_completion_boundary = sched.completion_boundary;
            task.local_event_interval = sched.event_interval;
            task.local_will_complete = sched.completes;
            task.local_latency_s = sched.local_latency_s;
            state.local[i].fifo.push_back(task.id);
            record_event(state, task, t, EventKind::route_local, 0.0);
        } else {
            const std::size_t m = static_cast<std::size_t>(a - 1);
            task.offloaded = true;
            task.assigned_es = m;
            task.status = TaskStatus::transmitting;
            task.remaining_tx_mb = task.size_mb;
            auto& q = state.comm_queue(i, m);
            q.fifo.push_back(task.id);
            q.backlog_mb += task.size_mb;
            record_event(state, task, t, EventKind::route_es, 0.0);
        }
    }
}

double equal_bandwidth_share(double bandwidth_hz, std::size_t valid_queues) {
    if (valid_queues == 0) return 0.0;
    double share = bandwidth_hz / static_cast<double>(valid_queues);
    const auto total = [valid_queues](double s) {
        double acc = 0.0;
        for (std::size_t k = 0; k < valid_queues; ++k) acc += s;
        return acc;
    };
    while (total(share) > bandwidth_hz) share = std::nextafter(share, 0.0);
    return share;
}

double uplink_rate_bps(double share_hz, double snr) { return share_hz * std::log2(1.0 + snr); }

std::vector<EdgeArrival> step_comm_queues(SystemState& state, std::int64_t t) {
    const auto& cfg = state.config;
    std::size_t valid = 0;
    for (const auto& q : state.comm) valid += q.valid() ? 1 : 0;
    const double share = equal_bandwidth_share(cfg.bandwidth_hz, valid);
    state.current.valid_comm_queues = valid;
    state.current.bandwidth_allocated_hz = 0.0;

    std::vector<EdgeArrival> arrivals;
    for (auto& q : state.comm) {
        if (!q.valid()) continue;
        state.current.bandwidth_allocated_hz += share;
        const double snr = cfg.tx_power_w * state.radio.gain[state.pair_index(q.ied, q.es)] / cfg.noise_power;
        const double budget_mb = uplink_rate_bps(share, snr) * cfg.interval_s / kBitsPerMb;
        auto drained = drain_fifo(q.fifo, q.backlog_mb, budget_mb, state.tasks,
                                  [](Task& task) -> double& { return task.remaining_tx_mb; });
        for (std::uint64_t id : drained.finished) {
            Task& task = state.tasks[id];
            task.tx_done_interval = t;
            task.comm_latency_s = static_cast<double>(t + 1 - task.born_interval) * cfg.interval_s;
            record_event(state, task, t, EventKind::tx_done, task.comm_latency_s);
            arrivals.push_back(EdgeArrival{id, task.owner, *task.assigned_es, task.size_mb});
        }
    }
    for (const auto& a : arrivals) enqueue_edge(state, a.task_id, t);
    return arrivals;
}

void enqueue_edge(SystemState& state, std::uint64_t task_id, std::int64_t t) {
    Task& task = state.tasks[task_id];
    task.status = TaskStatus::queued_edge;
    task.remaining_tx_mb = 0.0;
    task.remaining_compute_mb = task.size_mb;
    if (task.tx_done_interval < 0) task.tx_done_interval = t;
    auto& q = state.edge_queue(task.owner, *task.assigned_es);
    q.fifo.push_back(task_id);
    q.backlog_mb += task.size_mb;
}

std::vector<Completion> step_edge_queues(SystemState& state, std::int64_t t) {
    const auto& cfg = state.config;
    const std::size_t I = cfg.num_ieds;
    const std::size_t M = cfg.num_ess;
    std::vector<Completion> done;
    for (std::size_t m = 0; m < M; ++m) {
        std::size_t valid = 0;
        for (std::size_t i = 0; i < I; ++i) valid += state.edge_queue(i, m).valid() ? 1 : 0;
        if (valid == 0) continue;
        for (std::size_t i = 0; i < I; ++i) {
            auto& q = state.edge_queue(i, m);
            if (!q.valid()) continue;
            const double density = state.tasks[q.fifo.front()].density;
            const double budget_mb =
                state.es_gpu_hz[m] * cfg.interval_s / (static_cast<double>(valid) * density * kCyclesPerGcycle);
            auto drained = drain_fifo(q.fifo, q.backlog_mb, budget_mb, state.tasks,
                                      [](Task& task) -> double& { return task.remaining_compute_mb; });
            for (std::uint64_t id : drained.finished) {
                Task& task = state.tasks[id];
                task.edge_latency_s = static_cast<double>(t - task.tx_done_interval) * cfg.interval_s;
                if (expired_at(task, t)) {
                    // Finished during the interval in which its deadline passed.
                    state.late_finishers.push_back(id);
                    continue;
                }
                complete_task(state, task, t);
                done.push_back(Completion{id, task.owner, state.events.back().latency_s});
            }
        }
    }
    return done;
}

std::vector<Completion> step_local_queues(SystemState& state, std::int64_t t) {
    std::vector<Completion> done;
    for (auto& q : state.local) {
        for (auto it = q.fifo.begin(); it != q.fifo.end();) {
            Task& task = state.tasks[*it];
            if (task.local_will_complete && task.local_event_interval == t) {
                complete_task(state, task, t);
                done.push_back(Completion{task.id, task.owner, task.local_latency_s});
                it = q.fifo.erase(it);
            } else {
                ++it;
            }
        }
    }
    return done;
}

std::vector<Drop> enforce_deadlines(SystemState& state, std::int64_t t) {
    std::vector<Drop> drops;
    for (std::uint64_t id : state.late_finishers) drops.push_back(drop_task(state, state.tasks[id], t, 0.0));
    state.late_finishers.clear();

    for (auto& q : state.local) {
        for (auto it = q.fifo.begin(); it != q.fifo.end();) {
            Task& task = state.tasks[*it];
            if (!task.local_will_complete && expired_at(task, t)) {
                drops.push_back(drop_task(state, task, t, task.size_mb));
                it = q.fifo.erase(it);
            } else {
                ++it;
            }
        }
    }
    const auto sweep = [&](auto& queues, auto remaining) {
        for (auto& q : queues) {
            for (auto it = q.fifo.begin(); it != q.fifo.end();) {
                Task& task = state.tasks[*it];
                if (expired_at(task, t)) {
                    const double residual = remaining(task);
                    q.backlog_mb -= residual;
                    remaining(task) = 0.0;
                    drops.push_back(drop_task(state, task, t, residual));
                    it = q.fifo.erase(it);
                } else {
                    ++it;
                }
            }
            if (q.fifo.empty()) q.backlog_mb = 0.0;
            q.backlog_mb = std::max(0.0, q.backlog_mb);
        }
    };
    sweep(state.comm, [](Task& task) -> double& { return task.remaining_tx_mb; });
    sweep(state.edge, [](Task& task) -> double& { return task.remaining_compute_mb; });
    return drops;
}

std::vector<std::uint64_t> begin_interval(SystemState& state) {
    const std::int64_t t = state.clock;
    state.events.clear();
    state.current = IntervalMetrics{};
    state.current.t = t;
    update_channel_gains(state, t);
    return spawn_tasks(state, t);
}

IntervalMetrics finish_interval(SystemState& state) {
    const std::int64_t t = state.clock;
    for (std::size_t i = 0; i < state.fresh.size(); ++i) {
        if (state.fresh[i] && state.tasks[*state.fresh[i]].status == TaskStatus::pending) {
            throw ProtocolError("finish_interval: IED " + std::to_string(i) + " has an unrouted task");
        }
    }
    step_comm_queues(state, t);
    step_edge_queues(state, t);
    step_local_queues(state, t);
    enforce_deadlines(state, t);
    state.current.tasks_in_flight = state.tasks_in_flight();
    IntervalMetrics out = std::move(state.current);
    state.current = IntervalMetrics{};
    state.current.t = t + 1;
    state.clock = t + 1;
    return out;
}

double objective_value(std::span<const IntervalMetrics> intervals) {
    double total = 0.0;
    for (const auto& m : intervals) total += m.objective_term_s;
    return total;
}

}  // namespace edgeoff::sim
