#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "edgeoff/common/rng.hpp"
#include "edgeoff/sim/system.hpp"
#include "oracles/queue_oracles.hpp"

using namespace edgeoff;
using namespace edgeoff::sim;

namespace {

struct EpisodeLog {
    std::vector<IntervalMetrics> intervals;
    std::vector<TaskEvent> events;
};

/// Random routing over one episode; `offload_bias` in [0, 1] skews towards the ESs.
EpisodeLog run_random_episode(SystemState& s, std::uint64_t policy_seed, double offload_bias = 0.5) {
    Rng policy(policy_seed);
    EpisodeLog log;
    const auto M = static_cast<int>(s.num_ess());
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(s.config.episode_intervals); ++t) {
        begin_interval(s);
        std::vector<int> actions(s.num_ieds(), kNoOp);
        for (std::size_t i = 0; i < s.num_ieds(); ++i) {
            if (!s.fresh[i]) continue;
            actions[i] = policy.uniform() < offload_bias ? 1 + static_cast<int>(policy.below(M)) : 0;
        }
        apply_actions(s, actions);
        auto m = finish_interval(s);
        log.events.insert(log.events.end(), s.events.begin(), s.events.end());
        log.intervals.push_back(std::move(m));
    }
    return log;
}

SystemConfig random_config(Rng& rng) {
    SystemConfig c;
    c.num_ieds = 1 + rng.below(8);
    c.num_ess = 1 + rng.below(3);
    c.num_channels = c.num_ess;
    c.episode_intervals = 60;
    c.task_prob = rng.uniform(0.1, 0.9);
    return c;
}

}  // namespace

TEST_CASE("local FIFO closed form matches an interval-stepped reneging queue") {
    Rng rng(derive_seed(2024, 1));
    const double dt = 0.1;
    for (int seq = 0; seq < 1000; ++seq) {
        const double gpu = rng.uniform(0.5e9, 2e9);
        const std::size_t n = 1 + rng.below(30);
        std::vector<oracle::FifoJob> jobs;
        std::vector<Task> tasks;
        std::int64_t t = 0;
        for (std::size_t k = 0; k < n; ++k) {
            t += static_cast<std::int64_t>(rng.below(4));
            if (k > 0 && t == jobs.back().arrival) t += 1;
            Task task;
            task.born_interval = t;
            task.size_mb = rng.uniform(0.5, 5.0);
            task.density = rng.uniform(0.1, 0.5);
            task.deadline_s = rng.uniform(0.5, 2.5);
            task.deadline_intervals = deadline_intervals(task.deadline_s, dt);
            tasks.push_back(task);
            jobs.push_back({t, task.size_mb * task.density * 1e9, task.deadline_intervals});
        }
        const auto expected = oracle::simulate_fifo(jobs, dt * gpu);
        LocalQueue q;
        for (std::size_t k = 0; k < n; ++k) {
            const auto sched = local_completion_interval(q, tasks[k], tasks[k].born_interval, dt, gpu);
            REQUIRE(sched.completes == expected[k].completed);
            if (sched.completes) {
                REQUIRE(sched.completion_boundary == expected[k].boundary);
                REQUIRE(sched.event_interval == expected[k].boundary - 1);
            } else {
                REQUIRE(sched.event_interval == expected[k].drop_interval);
            }
        }
    }
}

TEST_CASE("edge backlog follows the scalar shared-processor recurrence") {
    Rng rng(derive_seed(2024, 2));
    for (int inst_no = 0; inst_no < 500; ++inst_no) {
        oracle::EdgeInstance inst;
        inst.ieds = 1 + rng.below(5);
        inst.ess = 1 + rng.below(3);
        inst.interval_s = 0.1;
        const std::size_t horizon = 5 + rng.below(26);
        for (std::size_t m = 0; m < inst.ess; ++m) inst.es_hz.push_back(rng.uniform(10e9, 20e9));
        for (std::size_t k = 0; k < inst.ieds * inst.ess; ++k) inst.density.push_back(rng.uniform(0.1, 0.5));
        const double rate = rng.uniform(0.05, 0.6);
        inst.arrivals.resize(horizon);
        for (auto& step : inst.arrivals) {
            step.resize(inst.ieds * inst.ess);
            for (auto& sizes : step) {
                if (rng.uniform() < rate) sizes.push_back(rng.uniform(0.5, 5.0));
                if (rng.uniform() < rate * 0.2) sizes.push_back(rng.uniform(0.5, 5.0));
            }
        }
        const auto expected = oracle::edge_recurrence(inst);

        SystemConfig cfg;
        cfg.num_ieds = inst.ieds;
        cfg.num_ess = inst.ess;
        cfg.num_channels = inst.ess;
        cfg.interval_s = inst.interval_s;
        auto s = new_system(cfg, 99);
        s.es_gpu_hz = inst.es_hz;
        for (std::size_t t = 0; t < horizon; ++t) {
            const auto ti = static_cast<std::int64_t>(t);
            for (std::size_t i = 0; i < inst.ieds; ++i) {
                for (std::size_t m = 0; m < inst.ess; ++m) {
                    for (double size : inst.arrivals[t][i * inst.ess + m]) {
                        Task task;
                        task.id = s.tasks.size();
                        task.owner = i;
                        task.born_interval = ti;
                        task.size_mb = size;
                        task.density = inst.density[i * inst.ess + m];
                        task.deadline_s = 1e6;
                        task.deadline_intervals = deadline_intervals(task.deadline_s, cfg.interval_s);
                        task.assigned_es = m;
                        task.offloaded = true;
                        task.tx_done_interval = ti;
                        s.tasks.push_back(task);
                        enqueue_edge(s, task.id, ti);
                    }
                }
            }
            step_edge_queues(s, ti);
            for (std::size_t k = 0; k < inst.ieds * inst.ess; ++k) {
                REQUIRE(s.edge[k].backlog_mb == expected[t][k]);
                REQUIRE(s.edge[k].valid() == (expected[t][k] > 0.0));
            }
        }
    }
}

TEST_CASE("per-task edge remainders always sum to the scalar backlog") {
    Rng rng(derive_seed(2024, 3));
    for (int trial = 0; trial < 50; ++trial) {
        auto cfg = random_config(rng);
        cfg.deadline_s = Range{1e5, 1e5};
        auto s = new_system(cfg, 1000 + trial);
        Rng policy(trial);
        for (std::int64_t t = 0; t < 60; ++t) {
            begin_interval(s);
            std::vector<int> actions(s.num_ieds(), kNoOp);
            for (std::size_t i = 0; i < s.num_ieds(); ++i) {
                if (s.fresh[i]) actions[i] = 1 + static_cast<int>(policy.below(s.num_ess()));
            }
            apply_actions(s, actions);
            finish_interval(s);
            for (const auto& q : s.edge) {
                double sum = 0.0;
                for (auto id : q.fifo) sum += s.tasks[id].remaining_compute_mb;
                CHECK(sum == doctest::Approx(q.backlog_mb).epsilon(1e-9));
            }
            for (const auto& q : s.comm) {
                double sum = 0.0;
                for (auto id : q.fifo) sum += s.tasks[id].remaining_tx_mb;
                CHECK(sum == doctest::Approx(q.backlog_mb).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("task conservation holds every interval") {
    Rng rng(derive_seed(2024, 4));
    for (int trial = 0; trial < 40; ++trial) {
        const auto cfg = random_config(rng);
        auto s = new_system(cfg, 500 + trial);
        std::size_t generated = 0, completed = 0, dropped = 0;
        const double bias = rng.uniform();
        Rng policy(trial);
        const auto M = static_cast<int>(s.num_ess());
        for (std::int64_t t = 0; t < 60; ++t) {
            begin_interval(s);
            std::vector<int> actions(s.num_ieds(), kNoOp);
            for (std::size_t i = 0; i < s.num_ieds(); ++i) {
                if (s.fresh[i]) actions[i] = policy.uniform() < bias ? 1 + static_cast<int>(policy.below(M)) : 0;
            }
            apply_actions(s, actions);
            const auto m = finish_interval(s);
            generated += m.tasks_generated;
            completed += m.tasks_completed;
            dropped += m.tasks_dropped;
            REQUIRE(generated == completed + dropped + m.tasks_in_flight);
            CHECK(m.bandwidth_allocated_hz <= cfg.bandwidth_hz);
        }
        CHECK(generated == s.total_generated);
    }
}

TEST_CASE("every task finishes at most once and completions meet their deadline") {
    Rng rng(derive_seed(2024, 5));
    for (int trial = 0; trial < 40; ++trial) {
        const auto cfg = random_config(rng);
        auto s = new_system(cfg, 700 + trial);
        const auto log = run_random_episode(s, trial, rng.uniform());
        std::map<std::uint64_t, int> terminal;
        for (const auto& e : log.events) {
            if (e.kind == EventKind::done || e.kind == EventKind::drop) terminal[e.task_id] += 1;
            if (e.kind == EventKind::done) CHECK(e.latency_s <= e.deadline_s + 1e-9);
            if (e.kind == EventKind::done) CHECK(e.latency_s > 0.0);
        }
        for (const auto& [id, count] : terminal) CHECK(count == 1);
        for (const auto& m : log.intervals) {
            for (const auto& r : m.records) {
                if (r.dropped) {
                    CHECK(r.cost_s == doctest::Approx(s.tasks[r.task_id].deadline_s + cfg.drop_penalty_s));
                } else if (r.offloaded) {
                    CHECK(r.comm_s > 0.0);
                    CHECK(r.edge_s >= 0.0);
                }
            }
        }
    }
}

TEST_CASE("identical seeds give identical episodes") {
    Rng rng(derive_seed(2024, 6));
    for (int trial = 0; trial < 10; ++trial) {
        const auto cfg = random_config(rng);
        auto a = new_system(cfg, 42 + trial);
        auto b = new_system(cfg, 42 + trial);
        const auto la = run_random_episode(a, 9);
        const auto lb = run_random_episode(b, 9);
        REQUIRE(la.intervals.size() == lb.intervals.size());
        for (std::size_t k = 0; k < la.intervals.size(); ++k) {
            CHECK(la.intervals[k].objective_term_s == lb.intervals[k].objective_term_s);
            CHECK(la.intervals[k].tasks_completed == lb.intervals[k].tasks_completed);
        }
        REQUIRE(la.events.size() == lb.events.size());
        for (std::size_t k = 0; k < la.events.size(); ++k) {
            CHECK(la.events[k].task_id == lb.events[k].task_id);
            CHECK(la.events[k].kind == lb.events[k].kind);
        }
    }
}

TEST_CASE("reset_episode replays the same episode index and keeps the topology") {
    auto cfg = desk_system_config();
    auto s = new_system(cfg, 17);
    const auto positions = s.radio.largescale;
    const auto first = run_random_episode(s, 3);
    reset_episode(s, 1);
    (void)run_random_episode(s, 3);
    reset_episode(s, 0);
    const auto again = run_random_episode(s, 3);
    CHECK(s.radio.largescale == positions);
    REQUIRE(first.events.size() == again.events.size());
    for (std::size_t k = 0; k < first.events.size(); ++k) CHECK(first.events[k].t == again.events[k].t);
}

TEST_CASE("local latency is non-increasing in the device frequency") {
    Rng rng(derive_seed(2024, 7));
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Task> tasks;
        std::int64_t t = 0;
        for (int k = 0; k < 10; ++k) {
            t += static_cast<std::int64_t>(rng.below(5));
            Task task;
            task.born_interval = t;
            task.size_mb = rng.uniform(0.5, 5.0);
            task.density = rng.uniform(0.1, 0.5);
            task.deadline_intervals = 1000000;
            tasks.push_back(task);
        }
        const double slow = rng.uniform(0.5e9, 1.5e9);
        const double fast = slow * rng.uniform(1.0, 2.0);
        LocalQueue qs, qf;
        for (const auto& task : tasks) {
            const auto a = local_completion_interval(qs, task, task.born_interval, 0.1, slow);
            const auto b = local_completion_interval(qf, task, task.born_interval, 0.1, fast);
            CHECK(b.local_latency_s <= a.local_latency_s);
        }
    }
}

TEST_CASE("arrival counts are binomial in the generation probability") {
    auto cfg = desk_system_config();
    cfg.task_prob = 0.3;
    auto s = new_system(cfg, 8);
    std::size_t total = 0;
    const std::size_t intervals = 20000;
    for (std::size_t t = 0; t < intervals; ++t) total += spawn_tasks(s, static_cast<std::int64_t>(t)).size();
    const double n = static_cast<double>(intervals * cfg.num_ieds);
    const double mean = n * 0.3;
    const double sd = std::sqrt(n * 0.3 * 0.7);
    CHECK(std::abs(static_cast<double>(total) - mean) < 4.0 * sd);
}

TEST_CASE("Rayleigh fading power has unit mean before normalization") {
    auto cfg = desk_system_config();
    auto s = new_system(cfg, 12);
    const std::size_t n = 40000;
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += s.fade_rng.exponential();
    CHECK(std::abs(acc / static_cast<double>(n) - 1.0) < 4.0 / std::sqrt(static_cast<double>(n)));
}
