// Independent reference models for the queue stages. These never call into
// edgeoff::sim; they re-derive the expected behaviour from first principles so
// the production closed forms can be checked against them.
#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <vector>

namespace oracle {

struct FifoJob {
    std::int64_t arrival = 0;
    double work_cycles = 0.0;
    /// Whole intervals the job may spend in the system.
    std::int64_t max_intervals = 0;
};

struct FifoOutcome {
    bool completed = false;
    /// Completion boundary (end of the last service interval) when completed.
    std::int64_t boundary = -1;
    /// Interval at whose end the job was abandoned when dropped.
    std::int64_t drop_interval = -1;
};

/// Interval-stepped single-server FIFO with reneging. Each interval the head
/// job receives `cycles_per_interval` cycles; a job never shares an interval
/// with its successor. A job still unfinished (or finishing) once
/// (t + 1 - arrival) exceeds its budget leaves at the end of interval t.
inline std::vector<FifoOutcome> simulate_fifo(const std::vector<FifoJob>& jobs, double cycles_per_interval) {
    std::vector<FifoOutcome> out(jobs.size());
    std::deque<std::size_t> waiting;
    std::size_t next_arrival = 0;
    bool busy = false;
    std::size_t current = 0;
    double received = 0.0;
    std::size_t resolved = 0;
    for (std::int64_t t = 0; resolved < jobs.size(); ++t) {
        while (next_arrival < jobs.size() && jobs[next_arrival].arrival == t) waiting.push_back(next_arrival++);
        if (!busy && !waiting.empty()) {
            current = waiting.front();
            waiting.pop_front();
            busy = true;
            received = 0.0;
        }
        if (busy) {
            received += cycles_per_interval;
            const auto& job = jobs[current];
            const bool finished = received >= job.work_cycles - 1e-9 * cycles_per_interval;
            const bool late = t + 1 - job.arrival > job.max_intervals;
            if (finished && !late) {
                out[current] = FifoOutcome{true, t + 1, -1};
                busy = false;
                ++resolved;
            } else if (late) {
                out[current] = FifoOutcome{false, -1, t};
                busy = false;
                ++resolved;
            }
        }
        for (auto it = waiting.begin(); it != waiting.end();) {
            const auto& job = jobs[*it];
            if (t + 1 - job.arrival > job.max_intervals) {
                out[*it] = FifoOutcome{false, -1, t};
                ++resolved;
                it = waiting.erase(it);
            } else {
                ++it;
            }
        }
    }
    return out;
}

struct EdgeInstance {
    std::size_t ieds = 0;
    std::size_t ess = 0;
    double interval_s = 0.1;
    std::vector<double> es_hz;
    /// Compute density per (ied * ess + es) queue, Gcycles/MB.
    std::vector<double> density;
    /// arrivals[t][ied * ess + es] = sizes arriving in interval t, in order.
    std::vector<std::vector<std::vector<double>>> arrivals;
};

/// Scalar recurrence q(t) = max(0, q(t-1) + s(t) - F dt / (|V| e)) per ES
/// (remainders below 1e-9 of the budget snap to zero),
/// with |V| the number of queues holding data after this interval's arrivals.
inline std::vector<std::vector<double>> edge_recurrence(const EdgeInstance& inst) {
    const std::size_t pairs = inst.ieds * inst.ess;
    std::vector<double> q(pairs, 0.0);
    std::vector<std::vector<double>> trajectory;
    for (const auto& step : inst.arrivals) {
        for (std::size_t k = 0; k < pairs; ++k) {
            for (double s : step[k]) q[k] += s;
        }
        for (std::size_t m = 0; m < inst.ess; ++m) {
            std::size_t valid = 0;
            for (std::size_t i = 0; i < inst.ieds; ++i) valid += q[i * inst.ess + m] > 0.0 ? 1 : 0;
            for (std::size_t i = 0; i < inst.ieds; ++i) {
                double& qk = q[i * inst.ess + m];
                if (!(qk > 0.0)) continue;
                const double drain =
                    inst.es_hz[m] * inst.interval_s / (static_cast<double>(valid) * inst.density[i * inst.ess + m] * 1e9);
                qk = qk - drain;
                if (qk <= 1e-9 * drain) qk = 0.0;
            }
        }
        trajectory.push_back(q);
    }
    return trajectory;
}

}  // namespace oracle
