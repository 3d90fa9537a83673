/**
 * @file task.hpp
 * @brief One generated job and the events it produces over its lifetime.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace edgeoff::sim {

enum class TaskStatus : std::uint8_t { pending, queued_local, transmitting, queued_edge, completed, dropped };

enum class EventKind : std::uint8_t { gen, route_local, route_es, tx_done, done, drop };

std::string_view to_string(EventKind kind);
std::string_view to_string(TaskStatus status);

/// Number of whole intervals a task may spend in the system: floor(d / dt).
/// The small slack absorbs representation error for deadlines on the grid.
std::int64_t deadline_intervals(double deadline_s, double interval_s);

/// ceil(x) that treats values within 1e-9 above an integer as that integer.
std::int64_t ceil_intervals(double x);

struct Task {
    std::uint64_t id = 0;
    std::size_t owner = 0;
    std::int64_t born_interval = 0;
    double size_mb = 0.0;
    double density = 0.0;  ///< Gcycles per MB
    double deadline_s = 0.0;
    std::int64_t deadline_intervals = 0;

    double remaining_tx_mb = 0.0;
    /// Data-equivalent work left at the edge, in MB.
    double remaining_compute_mb = 0.0;
    std::optional<std::size_t> assigned_es;
    TaskStatus status = TaskStatus::pending;
    /// Interval index during which the task completed or was dropped.
    std::optional<std::int64_t> finish_interval;

    bool offloaded = false;
    /// Local FIFO: boundary tau at which execution ends (completion or abandonment).
    std::int64_t local_completion_boundary = -1;
    /// Interval at which the local event (done or drop) fires.
    std::int64_t local_event_interval = -1;
    bool local_will_complete = false;
    /// Interval during which the upload finished (edge computing starts at its end).
    std::int64_t tx_done_interval = -1;

    double local_latency_s = 0.0;
    double comm_latency_s = 0.0;
    double edge_latency_s = 0.0;

    /// Last interval index during which the task may still be in flight.
    std::int64_t last_live_interval() const noexcept { return born_interval + deadline_intervals; }

    bool in_flight() const noexcept {
        return status == TaskStatus::queued_local || status == TaskStatus::transmitting ||
               status == TaskStatus::queued_edge;
    }
};

struct TaskEvent {
    std::int64_t t = 0;
    std::size_t ied = 0;
    std::uint64_t task_id = 0;
    EventKind kind = EventKind::gen;
    /// Response latency for `done`, elapsed time for `drop`, upload latency for `tx_done`.
    double latency_s = 0.0;
    double deadline_s = 0.0;
};

}  // namespace edgeoff::sim
