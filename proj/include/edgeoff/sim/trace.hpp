/**
 * @file trace.hpp
 * @brief Event trace export: one CSV row per (interval, event).
 *
 * Columns: t, ied, task_id, event, latency_s. `event` is one of
 * gen, route_local, route_es, tx_done, done, drop.
 */
#pragma once

#include <ostream>
#include <span>

#include "edgeoff/sim/task.hpp"

namespace edgeoff::sim {

inline constexpr const char* kTraceHeader = "t,ied,task_id,event,latency_s";

class TraceWriter {
public:
    /// Writes the header immediately.
    explicit TraceWriter(std::ostream& out);

    void write(std::span<const TaskEvent> events);
    std::size_t rows() const noexcept { return rows_; }

private:
    std::ostream& out_;
    std::size_t rows_ = 0;
};

}  // namespace edgeoff::sim
