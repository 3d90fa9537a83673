#include "edgeoff/sim/trace.hpp"

#include "edgeoff/common/text.hpp"

namespace edgeoff::sim {

TraceWriter::TraceWriter(std::ostream& out) : out_(out) { out_ << kTraceHeader << '\n'; }

void TraceWriter::write(std::span<const TaskEvent> events) {
    for (const auto& e : events) {
        out_ << e.t << ',' << e.ied << ',' << e.task_id << ',' << to_string(e.kind) << ',' << format_double(e.latency_s)
             << '\n';
        ++rows_;
    }
}

}  // namespace edgeoff::sim
