#include "qmeta/trace.hpp"

#include <cstdio>

#include "qmeta/errors.hpp"

namespace qmeta {

std::string format_trace_row(const TraceRow& row) {
    char cost[64];
    std::snprintf(cost, sizeof(cost), "%.17g", row.cost);
    char wall[64];
    std::snprintf(wall, sizeof(wall), "%.3f", row.wall_time_ms);
    std::string meta = row.meta_iter ? std::to_string(*row.meta_iter) : std::string{};
    return row.run_id + "," + std::to_string(row.step) + "," + meta + "," + cost + "," +
           std::to_string(row.circuit_evals) + "," + wall;
}

TraceWriter::TraceWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::trunc);
    if (!out_) throw ConfigError("cannot open trace file for writing: " + path.string());
    out_ << kTraceHeader << '\n';
    out_.flush();
}

void TraceWriter::write(const TraceRow& row) {
    out_ << format_trace_row(row) << '\n';
    out_.flush();
    if (!out_) throw ConfigError("trace write failed: " + path_.string());
}

}  // namespace qmeta
