#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

namespace qmeta {

// One optimizer iteration: cost at the iteration's parameters, cumulative
// circuit evaluations once the iteration's full expense is accounted, and
// monotone wall time since the run started.
struct TraceRow {
    std::string run_id;
    long step = 0;
    std::optional<int> meta_iter;  // empty for non-meta optimizers
    double cost = 0.0;
    std::uint64_t circuit_evals = 0;
    double wall_time_ms = 0.0;
};

std::string format_trace_row(const TraceRow& row);
inline constexpr const char* kTraceHeader = "run_id,step,meta_iter,cost,circuit_evals,wall_time_ms";

// Streaming CSV sink: header on open, one flush per row so a run aborted by
// a numeric failure still leaves every completed row on disk.
class TraceWriter {
  public:
    explicit TraceWriter(const std::filesystem::path& path);

    void write(const TraceRow& row);
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace qmeta
