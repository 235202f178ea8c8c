#pragma once

#include <atomic>
#include <cstdint>

#include "qmeta/errors.hpp"

namespace qmeta {

// Exact vs finite-shot readout of circuit expectations.
struct ShotBudget {
    enum class Mode { Exact, Finite };
    Mode mode = Mode::Exact;
    int shots = 0;

    static ShotBudget exact() { return {Mode::Exact, 0}; }
    static ShotBudget finite(int shots) {
        if (shots < 1) throw ConfigError("finite shot budget must be >= 1");
        return {Mode::Finite, shots};
    }
    bool is_exact() const { return mode == Mode::Exact; }
};

// Counts circuit executions: one unit per (circuit, data point) forward pass.
// Atomic so per-point evaluations may run in parallel without losing counts.
class EvalCounter {
  public:
    EvalCounter() = default;
    EvalCounter(const EvalCounter&) = delete;
    EvalCounter& operator=(const EvalCounter&) = delete;

    void add(std::uint64_t n) { total_.fetch_add(n, std::memory_order_relaxed); }
    std::uint64_t total() const { return total_.load(std::memory_order_relaxed); }

  private:
    std::atomic<std::uint64_t> total_{0};
};

}  // namespace qmeta
