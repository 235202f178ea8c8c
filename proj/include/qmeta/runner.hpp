#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "qmeta/config.hpp"
#include "qmeta/trace.hpp"

namespace qmeta {

// Dataset, circuit, and starting parameters for one run. theta0 ~ N(0, 1)
// from a child stream of the run seed, so optimizers sharing a seed start
// from the same point.
struct PreparedProblem {
    LabeledDataset data;  // unused when has_data is false
    AnsatzSpec spec;
    Eigen::VectorXd theta0;
    bool has_data = true;
    std::uint64_t dataset_seed = 0;
};

PreparedProblem prepare_problem(const RunConfig& cfg);

using RowCallback = std::function<void(const TraceRow&)>;

struct RunOutcome {
    std::string run_id;
    std::string optimizer;
    double final_cost = 0.0;  // last logged row
    double best_cost = 0.0;   // minimum over rows
    std::uint64_t total_evals = 0;
    long steps = 0;
    double wall_time_ms = 0.0;
    std::string status;  // converged | max-iterations | completed
    Eigen::VectorXd final_theta;
    std::vector<int> seeded_after;  // meta re-seed events
};

// The optimization loop alone: no filesystem access, rows go to the
// callback (which may be empty, e.g. for timing).
RunOutcome run_optimization(const RunConfig& cfg, const PreparedProblem& prob,
                            const RowCallback& on_row);

struct RunArtifacts {
    RunOutcome outcome;
    std::filesystem::path trace_path;
    std::filesystem::path summary_path;
};

// prepare + run with a streaming CSV trace and a JSON summary in
// cfg.out_dir. The trace is flushed row by row, so a numeric failure mid-run
// still leaves the completed prefix on disk.
RunArtifacts execute_run(const RunConfig& cfg);

struct CompareResult {
    std::vector<RunOutcome> runs;
    std::filesystem::path panel_path;
    std::filesystem::path summary_path;
    std::vector<std::filesystem::path> trace_paths;
};

// Runs each config on the identical problem (dataset and circuit must
// match) and writes a long-format panel CSV plus a JSON summary.
CompareResult run_compare(const std::vector<RunConfig>& configs);

struct ProfilePoint {
    std::string optimizer;
    int n_per_class = 0;
    Eigen::Index dataset_size = 0;
    long epochs = 0;
    double median_ms_per_epoch = 0.0;
    double evals_per_epoch = 0.0;
};

struct ProfileResult {
    std::vector<ProfilePoint> points;
    std::filesystem::path csv_path;
    std::filesystem::path summary_path;
};

// Median wall time per optimizer step across reps, for each dataset size x
// optimizer cell. Dataset generation and all file I/O sit outside the
// timed region.
ProfileResult run_time_profile(const RunConfig& base, const std::vector<int>& sizes,
                               const std::vector<std::string>& optimizers, int reps,
                               int epochs);

struct SpsaBenchResult {
    RunOutcome meta;
    RunOutcome spsa;
    double cost_at_theta0 = 0.0;
    std::filesystem::path summary_path;
};

// Dataset-free head-to-head on the strongly entangling circuit: the raw
// reduced observable is minimized directly, one evaluation per call.
SpsaBenchResult run_spsa_benchmark(std::uint64_t seed, const std::string& out_dir,
                                   int meta_steps, int spsa_steps);

struct AblateEntry {
    std::string scheme;
    std::uint64_t seed = 0;
    std::string run_id;
    double final_cost = 0.0;
    double best_cost = 0.0;
};

struct AblateResult {
    std::vector<AblateEntry> entries;
    std::filesystem::path summary_path;
};

// Reruns the meta optimizer under each hidden-state init scheme for each
// seed; the dataset seed is pinned so every run sees identical data.
AblateResult run_ablate_hidden_init(const RunConfig& base,
                                    const std::vector<std::uint64_t>& seeds);

// Generates the configured dataset and writes it as CSV.
std::filesystem::path run_gen_data(const RunConfig& cfg, const std::string& out_path);

}  // namespace qmeta
