#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "qmeta/ansatz.hpp"
#include "qmeta/datasets.hpp"
#include "qmeta/estimators.hpp"
#include "qmeta/evaluation.hpp"
#include "qmeta/meta.hpp"
#include "qmeta/optimizers.hpp"

namespace qmeta {

// Flat key = value file with dotted section prefixes and # comments.
// Every key must be consumed by the time require_consumed() runs; leftovers
// (typos, stale keys) are a configuration error.
class KeyValueFile {
  public:
    static KeyValueFile from_file(const std::string& path);
    static KeyValueFile from_text(const std::string& text);

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key, int fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    Eigen::VectorXd get_vector(const std::string& key, const Eigen::VectorXd& fallback) const;

    void require_consumed() const;

  private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

struct DatasetConfig {
    std::string kind = "gaussian";  // gaussian | spirals | spheres | iris | none
    std::optional<std::uint64_t> seed;  // defaults to the run seed
    GaussianSpec gaussian;
    int n_per_class = 100;   // spirals / spheres
    double noise_std = 0.1;  // spirals
    double r_inner = 0.5;    // spheres
    double r_outer = 1.0;
    std::string iris_path = "data/iris.csv";
    std::string species_pos = "setosa";
    std::string species_neg = "versicolor";
};

struct AnsatzConfig {
    std::string family = "layered";  // layered | spheres | strongly_entangling
    int qubits = 2;
    int layers = 2;
    std::string reduction;  // empty = family default
};

struct OptimizerConfig {
    std::string kind = "meta";  // meta | sgd | adam | rmsprop | spsa
    double lr = 1e-2;
    int iterations = 25;  // gradient / spsa step count
};

struct RunConfig {
    DatasetConfig dataset;
    AnsatzConfig ansatz;
    OptimizerConfig optimizer;
    SpsaConfig spsa;
    MetaConfig meta;
    ShotBudget shots = ShotBudget::exact();
    std::uint64_t seed = 0;
    std::string run_id;  // empty = derived from optimizer kind and seed
    std::string out_dir = "out";
};

// Builds a RunConfig from parsed keys (every key validated and consumed).
RunConfig load_run_config(const KeyValueFile& kv);

// Applies CLI overrides on top of file values before load_run_config.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> shots;  // "exact" or a positive count
};
RunConfig load_run_config(const std::string& config_path, const CliOverrides& overrides);
RunConfig run_config_from_text(const std::string& text, const CliOverrides& overrides = {});

OptimizerKind parse_optimizer_kind(const std::string& name);  // gradient baselines only
AnsatzSpec ansatz_from_config(const AnsatzConfig& cfg);
std::string effective_run_id(const RunConfig& cfg);

}  // namespace qmeta
