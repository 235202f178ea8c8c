#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qmeta/config.hpp"
#include "qmeta/errors.hpp"
#include "qmeta/runner.hpp"
#include "qmeta/trace.hpp"

using namespace qmeta;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("qmeta_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::vector<TraceRow> collect_rows(const RunConfig& cfg) {
    PreparedProblem prob = prepare_problem(cfg);
    std::vector<TraceRow> rows;
    run_optimization(cfg, prob, [&](const TraceRow& row) { rows.push_back(row); });
    return rows;
}

}  // namespace

TEST_CASE("config text parses values, comments, and sections") {
    KeyValueFile kv = KeyValueFile::from_text(
        "# header comment\n"
        "run.seed = 12\n"
        "optimizer.lr = 0.05   # inline comment\n"
        "dataset.kind = spirals\n"
        "meta.use_replay = false\n"
        "dataset.mu1 = 1.5, -2.5\n");
    CHECK(kv.get_uint64("run.seed", 0) == 12);
    CHECK(kv.get_double("optimizer.lr", 0.0) == 0.05);
    CHECK(kv.get_string("dataset.kind", "") == "spirals");
    CHECK(kv.get_bool("meta.use_replay", true) == false);
    Eigen::VectorXd mu = kv.get_vector("dataset.mu1", {});
    REQUIRE(mu.size() == 2);
    CHECK(mu[0] == 1.5);
    CHECK(mu[1] == -2.5);
    CHECK_NOTHROW(kv.require_consumed());
}

TEST_CASE("config rejects malformed input") {
    CHECK_THROWS_AS(KeyValueFile::from_text("no equals sign here\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueFile::from_text("= value\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueFile::from_text("a.b = 1\na.b = 2\n"), ConfigError);

    KeyValueFile kv = KeyValueFile::from_text("run.seed = twelve\n");
    CHECK_THROWS_AS(kv.get_uint64("run.seed", 0), ConfigError);
    kv = KeyValueFile::from_text("optimizer.lr = 0.05x\n");
    CHECK_THROWS_AS(kv.get_double("optimizer.lr", 0.0), ConfigError);
    kv = KeyValueFile::from_text("run.seed = -3\n");
    CHECK_THROWS_AS(kv.get_uint64("run.seed", 0), ConfigError);
    kv = KeyValueFile::from_text("meta.use_replay = maybe\n");
    CHECK_THROWS_AS(kv.get_bool("meta.use_replay", true), ConfigError);
}

TEST_CASE("unknown and out-of-range keys are configuration errors") {
    CHECK_THROWS_WITH_AS(run_config_from_text("bogus.key = 1\n"),
                         doctest::Contains("bogus.key"), ConfigError);
    CHECK_THROWS_AS(run_config_from_text("optimizer.kind = newton\n"), ConfigError);
    CHECK_THROWS_AS(run_config_from_text("dataset.kind = mnist\n"), ConfigError);
    CHECK_THROWS_AS(run_config_from_text("optimizer.lr = -1\n"), ConfigError);
    CHECK_THROWS_AS(run_config_from_text("meta.tau0 = 2\n"), ConfigError);
    CHECK_THROWS_AS(run_config_from_text("shots.mode = sometimes\n"), ConfigError);
    CHECK_THROWS_AS(run_config_from_text("dataset.sigma1 = 1,2,3\n"), ConfigError);
    CHECK_THROWS_AS(run_config_from_text("ansatz.family = ring\n"), ConfigError);
    CHECK_THROWS_AS(run_config_from_text("meta.h0_init = random\n"), ConfigError);
}

TEST_CASE("defaults and overrides land in the run config") {
    RunConfig cfg = run_config_from_text("");
    CHECK(cfg.optimizer.kind == "meta");
    CHECK(cfg.dataset.kind == "gaussian");
    CHECK(cfg.ansatz.family == "layered");
    CHECK(cfg.meta.phi_train == PhiTrain::SpsaOnPhi);
    CHECK(cfg.shots.is_exact());
    CHECK(cfg.seed == 0);
    CHECK(effective_run_id(cfg) == "meta_s0");

    CliOverrides ov;
    ov.seed = 9;
    ov.out_dir = "/tmp/elsewhere";
    ov.shots = "512";
    cfg = run_config_from_text("run.seed = 1\nshots.mode = exact\n", ov);
    CHECK(cfg.seed == 9);
    CHECK(cfg.out_dir == "/tmp/elsewhere");
    CHECK(!cfg.shots.is_exact());
    CHECK(cfg.shots.shots == 512);

    // Family-aware structural defaults.
    cfg = run_config_from_text("ansatz.family = strongly_entangling\ndataset.kind = none\n");
    CHECK(cfg.ansatz.qubits == 4);
    CHECK(cfg.ansatz.layers == 5);
    cfg = run_config_from_text("ansatz.family = spheres\ndataset.kind = spheres\n");
    CHECK(cfg.ansatz.qubits == 3);
    CHECK(cfg.ansatz.layers == 4);
}

TEST_CASE("trace rows format with a stable schema") {
    CHECK(std::string(kTraceHeader) == "run_id,step,meta_iter,cost,circuit_evals,wall_time_ms");
    TraceRow row{"demo", 3, 2, 0.1, 1800, 12.3456};
    CHECK(format_trace_row(row) == "demo,3,2,0.10000000000000001,1800,12.346");
    row.meta_iter.reset();
    std::vector<std::string> fields = split_csv(format_trace_row(row));
    REQUIRE(fields.size() == 6);
    CHECK(fields[2].empty());
}

TEST_CASE("trace writer streams rows to disk") {
    fs::path dir = fresh_dir("writer");
    fs::path path = dir / "t.csv";
    {
        TraceWriter writer(path);
        writer.write(TraceRow{"a", 0, std::nullopt, 1.0, 10, 0.5});
        // flushed per row: readable before the writer closes
        std::vector<std::string> lines = read_lines(path);
        REQUIRE(lines.size() == 2);
        CHECK(lines[0] == kTraceHeader);
        writer.write(TraceRow{"a", 1, 4, 0.5, 20, 1.0});
    }
    std::vector<std::string> lines = read_lines(path);
    REQUIRE(lines.size() == 3);
    CHECK(split_csv(lines[2])[2] == "4");
    fs::remove_all(dir);
}

TEST_CASE("meta runs cost one dataset pass per step") {
    RunConfig cfg = run_config_from_text(
        "optimizer.kind = meta\n"
        "meta.phi_train = reinforce\n"
        "meta.eps_stop = 0\n"
        "run.seed = 4\n");
    std::vector<TraceRow> rows = collect_rows(cfg);
    REQUIRE(rows.size() == 50);  // 5 meta-iterations of 10 steps
    const std::uint64_t m = 200;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].circuit_evals == (i + 1) * m);
        CHECK(rows[i].step == static_cast<long>(i));
        REQUIRE(rows[i].meta_iter.has_value());
        CHECK(*rows[i].meta_iter == static_cast<int>(i / 10));
        CHECK(std::isfinite(rows[i].cost));
        if (i > 0) CHECK(rows[i].wall_time_ms >= rows[i - 1].wall_time_ms);
    }
}

TEST_CASE("gradient baselines cost a full shift rule sweep per step") {
    RunConfig cfg = run_config_from_text(
        "optimizer.kind = adam\n"
        "optimizer.iterations = 25\n"
        "run.seed = 4\n");
    std::vector<TraceRow> rows = collect_rows(cfg);
    REQUIRE(rows.size() == 25);
    const std::uint64_t per_step = (2 * 4 + 1) * 200;  // (2N + 1) m with N = 4, m = 200
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].circuit_evals == (i + 1) * per_step);
        CHECK(!rows[i].meta_iter.has_value());
    }
}

TEST_CASE("perturbation runs cost three dataset passes per step") {
    RunConfig cfg = run_config_from_text(
        "optimizer.kind = spsa\n"
        "optimizer.iterations = 12\n"
        "run.seed = 4\n");
    std::vector<TraceRow> rows = collect_rows(cfg);
    REQUIRE(rows.size() == 12);
    for (std::size_t i = 0; i < rows.size(); ++i)
        CHECK(rows[i].circuit_evals == (i + 1) * 3 * 200);
}

TEST_CASE("identical runs replay with byte-identical cost columns") {
    const std::string text =
        "optimizer.kind = meta\n"
        "meta.phi_train = reinforce\n"
        "run.seed = 6\n"
        "dataset.n_per_class = 25\n"
        "shots.mode = finite\n"
        "shots.count = 128\n";
    fs::path dir_a = fresh_dir("replay_a");
    fs::path dir_b = fresh_dir("replay_b");
    CliOverrides ov_a;
    ov_a.out_dir = dir_a.string();
    CliOverrides ov_b;
    ov_b.out_dir = dir_b.string();
    RunArtifacts a = execute_run(run_config_from_text(text, ov_a));
    RunArtifacts b = execute_run(run_config_from_text(text, ov_b));

    std::vector<std::string> lines_a = read_lines(a.trace_path);
    std::vector<std::string> lines_b = read_lines(b.trace_path);
    REQUIRE(lines_a.size() == lines_b.size());
    REQUIRE(lines_a.size() > 1);
    for (std::size_t i = 1; i < lines_a.size(); ++i) {
        std::vector<std::string> fa = split_csv(lines_a[i]);
        std::vector<std::string> fb = split_csv(lines_b[i]);
        REQUIRE(fa.size() == 6);
        CHECK(fa[0] == fb[0]);  // run id
        CHECK(fa[1] == fb[1]);  // step
        CHECK(fa[2] == fb[2]);  // meta iteration
        CHECK(fa[3] == fb[3]);  // cost, full precision
        CHECK(fa[4] == fb[4]);  // cumulative evaluations
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("summaries record totals that match the trace") {
    fs::path dir = fresh_dir("summary");
    CliOverrides ov;
    ov.out_dir = dir.string();
    RunArtifacts art = execute_run(run_config_from_text(
        "optimizer.kind = sgd\noptimizer.iterations = 5\ndataset.n_per_class = 10\n", ov));
    CHECK(art.outcome.steps == 5);
    CHECK(art.outcome.total_evals == 5 * (2 * 4 + 1) * 20);
    CHECK(art.outcome.status == "completed");
    std::vector<std::string> lines = read_lines(art.trace_path);
    REQUIRE(lines.size() == 6);
    std::vector<std::string> last = split_csv(lines.back());
    CHECK(std::stoull(last[4]) == art.outcome.total_evals);
    CHECK(std::stod(last[3]) == art.outcome.final_cost);
    CHECK(fs::exists(art.summary_path));
    std::vector<std::string> summary = read_lines(art.summary_path);
    bool has_best = false;
    for (const std::string& line : summary)
        if (line.find("best_cost") != std::string::npos) has_best = true;
    CHECK(has_best);
    fs::remove_all(dir);
}

TEST_CASE("comparison requires one shared problem and emits a panel") {
    fs::path dir = fresh_dir("compare");
    const std::string shared =
        "dataset.seed = 11\n"
        "dataset.n_per_class = 15\n"
        "run.seed = 2\n"
        "out.dir = " + dir.string() + "\n";
    RunConfig meta_cfg = run_config_from_text(
        shared + "optimizer.kind = meta\nmeta.phi_train = reinforce\nrun.id = cmp_meta\n");
    RunConfig adam_cfg = run_config_from_text(
        shared + "optimizer.kind = adam\noptimizer.iterations = 8\nrun.id = cmp_adam\n");
    CompareResult result = run_compare({meta_cfg, adam_cfg});
    REQUIRE(result.runs.size() == 2);

    std::vector<std::string> panel = read_lines(result.panel_path);
    CHECK(panel[0] == "optimizer,run_id,step,circuit_evals,cost");
    const std::size_t expected_rows =
        1 + static_cast<std::size_t>(result.runs[0].steps + result.runs[1].steps);
    CHECK(panel.size() == expected_rows);
    std::uint64_t prev_evals = 0;
    for (std::size_t i = 1; i < panel.size(); ++i) {
        std::vector<std::string> f = split_csv(panel[i]);
        REQUIRE(f.size() == 5);
        const std::uint64_t evals = std::stoull(f[3]);
        if (f[2] != "0") CHECK(evals > prev_evals);  // monotone within each run
        prev_evals = evals;
        CHECK(std::isfinite(std::stod(f[4])));
    }

    // Different data (unpinned dataset seed) must be rejected.
    RunConfig other = adam_cfg;
    other.dataset.seed = 99;
    CHECK_THROWS_AS(run_compare({meta_cfg, other}), ConfigError);
    CHECK_THROWS_AS(run_compare({meta_cfg}), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("time profile reports per-step cost for every cell") {
    fs::path dir = fresh_dir("profile");
    RunConfig base = run_config_from_text(
        "optimizer.kind = meta\n"
        "meta.phi_train = reinforce\n"
        "dataset.seed = 3\n"
        "out.dir = " + dir.string() + "\n");
    ProfileResult result = run_time_profile(base, {200}, {"meta", "adam"}, 3, 10);
    REQUIRE(result.points.size() == 2);
    const ProfilePoint& meta_point = result.points[0];
    const ProfilePoint& adam_point = result.points[1];
    CHECK(meta_point.optimizer == "meta");
    CHECK(meta_point.dataset_size == 400);
    CHECK(meta_point.evals_per_epoch == 400.0);   // one dataset pass per step
    CHECK(adam_point.evals_per_epoch == 3600.0);  // (2N + 1) passes with N = 4
    CHECK(meta_point.median_ms_per_epoch > 0.0);
    CHECK(meta_point.epochs == 10);
    CHECK(adam_point.epochs == 10);

    std::vector<std::string> csv = read_lines(result.csv_path);
    CHECK(csv[0] ==
          "optimizer,n_per_class,dataset_size,epochs,median_ms_per_epoch,evals_per_epoch");
    CHECK(csv.size() == 3);
    CHECK_THROWS_AS(run_time_profile(base, {}, {"meta"}, 3, 10), ConfigError);
    CHECK_THROWS_AS(run_time_profile(base, {100}, {"meta"}, 0, 10), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("observable benchmark keeps the stated evaluation budgets") {
    fs::path dir = fresh_dir("bench");
    SpsaBenchResult result = run_spsa_benchmark(1, dir.string(), 50, 25);
    CHECK(result.cost_at_theta0 == 1.0);  // all-zero angles leave the all-zeros state
    CHECK(result.meta.steps == 50);
    CHECK(result.meta.total_evals == 50);
    CHECK(result.spsa.steps == 25);
    CHECK(result.spsa.total_evals == 75);
    CHECK(std::isfinite(result.meta.final_cost));
    CHECK(fs::exists(result.summary_path));
    fs::remove_all(dir);
}

TEST_CASE("hidden-init ablation shares one dataset across all runs") {
    fs::path dir = fresh_dir("ablate");
    RunConfig base = run_config_from_text(
        "optimizer.kind = meta\n"
        "meta.phi_train = reinforce\n"
        "meta.meta_iterations = 2\n"
        "dataset.n_per_class = 10\n"
        "dataset.seed = 17\n"
        "out.dir = " + dir.string() + "\n");
    AblateResult result = run_ablate_hidden_init(base, {0, 1});
    REQUIRE(result.entries.size() == 6);  // 3 schemes x 2 seeds
    for (const AblateEntry& e : result.entries) CHECK(std::isfinite(e.final_cost));

    // The pinned dataset seed makes every run's data identical.
    RunConfig a = base;
    a.seed = 0;
    RunConfig b = base;
    b.seed = 1;
    PreparedProblem pa = prepare_problem(a);
    PreparedProblem pb = prepare_problem(b);
    CHECK((pa.data.points.array() == pb.data.points.array()).all());

    RunConfig not_meta = base;
    not_meta.optimizer.kind = "adam";
    CHECK_THROWS_AS(run_ablate_hidden_init(not_meta, {0}), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("dataset export writes the documented schema") {
    fs::path dir = fresh_dir("gendata");
    RunConfig cfg = run_config_from_text(
        "dataset.kind = spirals\ndataset.n_per_class = 5\ndataset.seed = 2\n");
    fs::path out = dir / "spirals.csv";
    run_gen_data(cfg, out.string());
    std::vector<std::string> lines = read_lines(out);
    REQUIRE(lines.size() == 11);
    CHECK(lines[0] == "x0,x1,label");
    std::vector<std::string> row = split_csv(lines[1]);
    REQUIRE(row.size() == 3);
    CHECK((row[2] == "1" || row[2] == "-1"));

    RunConfig none = run_config_from_text("dataset.kind = none\n"
                                          "ansatz.family = strongly_entangling\n");
    CHECK_THROWS_AS(run_gen_data(none, (dir / "x.csv").string()), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("problem preparation validates the dataset-ansatz pairing") {
    CHECK_THROWS_AS(prepare_problem(run_config_from_text(
                        "dataset.kind = spheres\n")),  // 3-d data, 2-qubit embedding
                    ConfigError);
    CHECK_THROWS_AS(prepare_problem(run_config_from_text(
                        "ansatz.family = strongly_entangling\n")),  // needs dataset.kind = none
                    ConfigError);
    CHECK_THROWS_AS(prepare_problem(run_config_from_text("dataset.kind = none\n")),
                    ConfigError);

    PreparedProblem spheres = prepare_problem(run_config_from_text(
        "dataset.kind = spheres\nansatz.family = spheres\ndataset.n_per_class = 4\n"));
    CHECK(spheres.data.dim() == 3);
    CHECK(spheres.spec.num_qubits == 3);
    CHECK(spheres.theta0.size() == param_count(spheres.spec));

    // theta0 depends only on the run seed, not the optimizer.
    RunConfig m_cfg = run_config_from_text("optimizer.kind = meta\nrun.seed = 5\n");
    RunConfig a_cfg = run_config_from_text("optimizer.kind = adam\nrun.seed = 5\n");
    CHECK(prepare_problem(m_cfg).theta0 == prepare_problem(a_cfg).theta0);
}
