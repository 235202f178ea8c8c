#include <CLI11.hpp>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "qmeta/errors.hpp"
#include "qmeta/runner.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> shots;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_config = true) {
    if (with_config)
        cmd->add_option("--config", args.config_path, "key = value config file");
    cmd->add_option("--seed", args.seed, "override run.seed");
    cmd->add_option("--out-dir", args.out_dir, "override out.dir");
    cmd->add_option("--shots", args.shots,
                    "override the shot budget: 'exact' or a positive count");
}

qmeta::CliOverrides overrides_from(const CommonArgs& args) {
    return {args.seed, args.out_dir, args.shots};
}

void print_outcome(const qmeta::RunOutcome& o, const std::string& trace) {
    std::printf("%s [%s]: %ld steps, %llu circuit evals, final cost %.6g, best %.6g (%s)\n",
                o.run_id.c_str(), o.optimizer.c_str(), o.steps,
                static_cast<unsigned long long>(o.total_evals), o.final_cost, o.best_cost,
                o.status.c_str());
    if (!trace.empty()) std::printf("  trace: %s\n", trace.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Workbench for LSTM-driven, gradient-free training of variational quantum circuits"};
    app.require_subcommand(1);

    CommonArgs run_args;
    CLI::App* run_cmd = app.add_subcommand("run", "one optimization run with trace and summary");
    add_common(run_cmd, run_args);

    CommonArgs cmp_args;
    std::vector<std::string> cmp_configs;
    CLI::App* cmp_cmd =
        app.add_subcommand("compare", "run several configs on the identical problem");
    cmp_cmd->add_option("--config", cmp_configs, "config file (repeat for each run)")
        ->required()
        ->expected(-2);
    cmp_cmd->add_option("--seed", cmp_args.seed, "override run.seed for every config");
    cmp_cmd->add_option("--out-dir", cmp_args.out_dir, "override out.dir for every config");
    cmp_cmd->add_option("--shots", cmp_args.shots,
                        "override the shot budget for every config");

    CommonArgs prof_args;
    std::vector<int> prof_sizes{100, 200};
    std::vector<std::string> prof_optimizers{"meta", "adam"};
    int prof_reps = 3;
    int prof_epochs = 20;
    CLI::App* prof_cmd =
        app.add_subcommand("time-profile", "median wall time per optimizer step");
    add_common(prof_cmd, prof_args);
    prof_cmd->add_option("--sizes", prof_sizes, "dataset sizes (points per class)")
        ->delimiter(',');
    prof_cmd->add_option("--optimizers", prof_optimizers, "optimizers to profile")
        ->delimiter(',');
    prof_cmd->add_option("--reps", prof_reps, "repetitions per cell (median is reported)");
    prof_cmd->add_option("--epochs", prof_epochs, "optimizer steps per repetition");

    std::uint64_t bench_seed = 0;
    std::string bench_out = "out";
    int bench_meta_steps = 50;
    int bench_spsa_steps = 25;
    CLI::App* bench_cmd = app.add_subcommand(
        "spsa-bench", "dataset-free observable minimization: LSTM steps vs SPSA");
    bench_cmd->add_option("--seed", bench_seed, "run seed");
    bench_cmd->add_option("--out-dir", bench_out, "output directory");
    bench_cmd->add_option("--meta-steps", bench_meta_steps, "LSTM optimizee steps");
    bench_cmd->add_option("--spsa-steps", bench_spsa_steps, "SPSA iterations");

    CommonArgs abl_args;
    std::vector<std::uint64_t> abl_seeds{0, 1};
    CLI::App* abl_cmd =
        app.add_subcommand("ablate-init", "rerun the meta optimizer under each hidden-state init");
    add_common(abl_cmd, abl_args);
    abl_cmd->add_option("--seeds", abl_seeds, "run seeds")->delimiter(',');

    CommonArgs gen_args;
    std::string gen_out;
    CLI::App* gen_cmd = app.add_subcommand("gen-data", "write the configured dataset as CSV");
    add_common(gen_cmd, gen_args);
    gen_cmd->add_option("--out", gen_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            qmeta::RunConfig cfg =
                qmeta::load_run_config(run_args.config_path, overrides_from(run_args));
            qmeta::RunArtifacts artifacts = qmeta::execute_run(cfg);
            print_outcome(artifacts.outcome, artifacts.trace_path.string());
            std::printf("  summary: %s\n", artifacts.summary_path.string().c_str());
        } else if (cmp_cmd->parsed()) {
            std::vector<qmeta::RunConfig> configs;
            configs.reserve(cmp_configs.size());
            for (const std::string& path : cmp_configs)
                configs.push_back(qmeta::load_run_config(path, overrides_from(cmp_args)));
            qmeta::CompareResult result = qmeta::run_compare(configs);
            for (std::size_t i = 0; i < result.runs.size(); ++i)
                print_outcome(result.runs[i], result.trace_paths[i].string());
            std::printf("panel: %s\nsummary: %s\n", result.panel_path.string().c_str(),
                        result.summary_path.string().c_str());
        } else if (prof_cmd->parsed()) {
            qmeta::RunConfig base =
                qmeta::load_run_config(prof_args.config_path, overrides_from(prof_args));
            qmeta::ProfileResult result = qmeta::run_time_profile(base, prof_sizes,
                                                                  prof_optimizers, prof_reps,
                                                                  prof_epochs);
            for (const qmeta::ProfilePoint& p : result.points)
                std::printf("%s n=%d (m=%lld): %.4f ms/step, %.0f evals/step over %ld steps\n",
                            p.optimizer.c_str(), p.n_per_class,
                            static_cast<long long>(p.dataset_size), p.median_ms_per_epoch,
                            p.evals_per_epoch, p.epochs);
            std::printf("profile: %s\n", result.csv_path.string().c_str());
        } else if (bench_cmd->parsed()) {
            qmeta::SpsaBenchResult result = qmeta::run_spsa_benchmark(
                bench_seed, bench_out, bench_meta_steps, bench_spsa_steps);
            std::printf("cost at the zero-parameter circuit: %.6g\n", result.cost_at_theta0);
            print_outcome(result.meta, "");
            print_outcome(result.spsa, "");
            std::printf("summary: %s\n", result.summary_path.string().c_str());
        } else if (abl_cmd->parsed()) {
            qmeta::RunConfig base =
                qmeta::load_run_config(abl_args.config_path, overrides_from(abl_args));
            qmeta::AblateResult result = qmeta::run_ablate_hidden_init(base, abl_seeds);
            for (const qmeta::AblateEntry& e : result.entries)
                std::printf("%-8s seed %llu: final %.6g, best %.6g\n", e.scheme.c_str(),
                            static_cast<unsigned long long>(e.seed), e.final_cost, e.best_cost);
            std::printf("summary: %s\n", result.summary_path.string().c_str());
        } else if (gen_cmd->parsed()) {
            qmeta::RunConfig cfg =
                qmeta::load_run_config(gen_args.config_path, overrides_from(gen_args));
            std::filesystem::path path = qmeta::run_gen_data(cfg, gen_out);
            std::printf("wrote %s\n", path.string().c_str());
        }
    } catch (const qmeta::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const qmeta::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    }
    return 0;
}
