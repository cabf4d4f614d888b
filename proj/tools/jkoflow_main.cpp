// Command-line driver: experiment pipelines, convergence studies, acceptance
// criteria, entropy sweeps and transform checks.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "jkoflow/acceptance.hpp"
#include "jkoflow/pipeline.hpp"

using namespace jkoflow;

namespace {

ExperimentConfig load_config(const std::string& path, const std::string& out_override,
                             std::uint64_t seed_override, bool seed_set) {
    ExperimentConfig cfg = ExperimentConfig::from_file(path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (seed_set) cfg.seed = seed_override;
    return cfg;
}

int do_run(const std::string& config_path, const std::string& out, std::uint64_t seed,
           bool seed_set, int jobs) {
    const ExperimentConfig cfg = load_config(config_path, out, seed, seed_set);
    const PipelineOutcome outcome = run_pipeline(cfg, jobs);
    for (const auto& [name, pass] : outcome.verdicts)
        std::printf("%s %s\n", pass ? "PASS" : "FAIL", name.c_str());
    std::printf("report: %s\n", outcome.report_path.c_str());
    return outcome.all_pass ? 0 : 1;
}

int do_accept(std::vector<int> ids, const std::string& out, int jobs) {
    if (ids.empty()) ids = all_criteria();
    const auto results = run_acceptance(ids, out, jobs);
    int failures = 0;
    for (const auto& r : results) {
        std::printf("%s criterion-%d %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str(), r.seconds);
        if (!r.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}

int do_convergence(const std::string& config_path, const std::string& out,
                   std::vector<double> tau_list, std::vector<std::size_t> n_list, int jobs) {
    ExperimentConfig cfg = load_config(config_path, out, 0, false);
    if (tau_list.empty()) tau_list = {cfg.jko.tau};
    if (n_list.empty()) n_list = {cfg.jko.n_quantiles};
    const auto rows = convergence_study(cfg, tau_list, n_list, jobs);
    std::filesystem::create_directories(cfg.output_dir);
    const auto path = std::filesystem::path(cfg.output_dir) / "convergence.csv";
    std::ofstream os(path);
    write_convergence_csv(rows, os);
    for (const auto& r : rows)
        std::printf("tau=%-10g n=%-6zu L1=%-12g Lm=%-12g W2=%g\n", r.tau, r.n, r.err_l1, r.err_lm,
                    r.err_w2);
    std::printf("table: %s\n", path.string().c_str());
    return 0;
}

int do_entropy_sweep(const std::string& config_path, const std::string& out, std::uint64_t seed,
                     bool seed_set, int jobs) {
    ExperimentConfig cfg = load_config(config_path, out, seed, seed_set);
    cfg.run_jko_stage = false;  // reference solution only
    const PipelineOutcome outcome = run_pipeline(cfg, jobs);
    bool ok = true;
    for (const auto& [name, pass] : outcome.verdicts)
        if (name.rfind("entropy", 0) == 0) {
            std::printf("%s %s\n", pass ? "PASS" : "FAIL", name.c_str());
            ok = ok && pass;
        }
    return ok ? 0 : 1;
}

int do_transform_check(const std::string& config_path, const std::string& out) {
    ExperimentConfig cfg = load_config(config_path, out, 0, false);
    cfg.run_jko_stage = false;
    cfg.run_fv_stage = false;
    const PipelineOutcome outcome = run_pipeline(cfg, 1);
    bool ok = true;
    for (const auto& [name, pass] : outcome.verdicts)
        if (name.rfind("transform", 0) == 0) {
            std::printf("%s %s\n", pass ? "PASS" : "FAIL", name.c_str());
            ok = ok && pass;
        }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"1D quantile-coordinate JKO scheme for degenerate convection-diffusion, "
                 "with a monotone reference solver and entropy-inequality checks"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;
    std::vector<int> ids;
    std::vector<double> tau_list;
    std::vector<std::size_t> n_list;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "experiment config file")->required();
        cmd->add_option("--out", out_dir, "output directory override");
        cmd->add_option("--seed", seed, "seed for randomized test banks")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--jobs", jobs, "parallel workers for independent work items");
    };

    CLI::App* run = app.add_subcommand("run", "execute the full pipeline from a config");
    add_common(run, true);

    CLI::App* accept = app.add_subcommand("accept", "run acceptance criteria (default: all)");
    accept->add_option("ids", ids, "criterion ids (1..10)");
    add_common(accept, false);

    CLI::App* conv = app.add_subcommand("convergence", "tau/n refinement study");
    add_common(conv, true);
    conv->add_option("--tau-list", tau_list, "time steps to test");
    conv->add_option("--n-list", n_list, "quantile resolutions to test");

    CLI::App* esweep = app.add_subcommand("entropy-sweep", "reference run + entropy sweep only");
    add_common(esweep, true);

    CLI::App* tcheck = app.add_subcommand("transform-check", "coordinate-change checks only");
    add_common(tcheck, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(config_path, out_dir, seed, seed_set, jobs);
        if (accept->parsed()) return do_accept(ids, out_dir, jobs);
        if (conv->parsed()) return do_convergence(config_path, out_dir, tau_list, n_list, jobs);
        if (esweep->parsed()) return do_entropy_sweep(config_path, out_dir, seed, seed_set, jobs);
        if (tcheck->parsed()) return do_transform_check(config_path, out_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
