#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmmh/errors.hpp"
#include "pmmh/study.hpp"

namespace {

pmmh::AppConfig make_run_config(const std::string& config_path, CLI::App* cmd,
                                const pmmh::AppConfig& flags) {
    pmmh::AppConfig cfg;
    if (!config_path.empty()) cfg = pmmh::load_config(config_path);

    auto given = [cmd](const char* flag) { return cmd->count(flag) > 0; };
    if (given("--preset")) cfg.preset = flags.preset;
    if (given("--data")) cfg.data_path = flags.data_path;
    if (given("--output")) cfg.output_dir = flags.output_dir;
    if (given("--iterations")) cfg.iterations = flags.iterations;
    if (given("--seed")) cfg.seed = flags.seed;
    if (given("--replicates")) cfg.replicates = flags.replicates;
    if (given("--sampler")) cfg.sampler = flags.sampler;
    if (given("--filter-kind")) cfg.filter.kind = flags.filter.kind;
    if (given("--particles")) cfg.filter.particles = flags.filter.particles;
    if (given("--epsilon")) cfg.filter.apf_epsilon = flags.filter.apf_epsilon;
    if (given("--scheme")) cfg.scheme = flags.scheme;
    if (given("--workers")) cfg.workers = flags.workers;
    if (given("--evidence") || given("--no-evidence")) cfg.evidence = flags.evidence;
    if (given("--plots")) cfg.plots = flags.plots;
    if (given("--progress")) cfg.progress_every = flags.progress_every;
    return cfg;
}

int run_command(const std::string& config_path, CLI::App* cmd, const pmmh::AppConfig& flags) {
    pmmh::AppConfig cfg = make_run_config(config_path, cmd, flags);
    if (cfg.data_path.empty())
        throw pmmh::ConfigError("no data file: set data.path in the config or pass --data");

    pmmh::Dataset data = pmmh::load_dataset(cfg.data_path);
    pmmh::StudyResult result = pmmh::run_study(cfg, data, std::cout);

    for (const auto& rep : result.replicates) {
        std::printf("%s: accept %.1f%%, IF median %.3g, ECT median %.3g s", rep.directory.c_str(),
                    rep.diagnostics.acceptance_percent, rep.diagnostics.if_median,
                    rep.diagnostics.ect_median);
        if (rep.evidence)
            std::printf(", log p(y) %.6g (BS) / %.6g (IS)", rep.evidence->log_p_bs,
                        rep.evidence->log_p_is);
        std::printf("\n");
    }
    std::printf("wrote %s\n", result.table_path.c_str());
    return 0;
}

int simulate_command(const std::string& preset, int T, std::uint64_t seed,
                     const std::string& out_path, const std::vector<std::string>& values) {
    pmmh::models::ModelBundle bundle = pmmh::models::make_preset(preset);
    for (const std::string& kv : values) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw pmmh::ConfigError("--value expects name=number, got '" + kv + "'");
        std::size_t used = 0;
        double v = std::stod(kv.substr(eq + 1), &used);
        if (used != kv.size() - eq - 1)
            throw pmmh::ConfigError("--value expects name=number, got '" + kv + "'");
        bundle.prototype.set(kv.substr(0, eq), v);
    }

    pmmh::Rng rng(pmmh::derive_seed(seed, pmmh::stream::kSimulate));
    pmmh::Dataset data;
    data.y = pmmh::simulate_series(bundle.model, bundle.prototype, T, rng);
    pmmh::write_dataset_csv(out_path, data);
    std::printf("wrote %s (%d rows, preset %s, seed %llu)\n", out_path.c_str(), T, preset.c_str(),
                static_cast<unsigned long long>(seed));
    return 0;
}

int compare_command(const std::string& path_a, const std::string& path_b) {
    pmmh::Comparison cmp = pmmh::compare_summaries(path_a, path_b);
    std::printf("log Bayes factor, bridge:     %.6g\n", cmp.log_bf_bs);
    std::printf("log Bayes factor, importance: %.6g\n", cmp.log_bf_is);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Particle-marginal Metropolis-Hastings for state-space models"};
    app.require_subcommand(1);

    std::string config_path;
    pmmh::AppConfig flags;
    std::string sampler_name = "imh", filter_name = "sir", scheme_name = "averaged";

    CLI::App* run = app.add_subcommand("run", "run a replicate study from a config file");
    run->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    run->add_option("--preset", flags.preset, "model preset name");
    run->add_option("--data", flags.data_path, "dataset CSV")->check(CLI::ExistingFile);
    run->add_option("--output", flags.output_dir, "output directory");
    run->add_option("--iterations", flags.iterations, "MCMC iterations")
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", flags.seed, "master seed");
    run->add_option("--replicates", flags.replicates, "independent replicate count")
        ->check(CLI::PositiveNumber);
    run->add_option("--sampler", sampler_name, "rwm3c or imh")
        ->check(CLI::IsMember({"rwm3c", "imh"}));
    run->add_option("--filter-kind", filter_name, "sir or apf")
        ->check(CLI::IsMember({"sir", "apf"}));
    run->add_option("--particles", flags.filter.particles, "particles per filter")
        ->check(CLI::PositiveNumber);
    run->add_option("--epsilon", flags.filter.apf_epsilon, "defensive mixture weight")
        ->check(CLI::Range(0.0, 1.0));
    run->add_option("--scheme", scheme_name, "averaged or block")
        ->check(CLI::IsMember({"averaged", "block"}));
    run->add_option("--workers", flags.workers, "parallel filter workers")
        ->check(CLI::PositiveNumber);
    run->add_flag("--evidence,!--no-evidence", flags.evidence, "marginal likelihood estimation");
    run->add_flag("--plots", flags.plots, "emit trace/histogram/state SVGs");
    run->add_option("--progress", flags.progress_every, "progress line cadence (iterations)");

    CLI::App* sim = app.add_subcommand("simulate", "forward-simulate a dataset from a preset");
    std::string sim_preset = "sv", sim_out;
    int sim_T = 0;
    std::uint64_t sim_seed = 1;
    std::vector<std::string> sim_values;
    sim->add_option("--preset", sim_preset, "model preset name");
    sim->add_option("--T", sim_T, "series length")->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "simulation seed");
    sim->add_option("--out", sim_out, "output CSV path")->required();
    sim->add_option("--value", sim_values, "parameter override, name=number (repeatable)");

    CLI::App* cmp = app.add_subcommand("compare", "log Bayes factor of two summary.json files");
    std::string cmp_a, cmp_b;
    cmp->add_option("summary_a", cmp_a, "numerator summary.json")
        ->required()
        ->check(CLI::ExistingFile);
    cmp->add_option("summary_b", cmp_b, "denominator summary.json")
        ->required()
        ->check(CLI::ExistingFile);

    CLI::App* verify = app.add_subcommand("verify", "self-check against exact oracles");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            flags.sampler =
                sampler_name == "rwm3c" ? pmmh::SamplerKind::kRwm : pmmh::SamplerKind::kImh;
            flags.filter.kind =
                filter_name == "sir" ? pmmh::FilterKind::kSir : pmmh::FilterKind::kApf;
            flags.scheme = scheme_name == "averaged" ? pmmh::ParallelScheme::kAveragedLikelihood
                                                     : pmmh::ParallelScheme::kBlockImhSweep;
            return run_command(config_path, run, flags);
        }
        if (sim->parsed()) return simulate_command(sim_preset, sim_T, sim_seed, sim_out, sim_values);
        if (cmp->parsed()) return compare_command(cmp_a, cmp_b);
        if (verify->parsed()) return pmmh::verify_oracles(std::cout) ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
