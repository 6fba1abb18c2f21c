#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pmmh/chain.hpp"
#include "pmmh/io.hpp"
#include "pmmh/models/registry.hpp"

namespace pmmh {

// Everything a study needs, parsed from one JSON file.  Field groups mirror
// the config sections; see README for the schema.
struct AppConfig {
    std::string origin;  // config path, prefixed to parse errors

    std::string preset = "sv";
    models::PresetOverrides structural;       // covariate columns filled at build time
    std::vector<std::string> covariate_names; // dataset columns, order = beta1, beta2, ...
    std::vector<std::pair<std::string, double>> values;  // prototype value overrides
    std::vector<std::pair<std::string, Prior>> priors;   // prior overrides by name

    SamplerKind sampler = SamplerKind::kImh;
    ParallelScheme scheme = ParallelScheme::kAveragedLikelihood;
    long iterations = 10000;
    int workers = 1;
    FilterSettings filter;
    RwmOptions rwm;
    ImhOptions imh;
    std::vector<long> block_schedule = {15, 25, 60, 125, 250, 375, 500, 625, 750, 940};
    long prelim_iterations = 2000;
    long stage2_start = 0;

    std::uint64_t seed = 1;
    int replicates = 1;
    double burn_fraction = 0.1;
    bool evidence = true;
    long evidence_draws = 0;  // 0 = one per retained posterior draw
    bool plots = false;
    long progress_every = 0;

    std::string data_path;
    std::string output_dir = "out";
};

AppConfig parse_config(const std::string& json_text, const std::string& origin);
AppConfig load_config(const std::string& path);

struct RunSetup {
    RunInputs inputs;
    RunConfig config;
    bool integer_data = false;
};

// Instantiates the preset, applies value/prior overrides, attaches covariate
// columns, and validates the data against the model family.
RunSetup build_run(const AppConfig& app, const Dataset& data);

}  // namespace pmmh
