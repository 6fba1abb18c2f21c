#include "pmmh/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pmmh/errors.hpp"

namespace pmmh {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw ConfigError(origin + ": " + what);
}

// Rejects typos: every key in `j` must appear in `allowed`.
void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& origin, const std::string& section) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) ok = true;
        if (!ok) fail(origin, "unknown key '" + item.key() + "' in " + section);
    }
}

std::vector<long> long_list(const json& j, const std::string& origin, const std::string& key) {
    if (!j.is_array()) fail(origin, key + " must be an array of integers");
    std::vector<long> out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) fail(origin, key + " must contain integers only");
        out.push_back(v.get<long>());
    }
    return out;
}

void require_increasing(const std::vector<long>& v, const std::string& origin,
                        const std::string& key) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] <= 0) fail(origin, key + " entries must be positive");
        if (i > 0 && v[i] <= v[i - 1]) fail(origin, key + " must be strictly increasing");
    }
}

Prior parse_prior(const json& j, const std::string& origin, const std::string& name) {
    if (!j.is_object() || !j.contains("type"))
        fail(origin, "prior for '" + name + "' needs a 'type' field");
    std::string type = j.at("type").get<std::string>();
    try {
        if (type == "normal") return NormalPrior{j.at("mean").get<double>(), j.at("sd").get<double>()};
        if (type == "truncnormal")
            return TruncNormalPrior{j.at("loc").get<double>(), j.at("scale").get<double>(),
                                    j.at("lo").get<double>(), j.at("hi").get<double>()};
        if (type == "invgamma")
            return InverseGammaPrior{j.at("shape").get<double>(), j.at("scale").get<double>()};
        if (type == "halfnormal") return HalfNormalPrior{j.at("scale").get<double>()};
        if (type == "point") return PointMassPrior{j.at("value").get<double>()};
        if (type == "uniform") {
            UniformPrior u{j.at("lo").get<double>(), j.at("hi").get<double>()};
            if (!(u.lo < u.hi)) fail(origin, "prior for '" + name + "': lo must be below hi");
            return u;
        }
    } catch (const json::exception& e) {
        fail(origin, "prior for '" + name + "': " + e.what());
    }
    fail(origin, "prior for '" + name + "' has unknown type '" + type + "'");
}

void parse_model(const json& j, AppConfig& cfg) {
    check_keys(j, {"preset", "overrides", "values", "priors", "covariates"}, cfg.origin,
               "model");
    if (j.contains("preset")) cfg.preset = j.at("preset").get<std::string>();
    if (j.contains("covariates"))
        cfg.covariate_names = j.at("covariates").get<std::vector<std::string>>();
    if (j.contains("overrides")) {
        const json& ov = j.at("overrides");
        check_keys(ov,
                   {"outlier_prob", "outlier_scale", "leverage_same_step", "x0_mean", "x0_sd",
                    "mu0_mean", "mu0_sd", "trend", "t_int", "seasonal_terms", "period",
                    "estimate_beta"},
                   cfg.origin, "model.overrides");
        auto& s = cfg.structural;
        if (ov.contains("outlier_prob")) s.outlier_prob = ov.at("outlier_prob").get<double>();
        if (ov.contains("outlier_scale")) s.outlier_scale = ov.at("outlier_scale").get<double>();
        if (ov.contains("leverage_same_step"))
            s.leverage_same_step = ov.at("leverage_same_step").get<bool>();
        if (ov.contains("x0_mean")) s.x0_mean = ov.at("x0_mean").get<double>();
        if (ov.contains("x0_sd")) s.x0_sd = ov.at("x0_sd").get<double>();
        if (ov.contains("mu0_mean")) s.mu0_mean = ov.at("mu0_mean").get<double>();
        if (ov.contains("mu0_sd")) s.mu0_sd = ov.at("mu0_sd").get<double>();
        if (ov.contains("trend")) s.trend = ov.at("trend").get<bool>();
        if (ov.contains("t_int")) s.t_int = ov.at("t_int").get<int>();
        if (ov.contains("seasonal_terms")) s.seasonal_terms = ov.at("seasonal_terms").get<int>();
        if (ov.contains("period")) s.period = ov.at("period").get<double>();
        if (ov.contains("estimate_beta")) s.estimate_beta = ov.at("estimate_beta").get<bool>();
    }
    if (j.contains("values"))
        for (const auto& item : j.at("values").items())
            cfg.values.emplace_back(item.key(), item.value().get<double>());
    if (j.contains("priors"))
        for (const auto& item : j.at("priors").items())
            cfg.priors.emplace_back(item.key(), parse_prior(item.value(), cfg.origin, item.key()));
}

void parse_sampler(const json& j, AppConfig& cfg) {
    check_keys(j,
               {"kind", "prelim_iterations", "stage2_start", "refit_schedule", "max_components",
                "growth_unit", "rwm_j0", "kappa1", "kappa2", "kappa3"},
               cfg.origin, "sampler");
    if (j.contains("kind")) {
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "rwm3c")
            cfg.sampler = SamplerKind::kRwm;
        else if (kind == "imh")
            cfg.sampler = SamplerKind::kImh;
        else
            fail(cfg.origin, "sampler.kind must be 'rwm3c' or 'imh', got '" + kind + "'");
    }
    if (j.contains("prelim_iterations")) cfg.prelim_iterations = j.at("prelim_iterations").get<long>();
    if (j.contains("stage2_start")) cfg.stage2_start = j.at("stage2_start").get<long>();
    if (j.contains("refit_schedule")) {
        cfg.imh.refit_schedule = long_list(j.at("refit_schedule"), cfg.origin, "refit_schedule");
        require_increasing(cfg.imh.refit_schedule, cfg.origin, "sampler.refit_schedule");
    }
    if (j.contains("max_components")) cfg.imh.max_components = j.at("max_components").get<int>();
    if (j.contains("growth_unit")) cfg.imh.growth_unit = j.at("growth_unit").get<int>();
    if (j.contains("rwm_j0")) cfg.rwm.j0 = j.at("rwm_j0").get<long>();
    if (j.contains("kappa1")) cfg.rwm.kappa1 = j.at("kappa1").get<double>();
    if (j.contains("kappa2")) cfg.rwm.kappa2 = j.at("kappa2").get<double>();
    if (j.contains("kappa3")) cfg.rwm.kappa3 = j.at("kappa3").get<double>();
}

void parse_filter(const json& j, AppConfig& cfg) {
    check_keys(j, {"kind", "particles", "epsilon", "resampling"}, cfg.origin, "filter");
    if (j.contains("kind")) {
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "sir")
            cfg.filter.kind = FilterKind::kSir;
        else if (kind == "apf")
            cfg.filter.kind = FilterKind::kApf;
        else
            fail(cfg.origin, "filter.kind must be 'sir' or 'apf', got '" + kind + "'");
    }
    if (j.contains("particles")) cfg.filter.particles = j.at("particles").get<int>();
    if (j.contains("epsilon")) {
        cfg.filter.apf_epsilon = j.at("epsilon").get<double>();
        if (cfg.filter.apf_epsilon < 0.0 || cfg.filter.apf_epsilon > 1.0)
            fail(cfg.origin, "filter.epsilon must lie in [0, 1]");
    }
    if (j.contains("resampling")) {
        std::string r = j.at("resampling").get<std::string>();
        if (r == "multinomial")
            cfg.filter.resampling = ResamplingScheme::kMultinomial;
        else if (r == "stratified")
            cfg.filter.resampling = ResamplingScheme::kStratified;
        else
            fail(cfg.origin, "filter.resampling must be 'multinomial' or 'stratified'");
    }
}

void parse_parallel(const json& j, AppConfig& cfg) {
    check_keys(j, {"scheme", "workers", "block_schedule"}, cfg.origin, "parallel");
    if (j.contains("scheme")) {
        std::string s = j.at("scheme").get<std::string>();
        if (s == "averaged")
            cfg.scheme = ParallelScheme::kAveragedLikelihood;
        else if (s == "block")
            cfg.scheme = ParallelScheme::kBlockImhSweep;
        else
            fail(cfg.origin, "parallel.scheme must be 'averaged' or 'block', got '" + s + "'");
    }
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    if (j.contains("block_schedule")) {
        cfg.block_schedule = long_list(j.at("block_schedule"), cfg.origin, "block_schedule");
        if (cfg.block_schedule.empty()) fail(cfg.origin, "parallel.block_schedule is empty");
        for (long b : cfg.block_schedule)
            if (b <= 0) fail(cfg.origin, "parallel.block_schedule entries must be positive");
    }
}

void parse_run(const json& j, AppConfig& cfg) {
    check_keys(j,
               {"iterations", "seed", "replicates", "burn_fraction", "evidence",
                "evidence_draws", "plots", "progress_every"},
               cfg.origin, "run");
    if (j.contains("iterations")) cfg.iterations = j.at("iterations").get<long>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("replicates")) cfg.replicates = j.at("replicates").get<int>();
    if (j.contains("burn_fraction")) cfg.burn_fraction = j.at("burn_fraction").get<double>();
    if (j.contains("evidence")) cfg.evidence = j.at("evidence").get<bool>();
    if (j.contains("evidence_draws")) cfg.evidence_draws = j.at("evidence_draws").get<long>();
    if (j.contains("plots")) cfg.plots = j.at("plots").get<bool>();
    if (j.contains("progress_every")) cfg.progress_every = j.at("progress_every").get<long>();
}

}  // namespace

AppConfig parse_config(const std::string& json_text, const std::string& origin) {
    AppConfig cfg;
    cfg.origin = origin;

    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(origin, e.what());
    }
    if (!j.is_object()) fail(origin, "top level must be a JSON object");
    check_keys(j, {"model", "sampler", "filter", "parallel", "run", "data", "output"}, origin,
               "the top level");

    try {
        if (j.contains("model")) parse_model(j.at("model"), cfg);
        if (j.contains("sampler")) parse_sampler(j.at("sampler"), cfg);
        if (j.contains("filter")) parse_filter(j.at("filter"), cfg);
        if (j.contains("parallel")) parse_parallel(j.at("parallel"), cfg);
        if (j.contains("run")) parse_run(j.at("run"), cfg);
        if (j.contains("data")) {
            check_keys(j.at("data"), {"path"}, origin, "data");
            if (j.at("data").contains("path")) cfg.data_path = j.at("data").at("path").get<std::string>();
        }
        if (j.contains("output")) {
            check_keys(j.at("output"), {"dir"}, origin, "output");
            if (j.at("output").contains("dir")) cfg.output_dir = j.at("output").at("dir").get<std::string>();
        }
    } catch (const json::exception& e) {
        fail(origin, e.what());
    }

    if (cfg.iterations <= 0) fail(origin, "run.iterations must be positive");
    if (cfg.replicates < 1) fail(origin, "run.replicates must be at least 1");
    if (cfg.workers < 1) fail(origin, "parallel.workers must be at least 1");
    if (cfg.filter.particles < 1) fail(origin, "filter.particles must be at least 1");
    if (!(cfg.burn_fraction >= 0.0 && cfg.burn_fraction < 1.0))
        fail(origin, "run.burn_fraction must lie in [0, 1)");
    if (cfg.scheme == ParallelScheme::kBlockImhSweep && cfg.sampler != SamplerKind::kImh)
        fail(origin, "the block scheme needs sampler.kind = 'imh'");
    return cfg;
}

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

RunSetup build_run(const AppConfig& app, const Dataset& data) {
    models::PresetOverrides ov = app.structural;
    if (!app.covariate_names.empty()) {
        ov.n_covariates = static_cast<int>(app.covariate_names.size());
        ov.covariates.resize(data.y.size() * app.covariate_names.size());
        for (std::size_t t = 0; t < data.y.size(); ++t)
            for (std::size_t c = 0; c < app.covariate_names.size(); ++c) {
                const auto& col = data.covariate(app.covariate_names[c]);
                if (col.size() != data.y.size())
                    throw ConfigError("covariate '" + app.covariate_names[c] +
                                      "' length differs from y");
                ov.covariates[t * app.covariate_names.size() + c] = col[t];
            }
    }

    models::ModelBundle bundle = models::make_preset(app.preset, ov);
    if (bundle.integer_data) require_counts(data);

    for (const auto& [name, value] : app.values) bundle.prototype.set(name, value);

    if (!app.priors.empty()) {
        std::vector<std::string> free = bundle.prototype.free_names();
        for (const auto& [name, prior] : app.priors)
            if (std::find(free.begin(), free.end(), name) == free.end())
                throw ConfigError(app.origin + ": prior override for '" + name +
                                  "' does not match a free parameter");
        PriorSet merged;
        for (const auto& name : free) {
            auto it = std::find_if(app.priors.begin(), app.priors.end(),
                                   [&](const auto& p) { return p.first == name; });
            merged.add(name, it != app.priors.end() ? it->second : bundle.priors.prior_for(name));
        }
        bundle.priors = std::move(merged);
    }

    RunSetup setup;
    setup.integer_data = bundle.integer_data;
    setup.inputs.model = std::move(bundle.model);
    setup.inputs.prototype = std::move(bundle.prototype);
    setup.inputs.priors = std::move(bundle.priors);
    setup.inputs.y = data.y;

    RunConfig& rc = setup.config;
    rc.sampler = app.sampler;
    rc.scheme = app.scheme;
    rc.iterations = app.iterations;
    rc.workers = app.workers;
    rc.filter = app.filter;
    rc.rwm = app.rwm;
    rc.imh = app.imh;
    rc.block_schedule = app.block_schedule;
    rc.prelim_iterations = app.prelim_iterations;
    rc.stage2_start = app.stage2_start;
    rc.seed = app.seed;
    rc.progress_every = app.progress_every;
    return setup;
}

}  // namespace pmmh
