#include "pmmh/study.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "pmmh/errors.hpp"
#include "pmmh/math.hpp"
#include "pmmh/oracle/kalman.hpp"

namespace pmmh {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t replicate_seed(std::uint64_t master, int replicate) {
    if (replicate == 0) return master;
    return derive_seed(master, stream::kReplicate, static_cast<std::uint64_t>(replicate));
}

namespace {

const char* sampler_name(SamplerKind k) { return k == SamplerKind::kRwm ? "rwm3c" : "imh"; }
const char* filter_name(FilterKind k) { return k == FilterKind::kSir ? "sir" : "apf"; }
const char* scheme_name(ParallelScheme s) {
    return s == ParallelScheme::kAveragedLikelihood ? "averaged" : "block";
}

void write_plots(const fs::path& dir, const RunSetup& setup, const RunConfig& cfg,
                 const RunRecord& rec, double burn_fraction, std::ostream& log) {
    long n = rec.draws.rows();
    long burn = static_cast<long>(std::floor(burn_fraction * static_cast<double>(n)));
    for (std::size_t c = 0; c < rec.names.size(); ++c) {
        std::vector<double> full(n), kept(n - burn);
        for (long i = 0; i < n; ++i) full[i] = rec.draws(i, static_cast<long>(c));
        for (long i = burn; i < n; ++i) kept[i - burn] = full[i];
        write_trace_svg((dir / ("trace_" + rec.names[c] + ".svg")).string(), full,
                        rec.names[c] + " trace");
        write_histogram_svg((dir / ("hist_" + rec.names[c] + ".svg")).string(), kept, 40,
                            rec.names[c] + " posterior");
    }

    // filtered-state band at the posterior mean
    Eigen::VectorXd mean = rec.draws.bottomRows(rec.draws.rows() - burn).colwise().mean();
    ParameterVector theta = setup.inputs.prototype.unpack(mean);
    FilterSettings settings = cfg.filter;
    settings.want_moments = true;
    settings.rng_seed = derive_seed(cfg.seed, stream::kFilter,
                                    static_cast<std::uint64_t>(cfg.iterations) + 1);
    try {
        FilterResult fr = run_filter(setup.inputs.model, theta, setup.inputs.y, settings);
        if (fr.moments) {
            long T = static_cast<long>(setup.inputs.y.size());
            int dim = fr.moments->dim;
            std::vector<double> center(T), lo(T), hi(T);
            for (long t = 0; t < T; ++t) {
                double m = fr.moments->mean[t * dim];
                double s = fr.moments->sd[t * dim];
                center[t] = m;
                lo[t] = m - 2.0 * s;
                hi[t] = m + 2.0 * s;
            }
            write_band_svg((dir / "filtered_state.svg").string(), center, lo, hi,
                           "filtered state, mean +/- 2 sd");
        }
    } catch (const NumericalError& e) {
        log << "  filtered-state plot skipped: " << e.what() << "\n";
    }
}

json summary_json(const AppConfig& app, const ReplicateArtifacts& rep) {
    json j;
    j["model"] = app.preset;
    j["sampler"] = sampler_name(app.sampler);
    j["filter"] = filter_name(app.filter.kind);
    j["scheme"] = scheme_name(app.scheme);
    j["iterations"] = app.iterations;
    j["particles"] = app.filter.particles;
    j["workers"] = app.workers;
    j["seed"] = rep.seed;
    if (app.filter.kind == FilterKind::kApf) j["epsilon"] = app.filter.apf_epsilon;

    const ChainDiagnostics& d = rep.diagnostics;
    j["acceptance_percent"] = d.acceptance_percent;
    j["seconds_per_iteration"] = d.seconds_per_iteration;
    j["if"] = {{"min", d.if_min}, {"median", d.if_median}, {"max", d.if_max}};
    j["ect_median"] = d.ect_median;
    j["draws_used"] = d.draws_used;
    j["if_warnings"] = d.warnings;
    j["sampler_warnings"] = rep.sampler_warnings;
    j["prior_rejects"] = rep.prior_rejects;
    j["filter_failures"] = rep.filter_failures;

    json params = json::array();
    for (const auto& p : d.parameters) {
        params.push_back({{"name", p.name},
                          {"mean", p.mean},
                          {"sd", p.sd},
                          {"q05", p.q05},
                          {"q50", p.q50},
                          {"q95", p.q95},
                          {"inefficiency", p.inefficiency}});
    }
    j["parameters"] = std::move(params);

    if (rep.evidence) {
        j["evidence"] = {{"log_p_bs", rep.evidence->log_p_bs},
                         {"log_p_is", rep.evidence->log_p_is},
                         {"log_U", rep.evidence->log_U},
                         {"posterior_draws", rep.evidence->posterior_draws},
                         {"fresh_draws", rep.evidence->fresh_draws},
                         {"failed_evaluations", rep.evidence->failed_evaluations}};
    }
    return j;
}

std::string med_iqr(std::vector<double> v) {
    std::erase_if(v, [](double x) { return std::isnan(x); });
    if (v.empty()) return "-";
    double med = quantile(v, 0.5);
    double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g (%.3g)", med, iqr);
    return buf;
}

}  // namespace

std::string summary_json_text(const AppConfig& app, const ReplicateArtifacts& rep) {
    return summary_json(app, rep).dump(2) + "\n";
}

void write_table_md(const std::string& path, const AppConfig& app,
                    const std::vector<ReplicateArtifacts>& reps) {
    std::vector<double> accept, if_min, if_med, if_max, ect, bs, is;
    for (const auto& r : reps) {
        accept.push_back(r.diagnostics.acceptance_percent);
        if_min.push_back(r.diagnostics.if_min);
        if_med.push_back(r.diagnostics.if_median);
        if_max.push_back(r.diagnostics.if_max);
        ect.push_back(r.diagnostics.ect_median);
        if (r.evidence) {
            bs.push_back(r.evidence->log_p_bs);
            is.push_back(r.evidence->log_p_is);
        }
    }

    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write table file '" + path + "'");
    out << "# " << app.preset << " — " << reps.size() << " replicate"
        << (reps.size() == 1 ? "" : "s") << "\n\n";
    out << "Median (IQR) across replicate seeds.\n\n";
    out << "| sampler | filter | accept % | IF min | IF median | IF max | ECT median (s) | "
           "log p(y) BS | log p(y) IS |\n";
    out << "|---|---|---|---|---|---|---|---|---|\n";
    out << "| " << sampler_name(app.sampler) << " | " << filter_name(app.filter.kind) << " | "
        << med_iqr(accept) << " | " << med_iqr(if_min) << " | " << med_iqr(if_med) << " | "
        << med_iqr(if_max) << " | " << med_iqr(ect) << " | " << med_iqr(bs) << " | "
        << med_iqr(is) << " |\n";
}

StudyResult run_study(const AppConfig& app, const Dataset& data, std::ostream& log) {
    RunSetup setup = build_run(app, data);
    fs::create_directories(app.output_dir);

    StudyResult result;
    for (int r = 0; r < app.replicates; ++r) {
        RunConfig cfg = setup.config;
        cfg.seed = replicate_seed(app.seed, r);
        log << "replicate " << r << " started (seed " << cfg.seed << ")\n";

        RunRecord rec = run_chain(setup.inputs, cfg);

        ReplicateArtifacts rep;
        rep.seed = cfg.seed;
        rep.diagnostics = summarize_chain(rec, app.burn_fraction);
        rep.prior_rejects = rec.prior_rejects;
        rep.filter_failures = rec.filter_failures;
        rep.sampler_warnings = rec.sampler_warnings;

        if (app.evidence && app.sampler == SamplerKind::kImh) {
            EvidenceOptions opts;
            opts.fresh_draws = app.evidence_draws;
            opts.burn_fraction = app.burn_fraction;
            rep.evidence = estimate_evidence(setup.inputs, cfg, rec, opts);
        }

        char name[32];
        std::snprintf(name, sizeof name, "replicate_%02d", r);
        fs::path dir = fs::path(app.output_dir) / name;
        fs::create_directories(dir);
        rep.directory = dir.string();

        write_draws_csv((dir / "draws.csv").string(), rec);
        std::ofstream(dir / "summary.json") << summary_json_text(app, rep);
        if (app.plots) write_plots(dir, setup, cfg, rec, app.burn_fraction, log);

        log << "replicate " << r << " done: accept "
            << rep.diagnostics.acceptance_percent << "%, IF median "
            << rep.diagnostics.if_median << "\n";
        result.replicates.push_back(std::move(rep));
    }

    result.table_path = (fs::path(app.output_dir) / "table.md").string();
    write_table_md(result.table_path, app, result.replicates);
    return result;
}

Comparison compare_summaries(const std::string& path_a, const std::string& path_b) {
    auto load = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open summary file '" + path + "'");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError(path + ": " + e.what());
        }
        if (!j.contains("evidence"))
            throw ConfigError("summary '" + path + "' has no evidence section");
        return j;
    };
    json a = load(path_a), b = load(path_b);
    Comparison cmp;
    cmp.log_bf_bs =
        a["evidence"]["log_p_bs"].get<double>() - b["evidence"]["log_p_bs"].get<double>();
    cmp.log_bf_is =
        a["evidence"]["log_p_is"].get<double>() - b["evidence"]["log_p_is"].get<double>();
    return cmp;
}

namespace {

bool check(std::ostream& out, const std::string& name, bool ok, const std::string& detail = {}) {
    out << (ok ? "PASS " : "FAIL ") << name;
    if (!ok && !detail.empty()) out << " (" << detail << ")";
    out << "\n";
    return ok;
}

// Representative parameter point: prototype plus a half-spread jitter kept
// inside the prior support.  Vague priors make raw prior draws numerically
// silly (scales of 1e50), which would only exercise overflow paths.
ParameterVector jitter_prototype(const models::ModelBundle& b, Rng& rng) {
    ParameterVector theta = b.prototype;
    for (const std::string& name : b.prototype.free_names()) {
        const Prior& pr = b.priors.prior_for(name);
        auto [lo, hi] = prior_support(pr);
        double sd = prior_proposal_sd(pr);
        double v;
        do {
            v = theta.get(name) + 0.5 * sd * standard_normal(rng);
        } while (v <= lo || v >= hi);
        theta.set(name, v);
    }
    return theta;
}

}  // namespace

bool verify_oracles(std::ostream& out) {
    bool all = true;

    {  // one-step Kalman closed form: a = 1 gives y1 ~ N(m0, p0 + q^2 + r^2)
        oracle::LinearGaussianSsm ssm{1.0, 0.3, 0.5, 0.2, 1.0};
        std::vector<double> y{0.7};
        double expect = normal_logpdf(0.7, 0.2, std::sqrt(1.0 + 0.09 + 0.25));
        double got = oracle::kalman_filter(ssm, y).loglik;
        all &= check(out, "kalman one-step closed form", std::abs(got - expect) < 1e-12);
    }

    {  // vanishing state noise: observations collapse to i.i.d. N(0, p0+r^2)
        oracle::LinearGaussianSsm ssm{0.0, 1e-6, 0.5, 0.0, 0.0};
        Rng rng(derive_seed(71, stream::kSimulate));
        std::vector<double> y(40);
        for (double& v : y) v = 0.5 * standard_normal(rng);
        double iid = 0.0;
        for (double v : y) iid += normal_logpdf(v, 0.0, 0.5);
        double got = oracle::kalman_filter(ssm, y).loglik;
        all &= check(out, "kalman iid limit", std::abs(got - iid) < 1e-3);
    }

    {  // quadrature against the conjugate normal-mean marginal
        double tau = 1.3, sigma = 0.8, obs = 0.4;
        auto f = [&](std::span<const double> s) {
            return normal_logpdf(obs, s[0], sigma) + normal_logpdf(s[0], 0.0, tau);
        };
        std::vector<double> lo{-10.0}, hi{10.0};
        double got = oracle::log_integrate(f, lo, hi);
        double expect = normal_logpdf(obs, 0.0, std::hypot(tau, sigma));
        all &= check(out, "quadrature conjugate marginal", std::abs(got - expect) < 1e-6);
    }

    {  // particle filter unbiasedness on the linear-Gaussian oracle
        oracle::LinearGaussianSsm ssm{0.9, 0.3, 0.5, 0.0, 1.0};
        Rng sim(derive_seed(72, stream::kSimulate));
        std::vector<double> y(30);
        double x = ssm.m0 + std::sqrt(ssm.p0) * standard_normal(sim);
        for (double& v : y) {
            x = ssm.a * x + ssm.q * standard_normal(sim);
            v = x + ssm.r * standard_normal(sim);
        }
        double exact = oracle::kalman_filter(ssm, y).loglik;

        ModelDefinition m;
        m.name = "lg";
        m.sample_initial = [ssm](const ParameterVector&, StateView outv, Rng& rng) {
            for (int k = 0; k < outv.rows; ++k)
                outv.at(k, 0) = ssm.m0 + std::sqrt(ssm.p0) * standard_normal(rng);
        };
        m.sample_transition = [ssm](const ParameterVector&, const StateView& prev, StateView next,
                                    int, Rng& rng) {
            for (int k = 0; k < next.rows; ++k)
                next.at(k, 0) = ssm.a * prev.at(k, 0) + ssm.q * standard_normal(rng);
        };
        m.obs_logdensity = [ssm](const ParameterVector&, const StateView& st, int, double obs,
                                 std::span<double> dens) {
            for (int k = 0; k < st.rows; ++k)
                dens[static_cast<std::size_t>(k)] = normal_logpdf(obs, st.at(k, 0), ssm.r);
        };

        ParameterVector theta;
        FilterSettings settings;
        settings.particles = 200;
        const int n = 200;
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            settings.rng_seed = derive_seed(73, stream::kFilter, static_cast<std::uint64_t>(i));
            double ratio = std::exp(sir_filter(m, theta, y, settings).loglik.total - exact);
            sum += ratio;
            sumsq += ratio * ratio;
        }
        double mean = sum / n;
        double se = std::sqrt((sumsq / n - mean * mean) / (n - 1));
        char detail[96];
        std::snprintf(detail, sizeof detail, "mean ratio %.4f, se %.4f", mean, se);
        all &= check(out, "particle filter unbiasedness", std::abs(mean - 1.0) < 4.0 * se,
                     detail);
    }

    {  // observation bounds dominate the density on every bounded preset
        bool ok = true;
        for (const char* preset : {"sv", "sv_outlier", "sv_leverage", "negbin", "poisson_rw"}) {
            models::ModelBundle b = models::make_preset(preset);
            Rng rng(derive_seed(74, stream::kSimulate));
            for (int rep = 0; rep < 5 && ok; ++rep) {
                ParameterVector theta = jitter_prototype(b, rng);
                const int M = 100, T = 20;
                std::vector<double> cur(M * b.model.state_dim), next(cur.size());
                StateView curv{cur.data(), M, b.model.state_dim};
                StateView nextv{next.data(), M, b.model.state_dim};
                b.model.sample_initial(theta, curv, rng);
                for (int t = 1; t <= T && ok; ++t) {
                    b.model.sample_transition(theta, curv, nextv, t, rng);
                    std::swap(cur, next);
                    curv.data = cur.data();
                    nextv.data = next.data();
                    double obs = b.model.sample_observation(theta, curv.row(0), t, rng);
                    double bound = b.model.log_obs_bound(theta, t, obs);
                    std::vector<double> dens(M);
                    b.model.obs_logdensity(theta, curv, t, obs, dens);
                    for (double d : dens)
                        if (!(d <= bound + 1e-12)) ok = false;  // catches NaN too
                }
            }
        }
        all &= check(out, "observation bounds hold across presets", ok);
    }

    return all;
}

}  // namespace pmmh
