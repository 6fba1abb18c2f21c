#include "pmmh/chain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>

#include "pmmh/errors.hpp"
#include "pmmh/parallel.hpp"

namespace pmmh {

LikelihoodFn make_filter_loglik(const ModelDefinition& model, std::vector<double> y,
                                FilterSettings settings) {
    settings.want_moments = false;
    return [model, y = std::move(y), settings](const ParameterVector& theta, std::uint64_t seed) {
        FilterSettings s = settings;
        s.rng_seed = seed;
        return run_filter(model, theta, y, s).loglik.total;
    };
}

ChainState pmmh_step(const ChainState& chain, Proposal& proposal, const PriorSet& priors,
                     const LikelihoodFn& loglik, std::uint64_t filter_seed, Rng& proposal_rng,
                     Rng& accept_rng, StepInfo* info) {
    ChainState next = chain;
    ++next.iteration;

    Eigen::VectorXd cur = chain.theta.pack();
    Eigen::VectorXd prop = proposal.propose(cur, proposal_rng);
    ParameterVector theta_p = chain.theta.unpack(prop);
    double logprior_p = priors.log_density(theta_p);

    bool prior_rejected = logprior_p == kNegInf;
    bool filter_failed = false;
    double loglik_p = kNegInf;
    if (!prior_rejected) {
        try {
            loglik_p = loglik(theta_p, filter_seed);
            if (std::isnan(loglik_p)) {
                loglik_p = kNegInf;
                filter_failed = true;
            }
        } catch (const NumericalError&) {
            filter_failed = true;
        }
    }

    double log_alpha = kNegInf;
    if (!prior_rejected && !filter_failed) {
        double num = loglik_p + logprior_p;
        double den = chain.loglik + chain.logprior;
        if (num == kNegInf)
            log_alpha = kNegInf;
        else if (den == kNegInf)
            log_alpha = 0.0;
        else
            log_alpha = num - den + proposal.log_adjust(cur, prop);
    }

    double u = uniform01(accept_rng);
    bool accepted = std::log(u) < log_alpha;
    if (accepted) {
        next.theta = std::move(theta_p);
        next.loglik = loglik_p;
        next.logprior = logprior_p;
        ++next.accepts;
    }
    proposal.observe(accepted ? prop : cur, accepted);

    if (info) {
        info->accepted = accepted;
        info->prior_rejected = prior_rejected;
        info->filter_failed = filter_failed;
        info->log_alpha = log_alpha;
        info->loglik_prop = loglik_p;
        info->proposed = std::move(prop);
    }
    return next;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Recorder {
    RunRecord rec;
    long row = 0;

    Recorder(std::vector<std::string> names, long iterations, int d) {
        rec.names = std::move(names);
        rec.draws.resize(iterations, d);
        rec.loglik.resize(iterations);
        rec.logprior.resize(iterations);
        rec.accepted.resize(iterations);
        rec.seconds.resize(iterations);
    }

    void push(const Eigen::VectorXd& draw, double loglik, double logprior, bool accepted,
              double secs) {
        rec.draws.row(row) = draw.transpose();
        rec.loglik[row] = loglik;
        rec.logprior[row] = logprior;
        rec.accepted[row] = accepted;
        rec.seconds[row] = secs;
        ++row;
    }
};

void progress_line(const RunConfig& cfg, const char* label, long at, long total, long accepts) {
    if (cfg.progress_every <= 0) return;
    double rate = at > 0 ? 100.0 * static_cast<double>(accepts) / static_cast<double>(at) : 0.0;
    std::cerr << label << " " << at << "/" << total << " accept " << rate << "%\n";
}

void validate(const RunInputs& inputs, const RunConfig& cfg, int d) {
    if (d == 0) throw ConfigError("model has no free parameters to sample");
    if (cfg.iterations < 0) throw ConfigError("iterations must be nonnegative");
    if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
    if (cfg.filter.particles < 1) throw ConfigError("particle count must be at least 1");
    if (cfg.prelim_iterations < 0) throw ConfigError("warm-up length must be nonnegative");
    if (cfg.scheme == ParallelScheme::kBlockImhSweep) {
        if (cfg.sampler != SamplerKind::kImh)
            throw ConfigError("the block sweep scheme requires the independence sampler");
        if (cfg.block_schedule.empty()) throw ConfigError("block schedule must be nonempty");
        for (long k : cfg.block_schedule)
            if (k < 1) throw ConfigError("block schedule entries must be positive");
    }
    if (cfg.init && cfg.init->size() != d)
        throw ConfigError("initial point does not match the free parameter count");
    if (cfg.sigma1 && (cfg.sigma1->rows() != d || cfg.sigma1->cols() != d))
        throw ConfigError("sigma1 does not match the free parameter count");
    if (inputs.y.empty()) throw ConfigError("observation series is empty");
}

long resolve_stage2(const RunConfig& cfg) {
    if (cfg.stage2_start < 0) return -1;
    if (cfg.stage2_start > 0) return cfg.stage2_start;
    return std::min<long>(cfg.iterations / 2, 5000);
}

Eigen::MatrixXd resolve_sigma1(const RunConfig& cfg, const PriorSet& priors) {
    if (cfg.sigma1) return *cfg.sigma1;
    return priors.proposal_covariance();
}

ChainState make_initial_state(const RunInputs& inputs, const PriorSet& priors,
                              const LikelihoodFn& loglik, std::uint64_t master,
                              const std::optional<Eigen::VectorXd>& start) {
    ChainState st;
    const std::uint64_t fseed = derive_seed(master, stream::kFilter, 0);
    if (start) {
        st.theta = inputs.prototype.unpack(*start);
        st.logprior = priors.log_density(st.theta);
        if (st.logprior == kNegInf)
            throw ConfigError("initial parameter point has zero prior density");
        st.loglik = loglik(st.theta, fseed);
        if (std::isnan(st.loglik))
            throw NumericalError("likelihood at the initial point is not finite");
        return st;
    }
    // Prior-draw start, hardened for vague priors: a draw can land on an
    // overflow plateau (scale ~ 1e48, log-likelihood ~ -1e23, technically
    // finite) that a random walk never escapes.  Score a batch of draws plus
    // the preset point and start at the best; same seed, same start.
    bool have = false;
    auto consider = [&](ParameterVector cand) {
        double lp = priors.log_density(cand);
        if (lp == kNegInf) return false;
        double ll;
        try {
            ll = loglik(cand, fseed);
        } catch (const NumericalError&) {
            return false;
        }
        if (!std::isfinite(ll)) return false;
        if (!have || ll > st.loglik) {
            st.theta = std::move(cand);
            st.loglik = ll;
            st.logprior = lp;
            have = true;
        }
        return true;
    };
    consider(inputs.prototype);
    Rng rng(derive_seed(master, stream::kInit));
    for (int attempt = 0, kept = 0; attempt < 200 && kept < 50; ++attempt)
        kept += consider(priors.sample(inputs.prototype, rng));
    if (!have) throw NumericalError("no starting point yielded a finite likelihood");
    return st;
}

// Sequential MH loop shared by the random-walk chain, the warm-up run and the
// unblocked independence chain. `imh` enables refit/stage handling.
RunRecord sequential_run(const RunInputs& inputs, const PriorSet& priors, const RunConfig& cfg,
                         const LikelihoodFn& loglik, std::uint64_t master, long iterations,
                         long stage2_at, Proposal& proposal, ImhState* imh, ChainState st,
                         const char* label) {
    Recorder r(inputs.prototype.free_names(), iterations, inputs.prototype.dimension());
    Rng accept_rng(derive_seed(master, stream::kAccept));
    for (long c = 1; c <= iterations; ++c) {
        auto t0 = Clock::now();
        Rng prop_rng(derive_seed(master, stream::kProposal, static_cast<std::uint64_t>(c), 0));
        StepInfo info;
        st = pmmh_step(st, proposal, priors, loglik,
                       derive_seed(master, stream::kFilter, static_cast<std::uint64_t>(c)),
                       prop_rng, accept_rng, &info);
        r.rec.prior_rejects += info.prior_rejected;
        r.rec.filter_failures += info.filter_failed;
        if (imh) {
            if (imh->refit_due()) {
                Rng refit_rng(derive_seed(master, stream::kRefit, static_cast<std::uint64_t>(c)));
                imh->refit(refit_rng);
                r.rec.refit_points.push_back(c);
            }
            if (stage2_at >= 0 && imh->stage() == 1 && c >= stage2_at) imh->advance_stage();
        }
        r.push(st.theta.pack(), st.loglik, st.logprior, info.accepted, seconds_since(t0));
        if (cfg.progress_every > 0 && c % cfg.progress_every == 0)
            progress_line(cfg, label, c, iterations, st.accepts);
    }
    r.rec.final_state = std::move(st);
    return r.rec;
}

// Mean/covariance Gaussian built from warm-up draws; falls back to the prior
// spread when the empirical covariance cannot be factorized.
GaussianMixture fit_warmup_mixture(const RunRecord& warm, const PriorSet& priors,
                                   long* warnings) {
    const int d = static_cast<int>(warm.draws.cols());
    RunningCovariance acc(d);
    for (long i = 0; i < warm.draws.rows(); ++i) acc.add(warm.draws.row(i).transpose());
    Eigen::VectorXd mean = acc.mean();
    Eigen::MatrixXd cov = acc.covariance();

    auto comp = GaussianComponent::try_make(1.0, mean, cov);
    if (!comp) {
        Eigen::MatrixXd ridged = cov;
        double ridge = 1e-6 * cov.trace() / static_cast<double>(d);
        if (!(ridge > 0.0)) ridge = 1e-8;
        ridged.diagonal().array() += ridge;
        comp = GaussianComponent::try_make(1.0, mean, ridged);
    }
    if (!comp) {
        ++*warnings;
        comp = GaussianComponent::try_make(1.0, mean, priors.proposal_covariance());
    }
    if (!comp) throw ConfigError("could not build a warm-start proposal covariance");
    std::vector<GaussianComponent> comps;
    comps.push_back(std::move(*comp));
    return GaussianMixture(std::move(comps));
}

RunRecord block_run(const RunInputs& inputs, const PriorSet& priors, const RunConfig& cfg,
                    const LikelihoodFn& loglik, std::uint64_t master, long stage2_at,
                    ImhState& imh, ChainState st) {
    Recorder r(inputs.prototype.free_names(), cfg.iterations, inputs.prototype.dimension());
    Rng accept_rng(derive_seed(master, stream::kAccept));
    long done = 0;
    std::size_t sched = 0;
    while (done < cfg.iterations) {
        long per = cfg.block_schedule[std::min(sched, cfg.block_schedule.size() - 1)];
        ++sched;
        long want = std::min<long>(per * cfg.workers, cfg.iterations - done);
        std::vector<long> counts;
        long base = want / cfg.workers;
        long extra = want % cfg.workers;
        for (int w = 0; w < cfg.workers; ++w) {
            long k = base + (w < extra ? 1 : 0);
            if (k > 0) counts.push_back(k);
        }

        auto t0 = Clock::now();
        BlockOutcome out = block_imh_sweep(st, imh.proposal_mixture(), priors, loglik, master,
                                           done + 1, counts, accept_rng);
        double secs = seconds_since(t0) / static_cast<double>(want);
        for (long i = 0; i < want; ++i) {
            imh.record_iterate(out.iterates.row(i).transpose(), out.accepted[i]);
            r.push(out.iterates.row(i).transpose(), out.loglik[i], out.logprior[i],
                   out.accepted[i], secs);
        }
        r.rec.prior_rejects += out.prior_rejects;
        r.rec.filter_failures += out.filter_failures;
        st = std::move(out.state);
        done += want;

        Rng refit_rng(derive_seed(master, stream::kRefit, static_cast<std::uint64_t>(done)));
        imh.refit(refit_rng);
        r.rec.refit_points.push_back(done);
        if (stage2_at >= 0 && imh.stage() == 1 && done >= stage2_at) imh.advance_stage();
        if (cfg.progress_every > 0) progress_line(cfg, "block", done, cfg.iterations, st.accepts);
    }
    r.rec.final_state = std::move(st);
    return r.rec;
}

}  // namespace

RunRecord run_chain(const RunInputs& inputs, const RunConfig& config) {
    PriorSet priors = inputs.priors;
    priors.align(inputs.prototype);
    const int d = inputs.prototype.dimension();
    validate(inputs, config, d);

    const std::uint64_t master = config.seed;
    const LikelihoodFn loglik =
        config.exact_loglik
            ? *config.exact_loglik
            : make_averaged_loglik(
                  inputs.model, inputs.y, config.filter,
                  config.scheme == ParallelScheme::kAveragedLikelihood ? config.workers : 1);

    if (config.sampler == SamplerKind::kRwm) {
        RwmState rwm(resolve_sigma1(config, priors), config.rwm);
        RwmProposal proposal(rwm);
        ChainState st = make_initial_state(inputs, priors, loglik, master, config.init);
        RunRecord rec = sequential_run(inputs, priors, config, loglik, master, config.iterations,
                                       -1, proposal, nullptr, std::move(st), "iter");
        rec.sampler_warnings = rwm.warnings();
        return rec;
    }

    // Independence sampler: warm up with the random-walk chain, fit the fixed
    // term from its draws, start the main chain at their means.
    long warm_warnings = 0;
    GaussianMixture g1;
    std::optional<Eigen::VectorXd> start = config.init;
    {
        std::uint64_t warm_master = derive_seed(master, stream::kPrelim);
        if (config.prelim_iterations >= d + 2) {
            RwmState rwm(resolve_sigma1(config, priors), config.rwm);
            RwmProposal proposal(rwm);
            ChainState wst = make_initial_state(inputs, priors, loglik, warm_master, config.init);
            RunRecord warm =
                sequential_run(inputs, priors, config, loglik, warm_master,
                               config.prelim_iterations, -1, proposal, nullptr, std::move(wst),
                               "warmup");
            g1 = fit_warmup_mixture(warm, priors, &warm_warnings);
            Eigen::VectorXd mean = g1.components()[0].mean();
            if (priors.log_density(inputs.prototype.unpack(mean)) > kNegInf)
                start = mean;
            else
                start = warm.draws.row(warm.draws.rows() - 1).transpose();
        } else {
            // Too short to estimate a covariance; fall back to the prior spread
            // around the configured or drawn start.
            ++warm_warnings;
            ChainState wst = make_initial_state(inputs, priors, loglik, warm_master, config.init);
            std::vector<GaussianComponent> comps;
            comps.emplace_back(1.0, wst.theta.pack(), priors.proposal_covariance());
            g1 = GaussianMixture(std::move(comps));
            start = wst.theta.pack();
        }
    }

    ImhState imh(std::move(g1), config.imh);
    ChainState st = make_initial_state(inputs, priors, loglik, master, start);
    long stage2_at = resolve_stage2(config);

    RunRecord rec;
    if (config.scheme == ParallelScheme::kBlockImhSweep) {
        rec = block_run(inputs, priors, config, loglik, master, stage2_at, imh, std::move(st));
    } else {
        ImhProposal proposal(imh);
        rec = sequential_run(inputs, priors, config, loglik, master, config.iterations, stage2_at,
                             proposal, &imh, std::move(st), "iter");
    }
    rec.sampler_warnings = imh.warnings() + warm_warnings;
    rec.proposal = imh.proposal_mixture();
    return rec;
}

}  // namespace pmmh
