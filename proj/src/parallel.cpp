#include "pmmh/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>

#include "pmmh/errors.hpp"
#include "pmmh/math.hpp"

namespace pmmh {

FilterResult averaged_likelihood(const ModelDefinition& model, const ParameterVector& theta,
                                 std::span<const double> y, const FilterSettings& settings,
                                 std::span<const std::uint64_t> worker_seeds) {
    const int workers = static_cast<int>(worker_seeds.size());
    if (workers < 1) throw ConfigError("averaged likelihood needs at least one worker");
    std::vector<std::uint64_t> sorted(worker_seeds.begin(), worker_seeds.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("worker seeds must be distinct");

    if (workers == 1) {
        FilterSettings s = settings;
        s.rng_seed = worker_seeds[0];
        return run_filter(model, theta, y, s);
    }

    std::vector<std::future<FilterResult>> futures;
    futures.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        FilterSettings s = settings;
        s.rng_seed = worker_seeds[w];
        s.want_moments = false;
        futures.push_back(std::async(std::launch::async, [&model, &theta, y, s] {
            return run_filter(model, theta, y, s);
        }));
    }
    std::vector<FilterResult> results(workers);
    std::exception_ptr first_error;
    for (int w = 0; w < workers; ++w) {
        try {
            results[w] = futures[w].get();
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);

    const std::size_t steps = y.size();
    FilterResult out;
    out.loglik.per_step.resize(steps);
    std::vector<double> terms(workers);
    double total = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        for (int w = 0; w < workers; ++w) terms[w] = results[w].loglik.per_step[t];
        double avg = logsumexp(terms) - std::log(static_cast<double>(workers));
        out.loglik.per_step[t] = avg;
        total += avg;
    }
    out.loglik.total = std::isnan(total) ? kNegInf : total;
    out.loglik.degenerate = out.loglik.total == kNegInf;
    return out;
}

FilterResult averaged_likelihood(const ModelDefinition& model, const ParameterVector& theta,
                                 std::span<const double> y, const FilterSettings& settings,
                                 int workers, std::uint64_t base_seed) {
    if (workers < 1) throw ConfigError("averaged likelihood needs at least one worker");
    std::vector<std::uint64_t> seeds(workers);
    for (int w = 0; w < workers; ++w)
        seeds[w] = derive_seed(base_seed, stream::kWorker, static_cast<std::uint64_t>(w));
    return averaged_likelihood(model, theta, y, settings, seeds);
}

LikelihoodFn make_averaged_loglik(const ModelDefinition& model, std::vector<double> y,
                                  FilterSettings settings, int workers) {
    if (workers < 1) throw ConfigError("averaged likelihood needs at least one worker");
    settings.want_moments = false;
    return [model, y = std::move(y), settings, workers](const ParameterVector& theta,
                                                        std::uint64_t seed) {
        return averaged_likelihood(model, theta, y, settings, workers, seed).loglik.total;
    };
}

namespace {

struct Candidate {
    Eigen::VectorXd theta;
    double logq = 0.0;
    double logprior = kNegInf;
    double loglik = kNegInf;
    bool prior_rejected = false;
    bool filter_failed = false;
};

}  // namespace

BlockOutcome block_imh_sweep(const ChainState& chain, const GaussianMixture& proposal,
                             const PriorSet& priors, const LikelihoodFn& loglik,
                             std::uint64_t master_seed, long base_candidate,
                             std::span<const long> per_worker, Rng& accept_rng) {
    const int workers = static_cast<int>(per_worker.size());
    if (workers < 1) throw ConfigError("block sweep needs at least one worker");
    long n = 0;
    for (long k : per_worker) {
        if (k < 0) throw ConfigError("per-worker candidate counts must be nonnegative");
        n += k;
    }
    const int d = proposal.dimension();
    if (chain.theta.dimension() != d)
        throw ConfigError("proposal dimension does not match the parameter block");

    BlockOutcome out;
    out.state = chain;
    if (n == 0) {
        out.iterates.resize(0, d);
        return out;
    }

    std::vector<Candidate> cands(n);
    auto eval_worker = [&](int w, long offset) {
        Rng prop_rng(derive_seed(master_seed, stream::kProposal,
                                 static_cast<std::uint64_t>(base_candidate),
                                 static_cast<std::uint64_t>(w)));
        for (long k = 0; k < per_worker[w]; ++k) {
            Candidate& c = cands[offset + k];
            c.theta = proposal.sample(prop_rng);
            c.logq = proposal.logpdf(c.theta);
            ParameterVector tp = chain.theta.unpack(c.theta);
            c.logprior = priors.log_density(tp);
            if (c.logprior == kNegInf) {
                c.prior_rejected = true;
                continue;
            }
            std::uint64_t fseed = derive_seed(master_seed, stream::kFilter,
                                              static_cast<std::uint64_t>(base_candidate + offset + k));
            try {
                c.loglik = loglik(tp, fseed);
                if (std::isnan(c.loglik)) {
                    c.loglik = kNegInf;
                    c.filter_failed = true;
                }
            } catch (const NumericalError&) {
                c.filter_failed = true;
            }
        }
    };

    {
        std::vector<std::future<void>> futures(workers);
        long offset = 0;
        for (int w = 0; w < workers; ++w) {
            long at = offset;
            offset += per_worker[w];
            if (per_worker[w] == 0) continue;
            futures[w] = std::async(std::launch::async, eval_worker, w, at);
        }
        std::exception_ptr first_error;
        for (int w = 0; w < workers; ++w) {
            if (!futures[w].valid()) continue;
            try {
                futures[w].get();
            } catch (...) {
                if (!first_error) first_error = std::current_exception();
            }
        }
        if (first_error) std::rethrow_exception(first_error);
    }

    Eigen::VectorXd cur = chain.theta.pack();
    double cur_loglik = chain.loglik;
    double cur_logprior = chain.logprior;
    double cur_logq = proposal.logpdf(cur);

    out.iterates.resize(n, d);
    out.loglik.resize(n);
    out.logprior.resize(n);
    out.accepted.resize(n);
    long accepts = 0;
    for (long i = 0; i < n; ++i) {
        const Candidate& c = cands[i];
        double log_alpha = kNegInf;
        if (!c.prior_rejected && !c.filter_failed) {
            double num = c.loglik + c.logprior;
            double den = cur_loglik + cur_logprior;
            if (num == kNegInf)
                log_alpha = kNegInf;
            else if (den == kNegInf)
                log_alpha = 0.0;
            else
                log_alpha = (num - c.logq) - (den - cur_logq);
        }
        double u = uniform01(accept_rng);
        bool accepted = std::log(u) < log_alpha;
        if (accepted) {
            cur = c.theta;
            cur_loglik = c.loglik;
            cur_logprior = c.logprior;
            cur_logq = c.logq;
            ++accepts;
        }
        out.iterates.row(i) = cur.transpose();
        out.loglik[i] = cur_loglik;
        out.logprior[i] = cur_logprior;
        out.accepted[i] = accepted;
        out.prior_rejects += c.prior_rejected;
        out.filter_failures += c.filter_failed;
    }

    out.state.theta = chain.theta.unpack(cur);
    out.state.loglik = cur_loglik;
    out.state.logprior = cur_logprior;
    out.state.iteration = chain.iteration + n;
    out.state.accepts = chain.accepts + accepts;
    return out;
}

}  // namespace pmmh
