#include "pmmh/evidence.hpp"

#include <algorithm>
#include <cmath>

#include "pmmh/errors.hpp"
#include "pmmh/parallel.hpp"

namespace pmmh {

namespace {

// log t(θ) = -log(exp(lognum - log U) + exp(logq))
double log_t(double lognum, double logq, double log_U) {
    return -logaddexp(lognum - log_U, logq);
}

double log_mean(const std::vector<double>& terms) {
    return logsumexp(terms) - std::log(static_cast<double>(terms.size()));
}

}  // namespace

double bridge_evidence(std::span<const double> posterior_lognum,
                       std::span<const double> posterior_logq,
                       std::span<const double> fresh_lognum, std::span<const double> fresh_logq,
                       double log_U) {
    if (posterior_lognum.empty() || fresh_lognum.empty())
        throw ConfigError("bridge sampling needs draws from both the posterior and the proposal");
    if (posterior_lognum.size() != posterior_logq.size() ||
        fresh_lognum.size() != fresh_logq.size())
        throw ConfigError("bridge sampling inputs have mismatched lengths");
    if (!std::isfinite(log_U)) throw ConfigError("bridge sampling needs a finite log U");

    std::vector<double> a_terms(posterior_lognum.size());
    for (std::size_t j = 0; j < a_terms.size(); ++j)
        a_terms[j] = posterior_logq[j] + log_t(posterior_lognum[j], posterior_logq[j], log_U);

    std::vector<double> a1_terms(fresh_lognum.size());
    for (std::size_t k = 0; k < a1_terms.size(); ++k)
        a1_terms[k] = fresh_lognum[k] + log_t(fresh_lognum[k], fresh_logq[k], log_U);

    double log_a = log_mean(a_terms);
    double log_a1 = log_mean(a1_terms);
    if (log_a == kNegInf || log_a1 == kNegInf)
        throw NumericalError(
            "bridge sampling terms all vanished; choose U closer to the marginal likelihood");
    return log_a1 - log_a;
}

double bridge_evidence(const EvidenceSample& posterior, const EvidenceSample& fresh,
                       double log_U) {
    return bridge_evidence(posterior.lognum, posterior.logq, fresh.lognum, fresh.logq, log_U);
}

double importance_evidence(std::span<const double> fresh_lognum,
                           std::span<const double> fresh_logq) {
    if (fresh_lognum.empty()) throw ConfigError("importance sampling needs proposal draws");
    if (fresh_lognum.size() != fresh_logq.size())
        throw ConfigError("importance sampling inputs have mismatched lengths");
    std::vector<double> terms(fresh_lognum.size());
    for (std::size_t k = 0; k < terms.size(); ++k) terms[k] = fresh_lognum[k] - fresh_logq[k];
    return log_mean(terms);
}

double importance_evidence(const EvidenceSample& fresh) {
    return importance_evidence(fresh.lognum, fresh.logq);
}

double default_log_U(const EvidenceSample& posterior, const GaussianMixture& q,
                     const PriorSet& priors, const ParameterVector& prototype,
                     const LikelihoodFn& loglik, std::uint64_t filter_seed) {
    if (posterior.draws.rows() == 0) throw ConfigError("U anchor needs posterior draws");
    Eigen::VectorXd star = posterior.draws.colwise().mean().transpose();
    ParameterVector theta = prototype.unpack(star);
    double lp = priors.log_density(theta);
    if (lp == kNegInf) {
        // mean outside the support: anchor on the best retained draw instead
        auto best = std::max_element(posterior.lognum.begin(), posterior.lognum.end());
        long row = best - posterior.lognum.begin();
        star = posterior.draws.row(row).transpose();
        theta = prototype.unpack(star);
        lp = priors.log_density(theta);
        if (lp == kNegInf)
            throw NumericalError("no retained posterior draw lies inside the prior support");
    }
    double ll = loglik(theta, filter_seed);
    if (std::isnan(ll)) throw NumericalError("likelihood at the U anchor point is NaN");
    return ll + lp - q.logpdf(star);
}

EvidenceEstimate estimate_evidence(const RunInputs& inputs, const RunConfig& config,
                                   const RunRecord& record, const EvidenceOptions& options) {
    if (!record.proposal)
        throw ConfigError("evidence estimation needs the frozen independence proposal mixture");
    const GaussianMixture& q = *record.proposal;

    long n = record.draws.rows();
    if (n == 0) throw ConfigError("evidence estimation needs a nonempty run");
    if (!(options.burn_fraction >= 0.0 && options.burn_fraction < 1.0))
        throw ConfigError("burn fraction must lie in [0, 1)");
    long burn = static_cast<long>(std::floor(options.burn_fraction * static_cast<double>(n)));
    long kept = n - burn;

    ParameterVector proto = inputs.prototype;
    PriorSet priors = inputs.priors;
    priors.align(proto);

    EvidenceSample posterior;
    posterior.draws = record.draws.bottomRows(kept);
    posterior.lognum.resize(kept);
    posterior.logq.resize(kept);
    for (long j = 0; j < kept; ++j) {
        posterior.lognum[j] = record.loglik[burn + j] + record.logprior[burn + j];
        posterior.logq[j] = q.logpdf(posterior.draws.row(j).transpose());
    }

    int filter_workers =
        config.scheme == ParallelScheme::kAveragedLikelihood ? config.workers : 1;
    LikelihoodFn lik =
        config.exact_loglik
            ? *config.exact_loglik
            : make_averaged_loglik(inputs.model, inputs.y, config.filter, filter_workers);

    EvidenceEstimate est;
    long K = options.fresh_draws > 0 ? options.fresh_draws : kept;
    EvidenceSample fresh;
    fresh.draws.resize(K, record.draws.cols());
    fresh.lognum.resize(K);
    fresh.logq.resize(K);
    Rng draw_rng(derive_seed(config.seed, stream::kEvidenceDraw));
    for (long k = 0; k < K; ++k) {
        Eigen::VectorXd v = q.sample(draw_rng);
        fresh.draws.row(k) = v.transpose();
        fresh.logq[k] = q.logpdf(v);
        ParameterVector th = proto.unpack(v);
        double lp = priors.log_density(th);
        double ll = kNegInf;
        if (lp > kNegInf) {
            // fresh index 0 of the filter stream is reserved for the U anchor
            try {
                ll = lik(th, derive_seed(config.seed, stream::kEvidenceFilter,
                                         static_cast<std::uint64_t>(k) + 1));
            } catch (const NumericalError&) {
                ++est.failed_evaluations;
            }
            if (std::isnan(ll)) {
                ll = kNegInf;
                ++est.failed_evaluations;
            }
        }
        fresh.lognum[k] = ll + lp;
    }

    double log_U;
    if (options.log_U) {
        log_U = *options.log_U;
    } else {
        FilterSettings anchor = config.filter;
        anchor.particles = config.filter.particles * std::max(1, options.u_particles_factor);
        LikelihoodFn anchor_lik =
            config.exact_loglik
                ? *config.exact_loglik
                : make_averaged_loglik(inputs.model, inputs.y, anchor, filter_workers);
        log_U = default_log_U(posterior, q, priors, proto, anchor_lik,
                              derive_seed(config.seed, stream::kEvidenceFilter, 0));
    }

    est.log_p_bs = bridge_evidence(posterior, fresh, log_U);
    est.log_p_is = importance_evidence(fresh);
    est.log_U = log_U;
    est.posterior_draws = kept;
    est.fresh_draws = K;
    return est;
}

}  // namespace pmmh
