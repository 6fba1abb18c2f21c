#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pmmh/chain.hpp"
#include "pmmh/gaussian_mixture.hpp"

namespace pmmh {

// Draw set with the log terms the evidence estimators consume.  `lognum` is
// log p(y|θ) + log p(θ) per row: the stored chain estimates for posterior
// draws, fresh filter evaluations for proposal draws.
struct EvidenceSample {
    Eigen::MatrixXd draws;  // rows = points, free-parameter column order
    std::vector<double> lognum;
    std::vector<double> logq;
};

// Bridge estimator with t(θ) = (p(y|θ)p(θ)/U + q(θ))^{-1}:
//   Â  = mean over posterior draws of t·q,
//   Â₁ = mean over proposal draws of t·p(y|θ)p(θ),
// returning log(Â₁/Â).  All arithmetic stays on the log scale.
double bridge_evidence(std::span<const double> posterior_lognum,
                       std::span<const double> posterior_logq,
                       std::span<const double> fresh_lognum, std::span<const double> fresh_logq,
                       double log_U);
double bridge_evidence(const EvidenceSample& posterior, const EvidenceSample& fresh,
                       double log_U);

// log of the mean importance ratio p(y|θ)p(θ)/q(θ) over draws from q.
double importance_evidence(std::span<const double> fresh_lognum,
                           std::span<const double> fresh_logq);
double importance_evidence(const EvidenceSample& fresh);

// log Û = loglik(θ*) + logprior(θ*) − log q(θ*) at the posterior mean θ*,
// with the likelihood estimated afresh; falls back to the highest-posterior
// draw when the mean lands outside the prior support.
double default_log_U(const EvidenceSample& posterior, const GaussianMixture& q,
                     const PriorSet& priors, const ParameterVector& prototype,
                     const LikelihoodFn& loglik, std::uint64_t filter_seed);

struct EvidenceOptions {
    long fresh_draws = 0;         // 0 -> match the retained posterior sample
    double burn_fraction = 0.1;   // leading share of the chain to discard
    int u_particles_factor = 10;  // Û filter size relative to the chain's
    std::optional<double> log_U;  // supplied anchor skips default_log_U
};

struct EvidenceEstimate {
    double log_p_bs = kNegInf;
    double log_p_is = kNegInf;
    double log_U = kNegInf;
    long posterior_draws = 0;
    long fresh_draws = 0;
    long failed_evaluations = 0;  // fresh draws whose filter run failed
};

// Post-pass over a finished independence-sampler run: stored chain
// likelihoods feed Â, fresh draws from the frozen proposal are evaluated
// with the run's own likelihood configuration.
EvidenceEstimate estimate_evidence(const RunInputs& inputs, const RunConfig& config,
                                   const RunRecord& record, const EvidenceOptions& options = {});

}  // namespace pmmh
