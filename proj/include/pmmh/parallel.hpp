#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pmmh/chain.hpp"
#include "pmmh/gaussian_mixture.hpp"
#include "pmmh/model.hpp"
#include "pmmh/parameters.hpp"
#include "pmmh/particle_filter.hpp"
#include "pmmh/priors.hpp"
#include "pmmh/rng.hpp"

namespace pmmh {

// J workers each run an independent filter and the per-step likelihood terms
// are averaged on the natural scale (log-sum-exp minus log J). Averaging the
// log totals instead would bias the combined estimate, so only step terms are
// ever combined. Filtered moments pass through only when J = 1. Any worker
// failure fails the whole evaluation.
FilterResult averaged_likelihood(const ModelDefinition& model, const ParameterVector& theta,
                                 std::span<const double> y, const FilterSettings& settings,
                                 std::span<const std::uint64_t> worker_seeds);

// Derives distinct worker seeds from base_seed.
FilterResult averaged_likelihood(const ModelDefinition& model, const ParameterVector& theta,
                                 std::span<const double> y, const FilterSettings& settings,
                                 int workers, std::uint64_t base_seed);

LikelihoodFn make_averaged_loglik(const ModelDefinition& model, std::vector<double> y,
                                  FilterSettings settings, int workers);

// Outcome of one proposal block: one row per candidate, evaluation order.
struct BlockOutcome {
    ChainState state;
    Eigen::MatrixXd iterates;
    std::vector<double> loglik;
    std::vector<double> logprior;
    std::vector<char> accepted;
    long prior_rejects = 0;
    long filter_failures = 0;
};

// Workers evaluate candidates drawn from the proposal frozen at block start;
// a single sequential pass then applies the independence accept rule over all
// candidates in worker-major order, consuming exactly one uniform per
// candidate from accept_rng. Candidate (w, k) draws its proposal from stream
// (base_candidate, w) and its filter seed from candidate index
// base_candidate + offset(w, k), so results do not depend on scheduling.
BlockOutcome block_imh_sweep(const ChainState& chain, const GaussianMixture& proposal,
                             const PriorSet& priors, const LikelihoodFn& loglik,
                             std::uint64_t master_seed, long base_candidate,
                             std::span<const long> per_worker, Rng& accept_rng);

}  // namespace pmmh
