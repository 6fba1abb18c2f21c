#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pmmh/gaussian_mixture.hpp"
#include "pmmh/imh.hpp"
#include "pmmh/math.hpp"
#include "pmmh/model.hpp"
#include "pmmh/parameters.hpp"
#include "pmmh/particle_filter.hpp"
#include "pmmh/priors.hpp"
#include "pmmh/rng.hpp"
#include "pmmh/rwm.hpp"

namespace pmmh {

// Log-likelihood estimate at theta; `seed` covers every random draw inside
// the evaluation, making the value a pure function of (theta, seed).
using LikelihoodFn = std::function<double(const ParameterVector&, std::uint64_t)>;

LikelihoodFn make_filter_loglik(const ModelDefinition& model, std::vector<double> y,
                                FilterSettings settings);

struct ChainState {
    ParameterVector theta;
    double loglik = kNegInf;  // stored filter estimate from the last acceptance
    double logprior = kNegInf;
    long iteration = 0;
    long accepts = 0;
};

struct StepInfo {
    bool accepted = false;
    bool prior_rejected = false;
    bool filter_failed = false;
    double log_alpha = kNegInf;
    double loglik_prop = kNegInf;
    Eigen::VectorXd proposed;
};

// Proposal plugged into pmmh_step: random-walk or independence.
class Proposal {
  public:
    virtual ~Proposal() = default;
    virtual Eigen::VectorXd propose(const Eigen::VectorXd& cur, Rng& rng) = 0;
    // log q(cur) - log q(proposed); zero for symmetric kernels.
    virtual double log_adjust(const Eigen::VectorXd& cur, const Eigen::VectorXd& proposed) = 0;
    // Realized chain iterate (post accept/reject) for adaptation.
    virtual void observe(const Eigen::VectorXd& iterate, bool accepted) = 0;
};

class RwmProposal final : public Proposal {
  public:
    explicit RwmProposal(RwmState& state) : state_(&state) {}
    Eigen::VectorXd propose(const Eigen::VectorXd& cur, Rng& rng) override {
        return state_->propose(cur, rng);
    }
    double log_adjust(const Eigen::VectorXd&, const Eigen::VectorXd&) override { return 0.0; }
    void observe(const Eigen::VectorXd& iterate, bool) override { state_->update(iterate); }

  private:
    RwmState* state_;
};

class ImhProposal final : public Proposal {
  public:
    explicit ImhProposal(ImhState& state) : state_(&state) {}
    Eigen::VectorXd propose(const Eigen::VectorXd&, Rng& rng) override {
        return state_->propose(rng);
    }
    double log_adjust(const Eigen::VectorXd& cur, const Eigen::VectorXd& proposed) override {
        return state_->log_density(cur) - state_->log_density(proposed);
    }
    void observe(const Eigen::VectorXd& iterate, bool accepted) override {
        state_->record_iterate(iterate, accepted);
    }

  private:
    ImhState* state_;
};

// One MH transition: propose, prior gate (a zero-prior point is rejected
// without touching the filter), fresh-seed likelihood evaluation,
// accept/reject. The stored estimate in `chain` is never recomputed; a
// NumericalError from the likelihood counts as a rejection.
ChainState pmmh_step(const ChainState& chain, Proposal& proposal, const PriorSet& priors,
                     const LikelihoodFn& loglik, std::uint64_t filter_seed, Rng& proposal_rng,
                     Rng& accept_rng, StepInfo* info = nullptr);

enum class SamplerKind { kRwm, kImh };
enum class ParallelScheme { kAveragedLikelihood, kBlockImhSweep };

struct RunInputs {
    ModelDefinition model;
    ParameterVector prototype;
    PriorSet priors;
    std::vector<double> y;
};

struct RunConfig {
    SamplerKind sampler = SamplerKind::kRwm;
    ParallelScheme scheme = ParallelScheme::kAveragedLikelihood;
    long iterations = 10000;
    int workers = 1;
    FilterSettings filter;  // rng_seed ignored; all seeds derive from `seed`
    RwmOptions rwm;
    ImhOptions imh;
    // Per-worker candidate counts per refit interval (block scheme only).
    std::vector<long> block_schedule = {15, 25, 60, 125, 250, 375, 500, 625, 750, 940};
    long prelim_iterations = 2000;
    // Candidate index at which the independence sampler promotes its adaptive
    // term; 0 picks min(iterations/2, 5000), negative disables the switch.
    long stage2_start = 0;
    std::optional<Eigen::VectorXd> init;    // free-entry start; default prior draw
    std::optional<Eigen::MatrixXd> sigma1;  // random-walk fixed covariance
    std::uint64_t seed = 0;
    long progress_every = 0;  // stderr progress cadence; 0 = silent
    std::optional<LikelihoodFn> exact_loglik;  // replaces the filter (oracle mode)
};

struct RunRecord {
    std::vector<std::string> names;  // free parameters, column order of draws
    Eigen::MatrixXd draws;           // iterations x d
    std::vector<double> loglik;      // stored estimate after each iteration
    std::vector<double> logprior;
    std::vector<char> accepted;
    std::vector<double> seconds;      // wall clock per iteration
    std::vector<long> refit_points;   // iterations after which a refit ran
    long prior_rejects = 0;
    long filter_failures = 0;
    long sampler_warnings = 0;
    ChainState final_state;
    std::optional<GaussianMixture> proposal;  // final independence mixture
};

RunRecord run_chain(const RunInputs& inputs, const RunConfig& config);

}  // namespace pmmh
