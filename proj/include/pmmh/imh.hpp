#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "pmmh/gaussian_mixture.hpp"
#include "pmmh/rng.hpp"

namespace pmmh {

struct ImhOptions {
    // Chain iterations (counted from the start of the adaptive run) at which
    // the adaptive term is refit.
    std::vector<long> refit_schedule = {100, 200, 500, 1000, 2000, 3000, 4000, 5000, 6000, 7500};
    int max_components = 6;
    // Accepted draws per dimension needed to double the component budget.
    int growth_unit = 25;
    int em_max_iterations = 100;
};

// Four-term independence proposal: g1 is fixed from a warm-up run, g2 is g1
// with covariances x10, g3 is an adaptively refit mixture over the chain
// iterates and g4 is g3 with covariances x20. Term weights are (0.8, 0.2, 0,
// 0) until g3 first exists and (0.15, 0.05, 0.7, 0.1) afterwards.
class ImhState {
  public:
    explicit ImhState(GaussianMixture g1, ImhOptions options = {});

    int dimension() const { return g1_.dimension(); }
    int stage() const { return stage_; }
    long iterates_recorded() const { return static_cast<long>(buffer_.size()); }
    long accepted() const { return accepted_; }
    long warnings() const { return warnings_; }
    bool has_adaptive_term() const { return g3_.size() > 0; }

    std::array<double, 4> term_weights() const;
    const GaussianMixture& term(int k) const;  // k in 1..4
    int component_budget() const;              // growth schedule at current accept count

    Eigen::VectorXd propose(Rng& rng) const { return flat_.sample(rng); }
    double log_density(const Eigen::VectorXd& theta) const { return flat_.logpdf(theta); }

    // The current proposal flattened to one mixture; stable until the next
    // refit or stage change, so it can be frozen for a block sweep.
    const GaussianMixture& proposal_mixture() const { return flat_; }

    void record_iterate(const Eigen::VectorXd& theta, bool accepted);
    bool refit_due() const;
    void refit(Rng& rng);

    // Stage 2: the latest adaptive mixture becomes the fixed term g1 and g2
    // is rebuilt from it; adaptation then continues.
    void advance_stage();

  private:
    void rebuild_flat_();

    ImhOptions opt_;
    int stage_ = 1;
    long accepted_ = 0;
    long warnings_ = 0;
    std::size_t next_refit_ = 0;
    GaussianMixture g1_, g2_, g3_, g4_, flat_;
    std::vector<Eigen::VectorXd> buffer_;
};

}  // namespace pmmh
