#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pmmh/parameters.hpp"
#include "pmmh/rng.hpp"

namespace pmmh {

// Row-major particle block: M rows of `dim` contiguous doubles.  The filter
// owns the storage; models only ever see views.
struct StateView {
    double* data = nullptr;
    int rows = 0;
    int dim = 0;

    std::span<double> row(int k) { return {data + static_cast<std::ptrdiff_t>(k) * dim, static_cast<std::size_t>(dim)}; }
    std::span<const double> row(int k) const { return {data + static_cast<std::ptrdiff_t>(k) * dim, static_cast<std::size_t>(dim)}; }
    double& at(int k, int j) { return data[static_cast<std::ptrdiff_t>(k) * dim + j]; }
    double at(int k, int j) const { return data[static_cast<std::ptrdiff_t>(k) * dim + j]; }
};

// State-space model in the form the particle filter consumes.  All hooks are
// batch operations over a particle block so per-step work like parameter
// transforms is hoisted once, not M times.  Time index t is 1-based; the
// observation at step t is y[t-1].
//
// The state may carry auxiliary coordinates (e.g. a return shock needed by the
// next transition).  `moment_dim` says how many leading coordinates are the
// model state proper, for filtered-moment reporting.
struct ModelDefinition {
    std::string name;
    int state_dim = 1;
    int moment_dim = 1;

    // Draw M initial states (time 0, before any observation).
    std::function<void(const ParameterVector&, StateView, Rng&)> sample_initial;

    // Propagate prev (time t-1) to out (time t).
    std::function<void(const ParameterVector&, const StateView&, StateView, int t, Rng&)>
        sample_transition;

    // log p(y_t | x_t) for each row of the block.
    std::function<void(const ParameterVector&, const StateView&, int t, double y,
                       std::span<double> out)>
        obs_logdensity;

    // Optional: refresh auxiliary coordinates after y_t is observed (may draw
    // from the conditional posterior of latent indicators).  Called once per
    // step, before resampling.
    std::function<void(const ParameterVector&, StateView, int t, double y, Rng&)>
        observe_update;

    // Optional (needed by the auxiliary filter): deterministic point estimate
    // of the time-t state given the time-(t-1) state, by default the
    // conditional mean of the transition.
    std::function<void(const ParameterVector&, const StateView&, StateView, int t)>
        point_estimate;

    // Optional: log of a pointwise bound phi_t >= sup_x p(y_t | x_t = x).
    std::function<double(const ParameterVector&, int t, double y)> log_obs_bound;

    // Optional: draw y_t given the time-t state; may also refresh auxiliary
    // coordinates in place (used by forward simulation).
    std::function<double(const ParameterVector&, std::span<double> state, int t, Rng&)>
        sample_observation;
};

// Forward-simulate T observations; returns y and, if states != nullptr, the
// model-state path (T x moment_dim, post-observation).
std::vector<double> simulate_series(const ModelDefinition& model,
                                    const ParameterVector& theta, int T, Rng& rng,
                                    std::vector<double>* states = nullptr);

} // namespace pmmh
