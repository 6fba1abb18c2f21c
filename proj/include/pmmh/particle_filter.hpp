#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pmmh/model.hpp"
#include "pmmh/parameters.hpp"
#include "pmmh/rng.hpp"

namespace pmmh {

enum class ResamplingScheme { kMultinomial, kStratified };
enum class FilterKind { kSir, kApf };

struct FilterSettings {
    int particles = 500;
    ResamplingScheme resampling = ResamplingScheme::kStratified;
    FilterKind kind = FilterKind::kSir;
    double apf_epsilon = 0.05; // defensive mixture weight; only read by the APF
    std::uint64_t rng_seed = 0;
    bool want_moments = false;
};

// Weighted particle population at one time step.  log_weights are the raw
// (unnormalized) log weights; masses are the normalized probabilities.
struct ParticleCloud {
    int size = 0;
    int state_dim = 0;
    std::vector<double> states; // size x state_dim, row-major
    std::vector<double> log_weights;
    std::vector<double> masses;

    StateView view() { return {states.data(), size, state_dim}; }
};

struct LogLikelihoodEstimate {
    double total = 0.0;
    std::vector<double> per_step; // log p̂(y_t | y_{1:t-1}), length T
    bool degenerate = false;      // some step had zero total weight
};

// Weighted filtered means/sds of the leading moment_dim state coordinates.
struct FilteredMoments {
    int dim = 0;
    std::vector<double> mean; // T x dim, row-major
    std::vector<double> sd;
};

struct FilterResult {
    LogLikelihoodEstimate loglik;
    std::optional<FilteredMoments> moments;
};

// Normalize masses in place from log weights; returns logsumexp(log_weights)
// (-inf means every particle has zero weight and masses are untouched).
double normalize_masses(std::span<const double> log_weights, std::span<double> masses);

// Ancestor indices drawn according to `masses`.  Multinomial uses M iid
// uniforms; stratified uses one uniform per stratum (u_k = (k+v_k)/M).
void resample_indices(std::span<const double> masses, ResamplingScheme scheme,
                      Rng& rng, std::span<int> out);

FilterResult sir_filter(const ModelDefinition& model, const ParameterVector& theta,
                        std::span<const double> y, const FilterSettings& settings);

// Auxiliary filter with a defensive first stage: first-stage masses mix the
// observation bound phi_t (weight epsilon) with the density at a point
// estimate (weight 1-epsilon).  epsilon = 0 is the plain auxiliary filter;
// epsilon = 1 reduces to bound-blind resampling and reproduces the plain
// SIR estimate step for step.
FilterResult apf_filter(const ModelDefinition& model, const ParameterVector& theta,
                        std::span<const double> y, const FilterSettings& settings);

// Dispatch on settings.kind.
FilterResult run_filter(const ModelDefinition& model, const ParameterVector& theta,
                        std::span<const double> y, const FilterSettings& settings);

} // namespace pmmh
