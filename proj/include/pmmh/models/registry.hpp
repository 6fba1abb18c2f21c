#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmmh/model.hpp"
#include "pmmh/parameters.hpp"
#include "pmmh/priors.hpp"

namespace pmmh::models {

// Structural knobs that must be known before the model closures are built.
// Anything left unset keeps the preset default.
struct PresetOverrides {
    std::optional<double> outlier_prob;
    std::optional<double> outlier_scale;
    std::optional<bool> leverage_same_step;
    std::optional<double> x0_mean, x0_sd;
    std::optional<double> mu0_mean, mu0_sd; // poisson_rw initial level
    std::optional<bool> trend;
    std::optional<int> t_int;
    std::optional<int> seasonal_terms;
    std::optional<double> period;
    std::optional<bool> estimate_beta;
    int n_covariates = 0;
    std::vector<double> covariates; // T x n_covariates
};

struct ModelBundle {
    ModelDefinition model;
    ParameterVector prototype; // preset parameter values (priors aligned to it)
    PriorSet priors;
    bool integer_data = false; // observations must be nonnegative integers
};

// Presets: sv, sv_outlier, sv_leverage, sv_leverage_outlier, negbin,
// poisson_rw, poisson_structural.  Throws ConfigError for unknown names.
ModelBundle make_preset(const std::string& name, const PresetOverrides& ov = {});

std::vector<std::string> preset_names();

} // namespace pmmh::models
