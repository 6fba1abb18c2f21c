#pragma once

#include "pmmh/model.hpp"

namespace pmmh::models {

// When the observation shock feeds the volatility innovation.
enum class LeverageTiming {
    kNextStep, // eps_t -> eta_{t+1} (default)
    kSameStep, // eps_t correlates with the contemporaneous eta_t
};

struct SvOptions {
    double outlier_prob = 0.0; // Pr(K = outlier_scale); 0 disables the mixture
    double outlier_scale = 2.5;
    bool leverage = false;
    LeverageTiming timing = LeverageTiming::kNextStep;
    double x0_mean = 0.0;
    double x0_sd = 10.0;
};

// Stochastic volatility with optional scale outliers and leverage.
//   y_t = K_t exp(x_t/2) eps_t,  x_t = mu + phi (x_{t-1} - mu) + sigma_eta eta_t
// Parameters read from the block: mu, phi, sigma2 (= sigma_eta^2), and rho
// when leverage is on.  Leverage augments the particle state with the realized
// standardized observation shock; since K_t makes eps_t ambiguous given y_t,
// K_t is drawn from its conditional posterior at observation time.
ModelDefinition make_sv_model(const SvOptions& opts);

} // namespace pmmh::models
