#pragma once

#include <vector>

#include "pmmh/model.hpp"

namespace pmmh::models {

struct PoissonRwOptions {
    double mu0_mean = 0.4324;
    double mu0_sd = 9.0;
};

// Random-walk log-intensity count model:
//   y_t ~ Poisson(exp(mu_t)),  mu_t = mu_{t-1} + sigma eps_t.
// Parameter read from the block: sigma2.
ModelDefinition make_poisson_rw_model(const PoissonRwOptions& opts);

struct PoissonStructuralOptions {
    bool trend = true;   // include the slope a_t
    int t_int = 0;       // 1-based intervention time; 0 disables the jump
    int seasonal_terms = 0;
    double period = 12.0;
    int n_covariates = 0;
    std::vector<double> covariates; // T x n_covariates, row-major
};

// Structural count model with level/slope dynamics, an optional level shift,
// a Fourier seasonal and covariates:
//   y_t ~ Poisson(exp(x_t' beta + mu_t + s_t))
//   mu_t = mu_{t-1} + a_{t-1} + delta I(t = t_int) + sigma eps_t
//   a_t = a_{t-1} + tau xi_t
//   s_t = sum_j alpha_j cos(2 pi j t / h) + gamma_j sin(2 pi j t / h)
// Parameters read from the block: beta1..betaN, mu0, a0 (if trend), sigma2,
// tau2 (if trend), delta (if t_int > 0), alphaj/gammaj (j = 1..seasonal_terms).
// The initial state is the point (mu0, a0).
ModelDefinition make_poisson_structural_model(const PoissonStructuralOptions& opts);

// Seasonal value at 1-based time t for the given coefficients.
double fourier_seasonal(const ParameterVector& th, int seasonal_terms, double period, int t);

} // namespace pmmh::models
