#pragma once

#include "pmmh/model.hpp"

namespace pmmh::models {

// Negative-binomial count model (Poisson-gamma chain with the mixing variable
// integrated out):
//   y_t | z_t ~ NB(nu + z_t, (a+b)/(a+b+1))
//   z_t | z_{t-1} ~ NB(nu + z_{t-1}, (a+b)/(2a+b)),  z_0 ~ NB(nu, b/(a+b))
// NB(r, p) has mean r(1-p)/p.  Parameters read from the block: nu, alpha, beta.
ModelDefinition make_negbin_model();

// log pmf of NB(r, p) at integer k >= 0 (r may be any positive real).
double negbin_logpmf(double k, double r, double p);

// Gamma-Poisson draw from NB(r, p).
double negbin_sample(double r, double p, Rng& rng);

} // namespace pmmh::models
