#include "pmmh/models/negbin.hpp"

#include <cmath>

#include "pmmh/math.hpp"

namespace pmmh::models {

double negbin_logpmf(double k, double r, double p) {
    if (k < 0.0 || r <= 0.0) return kNegInf;
    return std::lgamma(k + r) - std::lgamma(r) - std::lgamma(k + 1.0) +
           r * std::log(p) + k * std::log1p(-p);
}

double negbin_sample(double r, double p, Rng& rng) {
    std::gamma_distribution<double> g(r, (1.0 - p) / p);
    double lambda = g(rng);
    std::poisson_distribution<long> pois(lambda);
    return static_cast<double>(pois(rng));
}

ModelDefinition make_negbin_model() {
    ModelDefinition m;
    m.name = "negbin";
    m.state_dim = 1;
    m.moment_dim = 1;

    m.sample_initial = [](const ParameterVector& th, StateView out, Rng& rng) {
        const double nu = th.get("nu"), a = th.get("alpha"), b = th.get("beta");
        const double p0 = b / (a + b);
        for (int k = 0; k < out.rows; ++k) out.at(k, 0) = negbin_sample(nu, p0, rng);
    };

    m.sample_transition = [](const ParameterVector& th, const StateView& prev, StateView out,
                             int, Rng& rng) {
        const double nu = th.get("nu"), a = th.get("alpha"), b = th.get("beta");
        const double p = (a + b) / (2.0 * a + b);
        for (int k = 0; k < prev.rows; ++k)
            out.at(k, 0) = negbin_sample(nu + prev.at(k, 0), p, rng);
    };

    m.obs_logdensity = [](const ParameterVector& th, const StateView& st, int, double y,
                          std::span<double> out) {
        const double nu = th.get("nu"), a = th.get("alpha"), b = th.get("beta");
        const double p = (a + b) / (a + b + 1.0);
        const double log_p = std::log(p), log_q = std::log1p(-p);
        const double lg_y1 = std::lgamma(y + 1.0);
        for (int k = 0; k < st.rows; ++k) {
            double r = nu + st.at(k, 0);
            out[static_cast<std::size_t>(k)] =
                std::lgamma(y + r) - std::lgamma(r) - lg_y1 + r * log_p + y * log_q;
        }
    };

    // Conditional mean of the transition: (nu + z) (1-p)/p with the
    // transition's p, which reduces to (nu + z) a/(a+b).
    m.point_estimate = [](const ParameterVector& th, const StateView& prev, StateView out,
                          int) {
        const double nu = th.get("nu"), a = th.get("alpha"), b = th.get("beta");
        const double f = a / (a + b);
        for (int k = 0; k < prev.rows; ++k) out.at(k, 0) = (nu + prev.at(k, 0)) * f;
    };

    // A pmf never exceeds 1.
    m.log_obs_bound = [](const ParameterVector&, int, double) { return 0.0; };

    m.sample_observation = [](const ParameterVector& th, std::span<double> state, int,
                              Rng& rng) {
        const double nu = th.get("nu"), a = th.get("alpha"), b = th.get("beta");
        return negbin_sample(nu + state[0], (a + b) / (a + b + 1.0), rng);
    };

    return m;
}

} // namespace pmmh::models
