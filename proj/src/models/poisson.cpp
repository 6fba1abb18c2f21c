#include "pmmh/models/poisson.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pmmh/errors.hpp"
#include "pmmh/math.hpp"

namespace pmmh::models {

namespace {

// log Poisson(y; exp(log_rate)), -inf when the rate would overflow.
inline double poisson_logpmf_lograte(double y, double log_rate, double lg_y1) {
    if (log_rate > 700.0) return kNegInf;
    return y * log_rate - std::exp(log_rate) - lg_y1;
}

double poisson_sample_lograte(double log_rate, Rng& rng) {
    if (log_rate > 25.0)
        throw NumericalError("Poisson rate overflow in simulation (log rate " +
                             std::to_string(log_rate) + ")");
    std::poisson_distribution<long> pois(std::exp(log_rate));
    return static_cast<double>(pois(rng));
}

} // namespace

ModelDefinition make_poisson_rw_model(const PoissonRwOptions& opts) {
    ModelDefinition m;
    m.name = "poisson_rw";
    m.state_dim = 1;
    m.moment_dim = 1;

    m.sample_initial = [opts](const ParameterVector&, StateView out, Rng& rng) {
        std::normal_distribution<double> n(opts.mu0_mean, opts.mu0_sd);
        for (int k = 0; k < out.rows; ++k) out.at(k, 0) = n(rng);
    };

    m.sample_transition = [](const ParameterVector& th, const StateView& prev, StateView out,
                             int, Rng& rng) {
        const double sigma = std::sqrt(th.get("sigma2"));
        std::normal_distribution<double> n(0.0, 1.0);
        for (int k = 0; k < prev.rows; ++k) out.at(k, 0) = prev.at(k, 0) + sigma * n(rng);
    };

    m.obs_logdensity = [](const ParameterVector&, const StateView& st, int, double y,
                          std::span<double> out) {
        const double lg_y1 = std::lgamma(y + 1.0);
        for (int k = 0; k < st.rows; ++k)
            out[static_cast<std::size_t>(k)] = poisson_logpmf_lograte(y, st.at(k, 0), lg_y1);
    };

    m.point_estimate = [](const ParameterVector&, const StateView& prev, StateView out, int) {
        for (int k = 0; k < prev.rows; ++k) out.at(k, 0) = prev.at(k, 0);
    };

    m.log_obs_bound = [](const ParameterVector&, int, double) { return 0.0; };

    m.sample_observation = [](const ParameterVector&, std::span<double> state, int, Rng& rng) {
        return poisson_sample_lograte(state[0], rng);
    };

    return m;
}

double fourier_seasonal(const ParameterVector& th, int seasonal_terms, double period, int t) {
    double s = 0.0;
    for (int j = 1; j <= seasonal_terms; ++j) {
        double w = 2.0 * std::numbers::pi * j / period;
        s += th.get("alpha" + std::to_string(j)) * std::cos(w * t) +
             th.get("gamma" + std::to_string(j)) * std::sin(w * t);
    }
    return s;
}

ModelDefinition make_poisson_structural_model(const PoissonStructuralOptions& opts) {
    ModelDefinition m;
    m.name = "poisson_structural";
    m.state_dim = opts.trend ? 2 : 1;
    m.moment_dim = m.state_dim;

    if (opts.n_covariates > 0 &&
        opts.covariates.size() % static_cast<std::size_t>(opts.n_covariates) != 0)
        throw ConfigError("covariate matrix is not rectangular");

    // x_t' beta + s_t, shared by every particle at step t.
    auto log_rate_base = [opts](const ParameterVector& th, int t) {
        double base = fourier_seasonal(th, opts.seasonal_terms, opts.period, t);
        for (int i = 1; i <= opts.n_covariates; ++i) {
            std::size_t pos = static_cast<std::size_t>(t - 1) * opts.n_covariates + (i - 1);
            if (pos >= opts.covariates.size())
                throw ConfigError("covariate matrix shorter than the series");
            base += th.get("beta" + std::to_string(i)) * opts.covariates[pos];
        }
        return base;
    };

    m.sample_initial = [trend = opts.trend](const ParameterVector& th, StateView out, Rng&) {
        const double mu0 = th.get("mu0");
        const double a0 = trend ? th.get("a0") : 0.0;
        for (int k = 0; k < out.rows; ++k) {
            out.at(k, 0) = mu0;
            if (trend) out.at(k, 1) = a0;
        }
    };

    m.sample_transition = [trend = opts.trend, t_int = opts.t_int](
                              const ParameterVector& th, const StateView& prev, StateView out,
                              int t, Rng& rng) {
        const double sigma = std::sqrt(th.get("sigma2"));
        const double tau = trend ? std::sqrt(th.get("tau2")) : 0.0;
        const double jump = (t_int > 0 && t == t_int) ? th.get("delta") : 0.0;
        std::normal_distribution<double> n(0.0, 1.0);
        for (int k = 0; k < prev.rows; ++k) {
            double slope = trend ? prev.at(k, 1) : 0.0;
            out.at(k, 0) = prev.at(k, 0) + slope + jump + sigma * n(rng);
            if (trend) out.at(k, 1) = prev.at(k, 1) + tau * n(rng);
        }
    };

    m.obs_logdensity = [log_rate_base](const ParameterVector& th, const StateView& st, int t,
                                       double y, std::span<double> out) {
        const double base = log_rate_base(th, t);
        const double lg_y1 = std::lgamma(y + 1.0);
        for (int k = 0; k < st.rows; ++k)
            out[static_cast<std::size_t>(k)] =
                poisson_logpmf_lograte(y, base + st.at(k, 0), lg_y1);
    };

    m.point_estimate = [trend = opts.trend, t_int = opts.t_int](
                           const ParameterVector& th, const StateView& prev, StateView out,
                           int t) {
        const double jump = (t_int > 0 && t == t_int) ? th.get("delta") : 0.0;
        for (int k = 0; k < prev.rows; ++k) {
            double slope = trend ? prev.at(k, 1) : 0.0;
            out.at(k, 0) = prev.at(k, 0) + slope + jump;
            if (trend) out.at(k, 1) = prev.at(k, 1);
        }
    };

    m.log_obs_bound = [](const ParameterVector&, int, double) { return 0.0; };

    m.sample_observation = [log_rate_base](const ParameterVector& th, std::span<double> state,
                                           int t, Rng& rng) {
        return poisson_sample_lograte(log_rate_base(th, t) + state[0], rng);
    };

    return m;
}

} // namespace pmmh::models
