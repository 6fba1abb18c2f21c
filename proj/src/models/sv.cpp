#include "pmmh/models/sv.hpp"

#include <cmath>

#include "pmmh/math.hpp"

namespace pmmh::models {

namespace {

struct SvParams {
    double mu, phi, sigma, rho;
};

SvParams read_params(const ParameterVector& th, bool leverage) {
    SvParams p{th.get("mu"), th.get("phi"), std::sqrt(th.get("sigma2")),
               leverage ? th.get("rho") : 0.0};
    return p;
}

// log of the two-component scale mixture at y given log-volatility x.
inline double mix_logdensity(double y, double x, double log_w1, double log_wc, double c,
                             bool mixture) {
    double base = -0.5 * x - 0.5 * kLog2Pi;
    double z2 = y * y * std::exp(-x);
    if (!mixture) return base - 0.5 * z2;
    return base + logaddexp(log_w1 - 0.5 * z2, log_wc - 0.5 * z2 / (c * c) - std::log(c));
}

} // namespace

ModelDefinition make_sv_model(const SvOptions& opts) {
    ModelDefinition m;
    const bool lev = opts.leverage;
    const bool same_step = lev && opts.timing == LeverageTiming::kSameStep;
    const bool mixture = opts.outlier_prob > 0.0;
    const double w = opts.outlier_prob;
    const double c = opts.outlier_scale;
    const double log_w1 = mixture ? std::log1p(-w) : 0.0;
    const double log_wc = mixture ? std::log(w) : kNegInf;

    m.name = "sv";
    m.state_dim = lev ? 2 : 1;
    m.moment_dim = 1;

    m.sample_initial = [opts, lev](const ParameterVector&, StateView out, Rng& rng) {
        std::normal_distribution<double> n(opts.x0_mean, opts.x0_sd);
        for (int k = 0; k < out.rows; ++k) {
            out.at(k, 0) = n(rng);
            if (lev) out.at(k, 1) = 0.0;
        }
    };

    m.sample_transition = [lev, same_step](const ParameterVector& th, const StateView& prev,
                                           StateView out, int, Rng& rng) {
        const SvParams p = read_params(th, lev);
        std::normal_distribution<double> n(0.0, 1.0);
        if (!lev) {
            for (int k = 0; k < prev.rows; ++k)
                out.at(k, 0) = p.mu + p.phi * (prev.at(k, 0) - p.mu) + p.sigma * n(rng);
        } else if (same_step) {
            for (int k = 0; k < prev.rows; ++k) {
                double eta = n(rng);
                out.at(k, 0) = p.mu + p.phi * (prev.at(k, 0) - p.mu) + p.sigma * eta;
                out.at(k, 1) = eta;
            }
        } else {
            const double tail = std::sqrt(1.0 - p.rho * p.rho);
            for (int k = 0; k < prev.rows; ++k) {
                double eta = p.rho * prev.at(k, 1) + tail * n(rng);
                out.at(k, 0) = p.mu + p.phi * (prev.at(k, 0) - p.mu) + p.sigma * eta;
                out.at(k, 1) = prev.at(k, 1); // refreshed at the next observation
            }
        }
    };

    if (!same_step) {
        m.obs_logdensity = [mixture, log_w1, log_wc, c](const ParameterVector&,
                                                        const StateView& st, int, double y,
                                                        std::span<double> out) {
            for (int k = 0; k < st.rows; ++k)
                out[static_cast<std::size_t>(k)] =
                    mix_logdensity(y, st.at(k, 0), log_w1, log_wc, c, mixture);
        };
    } else {
        // y | x, eta ~ mixture of N(K s rho eta, K^2 s^2 (1 - rho^2)), s = e^{x/2}.
        m.obs_logdensity = [mixture, log_w1, log_wc, c, lev](const ParameterVector& th,
                                                             const StateView& st, int, double y,
                                                             std::span<double> out) {
            const SvParams p = read_params(th, lev);
            const double v_scale = 1.0 - p.rho * p.rho;
            for (int k = 0; k < st.rows; ++k) {
                double s = std::exp(0.5 * st.at(k, 0));
                double eta = st.at(k, 1);
                auto comp = [&](double kk) {
                    double mean = kk * s * p.rho * eta;
                    double var = kk * kk * s * s * v_scale;
                    double z = y - mean;
                    return -0.5 * (kLog2Pi + std::log(var) + z * z / var);
                };
                double d1 = comp(1.0);
                out[static_cast<std::size_t>(k)] =
                    mixture ? logaddexp(log_w1 + d1, log_wc + comp(c)) : d1;
            }
        };
    }

    if (lev && !same_step) {
        // Draw K_t | (y_t, x_t), then recover the standardized shock carried
        // into the next transition.  Leaves the volatility coordinate alone.
        m.observe_update = [mixture, log_w1, log_wc, c](const ParameterVector&, StateView st,
                                                        int, double y, Rng& rng) {
            for (int k = 0; k < st.rows; ++k) {
                double x = st.at(k, 0);
                double kk = 1.0;
                if (mixture) {
                    double z2 = y * y * std::exp(-x);
                    double l1 = log_w1 - 0.5 * z2;
                    double lc = log_wc - 0.5 * z2 / (c * c) - std::log(c);
                    double pc = 1.0 / (1.0 + std::exp(l1 - lc));
                    if (uniform01(rng) < pc) kk = c;
                }
                st.at(k, 1) = y * std::exp(-0.5 * x) / kk;
            }
        };
    }

    m.point_estimate = [lev, same_step](const ParameterVector& th, const StateView& prev,
                                        StateView out, int) {
        const SvParams p = read_params(th, lev);
        for (int k = 0; k < prev.rows; ++k) {
            double drift = lev && !same_step ? p.sigma * p.rho * prev.at(k, 1) : 0.0;
            out.at(k, 0) = p.mu + p.phi * (prev.at(k, 0) - p.mu) + drift;
            if (lev) out.at(k, 1) = same_step ? 0.0 : prev.at(k, 1);
        }
    };

    if (!same_step) {
        // sup over x of each mixture component is (2 pi e y^2)^{-1/2},
        // independent of the component scale; +inf at y = 0, where no
        // finite bound exists.
        m.log_obs_bound = [](const ParameterVector&, int, double y) {
            return -0.5 * (kLog2Pi + 1.0) - std::log(std::abs(y));
        };
    }

    m.sample_observation = [mixture, w, c, lev, same_step](const ParameterVector& th,
                                                           std::span<double> state, int,
                                                           Rng& rng) {
        const SvParams p = read_params(th, lev);
        double kk = 1.0;
        if (mixture && uniform01(rng) < w) kk = c;
        double s = std::exp(0.5 * state[0]);
        if (same_step) {
            double nu = standard_normal(rng);
            return kk * s * (p.rho * state[1] + std::sqrt(1.0 - p.rho * p.rho) * nu);
        }
        double eps = standard_normal(rng);
        if (lev) state[1] = eps; // the true shock drives the next transition
        return kk * s * eps;
    };

    return m;
}

} // namespace pmmh::models
