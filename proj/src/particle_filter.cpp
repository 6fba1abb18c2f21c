#include "pmmh/particle_filter.hpp"

#include <cmath>
#include <cstring>

#include "pmmh/errors.hpp"
#include "pmmh/math.hpp"

namespace pmmh {

namespace {

void check_inputs(const ModelDefinition& model, std::span<const double> y,
                  const FilterSettings& settings) {
    if (settings.particles < 2) throw ConfigError("filter needs at least 2 particles");
    for (double v : y) {
        if (std::isnan(v)) throw ConfigError("observation series contains NaN");
    }
    if (!model.sample_initial || !model.sample_transition || !model.obs_logdensity)
        throw ConfigError("model '" + model.name + "' is missing a required hook");
}

// Positive density values are a numerical failure, zero density (-inf) is not.
void check_densities(std::span<const double> logw, int t, const char* where) {
    for (double v : logw) {
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
            throw NumericalError("non-finite observation density (" + std::string(where) +
                                     ") at step " + std::to_string(t),
                                 t);
    }
}

void gather_rows(const std::vector<double>& src, std::span<const int> idx, int dim,
                 std::vector<double>& dst) {
    const int m = static_cast<int>(idx.size());
    for (int k = 0; k < m; ++k) {
        const double* s = src.data() + static_cast<std::ptrdiff_t>(idx[k]) * dim;
        double* d = dst.data() + static_cast<std::ptrdiff_t>(k) * dim;
        for (int j = 0; j < dim; ++j) d[j] = s[j];
    }
}

void weighted_moments(const StateView& states, std::span<const double> masses,
                      int moment_dim, double* mean_out, double* sd_out) {
    for (int j = 0; j < moment_dim; ++j) {
        double m = 0.0;
        for (int k = 0; k < states.rows; ++k) m += masses[static_cast<std::size_t>(k)] * states.at(k, j);
        double v = 0.0;
        for (int k = 0; k < states.rows; ++k) {
            double d = states.at(k, j) - m;
            v += masses[static_cast<std::size_t>(k)] * d * d;
        }
        mean_out[j] = m;
        sd_out[j] = std::sqrt(std::max(v, 0.0));
    }
}

// Every step from `t_fail` on is unreachable: mark the estimate -inf and pad
// moments with NaN so the output shapes stay rectangular.
FilterResult degenerate_result(LogLikelihoodEstimate est, int t_fail, int T,
                               std::optional<FilteredMoments> moments) {
    for (int t = t_fail; t <= T; ++t) est.per_step[static_cast<std::size_t>(t - 1)] = kNegInf;
    est.total = kNegInf;
    est.degenerate = true;
    if (moments) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (int t = t_fail; t <= T; ++t) {
            for (int j = 0; j < moments->dim; ++j) {
                moments->mean[static_cast<std::size_t>(t - 1) * moments->dim + j] = nan;
                moments->sd[static_cast<std::size_t>(t - 1) * moments->dim + j] = nan;
            }
        }
    }
    return {std::move(est), std::move(moments)};
}

} // namespace

double normalize_masses(std::span<const double> log_weights, std::span<double> masses) {
    double hi = kNegInf;
    for (double w : log_weights) hi = std::max(hi, w);
    if (hi == kNegInf) return kNegInf;
    double sum = 0.0;
    for (std::size_t k = 0; k < log_weights.size(); ++k) {
        double e = std::exp(log_weights[k] - hi);
        masses[k] = e;
        sum += e;
    }
    double inv = 1.0 / sum;
    for (std::size_t k = 0; k < masses.size(); ++k) masses[k] *= inv;
    return hi + std::log(sum);
}

void resample_indices(std::span<const double> masses, ResamplingScheme scheme,
                      Rng& rng, std::span<int> out) {
    const int m = static_cast<int>(masses.size());
    static thread_local std::vector<double> cum;
    cum.resize(static_cast<std::size_t>(m));
    double acc = 0.0;
    int last_positive = 0;
    for (int i = 0; i < m; ++i) {
        if (masses[static_cast<std::size_t>(i)] > 0.0) last_positive = i;
        acc += masses[static_cast<std::size_t>(i)];
        cum[static_cast<std::size_t>(i)] = acc;
    }

    auto invert = [&](double u, int start_hint) {
        // First index with cum > u; zero-mass entries can never be selected.
        int i = start_hint;
        while (i < m && cum[static_cast<std::size_t>(i)] <= u) ++i;
        return std::min(i, last_positive);
    };

    const int n = static_cast<int>(out.size());
    if (scheme == ResamplingScheme::kStratified) {
        // u_k increases, so the inversion walks cum once.
        int hint = 0;
        for (int k = 0; k < n; ++k) {
            double u = (static_cast<double>(k) + uniform01(rng)) / static_cast<double>(n);
            hint = invert(u * acc, hint);
            out[static_cast<std::size_t>(k)] = hint;
        }
    } else {
        for (int k = 0; k < n; ++k) {
            double u = uniform01(rng) * acc;
            // Binary search over the cumulative masses.
            int lo = 0, hi = m - 1;
            while (lo < hi) {
                int mid = (lo + hi) / 2;
                if (cum[static_cast<std::size_t>(mid)] <= u)
                    lo = mid + 1;
                else
                    hi = mid;
            }
            out[static_cast<std::size_t>(k)] = std::min(lo, last_positive);
        }
    }
}

FilterResult sir_filter(const ModelDefinition& model, const ParameterVector& theta,
                        std::span<const double> y, const FilterSettings& settings) {
    check_inputs(model, y, settings);
    const int M = settings.particles;
    const int dim = model.state_dim;
    const int T = static_cast<int>(y.size());

    Rng rng(settings.rng_seed);
    std::vector<double> cur(static_cast<std::size_t>(M) * dim);
    std::vector<double> next(static_cast<std::size_t>(M) * dim);
    std::vector<double> logw(static_cast<std::size_t>(M));
    std::vector<double> masses(static_cast<std::size_t>(M));
    std::vector<int> idx(static_cast<std::size_t>(M));

    LogLikelihoodEstimate est;
    est.per_step.assign(static_cast<std::size_t>(T), 0.0);
    std::optional<FilteredMoments> moments;
    if (settings.want_moments) {
        moments.emplace();
        moments->dim = model.moment_dim;
        moments->mean.assign(static_cast<std::size_t>(T) * model.moment_dim, 0.0);
        moments->sd.assign(static_cast<std::size_t>(T) * model.moment_dim, 0.0);
    }

    StateView cur_v{cur.data(), M, dim};
    StateView next_v{next.data(), M, dim};
    model.sample_initial(theta, cur_v, rng);

    for (int t = 1; t <= T; ++t) {
        model.sample_transition(theta, cur_v, next_v, t, rng);
        model.obs_logdensity(theta, next_v, t, y[static_cast<std::size_t>(t - 1)], logw);
        check_densities(logw, t, "sir");

        double lse = normalize_masses(logw, masses);
        if (lse == kNegInf) return degenerate_result(std::move(est), t, T, std::move(moments));
        est.per_step[static_cast<std::size_t>(t - 1)] = lse - std::log(static_cast<double>(M));

        if (moments) {
            weighted_moments(next_v, masses, moments->dim,
                             moments->mean.data() + static_cast<std::ptrdiff_t>(t - 1) * moments->dim,
                             moments->sd.data() + static_cast<std::ptrdiff_t>(t - 1) * moments->dim);
        }
        if (model.observe_update)
            model.observe_update(theta, next_v, t, y[static_cast<std::size_t>(t - 1)], rng);

        resample_indices(masses, settings.resampling, rng, idx);
        gather_rows(next, idx, dim, cur);
    }

    est.total = 0.0;
    for (double v : est.per_step) est.total += v;
    return {std::move(est), std::move(moments)};
}

FilterResult apf_filter(const ModelDefinition& model, const ParameterVector& theta,
                        std::span<const double> y, const FilterSettings& settings) {
    check_inputs(model, y, settings);
    if (!model.point_estimate)
        throw ConfigError("auxiliary filter needs model.point_estimate");
    const double eps = settings.apf_epsilon;
    if (eps < 0.0 || eps > 1.0) throw ConfigError("apf_epsilon must lie in [0, 1]");
    if (eps > 0.0 && !model.log_obs_bound)
        throw ConfigError("defensive mixture needs model.log_obs_bound");

    const int M = settings.particles;
    const int dim = model.state_dim;
    const int T = static_cast<int>(y.size());
    const double log_m_count = std::log(static_cast<double>(M));

    Rng rng(settings.rng_seed);
    std::vector<double> cur(static_cast<std::size_t>(M) * dim);   // x_{t-1}
    std::vector<double> look(static_cast<std::size_t>(M) * dim);  // point estimates z_t
    std::vector<double> anc(static_cast<std::size_t>(M) * dim);   // resampled ancestors
    std::vector<double> next(static_cast<std::size_t>(M) * dim);  // x̃_t
    std::vector<double> log_m(static_cast<std::size_t>(M));
    std::vector<double> log_m_anc(static_cast<std::size_t>(M));
    std::vector<double> stage1(static_cast<std::size_t>(M));
    std::vector<double> logw(static_cast<std::size_t>(M));
    std::vector<double> masses(static_cast<std::size_t>(M));
    std::vector<double> log_pi(static_cast<std::size_t>(M), -log_m_count);
    std::vector<int> idx(static_cast<std::size_t>(M));

    LogLikelihoodEstimate est;
    est.per_step.assign(static_cast<std::size_t>(T), 0.0);
    std::optional<FilteredMoments> moments;
    if (settings.want_moments) {
        moments.emplace();
        moments->dim = model.moment_dim;
        moments->mean.assign(static_cast<std::size_t>(T) * model.moment_dim, 0.0);
        moments->sd.assign(static_cast<std::size_t>(T) * model.moment_dim, 0.0);
    }

    StateView cur_v{cur.data(), M, dim};
    StateView look_v{look.data(), M, dim};
    StateView anc_v{anc.data(), M, dim};
    StateView next_v{next.data(), M, dim};
    model.sample_initial(theta, cur_v, rng);

    const double log_eps = eps > 0.0 ? std::log(eps) : kNegInf;
    const double log_1meps = eps < 1.0 ? std::log1p(-eps) : kNegInf;

    for (int t = 1; t <= T; ++t) {
        const double yt = y[static_cast<std::size_t>(t - 1)];

        model.point_estimate(theta, cur_v, look_v, t);
        model.obs_logdensity(theta, look_v, t, yt, log_m);
        check_densities(log_m, t, "apf lookahead");
        if (eps > 0.0) {
            double log_phi = model.log_obs_bound(theta, t, yt);
            // The bound may diverge (e.g. y = 0 under a scale mixture); any
            // finite first-stage mass keeps the estimate unbiased, so cap it.
            log_phi = std::min(log_phi, 745.0);
            for (int k = 0; k < M; ++k)
                log_m[static_cast<std::size_t>(k)] =
                    logaddexp(log_eps + log_phi, log_1meps + log_m[static_cast<std::size_t>(k)]);
        }

        // First stage: select ancestors by m_k * pi_{t-1,k}.
        for (int k = 0; k < M; ++k)
            stage1[static_cast<std::size_t>(k)] = log_m[static_cast<std::size_t>(k)] + log_pi[static_cast<std::size_t>(k)];
        double lse1 = normalize_masses(stage1, masses);
        if (lse1 == kNegInf) return degenerate_result(std::move(est), t, T, std::move(moments));

        resample_indices(masses, settings.resampling, rng, idx);
        gather_rows(cur, idx, dim, anc);
        for (int k = 0; k < M; ++k)
            log_m_anc[static_cast<std::size_t>(k)] = log_m[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];

        // Second stage: propagate and correct by the actual density.
        model.sample_transition(theta, anc_v, next_v, t, rng);
        model.obs_logdensity(theta, next_v, t, yt, logw);
        check_densities(logw, t, "apf");
        for (int k = 0; k < M; ++k) logw[static_cast<std::size_t>(k)] -= log_m_anc[static_cast<std::size_t>(k)];

        double lse2 = normalize_masses(logw, masses);
        if (lse2 == kNegInf) return degenerate_result(std::move(est), t, T, std::move(moments));
        est.per_step[static_cast<std::size_t>(t - 1)] = lse1 + lse2 - log_m_count;

        if (moments) {
            weighted_moments(next_v, masses, moments->dim,
                             moments->mean.data() + static_cast<std::ptrdiff_t>(t - 1) * moments->dim,
                             moments->sd.data() + static_cast<std::ptrdiff_t>(t - 1) * moments->dim);
        }
        if (model.observe_update) model.observe_update(theta, next_v, t, yt, rng);

        // Carry the weighted population; the next first stage resamples it.
        std::swap(cur, next);
        cur_v.data = cur.data();
        next_v.data = next.data();
        for (int k = 0; k < M; ++k) log_pi[static_cast<std::size_t>(k)] = logw[static_cast<std::size_t>(k)] - lse2;
    }

    est.total = 0.0;
    for (double v : est.per_step) est.total += v;
    return {std::move(est), std::move(moments)};
}

FilterResult run_filter(const ModelDefinition& model, const ParameterVector& theta,
                        std::span<const double> y, const FilterSettings& settings) {
    return settings.kind == FilterKind::kApf ? apf_filter(model, theta, y, settings)
                                             : sir_filter(model, theta, y, settings);
}

} // namespace pmmh
