#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "pmmh/errors.hpp"
#include "pmmh/math.hpp"
#include "pmmh/models/negbin.hpp"
#include "pmmh/models/poisson.hpp"
#include "pmmh/models/registry.hpp"
#include "pmmh/models/sv.hpp"
#include "pmmh/oracle/kalman.hpp"
#include "pmmh/particle_filter.hpp"
#include "support/stats.hpp"

using namespace pmmh;
using namespace pmmh::models;

namespace {

double sv_obs_logdensity_at(const ModelDefinition& m, const ParameterVector& th, double x,
                            double y, double carrier = 0.0) {
    std::vector<double> state{x, carrier};
    StateView sv{state.data(), 1, m.state_dim};
    std::vector<double> out(1);
    m.obs_logdensity(th, sv, 1, y, out);
    return out[0];
}

// Chi-square goodness of fit of integer draws against a pmf, pooling the tail
// so every expected count is >= 5.
double chi_square_gof(const std::vector<double>& draws,
                      const std::function<double(int)>& log_pmf) {
    std::map<int, int> counts;
    for (double d : draws) counts[static_cast<int>(d)]++;
    const double n = static_cast<double>(draws.size());
    int kmax = counts.rbegin()->first;

    double chi2 = 0.0, pooled_obs = 0.0, pooled_exp = 0.0;
    int cells = 0;
    for (int k = 0; k <= kmax + 1; ++k) {
        double e = n * std::exp(log_pmf(k));
        auto it = counts.find(k);
        double o = it == counts.end() ? 0.0 : it->second;
        pooled_obs += o;
        pooled_exp += e;
        if (pooled_exp >= 5.0) {
            chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
            pooled_obs = pooled_exp = 0.0;
            ++cells;
        }
    }
    // Remaining tail mass.
    double tail_e = n - 0.0;
    double sum_e = 0.0;
    for (int k = 0; k <= kmax + 1; ++k) sum_e += n * std::exp(log_pmf(k));
    tail_e = n - sum_e + pooled_exp;
    if (tail_e > 0.5) {
        chi2 += (pooled_obs - tail_e) * (pooled_obs - tail_e) / tail_e;
        ++cells;
    }
    return testsupport::chi_square_pvalue(chi2, std::max(cells - 1, 1));
}

} // namespace

TEST_CASE("sv observation density: plain and mixture forms") {
    auto plain = make_preset("sv");
    CHECK(sv_obs_logdensity_at(plain.model, plain.prototype, 0.0, 0.0) ==
          doctest::Approx(std::log(1.0 / std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-14));

    auto outlier = make_preset("sv_outlier");
    double x = 0.7, y = -1.3;
    double v = std::exp(x);
    double direct = std::log(0.97 * std::exp(normal_logpdf(y, 0.0, std::sqrt(v))) +
                             0.03 * std::exp(normal_logpdf(y, 0.0, 2.5 * std::sqrt(v))));
    CHECK(sv_obs_logdensity_at(outlier.model, outlier.prototype, x, y) ==
          doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("sv observation density integrates to one") {
    auto bundle = make_preset("sv_outlier");
    for (double x : {-1.0, 0.0, 1.5}) {
        auto f = [&](double y) {
            return sv_obs_logdensity_at(bundle.model, bundle.prototype, x, y);
        };
        double wide = 60.0 * std::exp(0.5 * x);
        double lse = oracle::log_trapezoid(f, -wide, wide, 40000);
        CHECK(std::exp(lse) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("sv transition collapses to the mean when phi and sigma vanish") {
    auto bundle = make_preset("sv");
    ParameterVector th = bundle.prototype;
    th.set("mu", 0.8);
    th.set("phi", 0.0);
    th.set("sigma2", 0.0);
    std::vector<double> prev{2.0, -3.0}, out(2);
    StateView pv{prev.data(), 2, 1}, ov{out.data(), 2, 1};
    Rng rng(1);
    bundle.model.sample_transition(th, pv, ov, 1, rng);
    CHECK(out[0] == doctest::Approx(0.8));
    CHECK(out[1] == doctest::Approx(0.8));
}

TEST_CASE("leverage code path with rho=0 reproduces the plain SV filter") {
    PresetOverrides ov;
    ov.x0_sd = 1.0;
    auto plain = make_preset("sv", ov);
    auto lever = make_preset("sv_leverage", ov);
    ParameterVector th_lev = lever.prototype;
    th_lev.set("rho", 0.0);
    th_lev.set("mu", plain.prototype.get("mu"));

    Rng rng(900);
    auto y = simulate_series(plain.model, plain.prototype, 60, rng);

    FilterSettings cfg;
    cfg.particles = 300;
    cfg.rng_seed = 5150;
    auto a = sir_filter(plain.model, plain.prototype, y, cfg);
    auto b = sir_filter(lever.model, th_lev, y, cfg);
    REQUIRE(a.loglik.per_step.size() == b.loglik.per_step.size());
    for (std::size_t t = 0; t < y.size(); ++t)
        CHECK(a.loglik.per_step[t] == b.loglik.per_step[t]);
}

TEST_CASE("leverage carrier holds the standardized shock after an observation") {
    auto bundle = make_preset("sv_leverage");
    std::vector<double> state{0.6, 99.0};
    StateView sv{state.data(), 1, 2};
    Rng rng(4);
    bundle.model.observe_update(bundle.prototype, sv, 1, 1.1, rng);
    CHECK(state[1] == doctest::Approx(1.1 * std::exp(-0.3)).epsilon(1e-14));
    CHECK(state[0] == 0.6);

    // With outliers the carrier is y/(K e^{x/2}) for a sampled K in {1, 2.5}.
    auto both = make_preset("sv_leverage_outlier");
    std::vector<double> st2{0.6, 0.0};
    StateView sv2{st2.data(), 1, 2};
    bundle = make_preset("sv_leverage_outlier");
    both.model.observe_update(both.prototype, sv2, 1, 1.1, rng);
    double e1 = 1.1 * std::exp(-0.3);
    bool matches = std::abs(st2[1] - e1) < 1e-12 || std::abs(st2[1] - e1 / 2.5) < 1e-12;
    CHECK(matches);
}

TEST_CASE("leverage pulls volatility opposite to the return sign") {
    PresetOverrides ov;
    ov.x0_sd = 0.5;
    auto bundle = make_preset("sv_leverage", ov);
    ParameterVector th = bundle.prototype;
    th.set("rho", -0.9);
    th.set("phi", 0.9);
    th.set("sigma2", 0.25);

    // Simulated series: negative returns should be followed by rising x.
    Rng rng(77);
    std::vector<double> states;
    auto y = simulate_series(bundle.model, th, 4000, rng, &states);
    double cov = 0.0;
    int n = 0;
    for (std::size_t t = 0; t + 1 < y.size(); ++t) {
        double dx = states[t + 1] - 0.9 * (states[t] - th.get("mu")) - th.get("mu");
        cov += y[t] / std::exp(0.5 * states[t]) * dx;
        ++n;
    }
    CHECK(cov / n < -0.3); // eps_t and the next innovation are negatively related
}

TEST_CASE("same-step leverage timing variant") {
    PresetOverrides ov;
    ov.leverage_same_step = true;
    auto bundle = make_preset("sv_leverage", ov);
    ParameterVector th = bundle.prototype;
    th.set("rho", -0.7);

    // Density: y | x, eta ~ N(s rho eta, s^2 (1 - rho^2)), s = e^{x/2}.
    double x = 0.4, eta = 1.2, y = -0.3;
    double s = std::exp(0.5 * x);
    double expect = normal_logpdf(y, s * -0.7 * eta, s * std::sqrt(1.0 - 0.49));
    CHECK(sv_obs_logdensity_at(bundle.model, th, x, y, eta) ==
          doctest::Approx(expect).epsilon(1e-12));

    // No finite observation bound exists in this variant.
    CHECK_FALSE(static_cast<bool>(bundle.model.log_obs_bound));

    // The transition writes the contemporaneous shock into the carrier.
    std::vector<double> prev{0.0, 0.0}, out(2);
    StateView pv{prev.data(), 1, 2}, ovw{out.data(), 1, 2};
    Rng rng(3);
    bundle.model.sample_transition(th, pv, ovw, 1, rng);
    double sigma = std::sqrt(th.get("sigma2"));
    double recovered = (out[0] - th.get("mu") - th.get("phi") * (0.0 - th.get("mu"))) / sigma;
    CHECK(out[1] == doctest::Approx(recovered).epsilon(1e-10));
}

TEST_CASE("sv observation bound dominates the density") {
    auto bundle = make_preset("sv_leverage_outlier");
    Rng rng(12);
    for (int i = 0; i < 20000; ++i) {
        double x = -6.0 + 12.0 * uniform01(rng);
        double y = -8.0 + 16.0 * uniform01(rng);
        double cap = bundle.model.log_obs_bound(bundle.prototype, 1, y);
        double eps = uniform01(rng) * 4.0 - 2.0;
        CHECK(sv_obs_logdensity_at(bundle.model, bundle.prototype, x, y, eps) <= cap + 1e-12);
    }
}

TEST_CASE("negbin pmf: closed forms and normalization") {
    // NB(1, p) is geometric.
    for (int k : {0, 1, 5, 9})
        CHECK(negbin_logpmf(k, 1.0, 0.3) ==
              doctest::Approx(std::log(0.3) + k * std::log(0.7)).epsilon(1e-13));
    CHECK(negbin_logpmf(4, 1.0, 0.3) == doctest::Approx(-2.6306725800808657).epsilon(1e-13));
    // Frozen reference value, r = 28, p = 2/3.
    CHECK(negbin_logpmf(10, 28.0, 2.0 / 3.0) ==
          doctest::Approx(-2.670484659004144).epsilon(1e-13));

    // nu = 25, alpha = beta = 1: observation pmf sums to 1.
    double p = 2.0 / 3.0;
    double sum = 0.0;
    for (int k = 0; k < 400; ++k) sum += std::exp(negbin_logpmf(k, 25.0, p));
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));

    CHECK(negbin_logpmf(-1, 2.0, 0.5) == kNegInf);
}

TEST_CASE("negbin sampler matches its pmf") {
    Rng rng(2025);
    std::vector<double> draws(100000);
    for (auto& d : draws) d = negbin_sample(6.5, 0.55, rng);
    double pv = chi_square_gof(draws, [](int k) { return negbin_logpmf(k, 6.5, 0.55); });
    CHECK(pv > 0.01);
}

TEST_CASE("negbin marginal observation distribution is NB(nu, beta/(beta+1))") {
    auto bundle = make_preset("negbin");
    const double nu = bundle.prototype.get("nu");
    const double beta = bundle.prototype.get("beta");

    Rng rng(440);
    std::vector<double> ys;
    for (int rep = 0; rep < 4000; ++rep) {
        auto y = simulate_series(bundle.model, bundle.prototype, 8, rng);
        // Use a couple of interior time points per series.
        ys.push_back(y[3]);
        ys.push_back(y[7]);
    }
    double pv = chi_square_gof(
        ys, [&](int k) { return negbin_logpmf(k, nu, beta / (beta + 1.0)); });
    CHECK(pv > 0.01);
}

TEST_CASE("negbin transition sampler matches its pmf") {
    auto bundle = make_preset("negbin");
    const double nu = bundle.prototype.get("nu");
    const double a = bundle.prototype.get("alpha");
    const double b = bundle.prototype.get("beta");

    std::vector<double> prev(100000, 3.0), out(100000);
    StateView pv{prev.data(), 100000, 1}, ov{out.data(), 100000, 1};
    Rng rng(11);
    bundle.model.sample_transition(bundle.prototype, pv, ov, 1, rng);
    double p = (a + b) / (2.0 * a + b);
    double pval = chi_square_gof(out, [&](int k) { return negbin_logpmf(k, nu + 3.0, p); });
    CHECK(pval > 0.01);
}

TEST_CASE("poisson_rw observation density and overflow guard") {
    auto bundle = make_preset("poisson_rw");
    std::vector<double> st{1.3};
    StateView sv{st.data(), 1, 1};
    std::vector<double> out(1);
    bundle.model.obs_logdensity(bundle.prototype, sv, 1, 4.0, out);
    double lam = std::exp(1.3);
    CHECK(out[0] == doctest::Approx(4.0 * 1.3 - lam - std::lgamma(5.0)).epsilon(1e-13));

    st[0] = 800.0; // rate would overflow
    bundle.model.obs_logdensity(bundle.prototype, sv, 1, 4.0, out);
    CHECK(out[0] == kNegInf);
}

TEST_CASE("structural model with all dynamics off is iid Poisson") {
    PresetOverrides ov;
    ov.trend = false;
    ov.t_int = 0;
    ov.seasonal_terms = 0;
    auto bundle = make_preset("poisson_structural", ov);
    ParameterVector th = bundle.prototype;
    th.set("mu0", std::log(3.0));
    th.set("sigma2", 0.0);

    std::vector<double> y{2, 4, 1, 3, 5, 0, 2, 3};
    double direct = 0.0;
    for (double v : y) direct += v * std::log(3.0) - 3.0 - std::lgamma(v + 1.0);

    FilterSettings cfg;
    cfg.particles = 50;
    cfg.rng_seed = 7;
    auto res = sir_filter(bundle.model, th, y, cfg);
    CHECK(res.loglik.total == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("intervention time is inert when delta is zero") {
    PresetOverrides ov;
    ov.t_int = 3;
    auto b1 = make_preset("poisson_structural", ov);
    ov.t_int = 7;
    auto b2 = make_preset("poisson_structural", ov);
    ParameterVector th1 = b1.prototype, th2 = b2.prototype;
    th1.set("delta", 0.0);
    th2.set("delta", 0.0);

    Rng rng(31);
    auto y = simulate_series(b1.model, th1, 10, rng);
    FilterSettings cfg;
    cfg.particles = 100;
    cfg.rng_seed = 99;
    auto r1 = sir_filter(b1.model, th1, y, cfg);
    auto r2 = sir_filter(b2.model, th2, y, cfg);
    CHECK(r1.loglik.total == r2.loglik.total);
}

TEST_CASE("intervention shifts the level by delta at exactly t_int") {
    PresetOverrides ov;
    ov.t_int = 2;
    auto bundle = make_preset("poisson_structural", ov);
    ParameterVector th = bundle.prototype;
    th.set("delta", -1.5);
    th.set("sigma2", 0.0);
    th.set("tau2", 0.0);
    th.set("mu0", 2.0);
    th.set("a0", 0.1);

    std::vector<double> prev{2.0, 0.1}, out(2);
    StateView pv{prev.data(), 1, 2}, ovw{out.data(), 1, 2};
    Rng rng(1);
    bundle.model.sample_transition(th, pv, ovw, 1, rng);
    CHECK(out[0] == doctest::Approx(2.1)); // no jump at t=1
    bundle.model.sample_transition(th, pv, ovw, 2, rng);
    CHECK(out[0] == doctest::Approx(2.1 - 1.5)); // jump applies at t_int
}

TEST_CASE("fourier seasonal has the stated period") {
    PresetOverrides ov;
    auto bundle = make_preset("poisson_structural", ov);
    ParameterVector th = bundle.prototype;
    th.set("alpha1", 0.3);
    th.set("gamma1", -0.2);
    for (int t = 1; t <= 24; ++t) {
        CHECK(fourier_seasonal(th, 1, 12.0, t) ==
              doctest::Approx(fourier_seasonal(th, 1, 12.0, t + 12)).epsilon(1e-12));
    }
    CHECK(fourier_seasonal(th, 1, 12.0, 3) ==
          doctest::Approx(0.3 * std::cos(std::numbers::pi / 2) -
                          0.2 * std::sin(std::numbers::pi / 2))
              .epsilon(1e-12));
}

TEST_CASE("covariates enter the log rate through beta") {
    PresetOverrides ov;
    ov.trend = false;
    ov.seasonal_terms = 0;
    ov.n_covariates = 1;
    ov.covariates = {0.5, 1.5};
    auto bundle = make_preset("poisson_structural", ov);
    CHECK(bundle.prototype.get("beta1") == 1.0);
    CHECK(bundle.prototype.dimension() == 2); // mu0, sigma2; beta1 fixed

    ParameterVector th = bundle.prototype;
    th.set("mu0", 1.0);
    std::vector<double> st{1.0};
    StateView sv{st.data(), 1, 1};
    std::vector<double> out(1);
    bundle.model.obs_logdensity(th, sv, 2, 3.0, out);
    double lr = 1.5 + 1.0; // beta1 * x_2 + mu
    CHECK(out[0] == doctest::Approx(3.0 * lr - std::exp(lr) - std::lgamma(4.0)).epsilon(1e-12));

    ov.estimate_beta = true;
    auto est = make_preset("poisson_structural", ov);
    CHECK(est.prototype.dimension() == 3);
}

TEST_CASE("preset registry resolves every name and rejects unknowns") {
    for (const auto& name : preset_names()) {
        auto b = make_preset(name);
        CHECK(b.model.sample_initial != nullptr);
        CHECK(b.prototype.dimension() >= 1);
        CHECK(std::isfinite(b.priors.log_density(b.prototype)));
    }
    CHECK_THROWS_AS(make_preset("nope"), ConfigError);

    auto lev = make_preset("sv_leverage");
    CHECK(lev.prototype.has("rho"));
    CHECK(lev.model.state_dim == 2);
    auto plain = make_preset("sv");
    CHECK_FALSE(plain.prototype.has("rho"));
    CHECK(plain.model.state_dim == 1);
    CHECK(make_preset("negbin").integer_data);
}

TEST_CASE("structural preset grows parameters with its options") {
    PresetOverrides ov;
    ov.trend = true;
    ov.t_int = 95;
    ov.seasonal_terms = 2;
    auto b = make_preset("poisson_structural", ov);
    for (const char* name : {"mu0", "a0", "sigma2", "tau2", "delta", "alpha1", "gamma1",
                             "alpha2", "gamma2"})
        CHECK(b.prototype.has(name));
    CHECK(b.prototype.dimension() == 9);

    PresetOverrides off;
    off.trend = false;
    off.t_int = 0;
    off.seasonal_terms = 0;
    auto tiny = make_preset("poisson_structural", off);
    CHECK(tiny.prototype.dimension() == 2); // mu0, sigma2
    CHECK(tiny.model.state_dim == 1);
}
