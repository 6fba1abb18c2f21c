#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pmmh/errors.hpp"
#include "pmmh/gaussian_mixture.hpp"
#include "pmmh/math.hpp"
#include "pmmh/rng.hpp"
#include "support/stats.hpp"

using namespace pmmh;
using testsupport::ks_one_sample;
using testsupport::var_of;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }
Eigen::MatrixXd mat1(double a) { return Eigen::MatrixXd::Constant(1, 1, a); }

}  // namespace

TEST_CASE("component density matches the univariate normal") {
    GaussianComponent c(1.0, vec1(0.7), mat1(2.25));
    for (double x : {-3.0, 0.0, 0.7, 5.1}) {
        CHECK(c.logpdf(vec1(x)) == doctest::Approx(normal_logpdf(x, 0.7, 1.5)).epsilon(1e-13));
    }
}

TEST_CASE("bivariate component density matches a reference value") {
    GaussianComponent c(1.0, vec2(1.0, -2.0), mat2(2.0, 0.5, 0.5, 1.0));
    CHECK(c.logpdf(vec2(0.3, -1.2)) == doctest::Approx(-2.783399246091342).epsilon(1e-12));
}

TEST_CASE("component construction rejects bad inputs") {
    CHECK_FALSE(GaussianComponent::try_make(1.0, vec2(0, 0), mat2(1, 2, 2, 1)).has_value());
    CHECK_FALSE(GaussianComponent::try_make(1.0, vec2(0, 0), mat2(0, 0, 0, 0)).has_value());
    CHECK_FALSE(GaussianComponent::try_make(0.0, vec1(0), mat1(1)).has_value());
    CHECK_FALSE(GaussianComponent::try_make(1.0, vec1(0), mat2(1, 0, 0, 1)).has_value());
    CHECK_THROWS_AS(GaussianComponent(1.0, vec2(0, 0), mat2(1, 2, 2, 1)), ConfigError);
}

TEST_CASE("component sampling reproduces mean and covariance") {
    GaussianComponent c(1.0, vec2(1.0, -2.0), mat2(2.0, 0.5, 0.5, 1.0));
    Rng rng(derive_seed(11, stream::kRefit));
    const int n = 200000;
    RunningCovariance acc(2);
    for (int i = 0; i < n; ++i) acc.add(c.sample(rng));
    CHECK(std::abs(acc.mean()[0] - 1.0) < 3.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(acc.mean()[1] + 2.0) < 3.0 * std::sqrt(1.0 / n));
    Eigen::MatrixXd cov = acc.covariance();
    CHECK(cov(0, 0) == doctest::Approx(2.0).epsilon(0.03));
    CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(0.03));
    CHECK(cov(0, 1) == doctest::Approx(0.5).epsilon(0.08));
}

TEST_CASE("mixture density evaluates the weighted sum") {
    std::vector<GaussianComponent> comps;
    comps.emplace_back(2.0, vec1(0.0), mat1(1.0));
    comps.emplace_back(2.0, vec1(0.0), mat1(100.0));
    GaussianMixture mix(std::move(comps));
    CHECK(mix.components()[0].weight() == doctest::Approx(0.5));
    CHECK(mix.logpdf(vec1(0.0)) == doctest::Approx(-1.516775533960293).epsilon(1e-12));

    std::vector<GaussianComponent> three;
    three.emplace_back(0.2, vec1(-1.0), mat1(0.25));
    three.emplace_back(0.3, vec1(0.0), mat1(1.0));
    three.emplace_back(0.5, vec1(2.0), mat1(9.0));
    GaussianMixture mix3(std::move(three));
    CHECK(mix3.logpdf(vec1(0.7)) == doctest::Approx(-1.8662620922905933).epsilon(1e-12));
}

TEST_CASE("mixture construction validates components") {
    CHECK_THROWS_AS(GaussianMixture(std::vector<GaussianComponent>{}), ConfigError);
    std::vector<GaussianComponent> bad;
    bad.emplace_back(1.0, vec1(0.0), mat1(1.0));
    bad.emplace_back(1.0, vec2(0.0, 0.0), mat2(1, 0, 0, 1));
    CHECK_THROWS_AS(GaussianMixture(std::move(bad)), ConfigError);
    GaussianMixture empty;
    CHECK(empty.size() == 0);
    CHECK_THROWS_AS(empty.logpdf(vec1(0.0)), ConfigError);
}

TEST_CASE("scaled covariances multiply spread but keep means and weights") {
    std::vector<GaussianComponent> comps;
    comps.emplace_back(0.3, vec1(-2.0), mat1(0.5));
    comps.emplace_back(0.7, vec1(3.0), mat1(2.0));
    GaussianMixture mix(std::move(comps));
    GaussianMixture wide = mix.scaled_covariances(10.0);
    for (int k = 0; k < 2; ++k) {
        CHECK(wide.components()[k].weight() == doctest::Approx(mix.components()[k].weight()));
        CHECK(wide.components()[k].mean()[0] == mix.components()[k].mean()[0]);
        CHECK(wide.components()[k].covariance()(0, 0) ==
              doctest::Approx(10.0 * mix.components()[k].covariance()(0, 0)));
    }

    Rng rng(derive_seed(12, stream::kRefit));
    std::vector<double> base, scaled;
    for (int i = 0; i < 100000; ++i) {
        base.push_back(mix.sample(rng)[0]);
        scaled.push_back(wide.sample(rng)[0]);
    }
    // mixture variance = sum w (var + mean^2) - (sum w mean)^2; the scale
    // factor hits only the per-component variances.
    double expect_base = 0.3 * (0.5 + 4.0) + 0.7 * (2.0 + 9.0) - std::pow(1.5, 2);
    double expect_scaled = 0.3 * (5.0 + 4.0) + 0.7 * (20.0 + 9.0) - std::pow(1.5, 2);
    CHECK(var_of(base) == doctest::Approx(expect_base).epsilon(0.05));
    CHECK(var_of(scaled) == doctest::Approx(expect_scaled).epsilon(0.05));
}

TEST_CASE("mixture samples follow the mixture cdf") {
    std::vector<GaussianComponent> comps;
    comps.emplace_back(0.5, vec1(0.0), mat1(1.0));
    comps.emplace_back(0.5, vec1(0.0), mat1(100.0));
    GaussianMixture mix(std::move(comps));
    Rng rng(derive_seed(13, stream::kRefit));
    std::vector<double> draws;
    for (int i = 0; i < 20000; ++i) draws.push_back(mix.sample(rng)[0]);
    auto cdf = [](double x) { return 0.5 * normal_cdf(x) + 0.5 * normal_cdf(x / 10.0); };
    CHECK(ks_one_sample(draws, cdf) > 0.001);
}

TEST_CASE("em fit recovers a single gaussian") {
    Rng rng(derive_seed(21, stream::kRefit));
    GaussianComponent truth(1.0, vec2(1.0, -1.0), mat2(0.5, 0.2, 0.2, 2.0));
    const int n = 4000;
    Eigen::MatrixXd data(n, 2);
    for (int i = 0; i < n; ++i) data.row(i) = truth.sample(rng).transpose();

    Rng fit_rng(derive_seed(21, stream::kRefit, 1));
    GaussianMixture fit = em_fit(data, 1, fit_rng);
    REQUIRE(fit.size() == 1);
    const auto& c = fit.components()[0];
    CHECK(std::abs(c.mean()[0] - 1.0) < 3.0 * std::sqrt(0.5 / n));
    CHECK(std::abs(c.mean()[1] + 1.0) < 3.0 * std::sqrt(2.0 / n));
    CHECK(c.covariance()(0, 0) == doctest::Approx(0.5).epsilon(0.1));
    CHECK(c.covariance()(1, 1) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(c.covariance()(0, 1) == doctest::Approx(0.2).epsilon(0.25));
}

TEST_CASE("em fit separates a two-component mixture") {
    Rng rng(derive_seed(22, stream::kRefit));
    const int n = 3000;
    Eigen::MatrixXd data(n, 1);
    int n_low = 0;
    for (int i = 0; i < n; ++i) {
        bool low = uniform01(rng) < 0.4;
        n_low += low;
        data(i, 0) = (low ? -5.0 : 5.0) + standard_normal(rng);
    }
    Rng fit_rng(derive_seed(22, stream::kRefit, 1));
    GaussianMixture fit = em_fit(data, 2, fit_rng);
    REQUIRE(fit.size() == 2);
    int lo = fit.components()[0].mean()[0] < fit.components()[1].mean()[0] ? 0 : 1;
    const auto& cl = fit.components()[lo];
    const auto& ch = fit.components()[1 - lo];
    CHECK(std::abs(cl.mean()[0] + 5.0) < 3.0 / std::sqrt(static_cast<double>(n_low)));
    CHECK(std::abs(ch.mean()[0] - 5.0) < 3.0 / std::sqrt(static_cast<double>(n - n_low)));
    CHECK(cl.weight() == doctest::Approx(static_cast<double>(n_low) / n).epsilon(0.05));
    CHECK(cl.covariance()(0, 0) == doctest::Approx(1.0).epsilon(0.15));
    CHECK(ch.covariance()(0, 0) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("em fit drops components it cannot support") {
    Eigen::MatrixXd data(5, 1);
    data << -2.0, -1.0, 0.0, 1.0, 2.0;
    Rng rng(derive_seed(23, stream::kRefit));
    GaussianMixture fit = em_fit(data, 10, rng);
    CHECK(fit.size() >= 1);
    CHECK(fit.size() <= 5);
    CHECK(std::isfinite(fit.logpdf(vec1(0.0))));
}

TEST_CASE("em fit fails cleanly on degenerate data") {
    Eigen::MatrixXd data = Eigen::MatrixXd::Zero(50, 2);
    Rng rng(derive_seed(24, stream::kRefit));
    CHECK_THROWS_AS(em_fit(data, 2, rng), NumericalError);

    Eigen::MatrixXd nan_data = Eigen::MatrixXd::Zero(10, 1);
    nan_data(3, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(em_fit(nan_data, 1, rng), NumericalError);
    CHECK_THROWS_AS(em_fit(Eigen::MatrixXd::Zero(1, 1), 1, rng), ConfigError);
}

TEST_CASE("em fit is deterministic for a fixed seed") {
    Rng rng(derive_seed(25, stream::kRefit));
    Eigen::MatrixXd data(400, 1);
    for (int i = 0; i < data.rows(); ++i)
        data(i, 0) = (i % 2 == 0 ? -3.0 : 3.0) + standard_normal(rng);
    Rng a(derive_seed(25, stream::kRefit, 7));
    Rng b(derive_seed(25, stream::kRefit, 7));
    GaussianMixture fa = em_fit(data, 2, a);
    GaussianMixture fb = em_fit(data, 2, b);
    REQUIRE(fa.size() == fb.size());
    for (int k = 0; k < fa.size(); ++k) {
        CHECK(fa.components()[k].mean()[0] == fb.components()[k].mean()[0]);
        CHECK(fa.components()[k].weight() == fb.components()[k].weight());
        CHECK(fa.components()[k].covariance()(0, 0) == fb.components()[k].covariance()(0, 0));
    }
}
