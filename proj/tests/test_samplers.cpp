#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pmmh/errors.hpp"
#include "pmmh/imh.hpp"
#include "pmmh/math.hpp"
#include "pmmh/rng.hpp"
#include "pmmh/rwm.hpp"
#include "support/stats.hpp"

using namespace pmmh;
using testsupport::ks_one_sample;
using testsupport::ks_two_sample;
using testsupport::var_of;

namespace {

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }
Eigen::MatrixXd mat1(double a) { return Eigen::MatrixXd::Constant(1, 1, a); }

GaussianMixture single_gaussian(double weight, Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    std::vector<GaussianComponent> comps;
    comps.emplace_back(weight, std::move(mean), std::move(cov));
    return GaussianMixture(std::move(comps));
}

}  // namespace

TEST_CASE("random walk scale factors follow the dimension rule") {
    RwmState s(Eigen::MatrixXd::Identity(4, 4));
    CHECK(s.kappa(1) == doctest::Approx(0.0025).epsilon(1e-12));
    CHECK(s.kappa(2) == doctest::Approx(1.4161).epsilon(1e-12));
    CHECK(s.kappa(3) == doctest::Approx(25.0));
    CHECK_THROWS_AS(s.kappa(4), ConfigError);

    RwmOptions opts;
    opts.kappa1 = 0.5;
    opts.kappa3 = 7.0;
    RwmState custom(Eigen::MatrixXd::Identity(2, 2), opts);
    CHECK(custom.kappa(1) == doctest::Approx(0.5));
    CHECK(custom.kappa(2) == doctest::Approx(2.38 * 2.38 / 2.0).epsilon(1e-12));
    CHECK(custom.kappa(3) == doctest::Approx(7.0));
}

TEST_CASE("early iterations draw only from the fixed small-step kernel") {
    RwmState s(Eigen::MatrixXd::Identity(1, 1));
    CHECK(s.weights() == std::array<double, 3>{1.0, 0.0, 0.0});
    Rng rng(derive_seed(31, stream::kProposal));
    Eigen::VectorXd cur = vec1(2.0);
    std::vector<double> steps;
    for (int i = 0; i < 100000; ++i) steps.push_back(s.propose(cur, rng)[0] - 2.0);
    CHECK(var_of(steps) == doctest::Approx(0.01).epsilon(0.05));
    CHECK(ks_one_sample(steps, [](double x) { return normal_cdf(x / 0.1); }) > 0.001);
    CHECK(s.warnings() == 0);
}

TEST_CASE("running covariance matches the sample covariance of iterates") {
    RwmState s(Eigen::MatrixXd::Identity(1, 1));
    s.update(vec1(0.0));
    s.update(vec1(2.0));
    CHECK(s.iteration() == 3);
    Eigen::MatrixXd cov = s.adaptive_covariance();
    CHECK(cov(0, 0) == doctest::Approx(2.0).epsilon(1e-12));

    RwmState s3(Eigen::MatrixXd::Identity(3, 3));
    Rng rng(derive_seed(32, stream::kProposal));
    for (int i = 0; i < 10000; ++i) {
        Eigen::VectorXd x(3);
        for (int k = 0; k < 3; ++k) x[k] = standard_normal(rng);
        s3.update(x);
    }
    double frob = (s3.adaptive_covariance() - Eigen::MatrixXd::Identity(3, 3)).norm();
    CHECK(frob < 0.1);
}

TEST_CASE("after the switch the proposal mixes in the adapted kernels") {
    RwmOptions opts;
    opts.j0 = 10;
    RwmState s(Eigen::MatrixXd::Identity(1, 1), opts);
    Rng rng(derive_seed(33, stream::kProposal));
    for (int i = 0; i < 200; ++i) s.update(vec1(standard_normal(rng)));
    CHECK(s.weights() == std::array<double, 3>{0.05, 0.90, 0.05});

    double sigma2 = s.adaptive_covariance()(0, 0);
    std::vector<double> steps;
    for (int i = 0; i < 200000; ++i) steps.push_back(s.propose(vec1(0.0), rng)[0]);
    CHECK(s.warnings() == 0);
    double expect = 0.05 * 0.01 + 0.90 * s.kappa(2) * sigma2 + 0.05 * 25.0 * sigma2;
    CHECK(var_of(steps) == doctest::Approx(expect).epsilon(0.05));
    auto cdf = [&](double x) {
        return 0.05 * normal_cdf(x / 0.1) + 0.90 * normal_cdf(x / std::sqrt(s.kappa(2) * sigma2)) +
               0.05 * normal_cdf(x / std::sqrt(25.0 * sigma2));
    };
    CHECK(ks_one_sample(steps, cdf) > 0.001);
}

TEST_CASE("degenerate running covariance falls back to the fixed kernel") {
    RwmOptions opts;
    opts.j0 = 5;
    RwmState s(Eigen::MatrixXd::Identity(1, 1), opts);
    for (int i = 0; i < 50; ++i) s.update(vec1(1.5));  // constant chain
    CHECK(s.adaptive_covariance()(0, 0) == 0.0);
    Rng rng(derive_seed(34, stream::kProposal));
    std::vector<double> steps;
    for (int i = 0; i < 50000; ++i) steps.push_back(s.propose(vec1(0.0), rng)[0]);
    CHECK(s.warnings() > 0);
    CHECK(var_of(steps) == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("too few iterates for the adapted kernel also falls back") {
    RwmOptions opts;
    opts.j0 = 1;
    RwmState s(Eigen::MatrixXd::Identity(3, 3), opts);
    s.update(Eigen::VectorXd::Zero(3));  // j = 2 > j0 but only one iterate
    Rng rng(derive_seed(35, stream::kProposal));
    auto p = s.propose(Eigen::VectorXd::Zero(3), rng);
    CHECK(p.size() == 3);
    CHECK(s.warnings() >= 0);  // warning only when an adapted component was drawn
}

TEST_CASE("proposal density is symmetric in its arguments") {
    RwmOptions opts;
    opts.j0 = 3;
    RwmState s(Eigen::MatrixXd::Identity(2, 2), opts);
    Rng rng(derive_seed(36, stream::kProposal));
    for (int i = 0; i < 40; ++i) {
        Eigen::VectorXd x(2);
        x << standard_normal(rng), 0.5 * standard_normal(rng) + 1.0;
        s.update(x);
    }
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd a(2), b(2);
        a << standard_normal(rng), standard_normal(rng);
        b << standard_normal(rng), standard_normal(rng);
        CHECK(s.log_density(a, b) == doctest::Approx(s.log_density(b, a)).epsilon(1e-12));
    }
}

TEST_CASE("rwm rejects dimension mismatches and bad options") {
    RwmState s(Eigen::MatrixXd::Identity(2, 2));
    Rng rng(0);
    CHECK_THROWS_AS(s.propose(vec1(0.0), rng), ConfigError);
    CHECK_THROWS_AS(s.update(vec1(0.0)), ConfigError);
    CHECK_THROWS_AS(RwmState(Eigen::MatrixXd::Zero(2, 3)), ConfigError);
    CHECK_THROWS_AS(RwmState(Eigen::MatrixXd::Zero(2, 2)), ConfigError);
    RwmOptions bad;
    bad.j0 = -1;
    CHECK_THROWS_AS(RwmState(Eigen::MatrixXd::Identity(1, 1), bad), ConfigError);
}

TEST_CASE("independence proposal weights switch when the adaptive term appears") {
    ImhState s(single_gaussian(1.0, vec1(0.0), mat1(1.0)));
    CHECK(s.term_weights() == std::array<double, 4>{0.8, 0.2, 0.0, 0.0});
    CHECK_FALSE(s.has_adaptive_term());
    CHECK(s.term(2).components()[0].covariance()(0, 0) == doctest::Approx(10.0));

    Rng rng(derive_seed(41, stream::kPrelim));
    for (int i = 0; i < 300; ++i) s.record_iterate(vec1(standard_normal(rng)), i % 4 == 0);
    Rng refit_rng(derive_seed(41, stream::kRefit));
    s.refit(refit_rng);
    CHECK(s.has_adaptive_term());
    CHECK(s.term_weights() == std::array<double, 4>{0.15, 0.05, 0.7, 0.1});
    CHECK(s.term(4).components()[0].covariance()(0, 0) ==
          doctest::Approx(20.0 * s.term(3).components()[0].covariance()(0, 0)));
}

TEST_CASE("pre-adaptation proposals are the heavy-tailed pair") {
    ImhState s(single_gaussian(1.0, vec1(0.0), mat1(1.0)));
    Rng rng(derive_seed(42, stream::kProposal));
    std::vector<double> draws;
    for (int i = 0; i < 40000; ++i) draws.push_back(s.propose(rng)[0]);
    auto cdf = [](double x) {
        return 0.8 * normal_cdf(x) + 0.2 * normal_cdf(x / std::sqrt(10.0));
    };
    CHECK(ks_one_sample(draws, cdf) > 0.001);
    double expect_var = 0.8 * 1.0 + 0.2 * 10.0;
    CHECK(var_of(draws) == doctest::Approx(expect_var).epsilon(0.05));
}

TEST_CASE("single-term standard normal proposal passes a ks test") {
    std::vector<GaussianComponent> comps;
    comps.emplace_back(1.0, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    ImhOptions opts;
    ImhState s{GaussianMixture(std::move(comps)), opts};
    Rng rng(derive_seed(43, stream::kProposal));
    std::vector<double> first;
    for (int i = 0; i < 10000; ++i) first.push_back(s.propose(rng)[0]);
    // weights (0.8, 0.2): marginal is the 1/10-variance normal pair
    auto cdf = [](double x) {
        return 0.8 * normal_cdf(x) + 0.2 * normal_cdf(x / std::sqrt(10.0));
    };
    CHECK(ks_one_sample(first, cdf) > 0.001);
}

TEST_CASE("proposal log density matches the flattened mixture") {
    ImhState s(single_gaussian(1.0, vec1(0.0), mat1(1.0)));
    double expect = logaddexp(std::log(0.8) + normal_logpdf(0.0, 0.0, 1.0),
                              std::log(0.2) + normal_logpdf(0.0, 0.0, std::sqrt(10.0)));
    CHECK(s.log_density(vec1(0.0)) == doctest::Approx(expect).epsilon(1e-12));

    // importance estimate of the integral of q against draws from N(0, 4^2)
    Rng rng(derive_seed(44, stream::kProposal));
    const int n = 200000;
    GaussianComponent ref(1.0, vec1(0.0), mat1(16.0));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x = ref.sample(rng);
        total += std::exp(s.log_density(x) - ref.logpdf(x));
    }
    CHECK(total / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("proposal draws ignore the conditioning state by construction") {
    ImhState s(single_gaussian(1.0, vec1(3.0), mat1(2.0)));
    Rng a(derive_seed(45, stream::kProposal));
    Rng b(derive_seed(45, stream::kProposal));
    std::vector<double> da, db;
    for (int i = 0; i < 5000; ++i) {
        da.push_back(s.propose(a)[0]);
        db.push_back(s.propose(b)[0]);
    }
    for (int i = 0; i < 5000; ++i) CHECK(da[i] == db[i]);
}

TEST_CASE("component budget follows the accepted-draw schedule and caps at six") {
    ImhOptions opts;
    ImhState s(single_gaussian(1.0, vec1(0.0), mat1(1.0)), opts);
    CHECK(s.component_budget() == 1);  // no accepted draws yet
    Rng rng(derive_seed(46, stream::kPrelim));
    auto accept_n = [&](long n) {
        for (long i = 0; i < n; ++i) s.record_iterate(vec1(standard_normal(rng)), true);
    };
    accept_n(25);  // accepted = 25 = 25*d -> budget 1 (log2(1) = 0)
    CHECK(s.component_budget() == 1);
    accept_n(25);  // 50 -> 2 units -> budget 2
    CHECK(s.component_budget() == 2);
    accept_n(150);  // 200 -> 8 units -> budget 4
    CHECK(s.component_budget() == 4);
    accept_n(100000);  // far past the cap
    CHECK(s.component_budget() == 6);
}

TEST_CASE("refit recovers a two-mode iterate history") {
    ImhOptions opts;
    opts.refit_schedule = {5000};
    ImhState s(single_gaussian(1.0, vec1(0.0), mat1(25.0)), opts);
    Rng rng(derive_seed(47, stream::kPrelim));
    for (int i = 0; i < 5000; ++i) {
        double x = (uniform01(rng) < 0.5 ? -4.0 : 4.0) + 0.5 * standard_normal(rng);
        s.record_iterate(vec1(x), true);  // all accepted: budget well past 2
    }
    CHECK(s.refit_due());
    Rng refit_rng(derive_seed(47, stream::kRefit));
    s.refit(refit_rng);
    CHECK_FALSE(s.refit_due());
    REQUIRE(s.has_adaptive_term());
    const auto& g3 = s.term(3);
    CHECK(g3.size() >= 2);
    // the two dominant components straddle the modes
    double lo = 1e9, hi = -1e9;
    for (const auto& c : g3.components()) {
        lo = std::min(lo, c.mean()[0]);
        hi = std::max(hi, c.mean()[0]);
    }
    CHECK(lo == doctest::Approx(-4.0).epsilon(0.1));
    CHECK(hi == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("refits follow the schedule") {
    ImhOptions opts;
    opts.refit_schedule = {10, 20, 50};
    ImhState s(single_gaussian(1.0, vec1(0.0), mat1(1.0)), opts);
    Rng rng(derive_seed(48, stream::kPrelim));
    Rng refit_rng(derive_seed(48, stream::kRefit));
    int refits = 0;
    for (int i = 0; i < 60; ++i) {
        s.record_iterate(vec1(standard_normal(rng)), true);
        if (s.refit_due()) {
            s.refit(refit_rng);
            ++refits;
        }
    }
    CHECK(refits == 3);
    CHECK(s.has_adaptive_term());
}

TEST_CASE("failed refit keeps the previous adaptive term and warns") {
    ImhOptions opts;
    opts.refit_schedule = {10};
    ImhState s(single_gaussian(1.0, vec1(0.0), mat1(1.0)), opts);
    for (int i = 0; i < 10; ++i) s.record_iterate(vec1(2.0), true);  // constant history
    Rng rng(derive_seed(49, stream::kRefit));
    s.refit(rng);
    CHECK(s.warnings() == 1);
    CHECK_FALSE(s.has_adaptive_term());
    CHECK(s.term_weights() == std::array<double, 4>{0.8, 0.2, 0.0, 0.0});
}

TEST_CASE("stage two promotes the adaptive term to the fixed slot") {
    ImhOptions opts;
    opts.refit_schedule = {500};
    ImhState s(single_gaussian(1.0, vec1(0.0), mat1(25.0)), opts);
    Rng rng(derive_seed(50, stream::kPrelim));
    for (int i = 0; i < 500; ++i) s.record_iterate(vec1(1.0 + 0.3 * standard_normal(rng)), true);
    Rng refit_rng(derive_seed(50, stream::kRefit));
    s.refit(refit_rng);
    REQUIRE(s.has_adaptive_term());
    double g3_mean = s.term(3).components()[0].mean()[0];

    CHECK(s.stage() == 1);
    s.advance_stage();
    CHECK(s.stage() == 2);
    CHECK(s.term(1).components()[0].mean()[0] == g3_mean);
    CHECK(s.term(2).components()[0].covariance()(0, 0) ==
          doctest::Approx(10.0 * s.term(1).components()[0].covariance()(0, 0)));
    s.advance_stage();  // idempotent
    CHECK(s.stage() == 2);
}

TEST_CASE("imh rejects inconsistent configuration") {
    GaussianMixture empty;
    CHECK_THROWS_AS(ImhState{empty}, ConfigError);
    ImhOptions bad;
    bad.refit_schedule = {100, 50};
    CHECK_THROWS_AS(ImhState(single_gaussian(1.0, vec1(0.0), mat1(1.0)), bad), ConfigError);
    ImhOptions bad2;
    bad2.max_components = 0;
    CHECK_THROWS_AS(ImhState(single_gaussian(1.0, vec1(0.0), mat1(1.0)), bad2), ConfigError);
}
