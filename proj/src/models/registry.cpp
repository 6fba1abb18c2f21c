#include "pmmh/models/registry.hpp"

#include <cmath>

#include "pmmh/errors.hpp"
#include "pmmh/models/negbin.hpp"
#include "pmmh/models/poisson.hpp"
#include "pmmh/models/sv.hpp"

namespace pmmh::models {

namespace {

ModelBundle sv_bundle(const PresetOverrides& ov, bool leverage, double default_outlier) {
    SvOptions opts;
    opts.leverage = leverage;
    opts.outlier_prob = ov.outlier_prob.value_or(default_outlier);
    opts.outlier_scale = ov.outlier_scale.value_or(2.5);
    if (ov.leverage_same_step.value_or(false)) opts.timing = LeverageTiming::kSameStep;
    opts.x0_mean = ov.x0_mean.value_or(0.0);
    opts.x0_sd = ov.x0_sd.value_or(10.0);

    ModelBundle b;
    b.model = make_sv_model(opts);
    b.prototype.add("mu", 0.0);
    b.prototype.add("phi", 0.95);
    b.prototype.add("sigma2", 0.05);
    if (leverage) b.prototype.add("rho", -0.4);

    b.priors.add("mu", NormalPrior{0.0, 10.0});
    b.priors.add("phi", TruncNormalPrior{0.9, 0.1, 0.0, 1.0});
    b.priors.add("sigma2", InverseGammaPrior{0.01, 0.01});
    if (leverage) b.priors.add("rho", TruncNormalPrior{0.0, 1e6, -1.0, 1.0});
    b.priors.align(b.prototype);
    return b;
}

ModelBundle negbin_bundle() {
    ModelBundle b;
    b.model = make_negbin_model();
    b.integer_data = true;
    b.prototype.add("nu", 10.0);
    b.prototype.add("alpha", 4.0);
    b.prototype.add("beta", 2.0);
    b.priors.add("nu", HalfNormalPrior{5.0});
    b.priors.add("alpha", HalfNormalPrior{20.0});
    b.priors.add("beta", HalfNormalPrior{5.0});
    b.priors.align(b.prototype);
    return b;
}

ModelBundle poisson_rw_bundle(const PresetOverrides& ov) {
    PoissonRwOptions opts;
    opts.mu0_mean = ov.mu0_mean.value_or(0.4324);
    opts.mu0_sd = ov.mu0_sd.value_or(9.0);

    ModelBundle b;
    b.model = make_poisson_rw_model(opts);
    b.integer_data = true;
    b.prototype.add("sigma2", 0.05);
    b.priors.add("sigma2", HalfNormalPrior{1.0});
    b.priors.align(b.prototype);
    return b;
}

ModelBundle poisson_structural_bundle(const PresetOverrides& ov) {
    PoissonStructuralOptions opts;
    opts.trend = ov.trend.value_or(true);
    opts.t_int = ov.t_int.value_or(0);
    opts.seasonal_terms = ov.seasonal_terms.value_or(1);
    opts.period = ov.period.value_or(12.0);
    opts.n_covariates = ov.n_covariates;
    opts.covariates = ov.covariates;

    ModelBundle b;
    b.model = make_poisson_structural_model(opts);
    b.integer_data = true;

    const bool estimate_beta = ov.estimate_beta.value_or(false);
    for (int i = 1; i <= opts.n_covariates; ++i) {
        b.prototype.add("beta" + std::to_string(i), 1.0, /*fixed=*/!estimate_beta);
        if (estimate_beta) b.priors.add("beta" + std::to_string(i), NormalPrior{0.0, 1.0});
    }
    b.prototype.add("mu0", opts.n_covariates > 0 ? -8.3779 : 1.5);
    b.priors.add("mu0", NormalPrior{opts.n_covariates > 0 ? -8.3779 : 1.5, std::sqrt(1.5)});
    if (opts.trend) {
        b.prototype.add("a0", 0.0);
        b.priors.add("a0", NormalPrior{0.0, std::sqrt(0.005)});
    }
    b.prototype.add("sigma2", 0.05);
    b.priors.add("sigma2", HalfNormalPrior{std::sqrt(0.2)});
    if (opts.trend) {
        b.prototype.add("tau2", 0.001);
        b.priors.add("tau2", HalfNormalPrior{std::sqrt(0.002)});
    }
    if (opts.t_int > 0) {
        b.prototype.add("delta", 0.0);
        b.priors.add("delta", NormalPrior{0.0, 1.0});
    }
    for (int j = 1; j <= opts.seasonal_terms; ++j) {
        b.prototype.add("alpha" + std::to_string(j), 0.0);
        b.prototype.add("gamma" + std::to_string(j), 0.0);
        b.priors.add("alpha" + std::to_string(j), NormalPrior{0.0, std::sqrt(0.005)});
        b.priors.add("gamma" + std::to_string(j), NormalPrior{0.0, std::sqrt(0.005)});
    }
    b.priors.align(b.prototype);
    return b;
}

} // namespace

ModelBundle make_preset(const std::string& name, const PresetOverrides& ov) {
    if (name == "sv") return sv_bundle(ov, false, 0.0);
    if (name == "sv_outlier") return sv_bundle(ov, false, 0.03);
    if (name == "sv_leverage") return sv_bundle(ov, true, 0.0);
    if (name == "sv_leverage_outlier") return sv_bundle(ov, true, 0.03);
    if (name == "negbin") return negbin_bundle();
    if (name == "poisson_rw") return poisson_rw_bundle(ov);
    if (name == "poisson_structural") return poisson_structural_bundle(ov);
    throw ConfigError("unknown model preset: " + name);
}

std::vector<std::string> preset_names() {
    return {"sv",     "sv_outlier", "sv_leverage", "sv_leverage_outlier",
            "negbin", "poisson_rw", "poisson_structural"};
}

} // namespace pmmh::models
