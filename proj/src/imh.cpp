#include "pmmh/imh.hpp"

#include <algorithm>
#include <cmath>

#include "pmmh/errors.hpp"

namespace pmmh {

ImhState::ImhState(GaussianMixture g1, ImhOptions options)
    : opt_(std::move(options)), g1_(std::move(g1)) {
    if (g1_.size() == 0) throw ConfigError("g1 must be a nonempty mixture");
    if (opt_.max_components < 1) throw ConfigError("max_components must be at least 1");
    if (opt_.growth_unit < 1) throw ConfigError("growth_unit must be at least 1");
    if (!std::is_sorted(opt_.refit_schedule.begin(), opt_.refit_schedule.end()))
        throw ConfigError("refit schedule must be increasing");
    g2_ = g1_.scaled_covariances(10.0);
    rebuild_flat_();
}

std::array<double, 4> ImhState::term_weights() const {
    if (g3_.size() == 0) return {0.8, 0.2, 0.0, 0.0};
    return {0.15, 0.05, 0.7, 0.1};
}

const GaussianMixture& ImhState::term(int k) const {
    switch (k) {
        case 1: return g1_;
        case 2: return g2_;
        case 3: return g3_;
        case 4: return g4_;
        default: throw ConfigError("mixture term must be 1..4");
    }
}

int ImhState::component_budget() const {
    double units = static_cast<double>(accepted_) /
                   (static_cast<double>(opt_.growth_unit) * static_cast<double>(dimension()));
    int budget = 1 + static_cast<int>(std::floor(std::log2(std::max(1.0, units))));
    return std::min(opt_.max_components, budget);
}

void ImhState::record_iterate(const Eigen::VectorXd& theta, bool accepted) {
    if (theta.size() != dimension()) throw ConfigError("iterate has wrong dimension");
    buffer_.push_back(theta);
    if (accepted) ++accepted_;
}

bool ImhState::refit_due() const {
    return next_refit_ < opt_.refit_schedule.size() &&
           iterates_recorded() >= opt_.refit_schedule[next_refit_];
}

void ImhState::refit(Rng& rng) {
    while (next_refit_ < opt_.refit_schedule.size() &&
           iterates_recorded() >= opt_.refit_schedule[next_refit_])
        ++next_refit_;
    const long n = iterates_recorded();
    const int d = dimension();
    if (n < d + 2) {
        ++warnings_;
        return;
    }
    Eigen::MatrixXd data(n, d);
    for (long i = 0; i < n; ++i) data.row(i) = buffer_[i].transpose();
    try {
        GaussianMixture fitted = em_fit(data, component_budget(), rng, opt_.em_max_iterations);
        g3_ = std::move(fitted);
        g4_ = g3_.scaled_covariances(20.0);
        rebuild_flat_();
    } catch (const NumericalError&) {
        ++warnings_;  // keep the previous adaptive term
    }
}

void ImhState::advance_stage() {
    if (stage_ != 1) return;
    stage_ = 2;
    if (g3_.size() > 0) {
        g1_ = g3_;
        g2_ = g1_.scaled_covariances(10.0);
        rebuild_flat_();
    }
}

void ImhState::rebuild_flat_() {
    auto w = term_weights();
    std::vector<GaussianComponent> comps;
    for (int k = 1; k <= 4; ++k) {
        if (w[k - 1] == 0.0) continue;
        for (const auto& c : term(k).components())
            comps.emplace_back(w[k - 1] * c.weight(), c.mean(), c.covariance());
    }
    flat_ = GaussianMixture(std::move(comps));
}

}  // namespace pmmh
