#include "pmmh/rwm.hpp"

#include <cmath>

#include "pmmh/errors.hpp"

namespace pmmh {

namespace {

GaussianComponent make_fixed_component(const Eigen::MatrixXd& sigma1, double kappa1) {
    if (sigma1.rows() != sigma1.cols() || sigma1.rows() == 0)
        throw ConfigError("sigma1 must be a square nonempty matrix");
    double k = kappa1 > 0.0 ? kappa1 : 0.01 / static_cast<double>(sigma1.rows());
    return GaussianComponent(1.0, Eigen::VectorXd::Zero(sigma1.rows()),
                             Eigen::MatrixXd(k * sigma1));
}

}  // namespace

RwmState::RwmState(Eigen::MatrixXd sigma1, RwmOptions options)
    : d_(static_cast<int>(sigma1.rows())),
      opt_(options),
      comp1_(make_fixed_component(sigma1, options.kappa1)),
      running_(static_cast<int>(sigma1.rows())) {
    if (opt_.kappa1 <= 0.0) opt_.kappa1 = 0.01 / static_cast<double>(d_);
    if (opt_.kappa2 <= 0.0) opt_.kappa2 = 2.38 * 2.38 / static_cast<double>(d_);
    if (opt_.kappa3 <= 0.0) throw ConfigError("kappa3 must be positive");
    if (opt_.j0 < 0) throw ConfigError("j0 must be nonnegative");
}

double RwmState::kappa(int component) const {
    switch (component) {
        case 1: return opt_.kappa1;
        case 2: return opt_.kappa2;
        case 3: return opt_.kappa3;
        default: throw ConfigError("kappa component must be 1, 2 or 3");
    }
}

std::array<double, 3> RwmState::weights() const {
    if (j_ <= opt_.j0) return {1.0, 0.0, 0.0};
    return {0.05, 0.90, 0.05};
}

bool RwmState::ensure_adaptive_() {
    if (!dirty_) return comp2_.has_value() && comp3_.has_value();
    dirty_ = false;
    comp2_.reset();
    comp3_.reset();
    if (running_.count() < d_ + 1) return false;
    Eigen::MatrixXd sigma2 = running_.covariance();
    comp2_ = GaussianComponent::try_make(1.0, Eigen::VectorXd::Zero(d_),
                                         Eigen::MatrixXd(opt_.kappa2 * sigma2));
    comp3_ = GaussianComponent::try_make(1.0, Eigen::VectorXd::Zero(d_),
                                         Eigen::MatrixXd(opt_.kappa3 * sigma2));
    return comp2_.has_value() && comp3_.has_value();
}

Eigen::VectorXd RwmState::propose(const Eigen::VectorXd& theta_cur, Rng& rng) {
    if (theta_cur.size() != d_) throw ConfigError("proposal point has wrong dimension");
    auto w = weights();
    double u = uniform01(rng);
    int c = u < w[0] ? 0 : (u < w[0] + w[1] ? 1 : 2);
    if (c != 0 && !ensure_adaptive_()) {
        ++warnings_;
        c = 0;
    }
    switch (c) {
        case 0: return theta_cur + comp1_.sample(rng);
        case 1: return theta_cur + comp2_->sample(rng);
        default: return theta_cur + comp3_->sample(rng);
    }
}

double RwmState::log_density(const Eigen::VectorXd& from, const Eigen::VectorXd& to) {
    Eigen::VectorXd diff = to - from;
    auto w = weights();
    bool adaptive = w[0] < 1.0 && ensure_adaptive_();
    if (!adaptive) return comp1_.logpdf(diff);
    double acc = std::log(w[0]) + comp1_.logpdf(diff);
    acc = logaddexp(acc, std::log(w[1]) + comp2_->logpdf(diff));
    acc = logaddexp(acc, std::log(w[2]) + comp3_->logpdf(diff));
    return acc;
}

void RwmState::update(const Eigen::VectorXd& iterate) {
    if (iterate.size() != d_) throw ConfigError("iterate has wrong dimension");
    running_.add(iterate);
    ++j_;
    dirty_ = true;
}

}  // namespace pmmh
