#pragma once

#include <array>
#include <optional>

#include <Eigen/Dense>

#include "pmmh/gaussian_mixture.hpp"
#include "pmmh/math.hpp"
#include "pmmh/rng.hpp"

namespace pmmh {

struct RwmOptions {
    long j0 = 500;
    double kappa1 = 0.0;  // 0 -> 0.1^2 / d
    double kappa2 = 0.0;  // 0 -> 2.38^2 / d
    double kappa3 = 25.0;
};

// Three-component adaptive random walk: a fixed small-step kernel, a kernel
// scaled to the empirical covariance of the chain so far, and a wide
// exploration kernel. Symmetric, so it contributes nothing to the MH ratio.
class RwmState {
  public:
    explicit RwmState(Eigen::MatrixXd sigma1, RwmOptions options = {});

    int dimension() const { return d_; }
    long iteration() const { return j_; }
    long warnings() const { return warnings_; }
    double kappa(int component) const;
    std::array<double, 3> weights() const;

    Eigen::VectorXd propose(const Eigen::VectorXd& theta_cur, Rng& rng);

    // Mixture density of (to - from); symmetric under swapping arguments.
    double log_density(const Eigen::VectorXd& from, const Eigen::VectorXd& to);

    // Feed the realized chain iterate (post accept/reject) into the running
    // covariance and advance the iteration counter.
    void update(const Eigen::VectorXd& iterate);

    Eigen::MatrixXd adaptive_covariance() const { return running_.covariance(); }

  private:
    bool ensure_adaptive_();

    int d_;
    RwmOptions opt_;
    long j_ = 1;
    long warnings_ = 0;
    GaussianComponent comp1_;
    RunningCovariance running_;
    std::optional<GaussianComponent> comp2_;
    std::optional<GaussianComponent> comp3_;
    bool dirty_ = true;
};

}  // namespace pmmh
