#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pmmh/rng.hpp"

namespace pmmh {

// Single Gaussian with a cached Cholesky factor for density evaluation and
// sampling.
class GaussianComponent {
  public:
    GaussianComponent(double weight, Eigen::VectorXd mean, Eigen::MatrixXd covariance);

    // Returns nullopt instead of throwing when the covariance cannot be
    // factorized (callers use this to drop or fall back).
    static std::optional<GaussianComponent> try_make(double weight, Eigen::VectorXd mean,
                                                     Eigen::MatrixXd covariance);

    double weight() const { return weight_; }
    void set_weight(double w) { weight_ = w; }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return covariance_; }
    int dimension() const { return static_cast<int>(mean_.size()); }

    double logpdf(const Eigen::VectorXd& x) const;
    Eigen::VectorXd sample(Rng& rng) const;

  private:
    GaussianComponent() = default;

    double weight_ = 0.0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd covariance_;
    Eigen::MatrixXd chol_;   // lower-triangular factor of covariance
    double log_norm_ = 0.0;  // -d/2 log(2*pi) - sum_i log L_ii
};

class GaussianMixture {
  public:
    GaussianMixture() = default;
    explicit GaussianMixture(std::vector<GaussianComponent> components);

    int size() const { return static_cast<int>(components_.size()); }
    int dimension() const;
    const std::vector<GaussianComponent>& components() const { return components_; }

    double logpdf(const Eigen::VectorXd& x) const;
    Eigen::VectorXd sample(Rng& rng) const;

    // Same means and weights, every covariance multiplied by `factor`.
    GaussianMixture scaled_covariances(double factor) const;

  private:
    std::vector<GaussianComponent> components_;  // weights normalized to sum 1
};

// Fits a Gaussian mixture by EM with k-means++ initialization. A singular
// component fails the attempt and the fit restarts with one component fewer;
// throws NumericalError when no count in [1, n_components] succeeds.
GaussianMixture em_fit(const Eigen::MatrixXd& data, int n_components, Rng& rng,
                       int max_iterations = 100);

}  // namespace pmmh
