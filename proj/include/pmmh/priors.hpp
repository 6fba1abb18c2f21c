#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "pmmh/parameters.hpp"
#include "pmmh/rng.hpp"

namespace pmmh {

// Throughout, `sd`/`scale` are standard deviations, never variances.

struct NormalPrior {
    double mean, sd;
};

// Normal(loc, scale) restricted to [lo, hi], density renormalized.
struct TruncNormalPrior {
    double loc, scale, lo, hi;
};

// Inverse gamma with shape a, scale b: density ∝ x^{-(a+1)} exp(-b/x).
struct InverseGammaPrior {
    double shape, scale;
};

struct HalfNormalPrior {
    double scale; // x >= 0
};

struct PointMassPrior {
    double value;
};

struct UniformPrior {
    double lo, hi;
};

using Prior = std::variant<NormalPrior, TruncNormalPrior, InverseGammaPrior,
                           HalfNormalPrior, PointMassPrior, UniformPrior>;

double prior_logpdf(const Prior& p, double x);
double prior_sample(const Prior& p, Rng& rng);
// Rough spread used to seed the random-walk covariance before adaptation.
double prior_proposal_sd(const Prior& p);
// Support interval (lo may be -inf, hi +inf).
std::pair<double, double> prior_support(const Prior& p);

// Priors matched by name to the free entries of a parameter block.
class PriorSet {
  public:
    void add(std::string name, Prior prior);

    // Checks that every free entry of `proto` has exactly one prior and
    // caches the alignment; throws ConfigError otherwise.
    void align(const ParameterVector& proto);

    // Sum of log densities over free entries; -inf if any is out of support.
    double log_density(const ParameterVector& theta) const;
    ParameterVector sample(const ParameterVector& proto, Rng& rng) const;
    // Diagonal covariance from prior spreads, free-entry order.
    Eigen::MatrixXd proposal_covariance() const;

    const Prior& prior_for(const std::string& name) const;
    bool empty() const { return items_.empty(); }

  private:
    struct Item {
        std::string name;
        Prior prior;
        int entry_index = -1; // into the aligned block's full entry list
    };
    std::vector<Item> items_;
    bool aligned_ = false;
};

} // namespace pmmh
