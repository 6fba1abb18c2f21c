#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pmmh {

inline constexpr double kLog2Pi = 1.8378770664093454836;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow; handles -inf operands.
inline double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log sum_i exp(v_i); returns -inf for empty input or all -inf.
inline double logsumexp(std::span<const double> v) {
    double hi = kNegInf;
    for (double x : v) hi = std::max(hi, x);
    if (hi == kNegInf || std::isinf(hi)) return hi;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

inline double normal_logpdf(double x, double mean, double sd) {
    double z = (x - mean) / sd;
    return -0.5 * (kLog2Pi + z * z) - std::log(sd);
}

// Standard normal CDF via erfc (accurate in both tails).
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// log Gamma(k+1) -- convenience for Poisson / negative-binomial pmfs.
inline double log_factorial(double k) { return std::lgamma(k + 1.0); }

double normal_quantile(double p); // src/math.cpp (boost::math)

// Streaming mean/covariance accumulator (Welford).  Used for the adaptive
// random-walk covariance and for posterior summaries.
class RunningCovariance {
  public:
    explicit RunningCovariance(int dim)
        : n_(0), mean_(Eigen::VectorXd::Zero(dim)),
          m2_(Eigen::MatrixXd::Zero(dim, dim)) {}

    void add(const Eigen::VectorXd& x) {
        ++n_;
        Eigen::VectorXd delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_.noalias() += delta * (x - mean_).transpose();
    }

    long long count() const { return n_; }
    const Eigen::VectorXd& mean() const { return mean_; }

    // Sample covariance (denominator n-1); zero matrix until n >= 2.
    Eigen::MatrixXd covariance() const {
        if (n_ < 2) return Eigen::MatrixXd::Zero(m2_.rows(), m2_.cols());
        return m2_ / static_cast<double>(n_ - 1);
    }

  private:
    long long n_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd m2_;
};

inline double sample_mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

inline double sample_variance(std::span<const double> v) {
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// p-quantile with linear interpolation on the sorted copy.
double quantile(std::vector<double> v, double p);

} // namespace pmmh
