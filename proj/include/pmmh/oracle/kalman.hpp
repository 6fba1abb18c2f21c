#pragma once

#include <functional>
#include <span>
#include <vector>

namespace pmmh::oracle {

// Scalar linear-Gaussian state space:
//   x_0 ~ N(m0, p0),  x_t = a x_{t-1} + q eps_t,  y_t = x_t + r nu_t.
struct LinearGaussianSsm {
    double a = 0.9;
    double q = 0.3; // transition noise sd
    double r = 0.5; // observation noise sd
    double m0 = 0.0;
    double p0 = 1.0; // initial variance
};

struct KalmanResult {
    double loglik = 0.0;
    std::vector<double> per_step;      // log p(y_t | y_{1:t-1})
    std::vector<double> filtered_mean; // E[x_t | y_{1:t}]
    std::vector<double> filtered_var;
};

// Exact likelihood by the prediction-error decomposition.
KalmanResult kalman_filter(const LinearGaussianSsm& ssm, std::span<const double> y);

// Composite trapezoid of exp(f) over [lo, hi] on n intervals, in log domain.
// n = 0 is the midpoint rule on the single cell.
double log_trapezoid(const std::function<double(double)>& f, double lo, double hi, int n);

// log ∫ exp(f(θ)) dθ over an axis-aligned box of dimension 1 or 2, by a
// refining trapezoid grid.  Refinement stops when successive values differ by
// less than tol (absolute, on the log scale).
struct QuadratureOptions {
    double tol = 1e-4;
    int initial_intervals = 64;
    int max_doublings = 12;
};

double log_integrate(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> lo, std::span<const double> hi,
                     const QuadratureOptions& opts = {});

} // namespace pmmh::oracle
