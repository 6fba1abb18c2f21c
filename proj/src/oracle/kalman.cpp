#include "pmmh/oracle/kalman.hpp"

#include <cmath>
#include <stdexcept>

#include "pmmh/math.hpp"

namespace pmmh::oracle {

KalmanResult kalman_filter(const LinearGaussianSsm& ssm, std::span<const double> y) {
    KalmanResult res;
    res.per_step.reserve(y.size());
    res.filtered_mean.reserve(y.size());
    res.filtered_var.reserve(y.size());

    const double q2 = ssm.q * ssm.q;
    const double r2 = ssm.r * ssm.r;
    double m = ssm.m0;
    double p = ssm.p0;
    for (double yt : y) {
        double m_pred = ssm.a * m;
        double p_pred = ssm.a * ssm.a * p + q2;
        double s = p_pred + r2; // innovation variance
        double innov = yt - m_pred;
        double step = -0.5 * (kLog2Pi + std::log(s) + innov * innov / s);
        res.per_step.push_back(step);
        res.loglik += step;
        double gain = p_pred / s;
        m = m_pred + gain * innov;
        p = (1.0 - gain) * p_pred;
        res.filtered_mean.push_back(m);
        res.filtered_var.push_back(p);
    }
    return res;
}

double log_trapezoid(const std::function<double(double)>& f, double lo, double hi, int n) {
    const double width = hi - lo;
    if (n <= 0) return f(0.5 * (lo + hi)) + std::log(width);
    const double h = width / n;
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        double w = (i == 0 || i == n) ? 0.5 : 1.0;
        terms.push_back(f(lo + h * i) + std::log(w));
    }
    return logsumexp(terms) + std::log(h);
}

namespace {

double log_trapezoid_2d(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> lo, std::span<const double> hi, int n) {
    const double h0 = (hi[0] - lo[0]) / n;
    const double h1 = (hi[1] - lo[1]) / n;
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    double pt[2];
    for (int i = 0; i <= n; ++i) {
        double wi = (i == 0 || i == n) ? 0.5 : 1.0;
        pt[0] = lo[0] + h0 * i;
        for (int j = 0; j <= n; ++j) {
            double wj = (j == 0 || j == n) ? 0.5 : 1.0;
            pt[1] = lo[1] + h1 * j;
            terms.push_back(f(pt) + std::log(wi * wj));
        }
    }
    return logsumexp(terms) + std::log(h0 * h1);
}

} // namespace

double log_integrate(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> lo, std::span<const double> hi,
                     const QuadratureOptions& opts) {
    const std::size_t d = lo.size();
    if (d != hi.size() || d < 1 || d > 2)
        throw std::invalid_argument("log_integrate supports dimension 1 or 2");

    auto eval = [&](int n) {
        if (d == 1) {
            auto f1 = [&](double x) {
                double pt[1] = {x};
                return f(std::span<const double>(pt, 1));
            };
            return log_trapezoid(f1, lo[0], hi[0], n);
        }
        return log_trapezoid_2d(f, lo, hi, n);
    };

    int n = opts.initial_intervals;
    double prev = eval(n);
    for (int it = 0; it < opts.max_doublings; ++it) {
        n *= 2;
        double next = eval(n);
        if (std::abs(next - prev) < opts.tol) return next;
        prev = next;
    }
    return prev;
}

} // namespace pmmh::oracle
