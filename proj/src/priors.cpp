#include "pmmh/priors.hpp"

#include <cmath>

#include "pmmh/errors.hpp"
#include "pmmh/math.hpp"

namespace pmmh {

namespace {

double truncnorm_log_mass(const TruncNormalPrior& p) {
    double alpha = (p.lo - p.loc) / p.scale;
    double beta = (p.hi - p.loc) / p.scale;
    return std::log(normal_cdf(beta) - normal_cdf(alpha));
}

} // namespace

double prior_logpdf(const Prior& p, double x) {
    return std::visit(
        [x](const auto& pr) -> double {
            using T = std::decay_t<decltype(pr)>;
            if constexpr (std::is_same_v<T, NormalPrior>) {
                return normal_logpdf(x, pr.mean, pr.sd);
            } else if constexpr (std::is_same_v<T, TruncNormalPrior>) {
                if (x < pr.lo || x > pr.hi) return kNegInf;
                return normal_logpdf(x, pr.loc, pr.scale) - truncnorm_log_mass(pr);
            } else if constexpr (std::is_same_v<T, InverseGammaPrior>) {
                if (x <= 0.0) return kNegInf;
                return pr.shape * std::log(pr.scale) - std::lgamma(pr.shape) -
                       (pr.shape + 1.0) * std::log(x) - pr.scale / x;
            } else if constexpr (std::is_same_v<T, HalfNormalPrior>) {
                if (x < 0.0) return kNegInf;
                return std::log(2.0) + normal_logpdf(x, 0.0, pr.scale);
            } else if constexpr (std::is_same_v<T, UniformPrior>) {
                if (x < pr.lo || x > pr.hi) return kNegInf;
                return -std::log(pr.hi - pr.lo);
            } else { // PointMassPrior
                return x == pr.value ? 0.0 : kNegInf;
            }
        },
        p);
}

double prior_sample(const Prior& p, Rng& rng) {
    return std::visit(
        [&rng](const auto& pr) -> double {
            using T = std::decay_t<decltype(pr)>;
            if constexpr (std::is_same_v<T, NormalPrior>) {
                return pr.mean + pr.sd * standard_normal(rng);
            } else if constexpr (std::is_same_v<T, TruncNormalPrior>) {
                double lo = normal_cdf((pr.lo - pr.loc) / pr.scale);
                double hi = normal_cdf((pr.hi - pr.loc) / pr.scale);
                double u = lo + (hi - lo) * uniform01(rng);
                return pr.loc + pr.scale * normal_quantile(u);
            } else if constexpr (std::is_same_v<T, InverseGammaPrior>) {
                // If G ~ Gamma(shape, rate=scale) then 1/G is the target.
                std::gamma_distribution<double> g(pr.shape, 1.0 / pr.scale);
                return 1.0 / g(rng);
            } else if constexpr (std::is_same_v<T, HalfNormalPrior>) {
                return std::abs(pr.scale * standard_normal(rng));
            } else if constexpr (std::is_same_v<T, UniformPrior>) {
                return pr.lo + (pr.hi - pr.lo) * uniform01(rng);
            } else {
                return pr.value;
            }
        },
        p);
}

double prior_proposal_sd(const Prior& p) {
    return std::visit(
        [](const auto& pr) -> double {
            using T = std::decay_t<decltype(pr)>;
            if constexpr (std::is_same_v<T, NormalPrior>) {
                return pr.sd;
            } else if constexpr (std::is_same_v<T, TruncNormalPrior>) {
                // Moments of the truncated normal.
                double a = (pr.lo - pr.loc) / pr.scale;
                double b = (pr.hi - pr.loc) / pr.scale;
                double z = normal_cdf(b) - normal_cdf(a);
                double phia = std::exp(-0.5 * (kLog2Pi + a * a));
                double phib = std::exp(-0.5 * (kLog2Pi + b * b));
                if (std::isinf(a)) phia = 0.0;
                if (std::isinf(b)) phib = 0.0;
                double va = 1.0 + (a * phia - b * phib) / z -
                            ((phia - phib) / z) * ((phia - phib) / z);
                return pr.scale * std::sqrt(std::max(va, 1e-12));
            } else if constexpr (std::is_same_v<T, InverseGammaPrior>) {
                if (pr.shape > 2.0)
                    return pr.scale / ((pr.shape - 1.0) * std::sqrt(pr.shape - 2.0));
                if (pr.shape > 1.0) return pr.scale / (pr.shape - 1.0);
                // Heavy-tailed shapes: a multiple of the mode keeps the
                // warm-up steps from being microscopic.
                return 10.0 * pr.scale / (pr.shape + 1.0);
            } else if constexpr (std::is_same_v<T, HalfNormalPrior>) {
                return pr.scale * std::sqrt(1.0 - 2.0 / std::numbers::pi);
            } else if constexpr (std::is_same_v<T, UniformPrior>) {
                return (pr.hi - pr.lo) / std::sqrt(12.0);
            } else {
                return 0.0;
            }
        },
        p);
}

std::pair<double, double> prior_support(const Prior& p) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(
        [inf](const auto& pr) -> std::pair<double, double> {
            using T = std::decay_t<decltype(pr)>;
            if constexpr (std::is_same_v<T, NormalPrior>) {
                return {-inf, inf};
            } else if constexpr (std::is_same_v<T, TruncNormalPrior>) {
                return {pr.lo, pr.hi};
            } else if constexpr (std::is_same_v<T, InverseGammaPrior>) {
                return {0.0, inf};
            } else if constexpr (std::is_same_v<T, HalfNormalPrior>) {
                return {0.0, inf};
            } else if constexpr (std::is_same_v<T, UniformPrior>) {
                return {pr.lo, pr.hi};
            } else {
                return {pr.value, pr.value};
            }
        },
        p);
}

void PriorSet::add(std::string name, Prior prior) {
    for (const auto& it : items_) {
        if (it.name == name) throw ConfigError("duplicate prior for: " + name);
    }
    items_.push_back({std::move(name), prior, -1});
    aligned_ = false;
}

void PriorSet::align(const ParameterVector& proto) {
    std::vector<Item> ordered;
    for (const auto& e : proto.entries()) {
        if (e.fixed) continue;
        bool found = false;
        for (const auto& it : items_) {
            if (it.name == e.name) {
                ordered.push_back({it.name, it.prior, proto.index_of(e.name)});
                found = true;
                break;
            }
        }
        if (!found) throw ConfigError("no prior given for parameter: " + e.name);
    }
    if (ordered.size() != items_.size())
        throw ConfigError("prior set names a parameter that is fixed or absent");
    items_ = std::move(ordered);
    aligned_ = true;
}

double PriorSet::log_density(const ParameterVector& theta) const {
    if (!aligned_) throw ConfigError("PriorSet used before align()");
    double total = 0.0;
    for (const auto& it : items_) {
        double lp = prior_logpdf(it.prior, theta.value(it.entry_index));
        if (lp == kNegInf) return kNegInf;
        total += lp;
    }
    return total;
}

ParameterVector PriorSet::sample(const ParameterVector& proto, Rng& rng) const {
    if (!aligned_) throw ConfigError("PriorSet used before align()");
    ParameterVector out = proto;
    for (const auto& it : items_) {
        out.set(it.name, prior_sample(it.prior, rng));
    }
    return out;
}

Eigen::MatrixXd PriorSet::proposal_covariance() const {
    if (!aligned_) throw ConfigError("PriorSet used before align()");
    int d = static_cast<int>(items_.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        double sd = prior_proposal_sd(items_[static_cast<std::size_t>(i)].prior);
        cov(i, i) = std::max(sd * sd, 1e-12);
    }
    return cov;
}

const Prior& PriorSet::prior_for(const std::string& name) const {
    for (const auto& it : items_) {
        if (it.name == name) return it.prior;
    }
    throw ConfigError("no prior for: " + name);
}

} // namespace pmmh
