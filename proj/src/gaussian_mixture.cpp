#include "pmmh/gaussian_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmmh/errors.hpp"
#include "pmmh/math.hpp"

namespace pmmh {

namespace {

std::optional<Eigen::MatrixXd> lower_cholesky(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) return std::nullopt;
    Eigen::MatrixXd chol = llt.matrixL();
    for (Eigen::Index i = 0; i < chol.rows(); ++i) {
        if (!(chol(i, i) > 0.0) || !std::isfinite(chol(i, i))) return std::nullopt;
    }
    return chol;
}

}  // namespace

GaussianComponent::GaussianComponent(double weight, Eigen::VectorXd mean,
                                     Eigen::MatrixXd covariance) {
    auto made = try_make(weight, std::move(mean), std::move(covariance));
    if (!made) throw ConfigError("Gaussian component covariance is not positive definite");
    *this = std::move(*made);
}

std::optional<GaussianComponent> GaussianComponent::try_make(double weight, Eigen::VectorXd mean,
                                                             Eigen::MatrixXd covariance) {
    if (!(weight > 0.0) || !std::isfinite(weight)) return std::nullopt;
    if (covariance.rows() != mean.size() || covariance.cols() != mean.size() || mean.size() == 0)
        return std::nullopt;
    Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());
    auto chol = lower_cholesky(sym);
    if (!chol) return std::nullopt;

    GaussianComponent out;
    out.weight_ = weight;
    out.mean_ = std::move(mean);
    out.covariance_ = std::move(sym);
    out.chol_ = std::move(*chol);
    const double d = static_cast<double>(out.mean_.size());
    out.log_norm_ = -0.5 * d * kLog2Pi - out.chol_.diagonal().array().log().sum();
    return out;
}

double GaussianComponent::logpdf(const Eigen::VectorXd& x) const {
    Eigen::VectorXd z = chol_.triangularView<Eigen::Lower>().solve(x - mean_);
    return log_norm_ - 0.5 * z.squaredNorm();
}

Eigen::VectorXd GaussianComponent::sample(Rng& rng) const {
    Eigen::VectorXd z(mean_.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard_normal(rng);
    return mean_ + chol_ * z;
}

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw ConfigError("mixture needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
        if (c.dimension() != components_.front().dimension())
            throw ConfigError("mixture components disagree on dimension");
        total += c.weight();
    }
    if (!(total > 0.0) || !std::isfinite(total))
        throw ConfigError("mixture weights must sum to a positive finite value");
    for (auto& c : components_) c.set_weight(c.weight() / total);
}

int GaussianMixture::dimension() const {
    return components_.empty() ? 0 : components_.front().dimension();
}

double GaussianMixture::logpdf(const Eigen::VectorXd& x) const {
    if (components_.empty()) throw ConfigError("logpdf on empty mixture");
    std::vector<double> terms;
    terms.reserve(components_.size());
    for (const auto& c : components_) terms.push_back(std::log(c.weight()) + c.logpdf(x));
    return logsumexp(terms);
}

Eigen::VectorXd GaussianMixture::sample(Rng& rng) const {
    if (components_.empty()) throw ConfigError("sample on empty mixture");
    double u = uniform01(rng);
    double cum = 0.0;
    for (const auto& c : components_) {
        cum += c.weight();
        if (u <= cum) return c.sample(rng);
    }
    return components_.back().sample(rng);
}

GaussianMixture GaussianMixture::scaled_covariances(double factor) const {
    if (!(factor > 0.0)) throw ConfigError("covariance scale factor must be positive");
    std::vector<GaussianComponent> scaled;
    scaled.reserve(components_.size());
    for (const auto& c : components_)
        scaled.emplace_back(c.weight(), c.mean(), Eigen::MatrixXd(factor * c.covariance()));
    return GaussianMixture(std::move(scaled));
}

namespace {

// k-means++ seeding followed by Lloyd iterations; returns per-row cluster ids.
std::vector<int> kmeans_assign(const Eigen::MatrixXd& data, int k, Rng& rng) {
    const Eigen::Index n = data.rows();
    std::vector<Eigen::VectorXd> centers;
    centers.reserve(k);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.push_back(data.row(pick(rng)).transpose());

    Eigen::VectorXd dist2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    while (static_cast<int>(centers.size()) < k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double d2 = (data.row(i).transpose() - centers.back()).squaredNorm();
            dist2[i] = std::min(dist2[i], d2);
        }
        double total = dist2.sum();
        if (!(total > 0.0)) {
            centers.push_back(data.row(pick(rng)).transpose());
            continue;
        }
        double u = uniform01(rng) * total;
        Eigen::Index chosen = n - 1;
        double cum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            cum += dist2[i];
            if (u <= cum) {
                chosen = i;
                break;
            }
        }
        centers.push_back(data.row(chosen).transpose());
    }

    std::vector<int> assign(n, 0);
    for (int round = 0; round < 25; ++round) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double d2 = (data.row(i).transpose() - centers[c]).squaredNorm();
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(data.cols()));
        std::vector<long> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums[assign[i]] += data.row(i).transpose();
            ++counts[assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0)
                centers[c] = sums[c] / static_cast<double>(counts[c]);
            else
                centers[c] = data.row(pick(rng)).transpose();
        }
        if (!changed && round > 0) break;
    }
    return assign;
}

std::optional<GaussianMixture> em_attempt(const Eigen::MatrixXd& data, int k, Rng& rng,
                                          int max_iterations) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    const double min_mass = 1e-8 * static_cast<double>(n);

    // Hard-assignment start from k-means.
    Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, k);
    auto assign = kmeans_assign(data, k, rng);
    for (Eigen::Index i = 0; i < n; ++i) resp(i, assign[i]) = 1.0;

    std::vector<GaussianComponent> comps;
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter <= max_iterations; ++iter) {
        // M-step from current responsibilities.
        comps.clear();
        for (int c = 0; c < k; ++c) {
            double mass = resp.col(c).sum();
            if (!(mass > min_mass)) return std::nullopt;
            Eigen::VectorXd mean = (resp.col(c).transpose() * data).transpose() / mass;
            Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (resp(i, c) == 0.0) continue;
                Eigen::VectorXd diff = data.row(i).transpose() - mean;
                cov.noalias() += resp(i, c) * diff * diff.transpose();
            }
            cov /= mass;
            double ridge = 1e-6 * cov.trace() / static_cast<double>(d);
            cov.diagonal().array() += ridge;
            auto comp = GaussianComponent::try_make(mass / static_cast<double>(n), std::move(mean),
                                                    std::move(cov));
            if (!comp) return std::nullopt;
            comps.push_back(std::move(*comp));
        }
        if (iter == max_iterations) break;

        // E-step.
        double ll = 0.0;
        std::vector<double> logs(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (int c = 0; c < k; ++c)
                logs[c] = std::log(comps[c].weight()) + comps[c].logpdf(data.row(i).transpose());
            double norm = logsumexp(logs);
            if (!std::isfinite(norm)) return std::nullopt;
            for (int c = 0; c < k; ++c) resp(i, c) = std::exp(logs[c] - norm);
            ll += norm;
        }
        if (std::abs(ll - prev_ll) < 1e-8 * (1.0 + std::abs(ll))) break;
        prev_ll = ll;
    }
    return GaussianMixture(std::move(comps));
}

}  // namespace

GaussianMixture em_fit(const Eigen::MatrixXd& data, int n_components, Rng& rng,
                       int max_iterations) {
    if (data.rows() < 2 || data.cols() < 1) throw ConfigError("mixture fit needs at least 2 rows");
    if (n_components < 1) throw ConfigError("mixture fit needs at least one component");
    if (!data.allFinite()) throw NumericalError("mixture fit data contains non-finite values");
    for (int k = std::min<int>(n_components, static_cast<int>(data.rows())); k >= 1; --k) {
        auto fit = em_attempt(data, k, rng, max_iterations);
        if (fit) return *fit;
    }
    throw NumericalError("mixture fit failed for every component count");
}

}  // namespace pmmh
