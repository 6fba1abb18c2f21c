#include "pmmh/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmmh/errors.hpp"
#include "pmmh/math.hpp"

namespace pmmh {

InefficiencyResult inefficiency(std::span<const double> trace) {
    long K = static_cast<long>(trace.size());
    if (K < 50) throw ConfigError("inefficiency needs at least 50 iterates");

    double mean = sample_mean(trace);
    double gamma0 = 0.0;
    for (double x : trace) gamma0 += (x - mean) * (x - mean);
    gamma0 /= static_cast<double>(K);

    InefficiencyResult out;
    if (gamma0 <= 0.0 || !std::isfinite(gamma0)) {
        out.value = std::numeric_limits<double>::quiet_NaN();
        out.undefined = true;
        return out;
    }

    double threshold = 2.0 / std::sqrt(static_cast<double>(K));
    double sum = 0.0;
    for (long j = 1; j < K; ++j) {
        double gamma = 0.0;
        for (long t = 0; t + j < K; ++t) gamma += (trace[t] - mean) * (trace[t + j] - mean);
        gamma /= static_cast<double>(K);
        double rho = gamma / gamma0;
        sum += rho;
        out.lags = static_cast<int>(j);
        if (std::abs(rho) < threshold) break;
    }

    out.value = 1.0 + 2.0 * sum;
    if (out.value < 0.0) {
        out.value = 0.0;
        out.clamped = true;
    }
    return out;
}

double ect(double inefficiency_factor, double seconds_per_iteration) {
    if (inefficiency_factor < 0.0 || seconds_per_iteration < 0.0)
        throw ConfigError("ect needs nonnegative arguments");
    return 10.0 * inefficiency_factor * seconds_per_iteration;
}

double acceptance_rate(std::span<const char> accepted) {
    if (accepted.empty()) throw ConfigError("acceptance rate needs a nonempty flag series");
    long hits = 0;
    for (char f : accepted) hits += f ? 1 : 0;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(accepted.size());
}

ChainDiagnostics summarize_chain(const RunRecord& record, double burn_fraction) {
    long n = record.draws.rows();
    if (n == 0) throw ConfigError("diagnostics need a nonempty run");
    if (!(burn_fraction >= 0.0 && burn_fraction < 1.0))
        throw ConfigError("burn fraction must lie in [0, 1)");
    long burn = static_cast<long>(std::floor(burn_fraction * static_cast<double>(n)));
    long kept = n - burn;

    ChainDiagnostics diag;
    diag.acceptance_percent = acceptance_rate(record.accepted);
    diag.draws_used = kept;
    diag.seconds_per_iteration =
        sample_mean(std::span<const double>(record.seconds.data(), record.seconds.size()));

    std::vector<double> defined;
    for (long c = 0; c < record.draws.cols(); ++c) {
        std::vector<double> trace(kept);
        for (long i = 0; i < kept; ++i) trace[i] = record.draws(burn + i, c);

        ParameterSummary s;
        s.name = c < static_cast<long>(record.names.size()) ? record.names[c] : std::string();
        s.mean = sample_mean(trace);
        s.sd = std::sqrt(sample_variance(trace));
        s.q05 = quantile(trace, 0.05);
        s.q50 = quantile(trace, 0.50);
        s.q95 = quantile(trace, 0.95);

        InefficiencyResult r = inefficiency(trace);
        s.inefficiency = r.value;
        s.if_clamped = r.clamped;
        if (r.clamped || r.undefined) ++diag.warnings;
        if (!std::isnan(r.value)) defined.push_back(r.value);
        diag.parameters.push_back(std::move(s));
    }

    if (defined.empty()) {
        double nan = std::numeric_limits<double>::quiet_NaN();
        diag.if_min = diag.if_median = diag.if_max = nan;
        diag.ect_median = nan;
    } else {
        diag.if_min = *std::min_element(defined.begin(), defined.end());
        diag.if_max = *std::max_element(defined.begin(), defined.end());
        diag.if_median = quantile(defined, 0.50);
        diag.ect_median = ect(diag.if_median, diag.seconds_per_iteration);
    }
    return diag;
}

}  // namespace pmmh
