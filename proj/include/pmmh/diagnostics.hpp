#pragma once

#include <span>
#include <string>
#include <vector>

#include "pmmh/chain.hpp"

namespace pmmh {

// IF = 1 + 2 Σ_{j=1..L} ρ̂_j with the biased autocovariance estimator and
// L = the smallest lag whose |ρ̂| drops below 2/√K.  A negative sum is
// clamped to zero (antithetic traces), a constant trace yields NaN; both
// set the flags so callers can warn.
struct InefficiencyResult {
    double value = 0.0;
    int lags = 0;
    bool clamped = false;
    bool undefined = false;
};

InefficiencyResult inefficiency(std::span<const double> trace);

// ECT = 10 · IF · t (t = seconds per iteration): time to match the accuracy
// of ten independent draws.
double ect(double inefficiency_factor, double seconds_per_iteration);

double acceptance_rate(std::span<const char> accepted);

struct ParameterSummary {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
    double inefficiency = 0.0;  // NaN when undefined
    bool if_clamped = false;
};

struct ChainDiagnostics {
    double acceptance_percent = 0.0;  // over the full run
    std::vector<ParameterSummary> parameters;
    double if_min = 0.0;  // over parameters with a defined IF
    double if_median = 0.0;
    double if_max = 0.0;
    double seconds_per_iteration = 0.0;
    double ect_median = 0.0;  // 10 · median IF · seconds per iteration
    long draws_used = 0;      // rows kept after burn-in
    long warnings = 0;        // clamped or undefined inefficiencies
};

// Posterior summaries and mixing measures; IF and moments are computed on
// the post-burn-in rows, the acceptance percentage on the whole run.
ChainDiagnostics summarize_chain(const RunRecord& record, double burn_fraction = 0.1);

}  // namespace pmmh
