#pragma once

#include <string>
#include <vector>

#include "pmmh/chain.hpp"

namespace pmmh {

// One observed series plus named covariate columns, as loaded from CSV.
struct Dataset {
    std::vector<double> y;
    std::vector<std::string> covariate_names;
    std::vector<std::vector<double>> covariates;  // parallel to covariate_names

    const std::vector<double>& covariate(const std::string& name) const;
};

// CSV with a header row; the "y" column is required, every other column
// becomes a covariate.  Cells must parse as finite numbers.
Dataset load_dataset(const std::string& path);

void write_dataset_csv(const std::string& path, const Dataset& data);

// Count-data gate: every y must be a nonnegative integer; violations are
// reported with their 1-based row number.
void require_counts(const Dataset& data);

// Columns: free parameters, loglik, logprior, accepted.  Values are printed
// with full precision so identical runs produce identical bytes.
void write_draws_csv(const std::string& path, const RunRecord& record);

// Minimal static SVG emitters for run reports.
void write_trace_svg(const std::string& path, const std::vector<double>& values,
                     const std::string& title);
void write_histogram_svg(const std::string& path, const std::vector<double>& values, int bins,
                         const std::string& title);
// Filtered-state band: center line with a shaded lower/upper envelope.
void write_band_svg(const std::string& path, const std::vector<double>& center,
                    const std::vector<double>& lower, const std::vector<double>& upper,
                    const std::string& title);

}  // namespace pmmh
