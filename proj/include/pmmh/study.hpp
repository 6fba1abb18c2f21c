#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pmmh/config.hpp"
#include "pmmh/diagnostics.hpp"
#include "pmmh/evidence.hpp"

namespace pmmh {

// Replicate 0 runs under the master seed itself so a single-replicate study
// is byte-identical to a plain run_chain; later replicates derive their own.
std::uint64_t replicate_seed(std::uint64_t master, int replicate);

struct ReplicateArtifacts {
    std::string directory;
    std::uint64_t seed = 0;
    ChainDiagnostics diagnostics;
    std::optional<EvidenceEstimate> evidence;
    long prior_rejects = 0;
    long filter_failures = 0;
    long sampler_warnings = 0;
};

struct StudyResult {
    std::vector<ReplicateArtifacts> replicates;
    std::string table_path;
};

// Runs every replicate, writing per-replicate draws.csv / summary.json
// (plus plots when enabled) and one aggregate table.md.
StudyResult run_study(const AppConfig& app, const Dataset& data, std::ostream& log);

std::string summary_json_text(const AppConfig& app, const ReplicateArtifacts& rep);

void write_table_md(const std::string& path, const AppConfig& app,
                    const std::vector<ReplicateArtifacts>& reps);

struct Comparison {
    double log_bf_bs = 0.0;  // log evidence difference, bridge estimates
    double log_bf_is = 0.0;
};

// Log Bayes factor of two written summary.json files (first minus second).
Comparison compare_summaries(const std::string& path_a, const std::string& path_b);

// Battery of self-checks against the exact oracles; prints one line per
// check and returns false if any fails.
bool verify_oracles(std::ostream& out);

}  // namespace pmmh
