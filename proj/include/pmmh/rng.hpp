#pragma once

#include <cstdint>
#include <random>

namespace pmmh {

using Rng = std::mt19937_64;

// splitmix64 step; used to derive well-separated substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4a68ca465c71ULL;
    return z ^ (z >> 31);
}

// Deterministic seed for a named substream.  Every random draw in the toolkit
// comes from an Rng seeded through here, so a run is a pure function of the
// master seed regardless of thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s ^= stream * 0xd1342543de82ef95ULL;
    h ^= splitmix64(s);
    s ^= a * 0xaf251af3b0f025b5ULL + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b * 0x2545f4914f6cdd1dULL + 0x6a09e667f3bcc909ULL;
    h ^= splitmix64(s);
    return h;
}

// Named substreams hanging off one master seed.  Keeping the tags in one place
// makes collisions impossible to introduce by accident.
namespace stream {
inline constexpr std::uint64_t kProposal = 1;      // (block, worker)
inline constexpr std::uint64_t kFilter = 2;        // (candidate index)
inline constexpr std::uint64_t kAccept = 3;        // chain-level accept/reject uniforms
inline constexpr std::uint64_t kInit = 4;          // starting point draws
inline constexpr std::uint64_t kPrelim = 5;        // sub-master for the pilot chain
inline constexpr std::uint64_t kRefit = 6;         // EM restarts / k-means inits
inline constexpr std::uint64_t kSimulate = 7;      // forward simulation
inline constexpr std::uint64_t kEvidenceDraw = 8;  // proposal draws for evidence
inline constexpr std::uint64_t kEvidenceFilter = 9;// filter seeds for those draws
inline constexpr std::uint64_t kWorker = 10;       // averaged-likelihood workers
inline constexpr std::uint64_t kReplicate = 11;    // per-replicate master seeds
} // namespace stream

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

} // namespace pmmh
