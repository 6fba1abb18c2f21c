#pragma once

#include <stdexcept>
#include <string>

namespace pmmh {

// Bad user input: malformed config, unknown preset, shape mismatches.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// NaN/Inf escaped a numerical routine where the contract forbids it.
// `time_index` is the 1-based observation index when the failure is tied to a
// filter step, 0 otherwise.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what, int time_index = 0)
        : std::runtime_error(what), time_index(time_index) {}
    int time_index;
};

} // namespace pmmh
