#pragma once

#include <stdexcept>
#include <string>

namespace mmdmix {

// Bad configuration: unknown keys, out-of-range values, shape mismatches.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A runtime operation contract was broken (unavailable action, non-finite
// loss, dimension mismatch between prepared pieces, ...).
struct ContractViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / serialization failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mmdmix
