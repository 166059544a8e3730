#pragma once

#include <iosfwd>
#include <string>

namespace mmdmix {

struct SelftestOptions {
    // Test hook: runs the monotonicity suite with the mixing-weight
    // transform's sign flipped, which must make that suite fail.
    bool fault_flip_abs = false;
};

struct SelftestReport {
    bool ok = true;
    std::string failed_property;
    double worst_grad_rel_err = 0.0;
};

/// Runs the kernel identities, REM properties, gradient checks, monotonicity
/// probes and the IGM enumeration; prints one line per suite plus the worst
/// observed gradient-check error.
SelftestReport run_selftest(std::ostream& out, const SelftestOptions& opts = {});

} // namespace mmdmix
