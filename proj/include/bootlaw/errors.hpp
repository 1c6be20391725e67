#pragma once

#include <stdexcept>
#include <string>

namespace bootlaw {

/// Base class for every error thrown by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Wrong parameter set for a family (missing/extra names, arity mismatch).
struct param_error : error {
    using error::error;
};

/// Input value outside the modeled domain (coordinate < 1e6 tokens,
/// non-positive loss, bad fraction, ...).
struct domain_error : error {
    using error::error;
};

/// File and parse failures; messages carry line/column where known.
struct io_error : error {
    using error::error;
};

/// Optimization failed outright: no start converged (message carries the
/// per-start diagnostics), or a leave-one-out sub-fit failed (message names
/// the held-out index).
struct fit_error : error {
    using error::error;
};

/// Trend regression cannot run: too few slices, too few points in a slice,
/// or a singular design (all abscissae identical).
struct regression_error : error {
    using error::error;
};

/// Root finding failed: no sign change in the bracket, or the two curves
/// are numerically indistinguishable (degenerate).
struct root_error : error {
    using error::error;
};

/// The target loss lies at or below the reference curve's asymptote, so no
/// finite token budget reaches it.
struct unreachable_error : root_error {
    using root_error::root_error;
};

/// Data-scaling benefit has saturated: the effective exponent is not
/// positive, so a compute-optimal allocation does not exist.
struct saturation_error : error {
    saturation_error(const std::string& what, double alpha_eff_value)
        : error(what), alpha_eff(alpha_eff_value) {}
    double alpha_eff; // the offending value, sign included
};

} // namespace bootlaw
