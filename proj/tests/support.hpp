#pragma once

// Shared helpers for the unit suite: fixture paths, relative-error checks,
// random parameter draws for property tests, and canned parameter sets used
// across files.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "bootlaw/forms.hpp"
#include "bootlaw/rng.hpp"

namespace testutil {

inline std::string fixture(const std::string& name) {
    return std::string(BOOTLAW_FIXTURE_DIR) + "/" + name;
}

/// |a - b| scaled by max(1, |a|, |b|): behaves like absolute error near zero
/// and relative error for large magnitudes.
inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline bool close(double a, double b, double tol) { return rel_diff(a, b) <= tol; }

/// Grown two-stage law coefficients used as a realistic anchor throughout the
/// tests (same values as fixtures/stack_growth.json).
inline bootlaw::ParamVector stack_params() {
    return bootlaw::ParamVector::from_linear({{"A", 33.394},
                                              {"alpha1", 0.087},
                                              {"alpha2", 0.119},
                                              {"alpha3", 0.003},
                                              {"B", 22.471},
                                              {"beta", 0.173},
                                              {"E", 0.041}});
}

/// Single-stage law coefficients matching fixtures/base_web.json.
inline bootlaw::ParamVector base_params() {
    return bootlaw::ParamVector::from_linear(
        {{"A", 10.383}, {"alpha", 0.092}, {"B", 10.085}, {"beta", 0.105}, {"E", 0.041}});
}

/// Random but well-scaled parameters for a family: exponents in (0.02, 1.2),
/// interaction exponent in (0, 0.03), scales spanning e^-1..e^4, floor below 1.
inline bootlaw::ParamVector random_params(bootlaw::Family family, std::mt19937_64& rng) {
    bootlaw::ParamVector p;
    for (auto name : bootlaw::traits(family).params) {
        double value;
        if (name == "E") {
            value = bootlaw::uniform(rng, -3.0, 0.5);
        } else if (name == "A" || name == "B" || name == "F") {
            value = bootlaw::uniform(rng, -1.0, 4.0);
        } else if (name == "alpha3") {
            value = bootlaw::uniform(rng, 0.0, 0.03);
        } else {
            value = bootlaw::uniform(rng, 0.02, 1.2);
        }
        p.set_internal(name, value);   // scales set in ln units on purpose
    }
    return p;
}

inline bootlaw::EvalPoint random_point(std::mt19937_64& rng) {
    auto draw = [&rng](double lo_log10, double hi_log10) {
        return std::pow(10.0, bootlaw::uniform(rng, lo_log10, hi_log10));
    };
    return {draw(7, 13), draw(7, 13), draw(7, 12)};
}

} // namespace testutil
