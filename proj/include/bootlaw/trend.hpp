#pragma once

#include <vector>

#include "bootlaw/dataset.hpp"
#include "bootlaw/fit.hpp"

namespace bootlaw {

/// One per-d1 slice: a 1-D power law A * d2^(-alpha) + E fitted to the
/// records sharing (within 0.1%) a first-stage token count.
struct SliceFit {
    double d1 = 0;
    double A = 0;          // linear space
    double alpha = 0;
    double E = 0;          // linear space
    double objective = 0;
    int n_points = 0;
};

/// The two straight lines the slice table supports:
///   exponent trend   -alpha(d1) = gamma * ln d1 + e_prime
///   factor trend      ln A(d1)  = ln a0 - alpha1 * ln d1
/// Both are ordinary least squares; each slice fits its own floor E (recorded
/// as per_slice_e in serialized output).
struct TrendLines {
    double gamma = 0;
    double e_prime = 0;
    double exponent_r2 = 0;
    std::vector<double> exponent_residuals;

    double a0 = 0;         // linear space
    double alpha1 = 0;
    double factor_r2 = 0;
    std::vector<double> factor_residuals;
};

/// Group records by d1 (0.1% relative tolerance — checkpoint token counts may
/// differ by a batch), fit a 1-D power law in d2 to each group, ascending d1.
/// Needs >= 3 groups of >= 4 points; the error names the deficient group.
/// To slice along d2 instead, swap coordinates first (swap_d1_d2 below).
std::vector<SliceFit> slice_fit_by_d1(const Dataset& data, const FitConfig& config = {});

/// Coordinate-swapped copy, for slicing the other axis with the same code.
Dataset swap_d1_d2(const Dataset& data);

/// OLS of -alpha against ln d1 over the slices: returns gamma (slope),
/// e_prime (intercept), r^2, residuals.  Needs >= 3 slices with distinct d1.
void exponent_trend(const std::vector<SliceFit>& slices, TrendLines& out);

/// OLS of ln A against ln d1: alpha1 is minus the slope, a0 = exp(intercept).
/// Needs >= 3 slices, all A > 0.
void factor_trend(const std::vector<SliceFit>& slices, TrendLines& out);

/// Convenience: both trends in one call.
TrendLines trend_lines(const std::vector<SliceFit>& slices);

} // namespace bootlaw
