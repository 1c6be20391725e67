#pragma once

#include <vector>

#include "bootlaw/forms.hpp"

namespace bootlaw {

/// Standard training-compute estimate C = 6 * n * d.  The second stage of a
/// 2x-grown model runs at size 2*n1, so its cost is 12 * n1 * d2.
double flops(double n, double d);

struct BreakEvenResult {
    double n = 0;                  // model size the question was asked for
    double d_star = 0;             // first crossing (tokens)
    double residual = 0;           // |ln L_scratch - ln L_grown| at d_star
    double bracket_lo = 0;
    double bracket_hi = 0;
    std::vector<double> crossings; // every crossing found in the bracket
};

/// Token budget D* where training a 2n model from scratch on D* tokens
/// matches a grown model (size n, d1 = d2 = D*):  400-point log-space scan of
/// ln L_scratch(D, 2n) - ln L_grown(D, D, n), then bisection of each sign
/// change to relative width 1e-6.  First crossing is returned; all are kept.
/// scratch carries chinchilla-shaped params, grown joint-cpt-shaped ones.
/// Throws root_error when no crossing exists (message reports the gap at both
/// ends, and calls out the degenerate identical-curve case).
BreakEvenResult break_even(const ParamVector& scratch, const ParamVector& grown, double n,
                           double bracket_lo = 1e9, double bracket_hi = 1e18);

/// Closed-form approximation of the same crossing:
///   D* = 13e12 * (n / 1e11)^(-0.6 - 0.04 * ln(n / 1e11)) tokens.
double break_even_analytic(double n);

/// From-scratch tokens D with L_scratch(D, n) equal to the bootstrapped loss
/// L_boot(d1, d2, n); scratch is chinchilla-shaped, boot joint-cpt-shaped.
/// Throws unreachable_error when the target sits at or below the scratch
/// law's asymptote B * n^(-beta) + E, or needs more than 1e40 tokens.
double catch_up_tokens(const ParamVector& scratch, const ParamVector& boot, double d1,
                       double d2, double n);

/// One row of the interaction-exponent sensitivity sweep around alpha3.
struct CatchUpPoint {
    double alpha3 = 0;
    double d = 0;            // catch-up tokens; meaningful iff reachable
    bool reachable = false;
};

/// catch_up_tokens at alpha3 - delta, alpha3, alpha3 + delta.  The crossover
/// location can move by orders of magnitude within the last rounded digit of
/// alpha3, so any report of it should carry this context.
std::vector<CatchUpPoint> catch_up_sensitivity(const ParamVector& scratch,
                                               const ParamVector& boot, double d1, double d2,
                                               double n, double delta = 5e-4);

enum class AllocationMode { cpt, growth };

struct AllocationResult {
    double c2 = 0;           // second-stage budget (FLOPs)
    double d2_opt = 0;       // tokens
    double n_opt = 0;        // growth: pre-growth size n1; cpt: co-optimized n
    AllocationMode mode = AllocationMode::growth;
    double a = 0;            // d2_opt ~ c2^a
    double b = 0;            // n_opt  ~ c2^b
    double g_const = 0;      // the prefactor G
    double alpha_eff = 0;
};

/// Compute-optimal split of a second-stage budget c2 at sunk cost d1, for
/// joint-cpt-shaped params:
///   alpha_eff = alpha2 - alpha3 ln d1,  A_eff = A * d1^(-alpha1),
///   G = (A_eff * alpha_eff / (B * beta))^(1 / (alpha_eff + beta)),
///   a = beta / (alpha_eff + beta),  b = alpha_eff / (alpha_eff + beta),
///   d2_opt = G * (c2 / div)^a,  n_opt = (1/G) * (c2 / div)^b
/// with div = 12 in growth mode (second stage runs at 2*n1) and 6 in cpt mode.
/// Throws saturation_error when alpha_eff <= 0 (no interior optimum).
AllocationResult optimal_allocation(const ParamVector& params, double d1, double c2,
                                    AllocationMode mode);

} // namespace bootlaw
