#include "bootlaw/decision.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace bootlaw {

namespace {

constexpr int kScanPoints = 400;
constexpr int kMaxBisection = 200;

void check_positive(const char* name, double value) {
    if (!(value > 0) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << name << " must be positive and finite, got " << value;
        throw domain_error(msg.str());
    }
}

/// Bisect g on [x_lo, x_hi] (log-token units) given g(x_lo) and g(x_hi) of
/// opposite sign; refines until the interval is below `width` and the
/// midpoint residual below 1e-9 (or the iteration cap).
double bisect(const std::function<double(double)>& g, double x_lo, double x_hi, double g_lo,
              double width) {
    double mid = 0.5 * (x_lo + x_hi);
    for (int i = 0; i < kMaxBisection; ++i) {
        mid = 0.5 * (x_lo + x_hi);
        const double g_mid = g(mid);
        if (x_hi - x_lo < width && std::abs(g_mid) < 1e-9) break;
        if (x_hi - x_lo < 1e-15) break;   // machine-precision floor
        if ((g_lo < 0) == (g_mid < 0)) {
            x_lo = mid;
            g_lo = g_mid;
        } else {
            x_hi = mid;
        }
    }
    return mid;
}

} // namespace

double flops(double n, double d) {
    check_positive("n", n);
    check_positive("d", d);
    return 6.0 * n * d;
}

BreakEvenResult break_even(const ParamVector& scratch, const ParamVector& grown, double n,
                           double bracket_lo, double bracket_hi) {
    auto scratch_packed = scratch.pack(Family::chinchilla);
    auto grown_packed = grown.pack(Family::joint_cpt);
    check_positive("n", n);
    if (!(bracket_lo >= kMinCoordinate) || !(bracket_hi > bracket_lo)) {
        throw domain_error("break-even bracket must satisfy 1e6 <= lo < hi");
    }

    const double ln_2n = std::log(2.0 * n);
    const double ln_n = std::log(n);
    // The question compares a 2n model trained from scratch on D tokens with
    // an n-before-growth model at d1 = d2 = D.
    auto gap = [&](double x) {
        LogPoint scratch_pt{x, 0.0, ln_2n};
        LogPoint grown_pt{x, x, ln_n};
        return log_predict_lse(Family::chinchilla, scratch_packed.data(), scratch_pt) -
               log_predict_lse(Family::joint_cpt, grown_packed.data(), grown_pt);
    };

    const double x_lo = std::log(bracket_lo);
    const double x_hi = std::log(bracket_hi);

    std::vector<double> xs(kScanPoints), gs(kScanPoints);
    double max_abs = 0.0;
    for (int i = 0; i < kScanPoints; ++i) {
        xs[i] = x_lo + (x_hi - x_lo) * static_cast<double>(i) / (kScanPoints - 1);
        gs[i] = gap(xs[i]);
        max_abs = std::max(max_abs, std::abs(gs[i]));
    }
    if (max_abs < 1e-12) {
        throw root_error(
            "break-even is degenerate: the two laws are numerically identical over the whole "
            "bracket (gap never leaves +/-1e-12), so no crossing exists");
    }

    BreakEvenResult result;
    result.n = n;
    result.bracket_lo = bracket_lo;
    result.bracket_hi = bracket_hi;

    std::function<double(double)> g = gap;
    for (int i = 0; i + 1 < kScanPoints; ++i) {
        if (gs[i] == 0.0) {
            result.crossings.push_back(std::exp(xs[i]));
            continue;
        }
        if ((gs[i] < 0) != (gs[i + 1] < 0)) {
            const double x = bisect(g, xs[i], xs[i + 1], gs[i], 1e-6);
            result.crossings.push_back(std::exp(x));
        }
    }
    if (gs[kScanPoints - 1] == 0.0) result.crossings.push_back(bracket_hi);

    if (result.crossings.empty()) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "no break-even crossing in [" << bracket_lo << ", " << bracket_hi
            << "] tokens: log-loss gap (scratch - grown) is " << gs.front()
            << " at the low end and " << gs.back() << " at the high end";
        throw root_error(msg.str());
    }

    result.d_star = result.crossings.front();
    result.residual = std::abs(gap(std::log(result.d_star)));
    return result;
}

double break_even_analytic(double n) {
    check_positive("n", n);
    const double ratio = n / 1e11;
    return 13e12 * std::pow(ratio, -0.6 - 0.04 * std::log(ratio));
}

double catch_up_tokens(const ParamVector& scratch, const ParamVector& boot, double d1,
                       double d2, double n) {
    auto scratch_packed = scratch.pack(Family::chinchilla);
    (void)boot.pack(Family::joint_cpt);

    const double target_linear = predict_loss(Family::joint_cpt, boot, {d1, d2, n});
    const double asymptote =
        scratch.linear("B") * std::pow(n, -scratch.linear("beta")) + scratch.linear("E");
    if (target_linear <= asymptote) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "catch-up is unreachable: bootstrapped loss " << target_linear
            << " is at or below the from-scratch asymptote B*n^(-beta)+E = " << asymptote
            << " at n = " << n;
        throw unreachable_error(msg.str());
    }

    const double target = std::log(target_linear);
    const double ln_n = std::log(n);
    auto gap = [&](double x) {
        return log_predict_lse(Family::chinchilla, scratch_packed.data(), LogPoint{x, 0.0, ln_n}) -
               target;
    };

    // The scratch law is strictly decreasing in D, so the gap falls from
    // positive (tiny budgets lose) through zero.
    double x_lo = std::log(kMinCoordinate);
    double g_lo = gap(x_lo);
    if (g_lo < 0) {
        std::ostringstream msg;
        msg << "catch-up point lies below " << kMinCoordinate
            << " tokens, outside the modeled domain";
        throw domain_error(msg.str());
    }

    double x_hi = std::log(std::max(1e13, 10.0 * d2));
    constexpr double ln_cap = 92.1034037197618;   // ln 1e40
    while (gap(x_hi) > 0) {
        x_hi += 6.907755278982137;   // one factor of 1e3
        if (x_hi > ln_cap) {
            throw unreachable_error(
                "catch-up needs more than 1e40 tokens; the target loss is within "
                "numerical noise of the from-scratch asymptote");
        }
    }

    std::function<double(double)> g = gap;
    const double x = bisect(g, x_lo, x_hi, g_lo, 1e-12);
    return std::exp(x);
}

std::vector<CatchUpPoint> catch_up_sensitivity(const ParamVector& scratch,
                                               const ParamVector& boot, double d1, double d2,
                                               double n, double delta) {
    if (!(delta >= 0) || !std::isfinite(delta)) {
        throw domain_error("sensitivity delta must be non-negative");
    }
    const double center = boot.internal("alpha3");
    std::vector<CatchUpPoint> rows;
    for (double alpha3 : {center - delta, center, center + delta}) {
        ParamVector perturbed = boot;
        perturbed.set_internal("alpha3", alpha3);
        CatchUpPoint row;
        row.alpha3 = alpha3;
        try {
            row.d = catch_up_tokens(scratch, perturbed, d1, d2, n);
            row.reachable = true;
        } catch (const root_error&) {
            row.reachable = false;
        }
        rows.push_back(row);
    }
    return rows;
}

AllocationResult optimal_allocation(const ParamVector& params, double d1, double c2,
                                    AllocationMode mode) {
    (void)params.pack(Family::joint_cpt);
    check_positive("c2", c2);

    const EffectiveExponent eff = effective_exponent(params, d1);
    if (eff.saturated) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "data scaling has saturated at d1 = " << d1 << ": effective exponent "
            << eff.value << " is not positive, so no compute-optimal split exists";
        throw saturation_error(msg.str(), eff.value);
    }
    const double beta = params.internal("beta");
    if (!(beta > 0)) {
        std::ostringstream msg;
        msg << "allocation requires beta > 0, got " << beta;
        throw domain_error(msg.str());
    }

    const double alpha_eff = eff.value;
    // Everything in log space: A_eff = A * d1^(-alpha1) spans many decades.
    const double ln_a_eff = params.internal("A") - params.internal("alpha1") * std::log(d1);
    const double ln_g = (ln_a_eff + std::log(alpha_eff) - params.internal("B") -
                         std::log(beta)) /
                        (alpha_eff + beta);

    AllocationResult result;
    result.c2 = c2;
    result.mode = mode;
    result.alpha_eff = alpha_eff;
    result.a = beta / (alpha_eff + beta);
    result.b = alpha_eff / (alpha_eff + beta);
    result.g_const = std::exp(ln_g);

    const double divisor = mode == AllocationMode::growth ? 12.0 : 6.0;
    const double ln_budget = std::log(c2 / divisor);
    result.d2_opt = std::exp(ln_g + result.a * ln_budget);
    result.n_opt = std::exp(-ln_g + result.b * ln_budget);
    return result;
}

} // namespace bootlaw
