#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bootlaw/dataset.hpp"
#include "bootlaw/forms.hpp"

namespace bootlaw {

/// Start values for the multistart sweep, one list per parameter kind.
/// Scale entries are in ln units.  The defaults bracket every coefficient
/// magnitude we have seen reported for laws of this shape.
struct MultistartGrid {
    std::vector<double> exponent_values = {0.05, 0.2, 0.5, 1.0};   // alpha*, beta
    std::vector<double> alpha3_values = {0.0, 0.01, 0.03};
    std::vector<double> ln_scale_values = {0.0, 1.0, 2.0, 3.0};    // ln A, ln B, ln F
    std::vector<double> ln_e_values = {-3.0, -2.0, -1.0, 0.0};     // ln E
    /// When the cross product exceeds this, a low-discrepancy (Halton)
    /// subsample of combinations is used instead, deterministically.
    std::size_t max_starts = 2000;
};

struct FitConfig {
    double huber_delta = 1e-3;
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;
    MultistartGrid grid;
    /// Reserved for stochastic tie-breaking; the current implementation is
    /// fully deterministic and never draws from it.
    std::uint64_t seed = 0;
    /// Warm starts tried in addition to (or instead of) the grid.
    std::vector<ParamVector> extra_starts;
    bool include_grid_starts = true;
};

/// One optimizer run.  `initial` is in packed internal units.
struct StartRecord {
    std::vector<double> initial;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct FitResult {
    Family family = Family::power_law_1d;
    ParamVector params;
    double objective = 0.0;
    std::vector<StartRecord> starts;
    int best_start = -1;            // index into starts
    bool best_converged = false;    // whether that start met the gradient tolerance
    std::optional<double> loo_rms;
    /// Rank-deficiency notes (constant losses, single distinct coordinate...).
    std::vector<std::string> warnings;
};

/// Huber penalty: (1/2) r^2 inside |r| <= delta, delta * (|r| - delta/2)
/// outside; C1 at the knee.
double huber(double residual, double delta);

/// Sum over records, in record order, of huber(ln loss_i - predicted ln loss_i).
double huber_objective(Family family, const ParamVector& params, const Dataset& data,
                       double delta);

/// Multistart quasi-Newton fit.  Every start's endpoint enters the argmin,
/// converged or not (stalled line searches near the Huber knee routinely sit
/// on excellent points); ties break toward the lower start index, so the
/// result is deterministic for a fixed config.  Throws fit_error (with all
/// per-start diagnostics in the message) only when no start converges.
FitResult fit(Family family, const Dataset& data, const FitConfig& config = {});

/// Exact leave-one-out RMS of log-loss prediction errors: n refits, each
/// warm-started from the full-data solution in addition to the regular grid.
double loo_rms(Family family, const Dataset& data, const FitConfig& config = {});

/// fit() + loo_rms() with the full-data solution reused as the warm start.
FitResult fit_with_loo(Family family, const Dataset& data, const FitConfig& config = {});

struct ComparisonRow {
    Family family = Family::power_law_1d;
    bool ok = false;
    double loo_rms = 0.0;
    double objective = 0.0;
    std::size_t free_params = 0;
    ParamVector params;
    std::string error;   // set when ok == false
};

/// Fits and LOO-scores every family, ascending by LOO RMS; ties within 1e-9
/// go to the family with fewer free parameters.  Per-family failures land at
/// the bottom of the table with their error text, never throw.
std::vector<ComparisonRow> compare_forms(const Dataset& data,
                                         const std::vector<Family>& families,
                                         const FitConfig& config = {});

} // namespace bootlaw
