#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bootlaw/dataset.hpp"
#include "bootlaw/fit.hpp"
#include "bootlaw/trend.hpp"

namespace bootlaw {

/// CSV schema: header `d1_tokens,d2_tokens,n_params,loss[,tag]`, one run per
/// row, '.' decimals, scientific notation fine.  All numerics must be finite
/// and positive; duplicate (d1, d2, n, tag) rows are rejected (the error names
/// both lines).  Records come back in file order.
Dataset load_runs(const std::string& path);

/// Inverse of load_runs: writes all five columns with 17 significant digits,
/// so a load/save round trip preserves every double bit-for-bit.
void save_runs(const Dataset& data, const std::string& path);

/// (train, holdout): the ceil(fraction * n) LOWEST-loss records are held out
/// for validation, ties broken by file order; both halves keep file order.
std::pair<Dataset, Dataset> split_validation(const Dataset& data, double fraction);

/// One log-spaced grid axis, endpoints inclusive; count == 1 pins the axis
/// at `lo`.
struct GridAxis {
    int count = 1;
    double lo = 1e8;
    double hi = 1e8;
};

/// Recipe for a synthetic dataset: the test oracle for the whole fit stack.
struct SynthSpec {
    Family family = Family::mul_interaction;
    ParamVector truth;
    GridAxis d1;
    GridAxis d2;
    GridAxis n;                  // defaults to a single 1e8 point
    double noise_sigma = 0;      // stddev of Gaussian noise on ln loss
    double jitter = 0;           // +/- log-units of uniform grid jitter
    std::uint64_t seed = 0;
    std::string tag = "synth";
};

/// loss = predict_loss(point) * exp(eps), eps ~ N(0, sigma^2).  Grid order is
/// row-major d1 > d2 > n; draws happen in a fixed order (3 jitter uniforms per
/// point when jitter > 0, then 1 normal when sigma > 0), so a seed pins the
/// dataset bit-exactly on any platform.
Dataset synth_dataset(const SynthSpec& spec);

/// TSV emitters: '#'-prefixed header comments, 12 significant digits,
/// deterministic row order.  All throw io_error if the path won't open.
void emit_plot_data(const std::vector<SliceFit>& slices, const std::string& path);
void emit_plot_data(const TrendLines& lines, const std::string& path);
/// Per-record (observed ln loss, predicted ln loss, residual) rows.
void emit_plot_data(const FitResult& fit, const Dataset& data, const std::string& path);
/// Free-form sweep table; `columns` names every entry of each row.
void emit_sweep(const std::vector<std::vector<double>>& rows,
                const std::vector<std::string>& columns, const std::string& path);

} // namespace bootlaw
