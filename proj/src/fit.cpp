#include "bootlaw/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>

#include "bootlaw/bfgs.hpp"

namespace bootlaw {

namespace {

/// Dataset flattened for the optimizer: validation and log-taking happen once,
/// so the per-iteration inner loop touches only plain arrays.
struct Prepared {
    Family family;
    int dim = 0;
    double delta = 0.0;
    std::vector<LogPoint> points;
    std::vector<double> ln_loss;
};

Prepared prepare(Family family, const Dataset& data, double delta,
                 std::size_t min_records) {
    if (!(delta > 0) || !std::isfinite(delta)) {
        throw domain_error("huber delta must be positive and finite");
    }
    if (data.size() < min_records) {
        std::ostringstream msg;
        msg << "family '" << traits(family).id << "' needs at least " << min_records
            << " records, got " << data.size();
        throw domain_error(msg.str());
    }
    Prepared prep;
    prep.family = family;
    prep.dim = static_cast<int>(arity(family));
    prep.delta = delta;
    prep.points.reserve(data.size());
    prep.ln_loss.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const RunRecord& r = data.records[i];
        if (!std::isfinite(r.loss) || r.loss <= 0) {
            std::ostringstream msg;
            msg << "record #" << i << ": loss must be a positive finite number, got " << r.loss;
            throw domain_error(msg.str());
        }
        try {
            prep.points.push_back(to_log_point(family, {r.d1, r.d2, r.n}));
        } catch (const domain_error& e) {
            std::ostringstream msg;
            msg << "record #" << i << ": " << e.what();
            throw domain_error(msg.str());
        }
        prep.ln_loss.push_back(std::log(r.loss));
    }
    return prep;
}

double huber_derivative(double r, double delta) {
    if (std::abs(r) <= delta) return r;
    return r > 0 ? delta : -delta;
}

/// Objective (and optionally gradient) over the prepared records.
double eval_objective(const Prepared& prep, const double* p, double* grad) {
    const int d = prep.dim;
    if (grad) std::fill(grad, grad + d, 0.0);
    double obj = 0.0;
    double gbuf[kMaxArity];
    const std::size_t n = prep.points.size();
    for (std::size_t i = 0; i < n; ++i) {
        double predicted;
        if (grad) {
            predicted = log_predict_grad(prep.family, p, prep.points[i], gbuf);
        } else {
            predicted = log_predict_lse(prep.family, p, prep.points[i]);
        }
        const double r = prep.ln_loss[i] - predicted;
        obj += huber(r, prep.delta);
        if (grad) {
            // d/dp huber(lnL - pred) = huber'(r) * (-d pred / dp)
            const double w = huber_derivative(r, prep.delta);
            for (int j = 0; j < d; ++j) grad[j] -= w * gbuf[j];
        }
    }
    return obj;
}

const std::vector<double>& values_for_param(std::string_view name, const MultistartGrid& grid) {
    if (name == "E") return grid.ln_e_values;
    if (name == "A" || name == "B" || name == "F") return grid.ln_scale_values;
    if (name == "alpha3") return grid.alpha3_values;
    return grid.exponent_values;   // alpha, alpha1, alpha2, beta
}

double halton(std::size_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

std::vector<std::vector<double>> grid_starts(Family family, const MultistartGrid& grid) {
    const auto& names = traits(family).params;
    const int d = static_cast<int>(names.size());
    std::vector<const std::vector<double>*> axes(d);
    std::size_t total = 1;
    for (int j = 0; j < d; ++j) {
        axes[j] = &values_for_param(names[j], grid);
        if (axes[j]->empty()) throw domain_error("multistart grid has an empty value list");
        total *= axes[j]->size();
    }

    std::vector<std::vector<double>> starts;
    if (total <= grid.max_starts) {
        starts.reserve(total);
        std::vector<std::size_t> idx(d, 0);
        for (std::size_t k = 0; k < total; ++k) {
            std::vector<double> x(d);
            for (int j = 0; j < d; ++j) x[j] = (*axes[j])[idx[j]];
            starts.push_back(std::move(x));
            for (int j = d - 1; j >= 0; --j) {   // odometer, last axis fastest
                if (++idx[j] < axes[j]->size()) break;
                idx[j] = 0;
            }
        }
        return starts;
    }

    // Low-discrepancy subsample of the combination lattice: Halton points
    // snapped to axis indices, deduplicated, fully deterministic.
    static constexpr int primes[kMaxArity] = {2, 3, 5, 7, 11, 13, 17};
    std::set<std::vector<std::size_t>> seen;
    starts.reserve(grid.max_starts);
    const std::size_t give_up = 50 * grid.max_starts;
    for (std::size_t k = 1; k <= give_up && starts.size() < grid.max_starts; ++k) {
        std::vector<std::size_t> idx(d);
        for (int j = 0; j < d; ++j) {
            const auto size = axes[j]->size();
            auto cell = static_cast<std::size_t>(halton(k, primes[j]) * static_cast<double>(size));
            idx[j] = std::min(cell, size - 1);
        }
        if (!seen.insert(idx).second) continue;
        std::vector<double> x(d);
        for (int j = 0; j < d; ++j) x[j] = (*axes[j])[idx[j]];
        starts.push_back(std::move(x));
    }
    return starts;
}

/// Count clusters of values treated as equal within 0.1% relative.
std::size_t distinct_clusters(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::size_t clusters = values.empty() ? 0 : 1;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[i - 1] * (1.0 + 1e-3)) ++clusters;
    }
    return clusters;
}

std::vector<std::string> degeneracy_warnings(Family family, const Dataset& data) {
    std::vector<std::string> warnings;

    double lo = data.records.front().loss, hi = lo;
    for (const auto& r : data.records) {
        lo = std::min(lo, r.loss);
        hi = std::max(hi, r.loss);
    }
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
        warnings.push_back(
            "all losses are identical: only the floor E is identifiable; "
            "reducible-term coefficients are driven toward zero");
    }

    const auto& t = traits(family);
    struct Axis {
        const char* name;
        bool read;
        double RunRecord::*field;
        const char* exponents;
    };
    const bool interacting = family == Family::mul_interaction || family == Family::joint_cpt;
    const Axis axes[] = {
        {"d1", t.reads_d1, &RunRecord::d1,
         family == Family::sum_form || family == Family::chinchilla
             ? "alpha"
             : (interacting ? "alpha1, alpha3" : "alpha1")},
        {"d2", t.reads_d2, &RunRecord::d2,
         family == Family::power_law_1d || family == Family::sum_form ? "alpha"
             : (interacting ? "alpha2, alpha3" : "alpha2")},
        {"n", t.reads_n, &RunRecord::n, "beta"},
    };
    for (const auto& axis : axes) {
        if (!axis.read) continue;
        std::vector<double> values;
        values.reserve(data.size());
        for (const auto& r : data.records) values.push_back(r.*(axis.field));
        if (distinct_clusters(std::move(values)) < 2) {
            std::ostringstream msg;
            msg << "coordinate " << axis.name
                << " takes a single distinct value: not identifiable: " << axis.exponents;
            warnings.push_back(msg.str());
        }
    }
    return warnings;
}

std::string describe_failed_starts(Family family, const std::vector<StartRecord>& starts) {
    std::ostringstream msg;
    msg << "no start converged fitting family '" << traits(family).id << "' (" << starts.size()
        << " starts); per-start diagnostics (initial -> objective, iterations):";
    const std::size_t shown = std::min<std::size_t>(starts.size(), 25);
    msg.precision(6);
    for (std::size_t i = 0; i < shown; ++i) {
        msg << "\n  #" << i << " [";
        for (std::size_t j = 0; j < starts[i].initial.size(); ++j) {
            msg << (j ? ", " : "") << starts[i].initial[j];
        }
        msg << "] -> " << starts[i].objective << ", " << starts[i].iterations << " it";
    }
    if (shown < starts.size()) msg << "\n  ... " << (starts.size() - shown) << " more";
    return msg.str();
}

double loo_rms_impl(Family family, const Dataset& data, const FitConfig& config,
                    const ParamVector* warm);

} // namespace

double huber(double residual, double delta) {
    if (!(delta > 0)) throw domain_error("huber delta must be positive");
    const double a = std::abs(residual);
    if (a <= delta) return 0.5 * residual * residual;
    return delta * (a - 0.5 * delta);
}

double huber_objective(Family family, const ParamVector& params, const Dataset& data,
                       double delta) {
    Prepared prep = prepare(family, data, delta, 1);
    auto packed = params.pack(family);
    return eval_objective(prep, packed.data(), nullptr);
}

FitResult fit(Family family, const Dataset& data, const FitConfig& config) {
    Prepared prep = prepare(family, data, config.huber_delta, arity(family) + 1);

    std::vector<std::vector<double>> starts;
    if (config.include_grid_starts) starts = grid_starts(family, config.grid);
    for (const auto& pv : config.extra_starts) starts.push_back(pv.pack(family));
    if (starts.empty()) {
        throw param_error("fit has no starts: grid disabled and no extra starts given");
    }

    BfgsOptions options;
    options.max_iterations = config.max_iterations;
    options.gradient_tolerance = config.gradient_tolerance;

    auto objective = [&prep](const double* x, double* grad) {
        return eval_objective(prep, x, grad);
    };

    FitResult result;
    result.family = family;
    result.warnings = degeneracy_warnings(family, data);
    result.starts.reserve(starts.size());

    std::vector<double> best_x;
    double best_objective = 0.0;
    int converged_count = 0;

    for (std::size_t i = 0; i < starts.size(); ++i) {
        BfgsOutcome run = bfgs_minimize(objective, starts[i], options);
        StartRecord record;
        record.initial = std::move(starts[i]);
        record.objective = run.value;
        record.converged = run.converged;
        record.iterations = run.iterations;
        if (run.converged) ++converged_count;

        // Strict < keeps the earliest start on ties: deterministic argmin.
        if (result.best_start < 0 || run.value < best_objective) {
            result.best_start = static_cast<int>(i);
            best_objective = run.value;
            best_x = std::move(run.x);
            result.best_converged = run.converged;
        }
        result.starts.push_back(std::move(record));
    }

    if (converged_count == 0) {
        throw fit_error(describe_failed_starts(family, result.starts));
    }

    result.params = ParamVector::unpack(family, best_x);
    result.objective = best_objective;
    return result;
}

namespace {

double loo_rms_impl(Family family, const Dataset& data, const FitConfig& config,
                    const ParamVector* warm) {
    FitConfig sub_config = config;
    if (warm) sub_config.extra_starts.push_back(*warm);

    double sum_sq = 0.0;
    Dataset rest;
    rest.records.reserve(data.size() - 1);
    for (std::size_t held = 0; held < data.size(); ++held) {
        rest.records.clear();
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (i != held) rest.records.push_back(data.records[i]);
        }
        FitResult sub;
        try {
            sub = fit(family, rest, sub_config);
        } catch (const error& e) {
            std::ostringstream msg;
            msg << "leave-one-out refit holding out record #" << held << " failed: " << e.what();
            throw fit_error(msg.str());
        }
        const RunRecord& r = data.records[held];
        const double predicted =
            log_predict_lse(family, sub.params, to_log_point(family, {r.d1, r.d2, r.n}));
        const double err = std::log(r.loss) - predicted;
        sum_sq += err * err;
    }
    return std::sqrt(sum_sq / static_cast<double>(data.size()));
}

} // namespace

namespace {

void require_loo_size(Family family, const Dataset& data) {
    const std::size_t need = arity(family) + 2;
    if (data.size() < need) {
        std::ostringstream msg;
        msg << "leave-one-out for family '" << traits(family).id << "' needs at least " << need
            << " records, got " << data.size();
        throw domain_error(msg.str());
    }
}

} // namespace

double loo_rms(Family family, const Dataset& data, const FitConfig& config) {
    require_loo_size(family, data);
    FitResult full = fit(family, data, config);
    return loo_rms_impl(family, data, config, &full.params);
}

FitResult fit_with_loo(Family family, const Dataset& data, const FitConfig& config) {
    require_loo_size(family, data);
    FitResult full = fit(family, data, config);
    full.loo_rms = loo_rms_impl(family, data, config, &full.params);
    return full;
}

std::vector<ComparisonRow> compare_forms(const Dataset& data,
                                         const std::vector<Family>& families,
                                         const FitConfig& config) {
    std::vector<ComparisonRow> rows;
    rows.reserve(families.size());
    for (Family family : families) {
        ComparisonRow row;
        row.family = family;
        row.free_params = arity(family);
        try {
            FitResult r = fit_with_loo(family, data, config);
            row.ok = true;
            row.loo_rms = *r.loo_rms;
            row.objective = r.objective;
            row.params = std::move(r.params);
        } catch (const error& e) {
            row.ok = false;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }

    // LOO values quantized to 1e-9 so "tie" is a transitive relation; within
    // a tie the simpler family (fewer free parameters) wins.  Failed rows sink
    // to the bottom, keeping their input order.
    auto key = [](const ComparisonRow& row) {
        return static_cast<std::int64_t>(std::llround(row.loo_rms * 1e9));
    };
    std::stable_sort(rows.begin(), rows.end(),
                     [&key](const ComparisonRow& a, const ComparisonRow& b) {
                         if (a.ok != b.ok) return a.ok;
                         if (!a.ok) return false;
                         const auto ka = key(a), kb = key(b);
                         if (ka != kb) return ka < kb;
                         return a.free_params < b.free_params;
                     });
    return rows;
}

} // namespace bootlaw
