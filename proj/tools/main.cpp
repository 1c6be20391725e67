// bootlaw command-line tool: fit two-stage scaling laws, rank candidate
// forms, and turn fitted coefficients into training decisions.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bootlaw/data_io.hpp"
#include "bootlaw/decision.hpp"
#include "bootlaw/errors.hpp"
#include "bootlaw/fit.hpp"
#include "bootlaw/forms.hpp"
#include "bootlaw/serialize.hpp"
#include "bootlaw/trend.hpp"

namespace {

using namespace bootlaw;

std::string fmt(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

/// "300B" -> 3e11, "1.3T" -> 1.3e12, plain numbers pass through.
double parse_token_count(const std::string& text) {
    std::string s = text;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    double multiplier = 1.0;
    if (!s.empty() && (s.back() == 'B' || s.back() == 'b')) {
        multiplier = 1e9;
        s.pop_back();
    } else if (!s.empty() && (s.back() == 'T' || s.back() == 't')) {
        multiplier = 1e12;
        s.pop_back();
    }
    double value = 0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (s.empty() || ec != std::errc() || ptr != end || !(value > 0) ||
        !std::isfinite(value * multiplier)) {
        throw domain_error("'" + text +
                           "' is not a count (use a positive number, optionally "
                           "suffixed with B = 1e9 or T = 1e12)");
    }
    return value * multiplier;
}

/// CLI11 transform so option variables can stay plain doubles.
const CLI::Validator TokenCount{
    [](std::string& input) -> std::string {
        try {
            const double value = parse_token_count(input);
            char buffer[64];
            std::snprintf(buffer, sizeof(buffer), "%.17g", value);
            input = buffer;
        } catch (const domain_error& e) {
            return std::string(e.what());
        }
        return {};
    },
    "COUNT[B|T]", "count"};

std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string> family_ids() {
    std::vector<std::string> ids;
    for (Family family : all_families) ids.emplace_back(traits(family).id);
    return ids;
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
    std::string csv;
    double split = 0;
    std::string train_out, holdout_out;
};

void print_axis(const char* label, const Dataset& data, double RunRecord::*field) {
    std::set<double> distinct;
    double lo = 1e300, hi = -1e300;
    for (const auto& r : data.records) {
        const double v = r.*field;
        distinct.insert(v);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::printf("%s: %s .. %s  (%zu distinct)\n", label, fmt(lo).c_str(), fmt(hi).c_str(),
                distinct.size());
}

void run_validate(const ValidateArgs& args) {
    const Dataset data = load_runs(args.csv);
    std::printf("ok: %zu records\n", data.size());
    print_axis("d1", data, &RunRecord::d1);
    print_axis("d2", data, &RunRecord::d2);
    print_axis("n", data, &RunRecord::n);
    print_axis("loss", data, &RunRecord::loss);
    std::map<std::string, std::size_t> tags;
    for (const auto& r : data.records) ++tags[r.tag.empty() ? "(untagged)" : r.tag];
    std::printf("tags:");
    for (const auto& [tag, count] : tags) std::printf(" %s (%zu)", tag.c_str(), count);
    std::printf("\n");

    if (args.split > 0) {
        const auto [train, holdout] = split_validation(data, args.split);
        std::printf("split: %zu train / %zu holdout (lowest losses held out)\n", train.size(),
                    holdout.size());
        if (!args.train_out.empty()) save_runs(train, args.train_out);
        if (!args.holdout_out.empty()) save_runs(holdout, args.holdout_out);
    }
}

// --------------------------------------------------------------------- fit

struct FitArgs {
    std::string csv;
    std::string family = "mul-interaction";
    bool loo = false;
    std::string out, plot;
    double delta = 1e-3;
    std::size_t max_starts = 2000;
};

void run_fit(const FitArgs& args) {
    const Dataset data = load_runs(args.csv);
    const Family family = family_from_id(args.family);
    FitConfig config;
    config.huber_delta = args.delta;
    config.grid.max_starts = args.max_starts;

    const FitResult result =
        args.loo ? fit_with_loo(family, data, config) : fit(family, data, config);

    std::printf("family: %s\n", std::string(traits(family).id).c_str());
    std::printf("records: %zu\n", data.size());
    std::printf("objective: %s\n", fmt(result.objective).c_str());
    std::size_t converged = 0;
    for (const auto& s : result.starts) converged += s.converged ? 1 : 0;
    std::printf("converged starts: %zu/%zu (best #%d%s)\n", converged, result.starts.size(),
                result.best_start, result.best_converged ? "" : ", not converged");
    std::printf("params:\n");
    for (const auto name : traits(family).params) {
        std::printf("  %-6s = %s\n", std::string(name).c_str(),
                    fmt(result.params.linear(name)).c_str());
    }
    if (result.loo_rms) std::printf("loo rms: %s\n", fmt(*result.loo_rms).c_str());
    for (const auto& w : result.warnings) std::printf("warning: %s\n", w.c_str());

    if (!args.out.empty()) save_fit_result(result, args.out);
    if (!args.plot.empty()) emit_plot_data(result, data, args.plot);
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
    std::string csv;
    std::string families = "mul-interaction,mul-no-interaction,additive,hybrid,sum-form";
    std::string out;
    double delta = 1e-3;
    std::size_t max_starts = 2000;
};

void run_compare(const CompareArgs& args) {
    const Dataset data = load_runs(args.csv);
    std::vector<Family> families;
    for (const auto& id : split_on(args.families, ',')) families.push_back(family_from_id(id));
    FitConfig config;
    config.huber_delta = args.delta;
    config.grid.max_starts = args.max_starts;

    const auto rows = compare_forms(data, families, config);
    std::size_t rank = 0;
    for (const auto& row : rows) {
        const std::string id(traits(row.family).id);
        if (row.ok) {
            std::printf("%zu. %-18s loo_rms=%-14s objective=%-14s k=%zu\n", ++rank,
                        id.c_str(), fmt(row.loo_rms).c_str(), fmt(row.objective).c_str(),
                        row.free_params);
        } else {
            std::printf("-. %-18s failed: %s\n", id.c_str(), row.error.c_str());
        }
    }
    if (!args.out.empty()) {
        std::ofstream out(args.out);
        if (!out) throw io_error("cannot open '" + args.out + "' for writing");
        out << comparison_to_json(rows) << "\n";
        if (!out.flush()) throw io_error("write to '" + args.out + "' failed");
    }
}

// ------------------------------------------------------------------- trend

struct TrendArgs {
    std::string csv;
    std::string axis = "d1";
    std::string slices_out, lines_out, out;
};

void run_trend(const TrendArgs& args) {
    Dataset data = load_runs(args.csv);
    if (args.axis == "d2") data = swap_d1_d2(data);
    const auto slices = slice_fit_by_d1(data);
    const TrendLines lines = trend_lines(slices);

    std::printf("axis: %s\n", args.axis.c_str());
    std::printf("slices: %zu\n", slices.size());
    for (const auto& s : slices) {
        std::printf("  %s = %-14s alpha = %-14s A = %-14s E = %s\n", args.axis.c_str(),
                    fmt(s.d1).c_str(), fmt(s.alpha).c_str(), fmt(s.A).c_str(),
                    fmt(s.E).c_str());
    }
    std::printf("exponent trend: gamma = %s, e_prime = %s, r2 = %s\n", fmt(lines.gamma).c_str(),
                fmt(lines.e_prime).c_str(), fmt(lines.exponent_r2).c_str());
    std::printf("factor trend: alpha1 = %s, a0 = %s, r2 = %s\n", fmt(lines.alpha1).c_str(),
                fmt(lines.a0).c_str(), fmt(lines.factor_r2).c_str());

    if (!args.slices_out.empty()) emit_plot_data(slices, args.slices_out);
    if (!args.lines_out.empty()) emit_plot_data(lines, args.lines_out);
    if (!args.out.empty()) save_trend_lines(lines, args.out);
}

// --------------------------------------------------------------- breakeven

struct BreakEvenArgs {
    std::string scratch, grown;
    double n = 0;
    double lo = 1e9, hi = 1e18;
    bool analytic = false;
};

void run_breakeven(const BreakEvenArgs& args) {
    const auto scratch = load_params(args.scratch);
    const auto grown = load_params(args.grown);
    const auto result = break_even(scratch, grown, args.n, args.lo, args.hi);
    std::printf("n = %s\n", fmt(result.n).c_str());
    std::printf("D* = %s tokens\n", fmt(result.d_star).c_str());
    std::printf("residual = %s\n", fmt(result.residual).c_str());
    std::printf("crossings = %zu\n", result.crossings.size());
    if (args.analytic) {
        std::printf("analytic = %s tokens\n", fmt(break_even_analytic(args.n)).c_str());
    }
}

// ---------------------------------------------------------------- allocate

struct AllocateArgs {
    std::string params;
    double d1 = 0, c2 = 0;
    std::string mode = "growth";
};

void run_allocate(const AllocateArgs& args) {
    const auto params = load_params(args.params);
    const auto mode = args.mode == "cpt" ? AllocationMode::cpt : AllocationMode::growth;
    const auto result = optimal_allocation(params, args.d1, args.c2, mode);
    std::printf("mode = %s\n", args.mode.c_str());
    std::printf("alpha_eff = %s\n", fmt(result.alpha_eff).c_str());
    std::printf("a = %s   (d2_opt ~ c2^a)\n", fmt(result.a).c_str());
    std::printf("b = %s   (n_opt ~ c2^b)\n", fmt(result.b).c_str());
    std::printf("G = %s\n", fmt(result.g_const).c_str());
    std::printf("d2_opt = %s tokens\n", fmt(result.d2_opt).c_str());
    std::printf("n_opt = %s params\n", fmt(result.n_opt).c_str());
}

// ----------------------------------------------------------------- catchup

struct CatchUpArgs {
    std::string scratch, boot;
    double d1 = 0, d2 = 0, n = 0;
    double sensitivity = 0;
};

void run_catchup(const CatchUpArgs& args) {
    const auto scratch = load_params(args.scratch);
    const auto boot = load_params(args.boot);
    const double target = predict_loss(Family::joint_cpt, boot, {args.d1, args.d2, args.n});
    std::printf("bootstrapped loss = %s\n", fmt(target).c_str());

    if (args.sensitivity > 0) {
        const auto rows =
            catch_up_sensitivity(scratch, boot, args.d1, args.d2, args.n, args.sensitivity);
        std::printf("sensitivity (alpha3 +/- %s):\n", fmt(args.sensitivity).c_str());
        for (const auto& row : rows) {
            if (row.reachable) {
                std::printf("  alpha3 = %-12s D = %s tokens\n", fmt(row.alpha3).c_str(),
                            fmt(row.d).c_str());
            } else {
                std::printf("  alpha3 = %-12s unreachable\n", fmt(row.alpha3).c_str());
            }
        }
    } else {
        const double d = catch_up_tokens(scratch, boot, args.d1, args.d2, args.n);
        std::printf("catch-up = %s tokens\n", fmt(d).c_str());
    }
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
    std::string family = "mul-interaction";
    std::string params;
    std::string out;
    std::string grid = "5x5";
    std::string d1_range = "1e8:1e11";
    std::string d2_range = "1e8:1e11";
    std::string n_range = "1e8:1e8";
    double sigma = 0, jitter = 0;
    std::uint64_t seed = 0;
    std::string tag = "synth";
};

GridAxis parse_axis(const std::string& range, int count, const char* name) {
    const auto parts = split_on(range, ':');
    if (parts.size() != 2) {
        throw domain_error(std::string(name) + " range '" + range + "' must look like lo:hi");
    }
    GridAxis axis;
    axis.count = count;
    axis.lo = parse_token_count(parts[0]);
    axis.hi = parse_token_count(parts[1]);
    return axis;
}

void run_synth(const SynthArgs& args) {
    SynthSpec spec;
    spec.family = family_from_id(args.family);
    spec.truth = load_params(args.params);

    const auto dims = split_on(args.grid, 'x');
    if (dims.size() < 2 || dims.size() > 3) {
        throw domain_error("grid '" + args.grid + "' must look like NxM or NxMxK");
    }
    std::vector<int> counts;
    for (const auto& dim : dims) {
        counts.push_back(static_cast<int>(parse_token_count(dim)));
    }
    spec.d1 = parse_axis(args.d1_range, counts[0], "d1");
    spec.d2 = parse_axis(args.d2_range, counts[1], "d2");
    spec.n = parse_axis(args.n_range, dims.size() == 3 ? counts[2] : 1, "n");
    spec.noise_sigma = args.sigma;
    spec.jitter = args.jitter;
    spec.seed = args.seed;
    spec.tag = args.tag;

    const Dataset data = synth_dataset(spec);
    save_runs(data, args.out);
    std::printf("wrote %zu records to %s\n", data.size(), args.out.c_str());
}

// ----------------------------------------------------------------- predict

struct PredictArgs {
    std::string family;
    std::string params;
    double d1 = 1e8, d2 = 1e8, n = 1e8;
};

void run_predict(const PredictArgs& args) {
    const Family family = family_from_id(args.family);
    const auto params = load_params(args.params);
    const EvalPoint point{args.d1, args.d2, args.n};
    std::printf("loss = %s\n", fmt(predict_loss(family, params, point)).c_str());
    std::printf("ln loss = %s\n",
                fmt(log_predict_lse(family, params, to_log_point(family, point))).c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-stage pretraining scaling laws: fitting, model selection, and "
                 "token-budget decisions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bootlaw 1.0.0");
    const auto ids = family_ids();

    ValidateArgs validate_args;
    auto* validate_cmd =
        app.add_subcommand("validate", "check a runs CSV and summarize its coverage");
    validate_cmd->add_option("csv", validate_args.csv, "runs CSV file")->required();
    validate_cmd->add_option("--split", validate_args.split,
                             "also split off this fraction as a lowest-loss holdout");
    validate_cmd->add_option("--train-out", validate_args.train_out,
                             "write the training half of the split here");
    validate_cmd->add_option("--holdout-out", validate_args.holdout_out,
                             "write the holdout half of the split here");

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "fit one functional form to a runs CSV");
    fit_cmd->add_option("csv", fit_args.csv, "runs CSV file")->required();
    fit_cmd->add_option("--family", fit_args.family, "functional form id")
        ->check(CLI::IsMember(ids));
    fit_cmd->add_flag("--loo", fit_args.loo, "also compute exact leave-one-out RMS");
    fit_cmd->add_option("--out", fit_args.out, "write the full fit report as JSON");
    fit_cmd->add_option("--plot", fit_args.plot, "write per-record residuals as TSV");
    fit_cmd->add_option("--delta", fit_args.delta, "Huber knee on ln-loss residuals")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--max-starts", fit_args.max_starts, "multistart budget");

    CompareArgs compare_args;
    auto* compare_cmd =
        app.add_subcommand("compare", "rank candidate forms by leave-one-out RMS");
    compare_cmd->add_option("csv", compare_args.csv, "runs CSV file")->required();
    compare_cmd->add_option("--families", compare_args.families,
                            "comma-separated form ids to rank");
    compare_cmd->add_option("--out", compare_args.out, "write the ranked table as JSON");
    compare_cmd->add_option("--delta", compare_args.delta, "Huber knee on ln-loss residuals")
        ->check(CLI::PositiveNumber);
    compare_cmd->add_option("--max-starts", compare_args.max_starts, "multistart budget");

    TrendArgs trend_args;
    auto* trend_cmd = app.add_subcommand(
        "trend", "per-slice power laws and the straight lines through them");
    trend_cmd->add_option("csv", trend_args.csv, "runs CSV file")->required();
    trend_cmd->add_option("--axis", trend_args.axis, "slice axis")
        ->check(CLI::IsMember({"d1", "d2"}));
    trend_cmd->add_option("--slices", trend_args.slices_out, "write per-slice fits as TSV");
    trend_cmd->add_option("--lines", trend_args.lines_out, "write the trend lines as TSV");
    trend_cmd->add_option("--out", trend_args.out, "write the trend lines as JSON");

    BreakEvenArgs breakeven_args;
    auto* breakeven_cmd = app.add_subcommand(
        "breakeven", "token budget where from-scratch at 2n matches grown at n");
    breakeven_cmd->add_option("--scratch", breakeven_args.scratch,
                              "single-stage law params JSON")->required();
    breakeven_cmd->add_option("--grown", breakeven_args.grown,
                              "grown/two-stage law params JSON")->required();
    breakeven_cmd->add_option("--n", breakeven_args.n, "pre-growth model size")
        ->required()
        ->transform(TokenCount);
    breakeven_cmd->add_option("--lo", breakeven_args.lo, "bracket low end, tokens")
        ->transform(TokenCount);
    breakeven_cmd->add_option("--hi", breakeven_args.hi, "bracket high end, tokens")
        ->transform(TokenCount);
    breakeven_cmd->add_flag("--analytic", breakeven_args.analytic,
                            "also print the closed-form approximation");

    AllocateArgs allocate_args;
    auto* allocate_cmd = app.add_subcommand(
        "allocate", "compute-optimal split of a second-stage budget");
    allocate_cmd->add_option("--params", allocate_args.params, "two-stage law params JSON")
        ->required();
    allocate_cmd->add_option("--d1", allocate_args.d1, "sunk first-stage tokens")
        ->required()
        ->transform(TokenCount);
    allocate_cmd->add_option("--c2", allocate_args.c2, "second-stage budget in FLOPs")
        ->required()
        ->check(CLI::PositiveNumber);
    allocate_cmd->add_option("--mode", allocate_args.mode,
                             "growth (second stage runs at 2*n1) or cpt")
        ->check(CLI::IsMember({"growth", "cpt"}));

    CatchUpArgs catchup_args;
    auto* catchup_cmd = app.add_subcommand(
        "catchup", "from-scratch tokens needed to match a bootstrapped model");
    catchup_cmd->add_option("--scratch", catchup_args.scratch,
                            "single-stage law params JSON")->required();
    catchup_cmd->add_option("--boot", catchup_args.boot, "two-stage law params JSON")
        ->required();
    catchup_cmd->add_option("--d1", catchup_args.d1, "first-stage tokens")
        ->required()
        ->transform(TokenCount);
    catchup_cmd->add_option("--d2", catchup_args.d2, "second-stage tokens")
        ->required()
        ->transform(TokenCount);
    catchup_cmd->add_option("--n", catchup_args.n, "model size")
        ->required()
        ->transform(TokenCount);
    catchup_cmd->add_option("--sensitivity", catchup_args.sensitivity,
                            "also sweep alpha3 by +/- this delta")
        ->check(CLI::PositiveNumber);

    SynthArgs synth_args;
    auto* synth_cmd =
        app.add_subcommand("synth", "generate a synthetic runs CSV from known coefficients");
    synth_cmd->add_option("--family", synth_args.family, "functional form id")
        ->check(CLI::IsMember(ids));
    synth_cmd->add_option("--params", synth_args.params, "truth params JSON")->required();
    synth_cmd->add_option("--out", synth_args.out, "output CSV path")->required();
    synth_cmd->add_option("--grid", synth_args.grid, "NxM or NxMxK grid counts");
    synth_cmd->add_option("--d1-range", synth_args.d1_range, "d1 axis lo:hi");
    synth_cmd->add_option("--d2-range", synth_args.d2_range, "d2 axis lo:hi");
    synth_cmd->add_option("--n-range", synth_args.n_range, "n axis lo:hi");
    synth_cmd->add_option("--sigma", synth_args.sigma, "ln-loss noise stddev")
        ->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--jitter", synth_args.jitter, "grid jitter in log units");
    synth_cmd->add_option("--seed", synth_args.seed, "RNG seed");
    synth_cmd->add_option("--tag", synth_args.tag, "tag column value");

    PredictArgs predict_args;
    auto* predict_cmd =
        app.add_subcommand("predict", "evaluate a law at one (d1, d2, n) point");
    predict_cmd->add_option("--family", predict_args.family, "functional form id")
        ->required()
        ->check(CLI::IsMember(ids));
    predict_cmd->add_option("--params", predict_args.params, "params JSON")->required();
    predict_cmd->add_option("--d1", predict_args.d1, "first-stage tokens")
        ->transform(TokenCount);
    predict_cmd->add_option("--d2", predict_args.d2, "second-stage tokens")
        ->transform(TokenCount);
    predict_cmd->add_option("--n", predict_args.n, "model size")->transform(TokenCount);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);   // --help / --version: print and exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*validate_cmd) run_validate(validate_args);
        else if (*fit_cmd) run_fit(fit_args);
        else if (*compare_cmd) run_compare(compare_args);
        else if (*trend_cmd) run_trend(trend_args);
        else if (*breakeven_cmd) run_breakeven(breakeven_args);
        else if (*allocate_cmd) run_allocate(allocate_args);
        else if (*catchup_cmd) run_catchup(catchup_args);
        else if (*synth_cmd) run_synth(synth_args);
        else if (*predict_cmd) run_predict(predict_args);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
