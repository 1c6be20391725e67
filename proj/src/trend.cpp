#include "bootlaw/trend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace bootlaw {

namespace {

struct OlsLine {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    std::vector<double> residuals;
};

OlsLine ols(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mean_x) * (x[i] - mean_x);
        sxy += (x[i] - mean_x) * (y[i] - mean_y);
    }
    if (sxx <= 1e-12 * std::max(1.0, mean_x * mean_x) * n) {
        throw regression_error("regression is singular: all abscissae are identical");
    }
    double ss_tot = 0, y_scale = 0;
    for (const double yi : y) {
        ss_tot += (yi - mean_y) * (yi - mean_y);
        y_scale += yi * yi;
    }
    // Ordinates identical up to rounding are a perfect flat line: report
    // slope 0 and r^2 = 1 rather than fitting the float noise around the
    // mean (exact arithmetic would hit 0/0 here).
    const bool flat = ss_tot <= 1e-24 * std::max(y_scale, 1e-300);

    OlsLine line;
    line.slope = flat ? 0.0 : sxy / sxx;
    line.intercept = flat ? mean_y : mean_y - line.slope * mean_x;
    double ss_res = 0;
    line.residuals.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (line.intercept + line.slope * x[i]);
        line.residuals[i] = r;
        ss_res += r * r;
    }
    line.r2 = flat ? 1.0 : 1.0 - ss_res / ss_tot;
    return line;
}

} // namespace

Dataset swap_d1_d2(const Dataset& data) {
    Dataset out = data;
    for (auto& r : out.records) std::swap(r.d1, r.d2);
    return out;
}

std::vector<SliceFit> slice_fit_by_d1(const Dataset& data, const FitConfig& config) {
    if (data.empty()) throw regression_error("cannot slice an empty dataset");

    // Chain-cluster the sorted d1 values: a new group starts when the gap to
    // the previous value exceeds 0.1% relative.
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data.records[a].d1 < data.records[b].d1;
    });

    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t idx : order) {
        const double d1 = data.records[idx].d1;
        if (groups.empty() || d1 > data.records[groups.back().back()].d1 * (1.0 + 1e-3)) {
            groups.emplace_back();
        }
        groups.back().push_back(idx);
    }

    if (groups.size() < 3) {
        std::ostringstream msg;
        msg << "slice fitting needs at least 3 distinct d1 groups, found " << groups.size();
        throw regression_error(msg.str());
    }
    for (const auto& group : groups) {
        if (group.size() < 4) {
            std::ostringstream msg;
            msg << "d1 group near " << data.records[group.front()].d1 << " has only "
                << group.size() << " points; at least 4 are required per slice";
            throw regression_error(msg.str());
        }
    }

    std::vector<SliceFit> slices;
    slices.reserve(groups.size());
    for (const auto& group : groups) {
        Dataset sub;
        sub.records.reserve(group.size());
        double d1_sum = 0;
        for (std::size_t idx : group) {
            sub.records.push_back(data.records[idx]);
            d1_sum += data.records[idx].d1;
        }
        FitResult r = fit(Family::power_law_1d, sub, config);
        SliceFit slice;
        slice.d1 = d1_sum / static_cast<double>(group.size());
        slice.A = r.params.linear("A");
        slice.alpha = r.params.linear("alpha");
        slice.E = r.params.linear("E");
        slice.objective = r.objective;
        slice.n_points = static_cast<int>(group.size());
        slices.push_back(slice);
    }
    return slices;
}

void exponent_trend(const std::vector<SliceFit>& slices, TrendLines& out) {
    if (slices.size() < 3) {
        std::ostringstream msg;
        msg << "exponent trend needs at least 3 slices, got " << slices.size();
        throw regression_error(msg.str());
    }
    std::vector<double> x, y;
    x.reserve(slices.size());
    y.reserve(slices.size());
    for (const auto& s : slices) {
        x.push_back(std::log(s.d1));
        y.push_back(-s.alpha);
    }
    OlsLine line = ols(x, y);
    out.gamma = line.slope;
    out.e_prime = line.intercept;
    out.exponent_r2 = line.r2;
    out.exponent_residuals = std::move(line.residuals);
}

void factor_trend(const std::vector<SliceFit>& slices, TrendLines& out) {
    if (slices.size() < 3) {
        std::ostringstream msg;
        msg << "factor trend needs at least 3 slices, got " << slices.size();
        throw regression_error(msg.str());
    }
    std::vector<double> x, y;
    x.reserve(slices.size());
    y.reserve(slices.size());
    for (const auto& s : slices) {
        if (!(s.A > 0) || !std::isfinite(s.A)) {
            std::ostringstream msg;
            msg << "factor trend needs positive scale factors; slice at d1 = " << s.d1
                << " has A = " << s.A;
            throw domain_error(msg.str());
        }
        x.push_back(std::log(s.d1));
        y.push_back(std::log(s.A));
    }
    OlsLine line = ols(x, y);
    out.alpha1 = -line.slope;
    out.a0 = std::exp(line.intercept);
    out.factor_r2 = line.r2;
    out.factor_residuals = std::move(line.residuals);
}

TrendLines trend_lines(const std::vector<SliceFit>& slices) {
    TrendLines out;
    exponent_trend(slices, out);
    factor_trend(slices, out);
    return out;
}

} // namespace bootlaw
