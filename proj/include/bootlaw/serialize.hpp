#pragma once

#include <string>
#include <vector>

#include "bootlaw/fit.hpp"
#include "bootlaw/trend.hpp"

namespace bootlaw {

/// ParamVector <-> flat JSON object of name -> number.  Scales (A, B, F, E)
/// travel in linear space externally; the log-space storage is an internal
/// concern.  Keys come out sorted, so serialization is deterministic.
std::string params_to_json(const ParamVector& params);
ParamVector params_from_json(const std::string& text);
ParamVector load_params(const std::string& path);
void save_params(const ParamVector& params, const std::string& path);

/// Full fit report: family id, linear-space params, objective, loo_rms
/// (null until computed), warnings, and the per-start diagnostics array.
std::string fit_result_to_json(const FitResult& result);
void save_fit_result(const FitResult& result, const std::string& path);

/// Both trend lines with their residuals; carries "per_slice_e": true to
/// record that each slice fitted its own floor.
std::string trend_lines_to_json(const TrendLines& lines);
void save_trend_lines(const TrendLines& lines, const std::string& path);

/// Ranked comparison table, array order = ranking.
std::string comparison_to_json(const std::vector<ComparisonRow>& rows);

} // namespace bootlaw
