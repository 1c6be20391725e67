#include "bootlaw/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bootlaw {

namespace {

using nlohmann::json;

json params_to_json_object(const ParamVector& params) {
    json obj = json::object();
    for (const auto& [name, value] : params.internal_values()) {
        (void)value;
        obj[name] = params.linear(name);
    }
    return obj;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << text << '\n';
    if (!out.flush()) throw io_error("write to '" + path + "' failed");
}

} // namespace

std::string params_to_json(const ParamVector& params) {
    return params_to_json_object(params).dump(2);
}

ParamVector params_from_json(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::parse_error& e) {
        throw io_error(std::string("parameter JSON is malformed: ") + e.what());
    }
    if (!obj.is_object()) {
        throw io_error("parameter JSON must be a flat object of name -> number");
    }
    ParamVector params;
    for (const auto& [name, value] : obj.items()) {
        if (!value.is_number()) {
            throw io_error("parameter '" + name + "' is not a number");
        }
        try {
            params.set_linear(name, value.get<double>());
        } catch (const error& e) {
            throw domain_error("parameter '" + name + "': " + e.what());
        }
    }
    return params;
}

ParamVector load_params(const std::string& path) {
    try {
        return params_from_json(read_text_file(path));
    } catch (const io_error& e) {
        throw io_error("'" + path + "': " + e.what());
    }
}

void save_params(const ParamVector& params, const std::string& path) {
    write_text_file(params_to_json(params), path);
}

std::string fit_result_to_json(const FitResult& result) {
    json doc;
    doc["family"] = std::string(traits(result.family).id);
    doc["params"] = params_to_json_object(result.params);
    doc["objective"] = result.objective;
    doc["loo_rms"] = result.loo_rms ? json(*result.loo_rms) : json(nullptr);
    doc["best_start"] = result.best_start;
    doc["best_converged"] = result.best_converged;
    doc["warnings"] = result.warnings;
    json starts = json::array();
    for (const auto& s : result.starts) {
        starts.push_back({{"initial", s.initial},
                          {"objective", s.objective},
                          {"converged", s.converged},
                          {"iterations", s.iterations}});
    }
    doc["starts"] = std::move(starts);
    return doc.dump(2);
}

void save_fit_result(const FitResult& result, const std::string& path) {
    write_text_file(fit_result_to_json(result), path);
}

std::string trend_lines_to_json(const TrendLines& lines) {
    json doc;
    doc["exponent"] = {{"gamma", lines.gamma},
                       {"e_prime", lines.e_prime},
                       {"r2", lines.exponent_r2},
                       {"residuals", lines.exponent_residuals}};
    doc["factor"] = {{"a0", lines.a0},
                     {"alpha1", lines.alpha1},
                     {"r2", lines.factor_r2},
                     {"residuals", lines.factor_residuals}};
    doc["per_slice_e"] = true;
    return doc.dump(2);
}

void save_trend_lines(const TrendLines& lines, const std::string& path) {
    write_text_file(trend_lines_to_json(lines), path);
}

std::string comparison_to_json(const std::vector<ComparisonRow>& rows) {
    json table = json::array();
    for (const auto& row : rows) {
        json entry;
        entry["family"] = std::string(traits(row.family).id);
        entry["free_params"] = row.free_params;
        entry["ok"] = row.ok;
        if (row.ok) {
            entry["loo_rms"] = row.loo_rms;
            entry["objective"] = row.objective;
            entry["params"] = params_to_json_object(row.params);
        } else {
            entry["error"] = row.error;
        }
        table.push_back(std::move(entry));
    }
    return table.dump(2);
}

} // namespace bootlaw
