#include "bootlaw/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include "bootlaw/rng.hpp"

namespace bootlaw {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_positive(const std::string& raw, const char* what, std::size_t line_no,
                      std::size_t column) {
    const std::string field = trim(raw);
    double value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        std::ostringstream msg;
        msg << "line " << line_no << ", column " << column << ": cannot parse " << what
            << " from '" << raw << "'";
        throw io_error(msg.str());
    }
    if (!std::isfinite(value) || value <= 0) {
        std::ostringstream msg;
        msg << "line " << line_no << ", column " << column << ": " << what
            << " must be a positive finite number, got " << field;
        throw io_error(msg.str());
    }
    return value;
}

std::string fmt(double value, const char* spec = "%.17g") {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), spec, value);
    return buffer;
}

std::vector<double> axis_values(const GridAxis& axis, const char* name, bool must_be_domain) {
    if (axis.count < 1) {
        throw domain_error(std::string("grid axis ") + name + " needs count >= 1");
    }
    if (!(axis.lo > 0) || !(axis.hi >= axis.lo)) {
        throw domain_error(std::string("grid axis ") + name +
                           " needs 0 < lo <= hi, got lo=" + fmt(axis.lo) +
                           " hi=" + fmt(axis.hi));
    }
    if (must_be_domain && axis.lo < kMinCoordinate) {
        std::ostringstream msg;
        msg << "grid axis " << name << " starts at " << axis.lo
            << ", below the modeled domain (>= " << kMinCoordinate << ")";
        throw domain_error(msg.str());
    }
    std::vector<double> values(axis.count);
    if (axis.count == 1) {
        values[0] = axis.lo;
        return values;
    }
    const double ln_lo = std::log(axis.lo);
    const double ln_hi = std::log(axis.hi);
    for (int i = 0; i < axis.count; ++i) {
        values[i] = std::exp(ln_lo + (ln_hi - ln_lo) * i / (axis.count - 1));
    }
    // The endpoints are the user's numbers; don't let exp(log(x)) round them.
    values.front() = axis.lo;
    values.back() = axis.hi;
    return values;
}

} // namespace

Dataset load_runs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "' for reading");

    std::string line;
    std::size_t line_no = 0;

    // Header row is mandatory and fixed; the tag column is optional.
    bool has_tag = false;
    {
        if (!std::getline(in, line)) throw io_error("'" + path + "' is empty");
        ++line_no;
        const std::string header = trim(line);
        if (header == "d1_tokens,d2_tokens,n_params,loss,tag") {
            has_tag = true;
        } else if (header != "d1_tokens,d2_tokens,n_params,loss") {
            throw io_error("'" + path +
                           "': expected header 'd1_tokens,d2_tokens,n_params,loss[,tag]', got '" +
                           header + "'");
        }
    }

    Dataset data;
    // (d1, d2, n, tag) -> first line seen, for duplicate detection.
    std::map<std::tuple<double, double, double, std::string>, std::size_t> seen;
    const std::size_t expected_fields = has_tag ? 5 : 4;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != expected_fields) {
            std::ostringstream msg;
            msg << "line " << line_no << ": expected " << expected_fields << " fields, got "
                << fields.size();
            throw io_error(msg.str());
        }
        RunRecord record;
        record.d1 = parse_positive(fields[0], "d1_tokens", line_no, 1);
        record.d2 = parse_positive(fields[1], "d2_tokens", line_no, 2);
        record.n = parse_positive(fields[2], "n_params", line_no, 3);
        record.loss = parse_positive(fields[3], "loss", line_no, 4);
        if (has_tag) record.tag = trim(fields[4]);

        const auto key = std::make_tuple(record.d1, record.d2, record.n, record.tag);
        auto [it, inserted] = seen.emplace(key, line_no);
        if (!inserted) {
            std::ostringstream msg;
            msg << "line " << line_no << " duplicates line " << it->second
                << ": same (d1, d2, n, tag) = (" << fmt(record.d1) << ", " << fmt(record.d2)
                << ", " << fmt(record.n) << ", '" << record.tag << "')";
            throw io_error(msg.str());
        }
        data.records.push_back(std::move(record));
    }

    if (data.empty()) throw io_error("'" + path + "' contains a header but no data rows");
    return data;
}

void save_runs(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << "d1_tokens,d2_tokens,n_params,loss,tag\n";
    for (const auto& r : data.records) {
        if (r.tag.find(',') != std::string::npos) {
            throw io_error("tag '" + r.tag + "' contains a comma and cannot be saved as CSV");
        }
        out << fmt(r.d1) << ',' << fmt(r.d2) << ',' << fmt(r.n) << ',' << fmt(r.loss) << ','
            << r.tag << '\n';
    }
    if (!out.flush()) throw io_error("write to '" + path + "' failed");
}

std::pair<Dataset, Dataset> split_validation(const Dataset& data, double fraction) {
    if (!(fraction > 0) || !(fraction < 1)) {
        throw domain_error("validation fraction must lie strictly between 0 and 1, got " +
                           fmt(fraction, "%g"));
    }
    const std::size_t n = data.size();
    const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    if (k >= n) {
        std::ostringstream msg;
        msg << "holding out " << k << " of " << n << " records would leave no training data";
        throw domain_error(msg.str());
    }

    // Lowest k losses go to the holdout; stable sort = file order breaks ties.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data.records[a].loss < data.records[b].loss;
    });
    std::vector<bool> held(n, false);
    for (std::size_t i = 0; i < k; ++i) held[order[i]] = true;

    std::pair<Dataset, Dataset> out;
    for (std::size_t i = 0; i < n; ++i) {
        (held[i] ? out.second : out.first).records.push_back(data.records[i]);
    }
    return out;
}

Dataset synth_dataset(const SynthSpec& spec) {
    const auto& t = traits(spec.family);
    (void)spec.truth.pack(spec.family);
    if (!(spec.noise_sigma >= 0) || !std::isfinite(spec.noise_sigma)) {
        throw domain_error("noise_sigma must be non-negative");
    }
    if (!(spec.jitter >= 0) || spec.jitter > 0.5) {
        throw domain_error("jitter must lie in [0, 0.5] log units");
    }

    const auto d1_values = axis_values(spec.d1, "d1", t.reads_d1);
    const auto d2_values = axis_values(spec.d2, "d2", t.reads_d2);
    const auto n_values = axis_values(spec.n, "n", t.reads_n);

    std::mt19937_64 rng(spec.seed);
    Dataset data;
    data.records.reserve(d1_values.size() * d2_values.size() * n_values.size());

    for (double d1 : d1_values) {
        for (double d2 : d2_values) {
            for (double n : n_values) {
                RunRecord record;
                record.d1 = d1;
                record.d2 = d2;
                record.n = n;
                if (spec.jitter > 0) {
                    // Multiplicative exp(U(-j, j)) per coordinate; clamping
                    // keeps read coordinates inside the modeled domain when
                    // an axis starts exactly at its edge.
                    record.d1 *= std::exp(uniform(rng, -spec.jitter, spec.jitter));
                    record.d2 *= std::exp(uniform(rng, -spec.jitter, spec.jitter));
                    record.n *= std::exp(uniform(rng, -spec.jitter, spec.jitter));
                    if (t.reads_d1) record.d1 = std::max(record.d1, kMinCoordinate);
                    if (t.reads_d2) record.d2 = std::max(record.d2, kMinCoordinate);
                    if (t.reads_n) record.n = std::max(record.n, kMinCoordinate);
                }
                double loss = predict_loss(spec.family, spec.truth,
                                           {record.d1, record.d2, record.n});
                if (spec.noise_sigma > 0) {
                    loss *= std::exp(spec.noise_sigma * normal01(rng));
                }
                record.loss = loss;
                record.tag = spec.tag;
                data.records.push_back(std::move(record));
            }
        }
    }
    return data;
}

namespace {

std::ofstream open_tsv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    return out;
}

} // namespace

void emit_plot_data(const std::vector<SliceFit>& slices, const std::string& path) {
    auto out = open_tsv(path);
    out << "# per-d1 slice fits of L = A * d2^(-alpha) + E\n";
    out << "# d1\talpha\tA\tE\n";
    for (const auto& s : slices) {
        out << fmt(s.d1, "%.12g") << '\t' << fmt(s.alpha, "%.12g") << '\t'
            << fmt(s.A, "%.12g") << '\t' << fmt(s.E, "%.12g") << '\n';
    }
    if (!out.flush()) throw io_error("write to '" + path + "' failed");
}

void emit_plot_data(const TrendLines& lines, const std::string& path) {
    auto out = open_tsv(path);
    out << "# trend lines over per-d1 slices (per-slice floor E)\n";
    out << "# exponent: -alpha = slope * ln d1 + intercept; "
           "factor: ln A = intercept + slope * ln d1\n";
    out << "# line\tslope\tintercept\tr2\n";
    out << "exponent\t" << fmt(lines.gamma, "%.12g") << '\t' << fmt(lines.e_prime, "%.12g")
        << '\t' << fmt(lines.exponent_r2, "%.12g") << '\n';
    out << "factor\t" << fmt(-lines.alpha1, "%.12g") << '\t'
        << fmt(std::log(lines.a0), "%.12g") << '\t' << fmt(lines.factor_r2, "%.12g") << '\n';
    if (!out.flush()) throw io_error("write to '" + path + "' failed");
}

void emit_plot_data(const FitResult& fit, const Dataset& data, const std::string& path) {
    auto out = open_tsv(path);
    const auto packed = fit.params.pack(fit.family);
    out << "# per-record fit residuals, family " << traits(fit.family).id << '\n';
    out << "# observed_ln_loss\tpredicted_ln_loss\tresidual\n";
    for (const auto& r : data.records) {
        const double predicted = log_predict_lse(fit.family, packed.data(),
                                                 to_log_point(fit.family, {r.d1, r.d2, r.n}));
        const double observed = std::log(r.loss);
        out << fmt(observed, "%.12g") << '\t' << fmt(predicted, "%.12g") << '\t'
            << fmt(observed - predicted, "%.12g") << '\n';
    }
    if (!out.flush()) throw io_error("write to '" + path + "' failed");
}

void emit_sweep(const std::vector<std::vector<double>>& rows,
                const std::vector<std::string>& columns, const std::string& path) {
    auto out = open_tsv(path);
    out << "# ";
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out << (j ? "\t" : "") << columns[j];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << (j ? "\t" : "") << fmt(row[j], "%.12g");
        }
        out << '\n';
    }
    if (!out.flush()) throw io_error("write to '" + path + "' failed");
}

} // namespace bootlaw
