#include "bootlaw/forms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bootlaw {

namespace {

const std::array<FamilyTraits, 8>& traits_table() {
    static const std::array<FamilyTraits, 8> table = {{
        {Family::power_law_1d, "power-law-1d",
         {"A", "alpha", "E"}, false, true, false},
        {Family::mul_interaction, "mul-interaction",
         {"A", "alpha1", "alpha2", "alpha3", "E"}, true, true, false},
        {Family::mul_no_interaction, "mul-no-interaction",
         {"A", "alpha1", "alpha2", "E"}, true, true, false},
        {Family::additive, "additive",
         {"A", "alpha1", "F", "alpha2", "E"}, true, true, false},
        {Family::hybrid, "hybrid",
         {"A", "alpha1", "F", "alpha2", "E"}, true, true, false},
        {Family::sum_form, "sum-form",
         {"A", "alpha", "E"}, true, true, false},
        {Family::joint_cpt, "joint-cpt",
         {"A", "alpha1", "alpha2", "alpha3", "B", "beta", "E"}, true, true, true},
        {Family::chinchilla, "chinchilla",
         {"A", "alpha", "B", "beta", "E"}, true, false, true},
    }};
    return table;
}

[[noreturn]] void throw_bad_coordinate(const char* name, double value) {
    std::ostringstream msg;
    msg << "coordinate " << name << " = " << value << " is below the modeled domain (>= "
        << kMinCoordinate << " required)";
    throw domain_error(msg.str());
}

void check_coordinate(const char* name, double value) {
    if (!std::isfinite(value) || value < kMinCoordinate) throw_bad_coordinate(name, value);
}

void check_log_coordinate(const char* name, double value) {
    static const double min_log = std::log(kMinCoordinate);
    if (!std::isfinite(value) || value < min_log) {
        std::ostringstream msg;
        msg << "log coordinate " << name << " = " << value << " is below ln(" << kMinCoordinate
            << ") = " << min_log;
        throw domain_error(msg.str());
    }
}

} // namespace

const FamilyTraits& traits(Family family) {
    return traits_table()[static_cast<std::size_t>(family)];
}

Family family_from_id(std::string_view id) {
    for (const auto& t : traits_table()) {
        if (t.id == id) return t.family;
    }
    std::ostringstream msg;
    msg << "unknown family id '" << id << "'; known ids:";
    for (const auto& t : traits_table()) msg << ' ' << t.id;
    throw param_error(msg.str());
}

std::size_t arity(Family family) { return traits(family).params.size(); }

bool is_scale_param(std::string_view name) {
    return name == "A" || name == "B" || name == "F" || name == "E";
}

ParamVector ParamVector::from_linear(const std::vector<std::pair<std::string, double>>& kv) {
    ParamVector out;
    for (const auto& [name, value] : kv) out.set_linear(name, value);
    return out;
}

bool ParamVector::has(std::string_view name) const {
    return values_.find(name) != values_.end();
}

double ParamVector::linear(std::string_view name) const {
    double raw = internal(name);
    return is_scale_param(name) ? std::exp(raw) : raw;
}

void ParamVector::set_linear(std::string_view name, double value) {
    if (is_scale_param(name)) {
        if (!(value > 0) || !std::isfinite(value)) {
            std::ostringstream msg;
            msg << "scale coefficient " << name << " must be a positive finite number, got "
                << value;
            throw domain_error(msg.str());
        }
        values_[std::string(name)] = std::log(value);
    } else {
        set_internal(name, value);
    }
}

double ParamVector::internal(std::string_view name) const {
    auto it = values_.find(name);
    if (it == values_.end()) {
        throw param_error("parameter '" + std::string(name) + "' is not set");
    }
    return it->second;
}

void ParamVector::set_internal(std::string_view name, double value) {
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "parameter " << name << " must be finite, got " << value;
        throw domain_error(msg.str());
    }
    values_[std::string(name)] = value;
}

std::vector<double> ParamVector::pack(Family family) const {
    const auto& t = traits(family);
    std::vector<double> out;
    out.reserve(t.params.size());
    std::string missing;
    for (auto name : t.params) {
        auto it = values_.find(name);
        if (it == values_.end()) {
            missing += missing.empty() ? "" : ", ";
            missing += std::string(name);
        } else {
            out.push_back(it->second);
        }
    }
    std::string extra;
    if (values_.size() != t.params.size() || !missing.empty()) {
        for (const auto& [name, value] : values_) {
            (void)value;
            if (std::find(t.params.begin(), t.params.end(), name) == t.params.end()) {
                extra += extra.empty() ? "" : ", ";
                extra += name;
            }
        }
    }
    if (!missing.empty() || !extra.empty()) {
        std::ostringstream msg;
        msg << "parameter set does not match family '" << t.id << "'";
        if (!missing.empty()) msg << "; missing: " << missing;
        if (!extra.empty()) msg << "; unexpected: " << extra;
        throw param_error(msg.str());
    }
    return out;
}

ParamVector ParamVector::unpack(Family family, const double* packed) {
    const auto& t = traits(family);
    ParamVector out;
    for (std::size_t i = 0; i < t.params.size(); ++i) {
        out.set_internal(t.params[i], packed[i]);
    }
    return out;
}

ParamVector ParamVector::unpack(Family family, const std::vector<double>& packed) {
    if (packed.size() != arity(family)) {
        std::ostringstream msg;
        msg << "packed vector has " << packed.size() << " entries, family '"
            << traits(family).id << "' needs " << arity(family);
        throw param_error(msg.str());
    }
    return unpack(family, packed.data());
}

LogPoint to_log_point(Family family, const EvalPoint& point) {
    const auto& t = traits(family);
    LogPoint lp;
    if (t.reads_d1) {
        check_coordinate("d1", point.d1);
        lp.x1 = std::log(point.d1);
    }
    if (t.reads_d2) {
        check_coordinate("d2", point.d2);
        lp.x2 = std::log(point.d2);
    }
    if (t.reads_n) {
        check_coordinate("n", point.n);
        lp.xn = std::log(point.n);
    }
    return lp;
}

void validate_log_point(Family family, const LogPoint& point) {
    const auto& t = traits(family);
    if (t.reads_d1) check_log_coordinate("x1", point.x1);
    if (t.reads_d2) check_log_coordinate("x2", point.x2);
    if (t.reads_n) check_log_coordinate("xn", point.xn);
}

double predict_loss(Family family, const ParamVector& params, const EvalPoint& point) {
    (void)params.pack(family);   // arity/name check
    (void)to_log_point(family, point);   // coordinate check
    const double d1 = point.d1, d2 = point.d2, n = point.n;
    switch (family) {
        case Family::power_law_1d:
            return params.linear("A") * std::pow(d2, -params.linear("alpha")) +
                   params.linear("E");
        case Family::mul_interaction:
            return params.linear("A") * std::pow(d1, -params.linear("alpha1")) *
                       std::pow(d2, -params.linear("alpha2") +
                                        params.linear("alpha3") * std::log(d1)) +
                   params.linear("E");
        case Family::mul_no_interaction:
            return params.linear("A") * std::pow(d1, -params.linear("alpha1")) *
                       std::pow(d2, -params.linear("alpha2")) +
                   params.linear("E");
        case Family::additive:
            return params.linear("A") * std::pow(d1, -params.linear("alpha1")) +
                   params.linear("F") * std::pow(d2, -params.linear("alpha2")) +
                   params.linear("E");
        case Family::hybrid:
            return (params.linear("A") * std::pow(d1, -params.linear("alpha1")) +
                    params.linear("F")) *
                       std::pow(d2, -params.linear("alpha2")) +
                   params.linear("E");
        case Family::sum_form:
            return params.linear("A") * std::pow(d1 + d2, -params.linear("alpha")) +
                   params.linear("E");
        case Family::joint_cpt:
            return params.linear("A") * std::pow(d1, -params.linear("alpha1")) *
                       std::pow(d2, -params.linear("alpha2") +
                                        params.linear("alpha3") * std::log(d1)) +
                   params.linear("B") * std::pow(n, -params.linear("beta")) +
                   params.linear("E");
        case Family::chinchilla:
            return params.linear("A") * std::pow(d1, -params.linear("alpha")) +
                   params.linear("B") * std::pow(n, -params.linear("beta")) +
                   params.linear("E");
    }
    throw param_error("unhandled family");
}

int log_terms(Family family, const double* p, const LogPoint& pt, double* t, double* jac) {
    const double x1 = pt.x1, x2 = pt.x2, xn = pt.xn;
    // jac layout: row-major k x arity, zero-initialized here.
    auto clear = [&](int rows, int cols) {
        if (jac) std::fill(jac, jac + rows * cols, 0.0);
    };
    switch (family) {
        case Family::power_law_1d: {
            // p = [lnA, alpha, lnE]
            t[0] = p[0] - p[1] * x2;
            t[1] = p[2];
            clear(2, 3);
            if (jac) {
                jac[0 * 3 + 0] = 1.0;
                jac[0 * 3 + 1] = -x2;
                jac[1 * 3 + 2] = 1.0;
            }
            return 2;
        }
        case Family::mul_interaction: {
            // p = [lnA, a1, a2, a3, lnE]; reducible term exponent is the
            // bilinear form -a1*x1 - a2*x2 + a3*x1*x2.
            t[0] = p[0] - p[1] * x1 - p[2] * x2 + p[3] * x1 * x2;
            t[1] = p[4];
            clear(2, 5);
            if (jac) {
                jac[0 * 5 + 0] = 1.0;
                jac[0 * 5 + 1] = -x1;
                jac[0 * 5 + 2] = -x2;
                jac[0 * 5 + 3] = x1 * x2;
                jac[1 * 5 + 4] = 1.0;
            }
            return 2;
        }
        case Family::mul_no_interaction: {
            // p = [lnA, a1, a2, lnE]
            t[0] = p[0] - p[1] * x1 - p[2] * x2;
            t[1] = p[3];
            clear(2, 4);
            if (jac) {
                jac[0 * 4 + 0] = 1.0;
                jac[0 * 4 + 1] = -x1;
                jac[0 * 4 + 2] = -x2;
                jac[1 * 4 + 3] = 1.0;
            }
            return 2;
        }
        case Family::additive: {
            // p = [lnA, a1, lnF, a2, lnE]
            t[0] = p[0] - p[1] * x1;
            t[1] = p[2] - p[3] * x2;
            t[2] = p[4];
            clear(3, 5);
            if (jac) {
                jac[0 * 5 + 0] = 1.0;
                jac[0 * 5 + 1] = -x1;
                jac[1 * 5 + 2] = 1.0;
                jac[1 * 5 + 3] = -x2;
                jac[2 * 5 + 4] = 1.0;
            }
            return 3;
        }
        case Family::hybrid: {
            // p = [lnA, a1, lnF, a2, lnE]; (A d1^-a1 + F) d2^-a2 expands to
            // two reducible terms sharing the -a2*x2 factor.
            t[0] = p[0] - p[1] * x1 - p[3] * x2;
            t[1] = p[2] - p[3] * x2;
            t[2] = p[4];
            clear(3, 5);
            if (jac) {
                jac[0 * 5 + 0] = 1.0;
                jac[0 * 5 + 1] = -x1;
                jac[0 * 5 + 3] = -x2;
                jac[1 * 5 + 2] = 1.0;
                jac[1 * 5 + 3] = -x2;
                jac[2 * 5 + 4] = 1.0;
            }
            return 3;
        }
        case Family::sum_form: {
            // p = [lnA, alpha, lnE]; ln(d1+d2) = LSE(x1, x2), itself stable.
            const double xs[2] = {x1, x2};
            const double s = log_sum_exp(xs, 2);
            t[0] = p[0] - p[1] * s;
            t[1] = p[2];
            clear(2, 3);
            if (jac) {
                jac[0 * 3 + 0] = 1.0;
                jac[0 * 3 + 1] = -s;
                jac[1 * 3 + 2] = 1.0;
            }
            return 2;
        }
        case Family::joint_cpt: {
            // p = [lnA, a1, a2, a3, lnB, beta, lnE]
            t[0] = p[0] - p[1] * x1 - p[2] * x2 + p[3] * x1 * x2;
            t[1] = p[4] - p[5] * xn;
            t[2] = p[6];
            clear(3, 7);
            if (jac) {
                jac[0 * 7 + 0] = 1.0;
                jac[0 * 7 + 1] = -x1;
                jac[0 * 7 + 2] = -x2;
                jac[0 * 7 + 3] = x1 * x2;
                jac[1 * 7 + 4] = 1.0;
                jac[1 * 7 + 5] = -xn;
                jac[2 * 7 + 6] = 1.0;
            }
            return 3;
        }
        case Family::chinchilla: {
            // p = [lnA, alpha, lnB, beta, lnE]; x1 is the single-stage token
            // count, xn the model size.
            t[0] = p[0] - p[1] * x1;
            t[1] = p[2] - p[3] * xn;
            t[2] = p[4];
            clear(3, 5);
            if (jac) {
                jac[0 * 5 + 0] = 1.0;
                jac[0 * 5 + 1] = -x1;
                jac[1 * 5 + 2] = 1.0;
                jac[1 * 5 + 3] = -xn;
                jac[2 * 5 + 4] = 1.0;
            }
            return 3;
        }
    }
    throw param_error("unhandled family");
}

double log_sum_exp(const double* terms, int count) {
    double m = terms[0];
    for (int i = 1; i < count; ++i) m = std::max(m, terms[i]);
    double sum = 0.0;
    for (int i = 0; i < count; ++i) sum += std::exp(terms[i] - m);
    return m + std::log(sum);
}

double log_predict_lse(Family family, const double* packed, const LogPoint& point) {
    double t[kMaxTerms];
    int k = log_terms(family, packed, point, t, nullptr);
    return log_sum_exp(t, k);
}

double log_predict_lse(Family family, const ParamVector& params, const LogPoint& point) {
    validate_log_point(family, point);
    auto packed = params.pack(family);
    return log_predict_lse(family, packed.data(), point);
}

double log_predict_grad(Family family, const double* packed, const LogPoint& point,
                        double* grad) {
    double t[kMaxTerms];
    double jac[kMaxTerms * kMaxArity];
    const int d = static_cast<int>(arity(family));
    const int k = log_terms(family, packed, point, t, jac);

    // Softmax weights reuse the exponentials that LSE itself needs: with
    // m = max t_i, u_i = exp(t_i - m), S = sum u_i we get
    // ln L = m + ln S and d(ln L)/dp_j = sum_i (u_i / S) * J_ij.
    double m = t[0];
    for (int i = 1; i < k; ++i) m = std::max(m, t[i]);
    double u[kMaxTerms];
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
        u[i] = std::exp(t[i] - m);
        s += u[i];
    }
    for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int i = 0; i < k; ++i) acc += u[i] * jac[i * d + j];
        grad[j] = acc / s;
    }
    return m + std::log(s);
}

EffectiveExponent effective_exponent(const ParamVector& params, double d1) {
    if (!params.has("alpha2") || !params.has("alpha3")) {
        throw param_error(
            "effective exponent needs alpha2 and alpha3 (an interaction-family parameter set)");
    }
    check_coordinate("d1", d1);
    const double value = params.internal("alpha2") - params.internal("alpha3") * std::log(d1);
    return {value, value <= 0.0};
}

bool interaction_symmetry_check(const ParamVector& params, const EvalPoint& point) {
    for (auto name : {"alpha1", "alpha2", "alpha3"}) {
        if (!params.has(name)) {
            throw param_error(std::string("interaction symmetry check needs ") + name);
        }
    }
    check_coordinate("d1", point.d1);
    check_coordinate("d2", point.d2);
    const double a1 = params.internal("alpha1");
    const double a2 = params.internal("alpha2");
    const double a3 = params.internal("alpha3");
    const double x1 = std::log(point.d1);
    const double x2 = std::log(point.d2);
    // Both groupings of the bilinear exponent -a1*x1 - a2*x2 + a3*x1*x2.
    const double lhs = -a1 * x1 + (-a2 + a3 * x1) * x2;
    const double rhs = -a2 * x2 + (-a1 + a3 * x2) * x1;
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    return std::abs(lhs - rhs) <= 1e-10 * scale;
}

} // namespace bootlaw
