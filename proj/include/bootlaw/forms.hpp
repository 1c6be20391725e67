#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bootlaw/errors.hpp"

namespace bootlaw {

/// The functional families the library can evaluate and fit.
///
/// Loss models, all with positive scale coefficients and an irreducible
/// floor E.  d1/d2 are first/second-stage token counts, n is parameter count:
///
///   power_law_1d        L = A * d2^(-alpha) + E
///   mul_interaction     L = A * d1^(-alpha1) * d2^(-alpha2 + alpha3*ln d1) + E
///   mul_no_interaction  L = A * d1^(-alpha1) * d2^(-alpha2) + E
///   additive            L = A * d1^(-alpha1) + F * d2^(-alpha2) + E
///   hybrid              L = (A * d1^(-alpha1) + F) * d2^(-alpha2) + E
///   sum_form            L = A * (d1 + d2)^(-alpha) + E
///   joint_cpt           L = A * d1^(-alpha1) * d2^(-alpha2 + alpha3*ln d1)
///                           + B * n^(-beta) + E
///   chinchilla          L = A * d1^(-alpha) + B * n^(-beta) + E
///
/// All logarithms are natural logs, including the interaction term.
enum class Family {
    power_law_1d,
    mul_interaction,
    mul_no_interaction,
    additive,
    hybrid,
    sum_form,
    joint_cpt,
    chinchilla,
};

inline constexpr std::array<Family, 8> all_families = {
    Family::power_law_1d,    Family::mul_interaction, Family::mul_no_interaction,
    Family::additive,        Family::hybrid,          Family::sum_form,
    Family::joint_cpt,       Family::chinchilla,
};

/// Smallest token/parameter count any family accepts.  Counts below this are
/// outside the regime the power laws describe, and evaluating there would
/// quietly leave the fitted domain, so it is an error instead.
inline constexpr double kMinCoordinate = 1e6;

/// Largest number of log-space terms any family expands into.
inline constexpr int kMaxTerms = 3;

/// Largest parameter count across families (joint_cpt has 7).
inline constexpr int kMaxArity = 7;

struct FamilyTraits {
    Family family;
    std::string_view id;                     // stable id used by CLI and JSON
    std::vector<std::string_view> params;    // canonical packing order
    bool reads_d1;
    bool reads_d2;
    bool reads_n;
};

const FamilyTraits& traits(Family family);
Family family_from_id(std::string_view id);   // throws param_error if unknown
std::size_t arity(Family family);

/// Scale coefficients (A, B, F, E) live in log space inside ParamVector;
/// exponents (alpha*, beta, gamma, ...) are stored raw.
bool is_scale_param(std::string_view name);

/// Named coefficient set.  Scale coefficients are stored as natural logs so
/// they stay positive by construction no matter what an optimizer does; the
/// linear()/set_linear() accessors do the conversion at the boundary.
class ParamVector {
public:
    ParamVector() = default;

    static ParamVector from_linear(const std::vector<std::pair<std::string, double>>& kv);

    bool has(std::string_view name) const;
    std::size_t size() const { return values_.size(); }

    /// Value in natural units: exp() applied for scale coefficients.
    double linear(std::string_view name) const;
    void set_linear(std::string_view name, double value);

    /// Raw stored value: ln(scale) for A/B/F/E, plain for exponents.
    double internal(std::string_view name) const;
    void set_internal(std::string_view name, double value);

    const std::map<std::string, double, std::less<>>& internal_values() const {
        return values_;
    }

    /// Flatten to the family's canonical order (internal units).  Requires the
    /// name set to match the family exactly; the error message lists what is
    /// missing or unexpected.
    std::vector<double> pack(Family family) const;
    static ParamVector unpack(Family family, const double* packed);
    static ParamVector unpack(Family family, const std::vector<double>& packed);

private:
    std::map<std::string, double, std::less<>> values_;
};

/// Evaluation coordinates in natural units.  A coordinate the family does not
/// read may be left at 0; read coordinates must be >= kMinCoordinate.
struct EvalPoint {
    double d1 = 0;
    double d2 = 0;
    double n = 0;
};

/// Same coordinates as natural logarithms (the fitting code lives here).
struct LogPoint {
    double x1 = 0;   // ln d1
    double x2 = 0;   // ln d2
    double xn = 0;   // ln n
};

/// Validate read coordinates and take logs.  Throws domain_error naming the
/// offending coordinate.
LogPoint to_log_point(Family family, const EvalPoint& point);
void validate_log_point(Family family, const LogPoint& point);

/// Direct evaluation with pow()/exp() in linear space.  Independent of the
/// log-space route below so the two can cross-check each other.
double predict_loss(Family family, const ParamVector& params, const EvalPoint& point);

/// Expand the model into its k <= kMaxTerms log-space summands:
/// ln L = LSE(t_0, ..., t_{k-1}).  `packed` is in canonical order (internal
/// units).  If `jac` is non-null it receives the k x arity row-major matrix
/// d t_i / d p_j.  Returns k.  No validation: hot path, callers validate once.
int log_terms(Family family, const double* packed, const LogPoint& point,
              double* terms, double* jac);

double log_sum_exp(const double* terms, int count);

/// ln L via LogSumExp; never overflows, even for log-losses up to ~700.
double log_predict_lse(Family family, const ParamVector& params, const LogPoint& point);

/// Unchecked packed-array variant for the optimizer.
double log_predict_lse(Family family, const double* packed, const LogPoint& point);

/// Fused value + gradient of ln L with respect to packed parameters
/// (internal units).  grad must hold arity(family) doubles.
double log_predict_grad(Family family, const double* packed, const LogPoint& point,
                        double* grad);

struct EffectiveExponent {
    double value;        // alpha2 - alpha3 * ln d1
    bool saturated;      // true when value <= 0: the d2 term no longer decays
};

/// Realized d2 exponent at sunk cost d1.  Requires params carrying alpha2 and
/// alpha3 (interaction families); d1 >= kMinCoordinate.
EffectiveExponent effective_exponent(const ParamVector& params, double d1);

/// Checks the algebraic identity
///   d1^(-a1) * d2^(-a2 + a3 ln d1) = d2^(-a2) * d1^(-a1 + a3 ln d2)
/// at relative tolerance 1e-10 (both sides read as exp of the same bilinear
/// form).  Wants mul_interaction-shaped params.
bool interaction_symmetry_check(const ParamVector& params, const EvalPoint& point);

} // namespace bootlaw
