#include <doctest.h>

#include <cmath>

#include "bootlaw/forms.hpp"
#include "support.hpp"

using namespace bootlaw;
using testutil::close;
using testutil::rel_diff;

namespace {

ParamVector cpt_code_params() {
    return ParamVector::from_linear({{"A", 15.062},
                                     {"alpha1", 0.048},
                                     {"alpha2", 0.126},
                                     {"alpha3", 0.001},
                                     {"B", 27.234},
                                     {"beta", 0.238},
                                     {"E", 0.105}});
}

} // namespace

TEST_CASE("joint law reproduces pinned reference evaluations") {
    // Expected values computed independently with 40-digit arithmetic.
    const double cpt = predict_loss(Family::joint_cpt, cpt_code_params(), {1e13, 3e11, 7e9});
    CHECK(rel_diff(cpt, 0.51128277276484085) < 1e-12);

    const double grown =
        predict_loss(Family::joint_cpt, testutil::stack_params(), {1.3e13, 1.3e13, 1e11});
    CHECK(rel_diff(grown, 1.34561776942275685) < 1e-12);

    const double scratch =
        predict_loss(Family::chinchilla, testutil::base_params(), {1.3e13, 0, 2e11});
    CHECK(rel_diff(scratch, 1.34266414010995933) < 1e-12);

    // The two-law near-equality at 1.3e13 tokens / 1e11 params is the anchor
    // that pins the natural-log convention for the interaction term.
    CHECK(std::abs(std::log(grown) - std::log(scratch)) < 0.01);
}

TEST_CASE("all exponents zero collapses to A + E") {
    const auto p = ParamVector::from_linear(
        {{"A", 1.0}, {"alpha1", 0.0}, {"alpha2", 0.0}, {"alpha3", 0.0}, {"E", 0.5}});
    CHECK(predict_loss(Family::mul_interaction, p, {1e9, 1e9, 0}) == doctest::Approx(1.5));

    // Same degenerate setup through the log route: LSE(0, 0) = ln 2.
    const auto p2 = ParamVector::from_linear(
        {{"A", 1.0}, {"alpha1", 0.0}, {"alpha2", 0.0}, {"alpha3", 0.0}, {"E", 1.0}});
    const double lp = log_predict_lse(Family::mul_interaction, p2,
                                      to_log_point(Family::mul_interaction, {1e9, 1e9, 0}));
    CHECK(rel_diff(lp, std::log(2.0)) < 1e-15);
}

TEST_CASE("log-space route agrees with the direct route on random inputs") {
    std::mt19937_64 rng(42);
    for (Family family : all_families) {
        for (int rep = 0; rep < 40; ++rep) {
            const auto params = testutil::random_params(family, rng);
            const auto point = testutil::random_point(rng);
            const double direct = predict_loss(family, params, point);
            const double via_log =
                log_predict_lse(family, params, to_log_point(family, point));
            CHECK(rel_diff(via_log, std::log(direct)) < 1e-12);
        }
    }
}

TEST_CASE("log-space evaluation survives log-losses up to 700") {
    // exp(690) overflows a double, so the direct route is useless here; the
    // LSE route must stay finite and exact.
    ParamVector p;
    p.set_internal("A", 700.0);   // ln A
    p.set_internal("alpha1", 0.01);
    p.set_internal("alpha2", 0.01);
    p.set_internal("alpha3", 0.0);
    p.set_internal("E", -1.0);
    const LogPoint pt = to_log_point(Family::mul_interaction, {1e8, 1e8, 0});
    const double lp = log_predict_lse(Family::mul_interaction, p, pt);
    CHECK(std::isfinite(lp));
    // A-term dominates: ln L = lnA - (a1 + a2) * ln(1e8) almost exactly.
    CHECK(lp == doctest::Approx(700.0 - 0.02 * std::log(1e8)).epsilon(1e-12));

    double grad[kMaxArity];
    const auto packed = p.pack(Family::mul_interaction);
    const double lg = log_predict_grad(Family::mul_interaction, packed.data(), pt, grad);
    CHECK(lg == doctest::Approx(lp));
    for (std::size_t j = 0; j < arity(Family::mul_interaction); ++j) {
        CHECK(std::isfinite(grad[j]));
    }
}

TEST_CASE("removing the interaction term equals pinning alpha3 to zero") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 25; ++rep) {
        auto base = testutil::random_params(Family::mul_no_interaction, rng);
        auto with_zero = base;
        with_zero.set_internal("alpha3", 0.0);
        const auto point = testutil::random_point(rng);
        const LogPoint lp = to_log_point(Family::mul_interaction, point);
        // Bitwise equality: adding a 0.0 * x1 * x2 term must change nothing.
        CHECK(log_predict_lse(Family::mul_interaction, with_zero, lp) ==
              log_predict_lse(Family::mul_no_interaction, base, lp));
        CHECK(predict_loss(Family::mul_interaction, with_zero, point) ==
              predict_loss(Family::mul_no_interaction, base, point));
    }
}

TEST_CASE("loss falls in a coordinate exactly while its total exponent is positive") {
    std::mt19937_64 rng(11);
    int saturated_seen = 0;
    for (int rep = 0; rep < 60; ++rep) {
        auto params = testutil::random_params(Family::mul_interaction, rng);
        // Stretch alpha3 upward so both signs of the effective exponent occur.
        params.set_internal("alpha3", uniform(rng, 0.0, 0.08));
        const auto point = testutil::random_point(rng);

        const double eff_d2 =
            params.internal("alpha2") - params.internal("alpha3") * std::log(point.d1);
        const double eff_d1 =
            params.internal("alpha1") - params.internal("alpha3") * std::log(point.d2);

        const double up = predict_loss(Family::mul_interaction, params,
                                       {point.d1, point.d2 * 1.01, 0});
        const double down = predict_loss(Family::mul_interaction, params,
                                         {point.d1, point.d2 / 1.01, 0});
        if (eff_d2 > 1e-6) CHECK(up < down);
        if (eff_d2 < -1e-6) {
            CHECK(up > down);
            ++saturated_seen;
        }

        const double up1 = predict_loss(Family::mul_interaction, params,
                                        {point.d1 * 1.01, point.d2, 0});
        const double down1 = predict_loss(Family::mul_interaction, params,
                                          {point.d1 / 1.01, point.d2, 0});
        if (eff_d1 > 1e-6) CHECK(up1 < down1);
        if (eff_d1 < -1e-6) CHECK(up1 > down1);
    }
    // The draw ranges are chosen so saturation actually occurs in this sample.
    CHECK(saturated_seen > 0);
}

TEST_CASE("loss approaches the floor as d2 grows without bound") {
    const auto p = ParamVector::from_linear(
        {{"A", 20.0}, {"alpha1", 0.1}, {"alpha2", 1.0}, {"alpha3", 0.0}, {"E", 0.3}});
    const double far = predict_loss(Family::mul_interaction, p, {1e9, 1e30, 0});
    // At this exponent the remaining power term is beneath one ulp of E.
    CHECK(far >= 0.3);
    CHECK(rel_diff(far, 0.3) < 1e-10);

    // Shallow exponent: convergence is slower but still monotone.
    const auto shallow = ParamVector::from_linear(
        {{"A", 20.0}, {"alpha1", 0.1}, {"alpha2", 0.1}, {"alpha3", 0.0}, {"E", 0.3}});
    const double mid = predict_loss(Family::mul_interaction, shallow, {1e9, 1e10, 0});
    const double far2 = predict_loss(Family::mul_interaction, shallow, {1e9, 1e30, 0});
    CHECK(far2 > 0.3);
    CHECK((far2 - 0.3) < (mid - 0.3) / 50.0);
}

TEST_CASE("effective exponent matches pinned arithmetic and flags saturation") {
    const auto eff = effective_exponent(testutil::stack_params(), 1e9);
    CHECK(rel_diff(eff.value, 0.05683020248916077) < 1e-12);
    CHECK_FALSE(eff.saturated);

    // Steeper interaction coefficients seen in continued-pretraining fits.
    const auto steep = ParamVector::from_linear({{"alpha2", 0.146}, {"alpha3", 0.004}});
    CHECK(rel_diff(effective_exponent(steep, 1e10).value, 0.05389659628023817) < 1e-12);

    const auto cpt = cpt_code_params();
    CHECK(rel_diff(effective_exponent(cpt, 1e12).value, 0.09836897888407145) < 1e-12);

    // alpha3 = 0 makes the result independent of d1.
    const auto flat = ParamVector::from_linear({{"alpha2", 0.2}, {"alpha3", 0.0}});
    CHECK(effective_exponent(flat, 1e7).value == doctest::Approx(0.2));
    CHECK(effective_exponent(flat, 1e12).value == doctest::Approx(0.2));

    const auto sat = ParamVector::from_linear({{"alpha2", 0.1}, {"alpha3", 0.01}});
    const auto result = effective_exponent(sat, 1e6);   // 0.1 - 0.01 * 13.8 < 0
    CHECK(result.saturated);
    CHECK(result.value < 0);
}

TEST_CASE("interaction exponent symmetry holds for random parameters") {
    CHECK(interaction_symmetry_check(testutil::stack_params(), {1e10, 1e9, 0}));

    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        auto params = testutil::random_params(Family::mul_interaction, rng);
        const auto point = testutil::random_point(rng);
        CHECK(interaction_symmetry_check(params, point));
    }

    auto no_interaction = testutil::random_params(Family::mul_interaction, rng);
    no_interaction.set_internal("alpha3", 0.0);
    CHECK(interaction_symmetry_check(no_interaction, {2e8, 9e11, 0}));
}

TEST_CASE("analytic gradients match central finite differences") {
    std::mt19937_64 rng(19);
    const double step = 1e-6;
    for (Family family : all_families) {
        const auto d = arity(family);
        for (int rep = 0; rep < 12; ++rep) {
            const auto params = testutil::random_params(family, rng);
            const LogPoint pt = to_log_point(family, testutil::random_point(rng));
            auto packed = params.pack(family);

            double grad[kMaxArity];
            log_predict_grad(family, packed.data(), pt, grad);
            for (std::size_t j = 0; j < d; ++j) {
                const double saved = packed[j];
                packed[j] = saved + step;
                const double up = log_predict_lse(family, packed.data(), pt);
                packed[j] = saved - step;
                const double down = log_predict_lse(family, packed.data(), pt);
                packed[j] = saved;
                const double fd = (up - down) / (2 * step);
                // The 1e-5 floor keeps the bound above central-difference
                // roundoff (~1e-10) when a component is genuinely near zero.
                CHECK(std::abs(grad[j] - fd) <=
                      1e-4 * std::max({1e-5, std::abs(grad[j]), std::abs(fd)}));
            }
        }
    }
}

TEST_CASE("parameter names are validated on every evaluation") {
    auto p = testutil::stack_params();   // joint-cpt shaped
    CHECK_THROWS_AS(predict_loss(Family::chinchilla, p, {1e9, 0, 1e9}), param_error);
    CHECK_THROWS_AS(predict_loss(Family::mul_interaction, p, {1e9, 1e9, 0}), param_error);

    ParamVector missing;
    missing.set_linear("A", 2.0);
    missing.set_linear("alpha", 0.1);
    CHECK_THROWS_WITH_AS(predict_loss(Family::power_law_1d, missing, {0, 1e9, 0}),
                         doctest::Contains("missing: E"), param_error);

    CHECK_THROWS_AS(family_from_id("not-a-family"), param_error);
    CHECK(family_from_id("joint-cpt") == Family::joint_cpt);
}

TEST_CASE("coordinates below the modeled domain are rejected where read") {
    const auto p = cpt_code_params();
    CHECK_THROWS_AS(predict_loss(Family::joint_cpt, p, {1e5, 3e11, 7e9}), domain_error);
    CHECK_THROWS_AS(predict_loss(Family::joint_cpt, p, {1e13, 0, 7e9}), domain_error);
    CHECK_THROWS_AS(predict_loss(Family::joint_cpt, p, {1e13, 3e11, 1e5}), domain_error);

    // Unread coordinates are free: power_law_1d ignores d1 and n entirely.
    const auto q =
        ParamVector::from_linear({{"A", 2.0}, {"alpha", 0.1}, {"E", 0.2}});
    CHECK(predict_loss(Family::power_law_1d, q, {0, 1e9, 0}) > 0.2);

    CHECK_THROWS_AS(effective_exponent(testutil::stack_params(), 10.0), domain_error);
}

TEST_CASE("scale coefficients stay positive by construction") {
    ParamVector p;
    CHECK_THROWS_AS(p.set_linear("A", -2.0), domain_error);
    CHECK_THROWS_AS(p.set_linear("E", 0.0), domain_error);

    p.set_linear("A", 15.062);
    CHECK(p.internal("A") == doctest::Approx(std::log(15.062)));
    CHECK(p.linear("A") == doctest::Approx(15.062));

    // Exponents pass through untouched and may be negative.
    p.set_linear("alpha1", -0.3);
    CHECK(p.linear("alpha1") == -0.3);
    CHECK(p.internal("alpha1") == -0.3);
}

TEST_CASE("pack and unpack are inverse up to canonical order") {
    std::mt19937_64 rng(23);
    for (Family family : all_families) {
        const auto params = testutil::random_params(family, rng);
        const auto packed = params.pack(family);
        REQUIRE(packed.size() == arity(family));
        const auto back = ParamVector::unpack(family, packed);
        for (auto name : traits(family).params) {
            CHECK(back.internal(name) == params.internal(name));
        }
    }
    CHECK_THROWS_AS(ParamVector::unpack(Family::joint_cpt, std::vector<double>(3, 0.0)),
                    param_error);
}
