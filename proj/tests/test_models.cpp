#include <cmath>
#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "voltpath/battery.hpp"
#include "voltpath/errors.hpp"
#include "voltpath/models.hpp"

using namespace voltpath;

namespace {

const BatteryConfig& cell() {
    static const BatteryConfig config = default_18650();
    return config;
}

}  // namespace

TEST_CASE("loaded voltage satisfies the constant-power circuit equation") {
    // V is defined by V * (OCV - V) = P * R0 with V in the upper half; check
    // the defining equation directly instead of re-deriving the closed form.
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> soc_dist(0.05, 1.0);
    std::uniform_real_distribution<double> p_dist(0.1, 12.0);
    for (int i = 0; i < 500; ++i) {
        const double soc = soc_dist(rng);
        const double p = p_dist(rng);
        const double ocv = ocv_at(cell().curve, soc);
        const double v = ohmic_voltage(soc, p, cell().curve, cell().params);
        CHECK(v * (ocv - v) == doctest::Approx(p * cell().params.r0_ohm).epsilon(1e-10));
        CHECK(v >= ocv / 2.0);  // the stable (larger) root
        CHECK(v <= ocv);
    }
}

TEST_CASE("zero power and zero resistance collapse to open-circuit voltage") {
    CHECK(ohmic_voltage(0.8, 0.0, cell().curve, cell().params) ==
          ocv_at(cell().curve, 0.8));
    BatteryParams no_r = cell().params;
    no_r.r0_ohm = 0.0;
    CHECK(ohmic_voltage(0.8, 5.0, cell().curve, no_r) == ocv_at(cell().curve, 0.8));
}

TEST_CASE("overload beyond the deliverable maximum is rejected") {
    // Max deliverable power is OCV^2 / (4 R0); above it the quadratic has no
    // real root.
    const double ocv = ocv_at(cell().curve, 0.5);
    const double p_max = ocv * ocv / (4.0 * cell().params.r0_ohm);
    CHECK_NOTHROW(ohmic_voltage(0.5, p_max * 0.999, cell().curve, cell().params));
    CHECK_THROWS_AS(ohmic_voltage(0.5, p_max * 1.001, cell().curve, cell().params),
                    InfeasibleLoadError);
}

TEST_CASE("power draw validation") {
    CHECK_NOTHROW(validate(PowerDraw{5.0, 10.0}));
    CHECK_NOTHROW(validate(PowerDraw{0.0, 10.0}));   // idle legs are fine
    CHECK_THROWS_AS(validate(PowerDraw{-1.0, 10.0}), ValidationError);
    CHECK_THROWS_AS(validate(PowerDraw{5.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(validate(PowerDraw{5.0, -3.0}), ValidationError);
}

TEST_CASE("rc step matches an independent recomputation") {
    const BatteryParams& params = cell().params;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> soc_dist(0.3, 1.0);
    std::uniform_real_distribution<double> u_dist(0.0, 0.05);
    std::uniform_real_distribution<double> p_dist(0.5, 10.0);
    std::uniform_real_distribution<double> dt_dist(0.1, 120.0);
    for (int i = 0; i < 200; ++i) {
        SocState state{soc_dist(rng), u_dist(rng)};
        const double p = p_dist(rng);
        const double dt = dt_dist(rng);
        const SocState next = rc_step(state, {p, dt}, cell().curve, params);

        // Reference: solve the loaded voltage against the relaxed open
        // voltage, draw I = P/V for dt, decay U exponentially toward R1*I.
        const double open = ocv_at(cell().curve, state.soc) - state.u_hysteresis;
        const double disc = open * open - 4.0 * p * params.r0_ohm;
        REQUIRE(disc >= 0.0);
        const double v = (open + std::sqrt(disc)) / 2.0;
        const double current = p / v;
        const double decay = std::exp(-dt / params.tau_s);
        CHECK(next.soc ==
              doctest::Approx(state.soc - current * dt / params.capacity_coulombs).epsilon(1e-14));
        CHECK(next.u_hysteresis ==
              doctest::Approx(decay * state.u_hysteresis +
                              params.r1_ohm * (1.0 - decay) * current)
                  .epsilon(1e-14));
    }
}

TEST_CASE("rc relaxation voltage decays toward R1*I and vanishes when R1=0") {
    const BatteryParams& params = cell().params;
    SocState state{0.9, 0.0};
    // Long holds at constant current approach the steady state U = R1*I.
    double current = 0.0;
    for (int i = 0; i < 200; ++i) {
        const SocState next = rc_step(state, {6.0, 10.0}, cell().curve, params);
        current = (state.soc - next.soc) * params.capacity_coulombs / 10.0;
        state = next;
    }
    CHECK(state.u_hysteresis == doctest::Approx(params.r1_ohm * current).epsilon(1e-3));

    BatteryParams no_rc = params;
    no_rc.r1_ohm = 0.0;
    SocState s{0.9, 0.0};
    for (int i = 0; i < 10; ++i) {
        s = rc_step(s, {6.0, 10.0}, cell().curve, no_rc);
        CHECK(s.u_hysteresis == 0.0);
    }
}

TEST_CASE("nominal update is the constant-voltage coulomb drain") {
    const BatteryParams& params = cell().params;
    const double got = nominal_delta(0.8, {7.0, 60.0}, params);
    CHECK(got == doctest::Approx(0.8 - 7.0 * 60.0 / (params.v_nom * params.capacity_coulombs))
                     .epsilon(1e-15));
    // No clamping: the update may go below zero, callers decide.
    CHECK(nominal_delta(0.0, {7.0, 3600.0}, params) < 0.0);
}

TEST_CASE("linear update evaluates the fitted inverse voltage at the start state") {
    LinearFit fit;
    fit.a = -0.05;
    fit.b = 0.0008;
    fit.c = 0.31;
    fit.domain = {0.1, 1.0, 0.5, 12.0};
    const BatteryParams& params = cell().params;
    const double soc0 = 0.7;
    const double p = 6.0;
    const double dt = 90.0;
    const double inv_v = fit.a * soc0 + fit.b * p + fit.c;
    CHECK(linear_delta(soc0, {p, dt}, fit, params) ==
          doctest::Approx(soc0 - p * inv_v * dt / params.capacity_coulombs).epsilon(1e-15));

    SUBCASE("inputs outside the fitted box are refused") {
        CHECK_THROWS_AS(linear_delta(0.05, {p, dt}, fit, params), FitDomainError);
        CHECK_THROWS_AS(linear_delta(soc0, {20.0, dt}, fit, params), FitDomainError);
        const std::string msg = testutil::message_of<FitDomainError>(
            [&] { linear_delta(0.05, {p, dt}, fit, params); });
        CHECK(msg.find("0.1") != std::string::npos);  // names the valid box
    }
}

TEST_CASE("fit recovers an exactly planar inverse voltage") {
    // Build a battery whose 1/V is a known plane: zero resistance removes
    // the power term, and OCV(S) = 1/(c + a*S) makes 1/V affine in S. Knots
    // placed on the fit grid keep interpolation exact there.
    const double a = -0.05;
    const double c = 0.30;
    std::vector<OcvKnot> knots;
    for (int i = 0; i <= 20; ++i) {
        const double s = i / 20.0;
        knots.push_back({s, 1.0 / (c + a * s)});
    }
    const OcvCurve curve{knots};
    const BatteryParams params{9000.0, 0.0, 0.0, 30.0, 3.7, 1.0};

    const LinearFit fit =
        fit_linear(curve, params, default_soc_grid(), uniform_power_grid(1.0, 10.0));
    CHECK(fit.a == doctest::Approx(a).epsilon(1e-9));
    CHECK(fit.b == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(fit.c == doctest::Approx(c).epsilon(1e-9));
    CHECK(fit.max_rel_residual < 1e-9);
    CHECK(fit.domain.soc_min == doctest::Approx(0.2));
    CHECK(fit.domain.soc_max == doctest::Approx(1.0));
    CHECK(fit.domain.p_min_w == doctest::Approx(1.0));
    CHECK(fit.domain.p_max_w == doctest::Approx(10.0));
}

TEST_CASE("fit on a real pack keeps residuals small and slopes signed") {
    const LinearFit fit = fit_linear(cell().curve, cell().params, default_soc_grid(),
                                     uniform_power_grid(1.0, 10.0));
    CHECK(fit.a < 0.0);  // voltage rises with soc, so 1/V falls
    CHECK(fit.b > 0.0);  // load sag raises 1/V with power
    CHECK(fit.max_rel_residual < 0.02);
}

TEST_CASE("degenerate fit grids are rejected") {
    // A single soc sample leaves the plane underdetermined.
    const std::vector<double> one_soc{0.5};
    const std::vector<double> one_power{5.0};
    const std::vector<double> empty;
    CHECK_THROWS_AS(
        fit_linear(cell().curve, cell().params, one_soc, uniform_power_grid(1.0, 10.0)),
        FitError);
    CHECK_THROWS_AS(fit_linear(cell().curve, cell().params, empty, one_power), ValidationError);
}

TEST_CASE("fit grid helpers produce the documented grids") {
    const std::vector<double> socs = default_soc_grid();
    REQUIRE(socs.size() == 17);
    CHECK(socs.front() == doctest::Approx(0.2));
    CHECK(socs.back() == doctest::Approx(1.0));
    CHECK(socs[1] - socs[0] == doctest::Approx(0.05));

    const std::vector<double> powers = uniform_power_grid(2.0, 11.0, 10);
    REQUIRE(powers.size() == 10);
    CHECK(powers.front() == doctest::Approx(2.0));
    CHECK(powers.back() == doctest::Approx(11.0));
    CHECK(powers[1] - powers[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(uniform_power_grid(5.0, 1.0), ValidationError);
}

TEST_CASE("fit json round-trip is exact") {
    const LinearFit fit = fit_linear(cell().curve, cell().params, default_soc_grid(),
                                     uniform_power_grid(1.0, 10.0));
    const LinearFit loaded = load_linear_fit(save_linear_fit(fit));
    CHECK(loaded.a == fit.a);
    CHECK(loaded.b == fit.b);
    CHECK(loaded.c == fit.c);
    CHECK(loaded.domain.soc_min == fit.domain.soc_min);
    CHECK(loaded.domain.soc_max == fit.domain.soc_max);
    CHECK(loaded.domain.p_min_w == fit.domain.p_min_w);
    CHECK(loaded.domain.p_max_w == fit.domain.p_max_w);
    CHECK(loaded.max_rel_residual == fit.max_rel_residual);

    testutil::TempDir tmp;
    save_linear_fit_file(fit, tmp.file("fit.json"));
    const LinearFit from_file = load_linear_fit_file(tmp.file("fit.json"));
    CHECK(from_file.a == fit.a);
}

TEST_CASE("fit domain membership is a closed box") {
    const FitDomain box{0.2, 1.0, 1.0, 10.0};
    CHECK(contains(box, 0.2, 1.0));
    CHECK(contains(box, 1.0, 10.0));
    CHECK(contains(box, 0.5, 5.0));
    CHECK_FALSE(contains(box, 0.19, 5.0));
    CHECK_FALSE(contains(box, 0.5, 10.1));
}

TEST_CASE("dominance predicate flags charge-gaining extensions") {
    LinearFit fit;
    fit.a = -0.05;
    CHECK(dominance_safe(fit, 500.0, 600.0));  // negative slope is always safe
    fit.a = 0.0;
    CHECK(dominance_safe(fit, 500.0, 600.0));
    fit.a = 1e-5;
    CHECK(dominance_safe(fit, 100.0, 100.0));        // 1 - 0.1 > 0
    CHECK_FALSE(dominance_safe(fit, 500.0, 600.0));  // 1 - 3 < 0
}
