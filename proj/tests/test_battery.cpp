#include <doctest.h>

#include "helpers.hpp"
#include "voltpath/battery.hpp"
#include "voltpath/errors.hpp"

using namespace voltpath;

TEST_CASE("ocv curve validates its knots") {
    CHECK_THROWS_AS(OcvCurve({{0.5, 3.7}}), ValidationError);
    CHECK_THROWS_AS(OcvCurve({{0.0, 3.0}, {0.0, 3.5}}), ValidationError);   // duplicate soc
    CHECK_THROWS_AS(OcvCurve({{0.2, 3.5}, {0.1, 3.6}}), ValidationError);   // soc decreasing
    CHECK_THROWS_AS(OcvCurve({{0.0, 3.6}, {1.0, 3.5}}), ValidationError);   // voltage decreasing
    CHECK_THROWS_AS(OcvCurve({{0.0, -1.0}, {1.0, 3.5}}), ValidationError);  // non-positive volts
    CHECK_THROWS_AS(OcvCurve({{-0.1, 3.0}, {1.0, 4.2}}), ValidationError);  // soc below 0
    CHECK_NOTHROW(OcvCurve({{0.0, 3.0}, {0.5, 3.7}, {1.0, 4.2}}));
    // A flat plateau (equal voltages) is allowed; only decreases are not.
    CHECK_NOTHROW(OcvCurve({{0.0, 3.5}, {0.5, 3.5}, {1.0, 4.2}}));
}

TEST_CASE("ocv lookup interpolates linearly between knots") {
    const OcvCurve curve({{0.0, 3.0}, {0.4, 3.6}, {1.0, 4.2}});
    CHECK(ocv_at(curve, 0.0) == 3.0);
    CHECK(ocv_at(curve, 0.4) == 3.6);
    CHECK(ocv_at(curve, 1.0) == 4.2);
    CHECK(ocv_at(curve, 0.2) == doctest::Approx(3.3).epsilon(1e-12));
    CHECK(ocv_at(curve, 0.7) == doctest::Approx(3.9).epsilon(1e-12));

    CHECK_THROWS_AS(ocv_at(curve, -0.01), SocRangeError);
    CHECK_THROWS_AS(ocv_at(curve, 1.01), SocRangeError);
}

TEST_CASE("ocv lookup range follows the table, not [0,1]") {
    const OcvCurve partial({{0.2, 3.5}, {0.9, 4.1}});
    CHECK(partial.soc_min() == 0.2);
    CHECK(partial.soc_max() == 0.9);
    CHECK_THROWS_AS(ocv_at(partial, 0.1), SocRangeError);
    CHECK_NOTHROW(ocv_at(partial, 0.5));
}

TEST_CASE("battery parameter validation") {
    BatteryParams ok{9000.0, 0.035, 0.01, 30.0, 3.7, 1.0};
    CHECK_NOTHROW(validate(ok));

    BatteryParams bad = ok;
    bad.capacity_coulombs = 0.0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = ok;
    bad.r0_ohm = -0.01;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = ok;
    bad.tau_s = 0.0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = ok;
    bad.v_nom = 0.0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = ok;
    bad.soc_max = 1.5;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = ok;
    bad.r0_ohm = 0.0;  // resistances may be zero
    bad.r1_ohm = 0.0;
    CHECK_NOTHROW(validate(bad));
}

TEST_CASE("battery config json round-trip preserves every field") {
    const BatteryConfig original = default_18650();
    const BatteryConfig loaded = load_battery_config(save_battery_config(original));
    CHECK(loaded.capacity_mah == original.capacity_mah);
    CHECK(loaded.cells == original.cells);
    CHECK(loaded.params.capacity_coulombs == original.params.capacity_coulombs);
    CHECK(loaded.params.r0_ohm == original.params.r0_ohm);
    CHECK(loaded.params.r1_ohm == original.params.r1_ohm);
    CHECK(loaded.params.tau_s == original.params.tau_s);
    CHECK(loaded.params.v_nom == original.params.v_nom);
    CHECK(loaded.params.soc_max == original.params.soc_max);
    REQUIRE(loaded.curve.knots().size() == original.curve.knots().size());
    for (size_t i = 0; i < loaded.curve.knots().size(); ++i) {
        CHECK(loaded.curve.knots()[i].soc == original.curve.knots()[i].soc);
        CHECK(loaded.curve.knots()[i].ocv == original.curve.knots()[i].ocv);
    }
    // Serialization itself is stable byte for byte.
    CHECK(save_battery_config(loaded) == save_battery_config(original));
}

TEST_CASE("battery config defaults and unit conversion") {
    // v_nom defaults to 3.7 per cell; capacity converts mAh -> coulombs.
    const std::string json = R"({
        "capacity_mAh": 1000,
        "r0_ohm": 0.05,
        "r1_ohm": 0.0,
        "tau_s": 10.0,
        "cells": 4,
        "ocv": [[0.0, 12.0], [1.0, 16.8]]
    })";
    const BatteryConfig config = load_battery_config(json);
    CHECK(config.params.v_nom == doctest::Approx(14.8));
    CHECK(config.params.capacity_coulombs == doctest::Approx(3600.0));
    CHECK(config.params.soc_max == 1.0);

    CHECK_THROWS_AS(load_battery_config("{}"), ValidationError);
    CHECK_THROWS_AS(load_battery_config("not json"), ValidationError);
    CHECK_THROWS_AS(load_battery_config(R"({"capacity_mAh": 1000, "r0_ohm": 0.05,
        "r1_ohm": 0.0, "tau_s": 10.0, "ocv": [[0.0, 12.0]]})"),
                    ValidationError);  // single knot
}

TEST_CASE("built-in packs are physically sane") {
    for (const BatteryConfig& config : {default_18650(), default_lipo_4s()}) {
        CHECK_NOTHROW(validate(config.params));
        CHECK(config.curve.soc_min() == 0.0);
        CHECK(config.curve.soc_max() == 1.0);
        CHECK(config.params.capacity_coulombs == doctest::Approx(config.capacity_mah * 3.6));
        // Nominal voltage sits inside the OCV span.
        CHECK(config.params.v_nom > ocv_at(config.curve, 0.0));
        CHECK(config.params.v_nom < ocv_at(config.curve, 1.0));
    }
    CHECK(default_18650().cells == 1);
    CHECK(default_lipo_4s().cells == 4);
    CHECK(default_lipo_4s().params.v_nom == doctest::Approx(14.8));
}

TEST_CASE("shipped battery configs match the built-in defaults") {
    const std::filesystem::path repo = VOLTPATH_REPO_DIR;
    CHECK(testutil::read_text(repo / "configs/battery_18650.json") ==
          save_battery_config(default_18650()));
    CHECK(testutil::read_text(repo / "configs/battery_4s_lipo.json") ==
          save_battery_config(default_lipo_4s()));
}

TEST_CASE("battery config file loader reports the path on failure") {
    testutil::TempDir tmp;
    CHECK_THROWS_AS(load_battery_config_file(tmp.file("missing.json")), ValidationError);
    testutil::write_text(tmp.file("broken.json"), "{");
    const std::string msg = testutil::message_of<ValidationError>(
        [&] { load_battery_config_file(tmp.file("broken.json")); });
    CHECK(msg.find("broken.json") != std::string::npos);
}
