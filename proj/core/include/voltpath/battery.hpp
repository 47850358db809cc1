#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "voltpath/errors.hpp"

namespace voltpath {

struct OcvKnot {
    double soc;  // fraction in [0, 1]
    double ocv;  // volts
};

/// Open-circuit-voltage lookup table: piecewise-linear in SOC, never
/// extrapolated outside the knot range.
class OcvCurve {
  public:
    /// Validates and takes ownership of the knots. Requirements: at least two
    /// knots, strictly increasing soc, strictly positive and non-decreasing ocv.
    explicit OcvCurve(std::vector<OcvKnot> knots);

    const std::vector<OcvKnot>& knots() const { return knots_; }
    double soc_min() const { return knots_.front().soc; }
    double soc_max() const { return knots_.back().soc; }

  private:
    std::vector<OcvKnot> knots_;
};

/// Interpolated OCV at `soc`. Exact at knots. Throws SocRangeError outside
/// the knot range.
double ocv_at(const OcvCurve& curve, double soc);

struct BatteryParams {
    double capacity_coulombs = 0.0;  // maximum charge C_m
    double r0_ohm = 0.0;             // internal (series) resistance
    double r1_ohm = 0.0;             // RC branch resistance
    double tau_s = 1.0;              // RC branch time constant
    double v_nom = 0.0;              // nominal pack voltage
    double soc_max = 1.0;            // usable SOC ceiling B_m
};

/// Throws ValidationError naming the first violated field.
void validate(const BatteryParams& params);

/// Battery search/simulation state. u_hysteresis is the RC branch voltage;
/// it stays zero for models without an RC branch.
struct SocState {
    double soc = 1.0;           // fraction in [0, 1]
    double u_hysteresis = 0.0;  // volts
};

/// A battery description as read from or written to a config file.
/// capacity_mah is kept as the file's source of truth so that a
/// save/load round trip is exact; params.capacity_coulombs is always
/// capacity_mah * 3.6.
struct BatteryConfig {
    OcvCurve curve;
    BatteryParams params;
    double capacity_mah = 0.0;
    int cells = 1;
};

/// Parses the battery config JSON document. Schema:
///   { "capacity_mAh": number, "r0_ohm": number, "r1_ohm": number,
///     "tau_s": number, "v_nom": number, "cells": integer,
///     "ocv": [[soc, volts], ...] }
/// "v_nom" may be omitted; it then defaults to 3.7 V per cell.
/// An optional "soc_max" (default 1.0) caps the usable SOC window.
/// Throws ValidationError naming the offending field.
BatteryConfig load_battery_config(const std::string& json_text);
BatteryConfig load_battery_config_file(const std::filesystem::path& path);

std::string save_battery_config(const BatteryConfig& config);

/// Synthetic single-cell Li-Ion battery (2500 mAh). The OCV table is a
/// generic 3.0-4.2 V curve with a concave knee below soc 0.2; it is not
/// measured data. Resistances and time constant are placeholders.
BatteryConfig default_18650();

/// Synthetic 4-cell LiPo pack (5000 mAh, 14.8 V nominal). Same caveats as
/// default_18650().
BatteryConfig default_lipo_4s();

}  // namespace voltpath
