#include "voltpath/battery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "json_util.hpp"

namespace voltpath {

OcvCurve::OcvCurve(std::vector<OcvKnot> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) {
        throw ValidationError("ocv: need at least 2 knots");
    }
    for (size_t i = 0; i < knots_.size(); ++i) {
        const auto& k = knots_[i];
        if (!std::isfinite(k.soc) || !std::isfinite(k.ocv)) {
            throw ValidationError("ocv: non-finite knot at index " + std::to_string(i));
        }
        if (k.soc < 0.0 || k.soc > 1.0) {
            throw ValidationError("ocv: knot soc outside [0,1] at index " + std::to_string(i));
        }
        if (k.ocv <= 0.0) {
            throw ValidationError("ocv: non-positive voltage at index " + std::to_string(i));
        }
        if (i > 0) {
            if (k.soc <= knots_[i - 1].soc) {
                throw ValidationError("ocv: knot soc not strictly increasing at index " +
                                      std::to_string(i));
            }
            if (k.ocv < knots_[i - 1].ocv) {
                throw ValidationError("ocv: voltage decreasing at index " + std::to_string(i));
            }
        }
    }
}

double ocv_at(const OcvCurve& curve, double soc) {
    const auto& knots = curve.knots();
    if (!(soc >= knots.front().soc && soc <= knots.back().soc)) {
        std::ostringstream msg;
        msg << "soc " << soc << " outside OCV table range [" << knots.front().soc << ", "
            << knots.back().soc << "]";
        throw SocRangeError(msg.str());
    }
    auto upper = std::lower_bound(knots.begin(), knots.end(), soc,
                                  [](const OcvKnot& k, double s) { return k.soc < s; });
    if (upper->soc == soc) {
        return upper->ocv;  // exact knot hit
    }
    const auto& hi = *upper;
    const auto& lo = *(upper - 1);
    const double w = (soc - lo.soc) / (hi.soc - lo.soc);
    return lo.ocv + w * (hi.ocv - lo.ocv);
}

void validate(const BatteryParams& params) {
    if (!(params.capacity_coulombs > 0.0)) {
        throw ValidationError("capacity_coulombs: must be > 0");
    }
    if (!(params.r0_ohm >= 0.0)) {
        throw ValidationError("r0_ohm: must be >= 0");
    }
    if (!(params.r1_ohm >= 0.0)) {
        throw ValidationError("r1_ohm: must be >= 0");
    }
    if (!(params.tau_s > 0.0)) {
        throw ValidationError("tau_s: must be > 0");
    }
    if (!(params.v_nom > 0.0)) {
        throw ValidationError("v_nom: must be > 0");
    }
    if (!(params.soc_max > 0.0 && params.soc_max <= 1.0)) {
        throw ValidationError("soc_max: must be in (0, 1]");
    }
}

namespace {

constexpr double kCoulombsPerMah = 3.6;

BatteryConfig config_from_json(const nlohmann::json& doc) {
    const double capacity_mah = detail::require_number(doc, "capacity_mAh");
    const double r0 = detail::require_number(doc, "r0_ohm");
    const double r1 = detail::require_number(doc, "r1_ohm");
    const double tau = detail::require_number(doc, "tau_s");
    const int cells = static_cast<int>(detail::number_or(doc, "cells", 1.0));
    if (cells < 1) {
        throw ValidationError("cells: must be >= 1");
    }
    const double v_nom = detail::number_or(doc, "v_nom", 3.7 * cells);
    const double soc_max = detail::number_or(doc, "soc_max", 1.0);

    if (!doc.contains("ocv") || !doc["ocv"].is_array()) {
        throw ValidationError("ocv: missing or not an array");
    }
    std::vector<OcvKnot> knots;
    for (const auto& pair : doc["ocv"]) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
            throw ValidationError("ocv: each knot must be [soc, volts]");
        }
        knots.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }

    BatteryConfig config{OcvCurve(std::move(knots)),
                         BatteryParams{capacity_mah * kCoulombsPerMah, r0, r1, tau, v_nom, soc_max},
                         capacity_mah, cells};
    validate(config.params);
    return config;
}

}  // namespace

BatteryConfig load_battery_config(const std::string& json_text) {
    return config_from_json(detail::parse_json(json_text, "battery config"));
}

BatteryConfig load_battery_config_file(const std::filesystem::path& path) {
    return config_from_json(detail::parse_json(detail::read_file(path), path.string()));
}

std::string save_battery_config(const BatteryConfig& config) {
    nlohmann::json doc;
    doc["capacity_mAh"] = config.capacity_mah;
    doc["r0_ohm"] = config.params.r0_ohm;
    doc["r1_ohm"] = config.params.r1_ohm;
    doc["tau_s"] = config.params.tau_s;
    doc["v_nom"] = config.params.v_nom;
    doc["cells"] = config.cells;
    doc["soc_max"] = config.params.soc_max;
    auto knots = nlohmann::json::array();
    for (const auto& k : config.curve.knots()) {
        knots.push_back({k.soc, k.ocv});
    }
    doc["ocv"] = std::move(knots);
    return doc.dump(2) + "\n";
}

namespace {

// Generic Li-Ion shape: steep concave knee below soc 0.2, gentle slope in
// the middle, rise toward 4.2 V at full charge.
const std::vector<OcvKnot>& cell_ocv_knots() {
    static const std::vector<OcvKnot> knots = {
        {0.00, 3.00}, {0.05, 3.30}, {0.10, 3.45}, {0.20, 3.55}, {0.30, 3.63}, {0.40, 3.71},
        {0.50, 3.78}, {0.60, 3.85}, {0.70, 3.92}, {0.85, 4.03}, {1.00, 4.18},
    };
    return knots;
}

std::vector<OcvKnot> scaled_cell_knots(int cells) {
    std::vector<OcvKnot> knots = cell_ocv_knots();
    for (auto& k : knots) {
        k.ocv *= cells;
    }
    return knots;
}

}  // namespace

BatteryConfig default_18650() {
    const double capacity_mah = 2500.0;
    BatteryConfig config{OcvCurve(scaled_cell_knots(1)),
                         BatteryParams{capacity_mah * kCoulombsPerMah, 0.035, 0.01, 30.0, 3.7, 1.0},
                         capacity_mah, 1};
    return config;
}

BatteryConfig default_lipo_4s() {
    const double capacity_mah = 5000.0;
    BatteryConfig config{OcvCurve(scaled_cell_knots(4)),
                         BatteryParams{capacity_mah * kCoulombsPerMah, 0.024, 0.008, 20.0, 14.8, 1.0},
                         capacity_mah, 4};
    return config;
}

}  // namespace voltpath
