#include "voltpath/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "fit_json.hpp"
#include "json_util.hpp"

namespace voltpath {

void validate(const PowerDraw& draw) {
    if (!(draw.duration_s > 0.0) || !std::isfinite(draw.duration_s)) {
        throw ValidationError("duration_s: must be > 0");
    }
    if (!(draw.power_w >= 0.0) || !std::isfinite(draw.power_w)) {
        throw ValidationError("power_w: must be >= 0 (charging is not modeled)");
    }
}

bool contains(const FitDomain& domain, double soc, double power_w) {
    return soc >= domain.soc_min && soc <= domain.soc_max && power_w >= domain.p_min_w &&
           power_w <= domain.p_max_w;
}

namespace detail {

double constant_power_voltage(double open_v, double power_w, double r0_ohm) {
    if (power_w == 0.0) {
        if (open_v <= 0.0) {
            throw InfeasibleLoadError("open-circuit voltage non-positive");
        }
        return open_v;
    }
    if (r0_ohm == 0.0) {
        if (open_v <= 0.0) {
            throw InfeasibleLoadError("open-circuit voltage non-positive under load");
        }
        return open_v;
    }
    const double disc = open_v * open_v - 4.0 * power_w * r0_ohm;
    if (disc < 0.0) {
        std::ostringstream msg;
        msg << "load " << power_w << " W infeasible: discriminant " << disc << " < 0";
        throw InfeasibleLoadError(msg.str());
    }
    const double v = 0.5 * (open_v + std::sqrt(disc));
    if (v <= 0.0) {
        throw InfeasibleLoadError("terminal voltage non-positive");
    }
    return v;
}

}  // namespace detail

double ohmic_voltage(double soc, double power_w, const OcvCurve& curve,
                     const BatteryParams& params) {
    return detail::constant_power_voltage(ocv_at(curve, soc), power_w, params.r0_ohm);
}

SocState rc_step(const SocState& state, const PowerDraw& draw, const OcvCurve& curve,
                 const BatteryParams& params) {
    validate(draw);
    const double open_v = ocv_at(curve, state.soc) - state.u_hysteresis;
    const double v = detail::constant_power_voltage(open_v, draw.power_w, params.r0_ohm);
    const double current = draw.power_w > 0.0 ? draw.power_w / v : 0.0;
    const double decay = std::exp(-draw.duration_s / params.tau_s);
    return SocState{
        state.soc - current * draw.duration_s / params.capacity_coulombs,
        decay * state.u_hysteresis + params.r1_ohm * (1.0 - decay) * current,
    };
}

double nominal_delta(double soc0, const PowerDraw& draw, const BatteryParams& params) {
    return detail::soc_after(soc0, draw.power_w, 1.0 / params.v_nom, draw.duration_s,
                             params.capacity_coulombs);
}

double linear_delta(double soc0, const PowerDraw& draw, const LinearFit& fit,
                    const BatteryParams& params) {
    if (!contains(fit.domain, soc0, draw.power_w)) {
        std::ostringstream msg;
        msg << "(soc=" << soc0 << ", power=" << draw.power_w << " W) outside fit domain ["
            << fit.domain.soc_min << ", " << fit.domain.soc_max << "] x [" << fit.domain.p_min_w
            << ", " << fit.domain.p_max_w << "] W";
        throw FitDomainError(msg.str());
    }
    const double inv_v = fit.a * soc0 + fit.b * draw.power_w + fit.c;
    return detail::soc_after(soc0, draw.power_w, inv_v, draw.duration_s,
                             params.capacity_coulombs);
}

namespace {

// Solves the 3x3 system m*x = rhs by Gaussian elimination with partial
// pivoting. Throws FitError when a pivot collapses (rank-deficient grid).
std::array<double, 3> solve_3x3(std::array<std::array<double, 3>, 3> m,
                                std::array<double, 3> rhs) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 3; ++row) {
            if (std::abs(m[row][col]) > std::abs(m[pivot][col])) {
                pivot = row;
            }
        }
        if (std::abs(m[pivot][col]) < 1e-30) {
            throw FitError("normal equations rank-deficient (degenerate fit grid)");
        }
        std::swap(m[col], m[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (int row = col + 1; row < 3; ++row) {
            const double f = m[row][col] / m[col][col];
            for (int k = col; k < 3; ++k) {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    std::array<double, 3> x{};
    for (int row = 2; row >= 0; --row) {
        double s = rhs[row];
        for (int k = row + 1; k < 3; ++k) {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    return x;
}

}  // namespace

LinearFit fit_linear(const OcvCurve& curve, const BatteryParams& params,
                     std::span<const double> soc_grid, std::span<const double> power_grid) {
    if (soc_grid.empty() || power_grid.empty()) {
        throw ValidationError("fit grids must be non-empty");
    }

    // Normal equations for rows [S, P, 1] against y = 1/V(S,P).
    std::array<std::array<double, 3>, 3> m{};
    std::array<double, 3> rhs{};
    for (double s : soc_grid) {
        for (double p : power_grid) {
            double v = 0.0;
            try {
                v = ohmic_voltage(s, p, curve, params);
            } catch (const InfeasibleLoadError& e) {
                std::ostringstream msg;
                msg << "fit grid point (soc=" << s << ", power=" << p << " W) infeasible: "
                    << e.what();
                throw InfeasibleLoadError(msg.str());
            }
            const double y = 1.0 / v;
            const std::array<double, 3> row{s, p, 1.0};
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    m[i][j] += row[i] * row[j];
                }
                rhs[i] += row[i] * y;
            }
        }
    }
    const auto coeffs = solve_3x3(m, rhs);

    LinearFit fit;
    fit.a = coeffs[0];
    fit.b = coeffs[1];
    fit.c = coeffs[2];
    fit.domain.soc_min = *std::min_element(soc_grid.begin(), soc_grid.end());
    fit.domain.soc_max = *std::max_element(soc_grid.begin(), soc_grid.end());
    fit.domain.p_min_w = *std::min_element(power_grid.begin(), power_grid.end());
    fit.domain.p_max_w = *std::max_element(power_grid.begin(), power_grid.end());

    double max_rel = 0.0;
    for (double s : soc_grid) {
        for (double p : power_grid) {
            const double y = 1.0 / ohmic_voltage(s, p, curve, params);
            const double pred = fit.a * s + fit.b * p + fit.c;
            max_rel = std::max(max_rel, std::abs(pred - y) / y);
        }
    }
    fit.max_rel_residual = max_rel;

    // The predicted inverse voltage must stay positive over the whole box,
    // not just the grid. The prediction is affine, so scanning the corners
    // would do, but a dense scan also guards the interior against NaNs.
    constexpr int kScan = 64;
    for (int i = 0; i <= kScan; ++i) {
        for (int j = 0; j <= kScan; ++j) {
            const double s = fit.domain.soc_min +
                             (fit.domain.soc_max - fit.domain.soc_min) * i / kScan;
            const double p = fit.domain.p_min_w +
                             (fit.domain.p_max_w - fit.domain.p_min_w) * j / kScan;
            if (!(fit.a * s + fit.b * p + fit.c > 0.0)) {
                std::ostringstream msg;
                msg << "fitted 1/V not positive at (soc=" << s << ", power=" << p << " W)";
                throw FitError(msg.str());
            }
        }
    }
    return fit;
}

std::vector<double> default_soc_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 16; ++i) {
        grid.push_back(0.2 + 0.05 * i);
    }
    return grid;
}

std::vector<double> uniform_power_grid(double p_min_w, double p_max_w, int points) {
    if (points < 1 || !(p_min_w <= p_max_w)) {
        throw ValidationError("power grid: need points >= 1 and p_min <= p_max");
    }
    std::vector<double> grid;
    if (points == 1) {
        grid.push_back(p_min_w);
        return grid;
    }
    for (int i = 0; i < points; ++i) {
        grid.push_back(p_min_w + (p_max_w - p_min_w) * i / (points - 1));
    }
    return grid;
}

bool dominance_safe(const LinearFit& fit, double power_w, double time_s) {
    return 1.0 - fit.a * power_w * time_s > 0.0;
}

namespace detail {

nlohmann::json fit_to_json(const LinearFit& fit) {
    return nlohmann::json{
        {"a", fit.a},
        {"b", fit.b},
        {"c", fit.c},
        {"domain",
         {{"soc_min", fit.domain.soc_min},
          {"soc_max", fit.domain.soc_max},
          {"p_min_w", fit.domain.p_min_w},
          {"p_max_w", fit.domain.p_max_w}}},
        {"max_rel_residual", fit.max_rel_residual},
    };
}

LinearFit fit_from_json(const nlohmann::json& doc) {
    LinearFit fit;
    fit.a = detail::require_number(doc, "a");
    fit.b = detail::require_number(doc, "b");
    fit.c = detail::require_number(doc, "c");
    if (!doc.contains("domain") || !doc["domain"].is_object()) {
        throw ValidationError("domain: missing or not an object");
    }
    const auto& dom = doc["domain"];
    fit.domain.soc_min = detail::require_number(dom, "soc_min");
    fit.domain.soc_max = detail::require_number(dom, "soc_max");
    fit.domain.p_min_w = detail::require_number(dom, "p_min_w");
    fit.domain.p_max_w = detail::require_number(dom, "p_max_w");
    fit.max_rel_residual = detail::require_number(doc, "max_rel_residual");
    if (!(fit.domain.soc_min <= fit.domain.soc_max) ||
        !(fit.domain.p_min_w <= fit.domain.p_max_w)) {
        throw ValidationError("domain: empty box");
    }
    return fit;
}

}  // namespace detail

std::string save_linear_fit(const LinearFit& fit) {
    return detail::fit_to_json(fit).dump(2) + "\n";
}

void save_linear_fit_file(const LinearFit& fit, const std::filesystem::path& path) {
    detail::write_file(path, save_linear_fit(fit));
}

LinearFit load_linear_fit(const std::string& json_text) {
    return detail::fit_from_json(detail::parse_json(json_text, "linear fit"));
}

LinearFit load_linear_fit_file(const std::filesystem::path& path) {
    return detail::fit_from_json(detail::parse_json(detail::read_file(path), path.string()));
}

}  // namespace voltpath
