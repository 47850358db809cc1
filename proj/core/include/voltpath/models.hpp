#pragma once

#include <span>
#include <string>
#include <vector>

#include "voltpath/battery.hpp"

namespace voltpath {

/// A constant electrical load held for a fixed duration. Positive power
/// drains the battery; charging is out of scope.
struct PowerDraw {
    double power_w = 0.0;
    double duration_s = 0.0;
};

void validate(const PowerDraw& draw);

struct FitDomain {
    double soc_min = 0.0;
    double soc_max = 1.0;
    double p_min_w = 0.0;
    double p_max_w = 0.0;
};

bool contains(const FitDomain& domain, double soc, double power_w);

/// Plane fit of the inverse terminal voltage: 1/V(S,P) ~ a*S + b*P + c.
/// Produced by fit_linear(); a is non-positive for any battery whose OCV
/// rises with SOC.
struct LinearFit {
    double a = 0.0;  // per volt per soc-fraction
    double b = 0.0;  // per volt per watt
    double c = 0.0;  // per volt
    FitDomain domain;
    double max_rel_residual = 0.0;  // recorded over the fit grid
};

std::string save_linear_fit(const LinearFit& fit);
void save_linear_fit_file(const LinearFit& fit, const std::filesystem::path& path);
LinearFit load_linear_fit(const std::string& json_text);
LinearFit load_linear_fit_file(const std::filesystem::path& path);

namespace detail {

/// Single shared SOC drop expression. Every single-step model, the solver
/// resource extension, and the MILP coefficients evaluate through this
/// function so that algebraically identical configurations produce
/// bit-identical numbers.
inline double soc_drop(double power_w, double inv_voltage, double duration_s,
                       double capacity_coulombs) {
    return power_w * inv_voltage * duration_s / capacity_coulombs;
}

inline double soc_after(double soc0, double power_w, double inv_voltage, double duration_s,
                        double capacity_coulombs) {
    return soc0 - soc_drop(power_w, inv_voltage, duration_s, capacity_coulombs);
}

/// Larger root of V^2 - open_v*V + power*r0 = 0, the physical branch of the
/// constant-power voltage solution. Throws InfeasibleLoadError when the
/// discriminant is negative or the root is non-positive.
double constant_power_voltage(double open_v, double power_w, double r0_ohm);

}  // namespace detail

/// Terminal voltage under a constant power draw:
///     V = (OCV(S) + sqrt(OCV(S)^2 - 4*P*R0)) / 2.
/// Exactly OCV(S) when power is zero. Throws InfeasibleLoadError when the
/// load is too large for the battery at this SOC.
double ohmic_voltage(double soc, double power_w, const OcvCurve& curve,
                     const BatteryParams& params);

/// One discrete step of the first-order RC model: solves the coupled
/// voltage/current relation with the RC branch voltage subtracted from the
/// OCV, decrements SOC by I*dt/C_m, and advances the branch voltage with its
/// exact exponential update.
SocState rc_step(const SocState& state, const PowerDraw& draw, const OcvCurve& curve,
                 const BatteryParams& params);

/// Single-step constant-voltage update: soc0 - P*dt/(C_m*V_nom). The result
/// may be negative; feasibility is the caller's decision.
double nominal_delta(double soc0, const PowerDraw& draw, const BatteryParams& params);

/// Single-step linear-model update: soc0 - P*(a*soc0 + b*P + c)*dt/C_m with
/// the inverse voltage held at its value at the start of the step. Throws
/// FitDomainError when (soc0, power) is outside the fit's domain box.
double linear_delta(double soc0, const PowerDraw& draw, const LinearFit& fit,
                    const BatteryParams& params);

/// Unweighted least-squares plane fit of 1/ohmic_voltage over the grid
/// product soc_grid x power_grid. Records the max relative residual over the
/// grid and sets the domain to the grid bounding box. Throws
/// InfeasibleLoadError naming the first infeasible grid point, FitError on
/// rank deficiency or if the fitted inverse voltage is not positive over the
/// whole domain.
LinearFit fit_linear(const OcvCurve& curve, const BatteryParams& params,
                     std::span<const double> soc_grid, std::span<const double> power_grid);

/// soc 0.2 to 1.0 in steps of 0.05. The low-SOC knee is excluded because
/// 1/V is strongly nonlinear there.
std::vector<double> default_soc_grid();

/// `points` uniform values spanning [p_min_w, p_max_w] inclusive.
std::vector<double> uniform_power_grid(double p_min_w, double p_max_w, int points = 10);

/// Dominance-safety predicate for label pruning: 1 - a*P*t must stay
/// positive for every (power, time) pair the solver will extend over.
bool dominance_safe(const LinearFit& fit, double power_w, double time_s);

}  // namespace voltpath
