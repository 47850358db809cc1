#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "voltpath/battery.hpp"
#include "voltpath/errors.hpp"
#include "voltpath/models.hpp"

namespace voltpath {

/// A sequence of constant-power legs drawn from the battery back to back.
struct PulseProfile {
    std::string label;
    std::vector<PowerDraw> legs;
};

void validate(const PulseProfile& profile);

std::string save_pulse_profile(const PulseProfile& profile);
void save_pulse_profile_file(const PulseProfile& profile, const std::filesystem::path& path);
PulseProfile load_pulse_profile(const std::string& json_text);
PulseProfile load_pulse_profile_file(const std::filesystem::path& path);

struct TrajectorySample {
    double t_s = 0.0;
    double soc = 0.0;
    double voltage_v = 0.0;
};

/// State-of-charge / terminal-voltage time series produced by one model.
struct Trajectory {
    std::string model_name;
    std::vector<TrajectorySample> samples;
};

void validate(const Trajectory& traj);

std::string save_trajectory_csv(const Trajectory& traj);
void save_trajectory_csv_file(const Trajectory& traj, const std::filesystem::path& path);

struct LogRow {
    double t_s = 0.0;
    double power_w = 0.0;
    double voltage_v = 0.0;
    double current_a = 0.0;
};

/// Bench-style measurement log: instantaneous power/voltage/current samples.
struct MeasuredLog {
    std::vector<LogRow> rows;
};

void validate(const MeasuredLog& log);

std::string save_measured_log_csv(const MeasuredLog& log);
void save_measured_log_csv_file(const MeasuredLog& log, const std::filesystem::path& path);
MeasuredLog load_measured_log_csv(const std::string& csv_text);
MeasuredLog load_measured_log_csv_file(const std::filesystem::path& path);

/// Thrown when a simulation dies mid-profile (infeasible load, or the state
/// of charge running off the OCV table); carries the samples computed up to
/// the last valid state so callers can still inspect or persist them.
class PartialTrajectoryError : public Error {
  public:
    PartialTrajectoryError(const std::string& what, Trajectory partial)
        : Error(what), partial_(std::move(partial)) {}
    const Trajectory& partial() const { return partial_; }

  private:
    Trajectory partial_;
};

enum class IntegratedModel { ohmic, rc };

/// euler exists for step-identity tests; rk4 is the reference integrator.
enum class Stepper { rk4, euler };

/// Fixed-step integration of dS/dt = -P / (V(S,P) * C) over the profile,
/// steps_per_leg uniform steps per leg, one sample after every step (plus
/// the initial state). For the rc model the relaxation voltage is held
/// constant within a step and advanced with its exact exponential update at
/// each step boundary.
Trajectory integrate(IntegratedModel model, double soc0, const PulseProfile& profile,
                     int steps_per_leg, const OcvCurve& curve, const BatteryParams& params,
                     Stepper stepper = Stepper::rk4);

enum class SingleStepModel { nominal, linear };

/// Applies the one-shot nominal or linear state-of-charge update once per
/// leg, chaining across legs; one sample per leg boundary. fit may be null
/// for the nominal model.
Trajectory predict_single_step(SingleStepModel model, double soc0, const PulseProfile& profile,
                               const LinearFit* fit, const BatteryParams& params);

/// Splits a log into maximal runs above/below the power threshold (each
/// sample holds until the next one; the last sample holds for the previous
/// spacing). Runs shorter than min_duration_s are absorbed into a neighbor.
/// Above-threshold runs become legs with their time-weighted mean power.
PulseProfile segment_pulses(const MeasuredLog& log, double power_threshold_w,
                            double min_duration_s);

/// 5% of the maximum power seen in the log.
double default_power_threshold(const MeasuredLog& log);

/// Ground-truth state of charge by trapezoidal integration of measured
/// current: soc(t) = soc0 - integral(I dt) / C.
Trajectory coulomb_count(const MeasuredLog& log, double capacity_coulombs, double soc0);

/// Deviation of one candidate trajectory from the reference, in percentage
/// points of state of charge, over the candidate's time range.
struct ModelErrorReport {
    std::string model_name;
    double final_abs_diff_pp = 0.0;
    double max_abs_diff_pp = 0.0;
    double mean_abs_diff_pp = 0.0;
    double rms_diff_pp = 0.0;
};

/// Every trajectory must start at the same time and the reference must span
/// each candidate's range; differences are evaluated on the union of sample
/// times with linear interpolation in time.
std::vector<ModelErrorReport> compare_models(const Trajectory& reference,
                                             const std::vector<Trajectory>& candidates);

std::string error_reports_to_json(const std::vector<ModelErrorReport>& reports);

struct SynthesizedLog {
    MeasuredLog log;
    SocState final_state;
};

/// Drives the rc model through the profile and records a bench-style log,
/// jittering each sample's power by a uniform +/- noise_frac around the
/// leg's set point. Deterministic for a given seed.
SynthesizedLog synthesize_rc_log(const PulseProfile& profile, const OcvCurve& curve,
                                 const BatteryParams& params, double soc0, double sample_dt_s,
                                 double noise_frac, std::uint64_t seed);

/// Multi-pulse profiles that nearly deplete the matching default battery.
PulseProfile default_18650_profile();
PulseProfile default_4s_profile();

}  // namespace voltpath
