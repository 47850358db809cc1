#include "voltpath/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>

#include <json.hpp>

#include "json_util.hpp"

namespace voltpath {

void validate(const PulseProfile& profile) {
    if (profile.legs.empty()) {
        throw ValidationError("legs: must be non-empty");
    }
    for (const auto& leg : profile.legs) {
        validate(leg);
    }
}

std::string save_pulse_profile(const PulseProfile& profile) {
    nlohmann::json legs = nlohmann::json::array();
    for (const auto& leg : profile.legs) {
        legs.push_back({{"power_w", leg.power_w}, {"duration_s", leg.duration_s}});
    }
    return nlohmann::json{{"label", profile.label}, {"legs", legs}}.dump(2) + "\n";
}

void save_pulse_profile_file(const PulseProfile& profile, const std::filesystem::path& path) {
    detail::write_file(path, save_pulse_profile(profile));
}

PulseProfile load_pulse_profile(const std::string& json_text) {
    const auto doc = detail::parse_json(json_text, "pulse profile");
    PulseProfile profile;
    if (doc.contains("label")) {
        if (!doc["label"].is_string()) {
            throw ValidationError("label: not a string");
        }
        profile.label = doc["label"].get<std::string>();
    }
    if (!doc.contains("legs") || !doc["legs"].is_array()) {
        throw ValidationError("legs: missing or not an array");
    }
    for (const auto& leg : doc["legs"]) {
        profile.legs.push_back(PowerDraw{detail::require_number(leg, "power_w"),
                                         detail::require_number(leg, "duration_s")});
    }
    validate(profile);
    return profile;
}

PulseProfile load_pulse_profile_file(const std::filesystem::path& path) {
    return load_pulse_profile(detail::read_file(path));
}

void validate(const Trajectory& traj) {
    if (traj.samples.empty()) {
        throw ValidationError("samples: must be non-empty");
    }
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        if (!(traj.samples[i].t_s > traj.samples[i - 1].t_s)) {
            throw ValidationError("samples: t_s must be strictly increasing");
        }
        if (traj.samples[i].soc > traj.samples[i - 1].soc + 1e-12) {
            throw ValidationError("samples: soc must be non-increasing under discharge");
        }
    }
}

std::string save_trajectory_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << "# model=" << traj.model_name << "\n";
    out << "t_s,soc,voltage_v\n";
    for (const auto& s : traj.samples) {
        out << detail::format_full(s.t_s) << ',' << detail::format_full(s.soc) << ','
            << detail::format_full(s.voltage_v) << '\n';
    }
    return out.str();
}

void save_trajectory_csv_file(const Trajectory& traj, const std::filesystem::path& path) {
    detail::write_file(path, save_trajectory_csv(traj));
}

void validate(const MeasuredLog& log) {
    if (log.rows.empty()) {
        throw ValidationError("rows: must be non-empty");
    }
    for (std::size_t i = 0; i < log.rows.size(); ++i) {
        const auto& r = log.rows[i];
        if (!std::isfinite(r.t_s) || !std::isfinite(r.power_w) || !std::isfinite(r.voltage_v) ||
            !std::isfinite(r.current_a)) {
            throw ValidationError("rows: non-finite value at row " + std::to_string(i));
        }
        if (i > 0 && !(r.t_s > log.rows[i - 1].t_s)) {
            throw ValidationError("rows: t_s must be strictly increasing (row " +
                                  std::to_string(i) + ")");
        }
    }
}

std::string save_measured_log_csv(const MeasuredLog& log) {
    std::ostringstream out;
    out << "t_s,power_w,voltage_v,current_a\n";
    for (const auto& r : log.rows) {
        out << detail::format_full(r.t_s) << ',' << detail::format_full(r.power_w) << ','
            << detail::format_full(r.voltage_v) << ',' << detail::format_full(r.current_a)
            << '\n';
    }
    return out.str();
}

void save_measured_log_csv_file(const MeasuredLog& log, const std::filesystem::path& path) {
    detail::write_file(path, save_measured_log_csv(log));
}

namespace {

std::string strip_cr(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
        line.pop_back();
    }
    return line;
}

double parse_field(const std::string& field, std::size_t line_no) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ValidationError("log line " + std::to_string(line_no) + ": bad number '" + field +
                              "'");
    }
    return v;
}

}  // namespace

MeasuredLog load_measured_log_csv(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    MeasuredLog log;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header_seen) {
            if (line != "t_s,power_w,voltage_v,current_a") {
                throw ValidationError("log header: expected 't_s,power_w,voltage_v,current_a'");
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream fin(line);
        while (std::getline(fin, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 4) {
            throw ValidationError("log line " + std::to_string(line_no) +
                                  ": expected 4 fields, got " + std::to_string(fields.size()));
        }
        log.rows.push_back(LogRow{parse_field(fields[0], line_no), parse_field(fields[1], line_no),
                                  parse_field(fields[2], line_no),
                                  parse_field(fields[3], line_no)});
    }
    if (!header_seen) {
        throw ValidationError("log: missing header line");
    }
    validate(log);
    return log;
}

MeasuredLog load_measured_log_csv_file(const std::filesystem::path& path) {
    return load_measured_log_csv(detail::read_file(path));
}

Trajectory integrate(IntegratedModel model, double soc0, const PulseProfile& profile,
                     int steps_per_leg, const OcvCurve& curve, const BatteryParams& params,
                     Stepper stepper) {
    validate(profile);
    if (steps_per_leg < 1) {
        throw ValidationError("steps_per_leg: must be >= 1");
    }

    Trajectory traj;
    traj.model_name = model == IntegratedModel::ohmic ? "ohmic" : "rc";
    SocState state{soc0, 0.0};
    double leg_start_t = 0.0;

    auto loaded_voltage = [&](double soc, double u, double power_w) {
        return detail::constant_power_voltage(ocv_at(curve, soc) - u, power_w, params.r0_ohm);
    };

    try {
        traj.samples.push_back(
            {0.0, soc0, loaded_voltage(soc0, 0.0, profile.legs.front().power_w)});
        for (const auto& leg : profile.legs) {
            const double dt = leg.duration_s / steps_per_leg;
            for (int k = 0; k < steps_per_leg; ++k) {
                // Relaxation voltage is held fixed across the stage
                // evaluations of one step and advanced at the boundary.
                const double u = model == IntegratedModel::rc ? state.u_hysteresis : 0.0;
                auto dsoc = [&](double s) {
                    return -leg.power_w /
                           (loaded_voltage(s, u, leg.power_w) * params.capacity_coulombs);
                };
                double next_soc;
                if (stepper == Stepper::euler) {
                    next_soc = state.soc + dt * dsoc(state.soc);
                } else {
                    const double k1 = dsoc(state.soc);
                    const double k2 = dsoc(state.soc + 0.5 * dt * k1);
                    const double k3 = dsoc(state.soc + 0.5 * dt * k2);
                    const double k4 = dsoc(state.soc + dt * k3);
                    next_soc = state.soc + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
                double next_u = 0.0;
                if (model == IntegratedModel::rc) {
                    const double v0 = loaded_voltage(state.soc, u, leg.power_w);
                    const double current = leg.power_w > 0.0 ? leg.power_w / v0 : 0.0;
                    const double decay = std::exp(-dt / params.tau_s);
                    next_u = decay * u + params.r1_ohm * (1.0 - decay) * current;
                }
                state = SocState{next_soc, next_u};
                const double t = leg_start_t + (k + 1) * dt;
                traj.samples.push_back(
                    {t, state.soc, loaded_voltage(state.soc, next_u, leg.power_w)});
            }
            leg_start_t += leg.duration_s;
        }
    } catch (const InfeasibleLoadError& e) {
        throw PartialTrajectoryError(std::string("integration stopped: ") + e.what(),
                                     std::move(traj));
    } catch (const SocRangeError& e) {
        throw PartialTrajectoryError(std::string("integration stopped: ") + e.what(),
                                     std::move(traj));
    }
    return traj;
}

Trajectory predict_single_step(SingleStepModel model, double soc0, const PulseProfile& profile,
                               const LinearFit* fit, const BatteryParams& params) {
    validate(profile);
    if (model == SingleStepModel::linear && fit == nullptr) {
        throw ValidationError("fit: required for the linear model");
    }

    auto model_voltage = [&](double soc, double power_w) {
        if (model == SingleStepModel::nominal) {
            return params.v_nom;
        }
        return 1.0 / (fit->a * soc + fit->b * power_w + fit->c);
    };

    Trajectory traj;
    traj.model_name = model == SingleStepModel::nominal ? "nominal" : "linear";
    double soc = soc0;
    double t = 0.0;
    traj.samples.push_back({0.0, soc, model_voltage(soc, profile.legs.front().power_w)});
    for (const auto& leg : profile.legs) {
        soc = model == SingleStepModel::nominal ? nominal_delta(soc, leg, params)
                                                : linear_delta(soc, leg, *fit, params);
        t += leg.duration_s;
        traj.samples.push_back({t, soc, model_voltage(soc, leg.power_w)});
    }
    return traj;
}

PulseProfile segment_pulses(const MeasuredLog& log, double power_threshold_w,
                            double min_duration_s) {
    validate(log);
    if (log.rows.size() < 2) {
        throw ValidationError("rows: need at least 2 samples to derive hold durations");
    }
    if (!(min_duration_s >= 0.0)) {
        throw ValidationError("min_duration_s: must be >= 0");
    }

    // Each sample holds until the next one; the final sample holds for the
    // preceding spacing so the log covers a half-open time span.
    const auto& rows = log.rows;
    const std::size_t n = rows.size();
    std::vector<double> hold(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        hold[i] = rows[i + 1].t_s - rows[i].t_s;
    }
    hold[n - 1] = rows[n - 1].t_s - rows[n - 2].t_s;

    struct Run {
        bool above = false;
        double duration = 0.0;
        double energy = 0.0;  // sum of power * hold within the run
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < n; ++i) {
        const bool above = rows[i].power_w > power_threshold_w;
        if (runs.empty() || runs.back().above != above) {
            runs.push_back(Run{above, 0.0, 0.0});
        }
        runs.back().duration += hold[i];
        runs.back().energy += rows[i].power_w * hold[i];
    }

    // Absorb too-short runs into the preceding (else following) neighbor,
    // then re-coalesce equal-class neighbors; each pass removes a run, so
    // this terminates.
    bool merged = true;
    while (merged && runs.size() > 1) {
        merged = false;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (runs[i].duration >= min_duration_s) {
                continue;
            }
            const std::size_t into = i > 0 ? i - 1 : i + 1;
            runs[into].duration += runs[i].duration;
            runs[into].energy += runs[i].energy;
            runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(i));
            for (std::size_t j = 0; j + 1 < runs.size();) {
                if (runs[j].above == runs[j + 1].above) {
                    runs[j].duration += runs[j + 1].duration;
                    runs[j].energy += runs[j + 1].energy;
                    runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                } else {
                    ++j;
                }
            }
            merged = true;
            break;
        }
    }

    PulseProfile profile;
    profile.label = "ingested";
    for (const auto& run : runs) {
        if (run.above && run.duration > 0.0) {
            profile.legs.push_back(PowerDraw{run.energy / run.duration, run.duration});
        }
    }
    if (profile.legs.empty()) {
        throw NoPulsesError("no samples above the power threshold");
    }
    return profile;
}

double default_power_threshold(const MeasuredLog& log) {
    validate(log);
    double max_power = 0.0;
    for (const auto& r : log.rows) {
        max_power = std::max(max_power, r.power_w);
    }
    return 0.05 * max_power;
}

Trajectory coulomb_count(const MeasuredLog& log, double capacity_coulombs, double soc0) {
    validate(log);
    if (!(capacity_coulombs > 0.0)) {
        throw ValidationError("capacity_coulombs: must be > 0");
    }
    Trajectory traj;
    traj.model_name = "coulomb";
    double soc = soc0;
    traj.samples.push_back({log.rows.front().t_s, soc, log.rows.front().voltage_v});
    for (std::size_t i = 1; i < log.rows.size(); ++i) {
        const double dt = log.rows[i].t_s - log.rows[i - 1].t_s;
        soc -= dt * 0.5 * (log.rows[i - 1].current_a + log.rows[i].current_a) /
               capacity_coulombs;
        traj.samples.push_back({log.rows[i].t_s, soc, log.rows[i].voltage_v});
    }
    return traj;
}

namespace {

double soc_at(const Trajectory& traj, double t) {
    const auto& s = traj.samples;
    if (t <= s.front().t_s) {
        return s.front().soc;
    }
    if (t >= s.back().t_s) {
        return s.back().soc;
    }
    const auto it = std::lower_bound(
        s.begin(), s.end(), t,
        [](const TrajectorySample& sample, double value) { return sample.t_s < value; });
    if (it->t_s == t) {
        return it->soc;
    }
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (t - lo.t_s) / (hi.t_s - lo.t_s);
    return lo.soc + w * (hi.soc - lo.soc);
}

}  // namespace

std::vector<ModelErrorReport> compare_models(const Trajectory& reference,
                                             const std::vector<Trajectory>& candidates) {
    if (reference.samples.empty()) {
        throw ComparisonError("reference trajectory is empty");
    }
    const double t0 = reference.samples.front().t_s;
    const double t_ref_end = reference.samples.back().t_s;

    std::vector<ModelErrorReport> reports;
    for (const auto& cand : candidates) {
        if (cand.samples.empty()) {
            throw ComparisonError("candidate trajectory '" + cand.model_name + "' is empty");
        }
        if (std::abs(cand.samples.front().t_s - t0) > 1e-9) {
            throw ComparisonError("trajectories do not share a start time");
        }
        const double t_end = cand.samples.back().t_s;
        if (t_end > t_ref_end + 1e-9) {
            throw ComparisonError("reference does not span candidate '" + cand.model_name + "'");
        }

        std::vector<double> times;
        for (const auto& s : reference.samples) {
            if (s.t_s <= t_end) {
                times.push_back(s.t_s);
            }
        }
        for (const auto& s : cand.samples) {
            times.push_back(s.t_s);
        }
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());

        ModelErrorReport report;
        report.model_name = cand.model_name;
        double sum_abs = 0.0;
        double sum_sq = 0.0;
        for (double t : times) {
            const double d = std::abs(soc_at(reference, t) - soc_at(cand, t));
            report.max_abs_diff_pp = std::max(report.max_abs_diff_pp, 100.0 * d);
            sum_abs += d;
            sum_sq += d * d;
        }
        report.final_abs_diff_pp =
            100.0 * std::abs(soc_at(reference, t_end) - cand.samples.back().soc);
        report.mean_abs_diff_pp = 100.0 * sum_abs / static_cast<double>(times.size());
        report.rms_diff_pp = 100.0 * std::sqrt(sum_sq / static_cast<double>(times.size()));
        reports.push_back(std::move(report));
    }
    return reports;
}

std::string error_reports_to_json(const std::vector<ModelErrorReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        arr.push_back({{"model", r.model_name},
                       {"final_abs_diff_pp", r.final_abs_diff_pp},
                       {"max_abs_diff_pp", r.max_abs_diff_pp},
                       {"mean_abs_diff_pp", r.mean_abs_diff_pp},
                       {"rms_diff_pp", r.rms_diff_pp}});
    }
    return arr.dump(2) + "\n";
}

SynthesizedLog synthesize_rc_log(const PulseProfile& profile, const OcvCurve& curve,
                                 const BatteryParams& params, double soc0, double sample_dt_s,
                                 double noise_frac, std::uint64_t seed) {
    validate(profile);
    if (!(sample_dt_s > 0.0)) {
        throw ValidationError("sample_dt_s: must be > 0");
    }
    if (!(noise_frac >= 0.0 && noise_frac < 1.0)) {
        throw ValidationError("noise_frac: must be in [0, 1)");
    }

    std::mt19937_64 rng(seed);
    auto uniform01 = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };

    SynthesizedLog out;
    SocState state{soc0, 0.0};
    double t = 0.0;
    for (const auto& leg : profile.legs) {
        const auto steps = std::max<long long>(1, std::llround(leg.duration_s / sample_dt_s));
        const double dt = leg.duration_s / static_cast<double>(steps);
        for (long long k = 0; k < steps; ++k) {
            const double jitter = 1.0 + noise_frac * (2.0 * uniform01() - 1.0);
            const double power = leg.power_w * jitter;
            const double open_v = ocv_at(curve, state.soc) - state.u_hysteresis;
            const double v = detail::constant_power_voltage(open_v, power, params.r0_ohm);
            const double current = power > 0.0 ? power / v : 0.0;
            out.log.rows.push_back(LogRow{t, power, v, current});
            state = rc_step(state, PowerDraw{power, dt}, curve, params);
            t += dt;
        }
    }
    // Load-off tail sample so hold durations cover the whole span.
    out.log.rows.push_back(
        LogRow{t, 0.0, ocv_at(curve, state.soc) - state.u_hysteresis, 0.0});
    out.final_state = state;
    return out;
}

PulseProfile default_18650_profile() {
    return PulseProfile{"18650-depletion",
                        {
                            PowerDraw{9.0, 240.0},
                            PowerDraw{2.0, 180.0},
                            PowerDraw{7.0, 300.0},
                            PowerDraw{1.5, 120.0},
                            PowerDraw{8.0, 280.0},
                            PowerDraw{3.0, 200.0},
                            PowerDraw{6.0, 320.0},
                            PowerDraw{2.0, 150.0},
                            PowerDraw{9.0, 260.0},
                            PowerDraw{1.0, 100.0},
                            PowerDraw{7.0, 310.0},
                            PowerDraw{2.5, 160.0},
                            PowerDraw{8.0, 270.0},
                            PowerDraw{4.0, 180.0},
                            PowerDraw{5.0, 300.0},
                            PowerDraw{1.5, 140.0},
                        }};
}

PulseProfile default_4s_profile() {
    return PulseProfile{"4s-lipo-depletion",
                        {
                            PowerDraw{300.0, 150.0},
                            PowerDraw{80.0, 100.0},
                            PowerDraw{450.0, 120.0},
                            PowerDraw{120.0, 120.0},
                            PowerDraw{500.0, 100.0},
                            PowerDraw{200.0, 80.0},
                        }};
}

}  // namespace voltpath
