// voltpath — command-line front end for the battery-aware path planning
// toolkit. Subcommands cover the full workflow: fit a linear consumption
// model from a battery description, simulate discharge over a pulse
// profile, ingest a measured power log, generate random instances, solve
// them, export MILP models, and run benchmark sweeps.
//
// Exit codes:
//   0  success (including a solve that proves infeasibility)
//   1  bad input: flags, file contents, domain violations, refusals
//   2  infeasible where feasibility was expected (load collapse mid-run,
//      no pulses found, partial trajectory)
//   3  internal failure or timeout

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "voltpath/battery.hpp"
#include "voltpath/bench.hpp"
#include "voltpath/errors.hpp"
#include "voltpath/instance.hpp"
#include "voltpath/milp.hpp"
#include "voltpath/models.hpp"
#include "voltpath/simulate.hpp"
#include "voltpath/solver.hpp"

namespace {

using namespace voltpath;

std::string fmt4(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", value);
    return buf;
}

std::string fmt_pct(double fraction) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
    return buf;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw ValidationError("write failed: " + path.string());
}

// --- fit ------------------------------------------------------------------

struct FitArgs {
    std::string battery;
    double p_min = 0.0;
    double p_max = 0.0;
    int power_points = 10;
    std::string out;
};

void run_fit(const FitArgs& args) {
    const BatteryConfig battery = load_battery_config_file(args.battery);
    const LinearFit fit =
        fit_linear(battery.curve, battery.params, default_soc_grid(),
                   uniform_power_grid(args.p_min, args.p_max, args.power_points));
    save_linear_fit_file(fit, args.out);
    std::cout << "fit: a=" << fmt4(fit.a) << " b=" << fmt4(fit.b) << " c=" << fmt4(fit.c)
              << "  (max grid residual " << fmt4(100.0 * fit.max_rel_residual) << "%)\n"
              << "domain: soc [" << fmt4(fit.domain.soc_min) << ", " << fmt4(fit.domain.soc_max)
              << "]  power [" << fmt4(fit.domain.p_min_w) << ", " << fmt4(fit.domain.p_max_w)
              << "] W\n"
              << "wrote " << args.out << "\n";
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string battery;
    std::string profile;
    std::string models = "ohmic,rc,linear,nominal";
    std::string fit;
    std::string out_dir;
    double soc0 = 1.0;
    int steps_per_leg = 100;
};

void run_simulate(const SimulateArgs& args) {
    const BatteryConfig battery = load_battery_config_file(args.battery);
    const PulseProfile profile = load_pulse_profile_file(args.profile);
    const std::vector<std::string> names = split_list(args.models);
    if (names.empty()) throw ValidationError("--models: expected at least one model name");

    std::optional<LinearFit> fit;
    if (!args.fit.empty()) fit = load_linear_fit_file(args.fit);

    std::filesystem::create_directories(args.out_dir);
    const std::filesystem::path dir(args.out_dir);

    std::vector<Trajectory> trajectories;
    for (const std::string& name : names) {
        Trajectory traj;
        try {
            if (name == "ohmic") {
                traj = integrate(IntegratedModel::ohmic, args.soc0, profile, args.steps_per_leg,
                                 battery.curve, battery.params);
            } else if (name == "rc") {
                traj = integrate(IntegratedModel::rc, args.soc0, profile, args.steps_per_leg,
                                 battery.curve, battery.params);
            } else if (name == "nominal") {
                traj = predict_single_step(SingleStepModel::nominal, args.soc0, profile, nullptr,
                                           battery.params);
            } else if (name == "linear") {
                if (!fit) throw ValidationError("--fit: required for the linear model");
                traj = predict_single_step(SingleStepModel::linear, args.soc0, profile, &*fit,
                                           battery.params);
            } else {
                throw ValidationError("--models: unknown model '" + name + "'");
            }
        } catch (const PartialTrajectoryError& e) {
            // Keep what we have so the operator can see where it died.
            const std::filesystem::path partial = dir / (name + ".partial.csv");
            save_trajectory_csv_file(e.partial(), partial);
            std::cerr << "partial trajectory written to " << partial.string() << "\n";
            throw;
        }
        save_trajectory_csv_file(traj, dir / (name + ".csv"));
        std::cout << name << ": final soc " << fmt_pct(traj.samples.back().soc) << "  ("
                  << traj.samples.size() << " samples)\n";
        trajectories.push_back(std::move(traj));
    }

    // Compare every other model against the richest physics we ran.
    const Trajectory* reference = nullptr;
    for (const Trajectory& traj : trajectories) {
        if (traj.model_name == "rc") reference = &traj;
    }
    if (reference == nullptr) {
        for (const Trajectory& traj : trajectories) {
            if (traj.model_name == "ohmic") reference = &traj;
        }
    }
    if (reference != nullptr && trajectories.size() > 1) {
        std::vector<Trajectory> candidates;
        for (const Trajectory& traj : trajectories) {
            if (&traj != reference) candidates.push_back(traj);
        }
        const std::vector<ModelErrorReport> reports = compare_models(*reference, candidates);
        write_text_file(dir / "report.json", error_reports_to_json(reports));
        for (const ModelErrorReport& report : reports) {
            std::cout << report.model_name << " vs " << reference->model_name << ": final "
                      << fmt4(report.final_abs_diff_pp) << " pp, max "
                      << fmt4(report.max_abs_diff_pp) << " pp, rms " << fmt4(report.rms_diff_pp)
                      << " pp\n";
        }
        std::cout << "wrote " << (dir / "report.json").string() << "\n";
    }
}

// --- ingest -----------------------------------------------------------------

struct IngestArgs {
    std::string log;
    std::string battery;
    std::string out;
    std::string truth_out;
    double threshold = -1.0;  // < 0 means "derive from the log"
    double min_duration = 5.0;
    double soc0 = 1.0;
};

void run_ingest(const IngestArgs& args) {
    const MeasuredLog log = load_measured_log_csv_file(args.log);
    const BatteryConfig battery = load_battery_config_file(args.battery);
    const double threshold =
        args.threshold >= 0.0 ? args.threshold : default_power_threshold(log);
    const PulseProfile profile = segment_pulses(log, threshold, args.min_duration);
    save_pulse_profile_file(profile, args.out);

    double total_s = 0.0;
    for (const PowerDraw& leg : profile.legs) total_s += leg.duration_s;
    std::cout << "segmented " << profile.legs.size() << " legs covering " << fmt4(total_s)
              << " s (threshold " << fmt4(threshold) << " W)\n";

    const Trajectory truth =
        coulomb_count(log, battery.params.capacity_coulombs, args.soc0);
    std::cout << "coulomb-counted final soc: " << fmt_pct(truth.samples.back().soc) << "\n";
    if (!args.truth_out.empty()) {
        save_trajectory_csv_file(truth, args.truth_out);
        std::cout << "wrote " << args.truth_out << "\n";
    }
    std::cout << "wrote " << args.out << "\n";
}

// --- gen --------------------------------------------------------------------

struct GenArgs {
    int n = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string battery;
    std::string fit;
    GenConfig config;
};

void run_gen(const GenArgs& args) {
    GenConfig config = args.config;
    if (!args.battery.empty()) config.battery = load_battery_config_file(args.battery);
    if (!args.fit.empty()) config.fit = load_linear_fit_file(args.fit);
    const Instance instance = generate_instance(args.n, args.seed, config);
    save_instance_file(instance, args.out);
    std::cout << "instance: " << instance.nodes.size() << " nodes, " << instance.edges.size()
              << " directed edges, start " << instance.start << " -> goal " << instance.goal
              << "\n"
              << "wrote " << args.out << "\n";
}

// --- solve ------------------------------------------------------------------

struct SolveArgs {
    std::string instance;
    std::string solver = "labeling";
    std::string model = "linear";
    std::string out;
    double timeout_s = 0.0;  // <= 0 means no deadline
    int bruteforce_limit = 15;
};

ResourceModel make_resource_model(const Instance& instance, const std::string& name) {
    return resource_kind_from_string(name) == ResourceKind::linear ? linear_model(instance)
                                                                   : nominal_model(instance);
}

void run_solve(const SolveArgs& args) {
    const Instance instance = load_instance_file(args.instance);
    const ResourceModel model = make_resource_model(instance, args.model);

    SolveOptions options;
    options.bruteforce_node_limit = args.bruteforce_limit;
    if (args.timeout_s > 0.0) {
        options.deadline = std::chrono::steady_clock::now() +
                           std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                               std::chrono::duration<double>(args.timeout_s));
    }

    PathSolution solution;
    if (args.solver == "labeling") {
        solution = solve_labeling(instance, model, options);
    } else if (args.solver == "bnb") {
        solution = solve_bnb(instance, model, options);
    } else if (args.solver == "brute") {
        solution = solve_bruteforce(instance, model, options);
    } else {
        throw ValidationError("--solver: expected labeling, bnb, or brute, got '" + args.solver +
                              "'");
    }
    save_path_solution_file(solution, args.out);

    if (solution.status == SolveStatus::optimal) {
        std::cout << "optimal: cost " << fmt4(solution.cost) << ", " << solution.nodes.size()
                  << " nodes, final soc " << fmt_pct(solution.soc_profile.back()) << "\n";
    } else {
        std::cout << "infeasible: no route reaches the goal within the charge budget\n";
    }
    std::cout << "expanded " << solution.expanded << ", wall " << fmt4(solution.wall_time_s)
              << " s\n"
              << "wrote " << args.out << "\n";
}

// --- export-milp --------------------------------------------------------------

struct MilpArgs {
    std::string instance;
    std::string model = "linear";
    std::string out;
};

void run_export_milp(const MilpArgs& args) {
    const Instance instance = load_instance_file(args.instance);
    const ResourceModel model = make_resource_model(instance, args.model);
    export_milp_file(instance, model, args.out);
    std::cout << "wrote " << args.out << " (" << instance.edges.size() << " binaries, "
              << instance.nodes.size() << " charge variables)\n";
}

// --- bench --------------------------------------------------------------------

struct BenchArgs {
    std::string plan;
    std::string out;
    std::string summary;
    int jobs = 1;
    std::string battery;
    std::string fit;
    GenConfig config;
};

void run_bench_cmd(const BenchArgs& args) {
    const BenchPlan plan = load_bench_plan_file(args.plan);
    GenConfig config = args.config;
    if (!args.battery.empty()) config.battery = load_battery_config_file(args.battery);
    if (!args.fit.empty()) config.fit = load_linear_fit_file(args.fit);

    const std::vector<BenchRecord> records = run_bench(plan, config, args.jobs);
    records_to_csv_file(records, args.out);

    const std::vector<SummaryRow> summary = aggregate(records);
    if (!args.summary.empty()) {
        write_text_file(args.summary, summary_to_csv(summary));
        std::cout << "wrote " << args.summary << "\n";
    }
    std::cout << summary_to_table(summary) << "wrote " << args.out << " (" << records.size()
              << " records)\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"battery-aware path planning toolkit"};
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit_cmd =
        app.add_subcommand("fit", "fit the linear consumption model from a battery description");
    fit_cmd->add_option("--battery", fit_args.battery, "battery config JSON")->required();
    fit_cmd->add_option("--pmin", fit_args.p_min, "fit grid minimum power [W]")->required();
    fit_cmd->add_option("--pmax", fit_args.p_max, "fit grid maximum power [W]")->required();
    fit_cmd->add_option("--power-points", fit_args.power_points, "fit grid power samples");
    fit_cmd->add_option("-o,--out", fit_args.out, "output fit JSON")->required();

    SimulateArgs sim_args;
    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "simulate discharge over a pulse profile");
    sim_cmd->add_option("--battery", sim_args.battery, "battery config JSON")->required();
    sim_cmd->add_option("--profile", sim_args.profile, "pulse profile JSON")->required();
    sim_cmd->add_option("--models", sim_args.models,
                        "comma-separated subset of ohmic,rc,linear,nominal");
    sim_cmd->add_option("--fit", sim_args.fit, "fit JSON (required for the linear model)");
    sim_cmd->add_option("--soc0", sim_args.soc0, "initial state of charge");
    sim_cmd->add_option("--steps-per-leg", sim_args.steps_per_leg,
                        "integrator steps per profile leg");
    sim_cmd->add_option("-o,--out", sim_args.out_dir, "output directory")->required();

    IngestArgs ingest_args;
    CLI::App* ingest_cmd =
        app.add_subcommand("ingest", "segment a measured power log into a pulse profile");
    ingest_cmd->add_option("--log", ingest_args.log, "measured log CSV")->required();
    ingest_cmd->add_option("--battery", ingest_args.battery, "battery config JSON")->required();
    ingest_cmd->add_option("--threshold", ingest_args.threshold,
                           "pulse power threshold [W] (default: 5% of the log maximum)");
    ingest_cmd->add_option("--min-duration", ingest_args.min_duration,
                           "minimum pulse duration [s]");
    ingest_cmd->add_option("--soc0", ingest_args.soc0, "initial state of charge");
    ingest_cmd->add_option("--truth-out", ingest_args.truth_out,
                           "also write the coulomb-counted trajectory CSV here");
    ingest_cmd->add_option("-o,--out", ingest_args.out, "output profile JSON")->required();

    GenArgs gen_args;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a random routing instance");
    gen_cmd->add_option("--n", gen_args.n, "node count")->required();
    gen_cmd->add_option("--seed", gen_args.seed, "random seed")->required();
    gen_cmd->add_option("--extent", gen_args.config.extent_m, "square side length [m]");
    gen_cmd->add_option("--speed", gen_args.config.speed_mps, "travel speed [m/s]");
    gen_cmd->add_option("--pmin", gen_args.config.p_min_w, "edge power minimum [W]");
    gen_cmd->add_option("--pmax", gen_args.config.p_max_w, "edge power maximum [W]");
    gen_cmd->add_option("--soc0", gen_args.config.soc0, "initial state of charge");
    gen_cmd->add_option("--battery", gen_args.battery, "battery config JSON override");
    gen_cmd->add_option("--fit", gen_args.fit, "fit JSON override (skips refitting)");
    gen_cmd->add_option("-o,--out", gen_args.out, "output instance JSON")->required();

    SolveArgs solve_args;
    CLI::App* solve_cmd = app.add_subcommand("solve", "solve an instance");
    solve_cmd->add_option("--instance", solve_args.instance, "instance JSON")->required();
    solve_cmd->add_option("--solver", solve_args.solver, "labeling | bnb | brute");
    solve_cmd->add_option("--model", solve_args.model, "linear | nominal");
    solve_cmd->add_option("--timeout", solve_args.timeout_s, "wall-clock limit [s]");
    solve_cmd->add_option("--brute-limit", solve_args.bruteforce_limit,
                          "largest node count solve --solver brute accepts");
    solve_cmd->add_option("-o,--out", solve_args.out, "output solution JSON")->required();

    MilpArgs milp_args;
    CLI::App* milp_cmd =
        app.add_subcommand("export-milp", "write the instance as an LP-format MILP");
    milp_cmd->add_option("--instance", milp_args.instance, "instance JSON")->required();
    milp_cmd->add_option("--model", milp_args.model, "linear | nominal");
    milp_cmd->add_option("-o,--out", milp_args.out, "output LP file")->required();

    BenchArgs bench_args;
    CLI::App* bench_cmd = app.add_subcommand("bench", "run a benchmark sweep");
    bench_cmd->add_option("--plan", bench_args.plan, "benchmark plan JSON")->required();
    bench_cmd->add_option("--jobs", bench_args.jobs, "worker threads");
    bench_cmd->add_option("--summary", bench_args.summary, "also write a summary CSV here");
    bench_cmd->add_option("--battery", bench_args.battery, "battery config JSON override");
    bench_cmd->add_option("--fit", bench_args.fit, "fit JSON override (skips refitting)");
    bench_cmd->add_option("--extent", bench_args.config.extent_m, "square side length [m]");
    bench_cmd->add_option("--speed", bench_args.config.speed_mps, "travel speed [m/s]");
    bench_cmd->add_option("--pmin", bench_args.config.p_min_w, "edge power minimum [W]");
    bench_cmd->add_option("--pmax", bench_args.config.p_max_w, "edge power maximum [W]");
    bench_cmd->add_option("--soc0", bench_args.config.soc0, "initial state of charge");
    bench_cmd->add_option("-o,--out", bench_args.out, "output records CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*fit_cmd) run_fit(fit_args);
        if (*sim_cmd) run_simulate(sim_args);
        if (*ingest_cmd) run_ingest(ingest_args);
        if (*gen_cmd) run_gen(gen_args);
        if (*solve_cmd) run_solve(solve_args);
        if (*milp_cmd) run_export_milp(milp_args);
        if (*bench_cmd) run_bench_cmd(bench_args);
        return 0;
    } catch (const PartialTrajectoryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleLoadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NoPulsesError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const TimeoutError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
