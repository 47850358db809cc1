#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voltpath/instance.hpp"

namespace voltpath {

enum class ResourceKind { linear, nominal };

std::string to_string(ResourceKind kind);
ResourceKind resource_kind_from_string(const std::string& name);

/// Per-edge battery propagation rule used as the path resource constraint.
struct ResourceModel {
    ResourceKind kind = ResourceKind::nominal;
    LinearFit fit;      // linear kind only
    double v_nom = 0.0; // nominal kind only
};

ResourceModel linear_model(const Instance& instance);
ResourceModel nominal_model(const Instance& instance);

/// Charge remaining after traversing the edge from the given state, taking
/// the propagation rule as an equality; nullopt when the battery would run
/// below empty.
std::optional<double> extend(double soc, const Edge& edge, const ResourceModel& model,
                             double capacity_coulombs);

enum class SolveStatus { optimal, infeasible };

std::string to_string(SolveStatus status);

struct PathSolution {
    std::vector<int> nodes;
    double cost = 0.0;
    std::vector<double> soc_profile;
    SolveStatus status = SolveStatus::infeasible;
    std::string solver;
    double wall_time_s = 0.0;
    long long expanded = 0;  // labels settled / tree nodes expanded / paths tried
};

std::string save_path_solution(const PathSolution& solution);
void save_path_solution_file(const PathSolution& solution, const std::filesystem::path& path);
PathSolution load_path_solution(const std::string& json_text);
PathSolution load_path_solution_file(const std::filesystem::path& path);

struct SolveOptions {
    /// Solvers poll this and throw TimeoutError once passed.
    std::optional<std::chrono::steady_clock::time_point> deadline;
    /// solve_bruteforce refuses larger inputs (exponential blowup guard).
    int bruteforce_node_limit = 15;
};

/// Human-readable descriptions of every edge violating the monotonicity
/// condition that label dominance relies on; empty means safe to solve.
std::vector<std::string> dominance_violations(const Instance& instance,
                                              const ResourceModel& model);

/// Label-setting with cost/charge Pareto dominance per node. Refuses to run
/// (SolveRefusedError) when dominance_violations is non-empty.
PathSolution solve_labeling(const Instance& instance, const ResourceModel& model,
                            const SolveOptions& options = {});

/// Best-first branch-and-bound over partial paths with an admissible
/// remaining-cost bound (battery-free shortest path to the goal) and an
/// admissible remaining-drain bound.
PathSolution solve_bnb(const Instance& instance, const ResourceModel& model,
                       const SolveOptions& options = {});

/// Exhaustive enumeration of simple start-to-goal paths; the reference
/// oracle for the other solvers on small instances.
PathSolution solve_bruteforce(const Instance& instance, const ResourceModel& model,
                              const SolveOptions& options = {});

struct CheckResult {
    bool ok = true;
    std::vector<std::string> violations;
};

/// Independent re-verification of a returned path: endpoints, edge
/// existence, simplicity, charge propagation, charge window, cost total.
CheckResult check_solution(const Instance& instance, const ResourceModel& model,
                           const PathSolution& solution);

}  // namespace voltpath
