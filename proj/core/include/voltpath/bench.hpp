#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voltpath/instance.hpp"
#include "voltpath/solver.hpp"

namespace voltpath {

/// Sweep description: which problem sizes to generate, how many instances
/// per size, and which solver/model cells to run on each instance.
struct BenchPlan {
    std::vector<int> sizes;
    int instances_per_size = 30;
    std::uint64_t base_seed = 1;
    std::vector<std::string> solvers = {"labeling", "bnb"};
    std::vector<std::string> models = {"linear", "nominal"};
    double timeout_s = 60.0;
};

void validate(const BenchPlan& plan);

std::string save_bench_plan(const BenchPlan& plan);
void save_bench_plan_file(const BenchPlan& plan, const std::filesystem::path& path);
BenchPlan load_bench_plan(const std::string& json_text);
BenchPlan load_bench_plan_file(const std::filesystem::path& path);

/// One (size, instance, solver, model) cell outcome.
struct BenchRecord {
    int size = 0;
    std::uint64_t seed = 0;
    std::string solver;
    std::string model;
    std::string status;          // optimal | infeasible | timeout | error
    std::optional<double> cost;  // present iff status == optimal
    double wall_time_s = 0.0;
    long long expanded = 0;
};

/// Deterministic per-instance seed derived from (base_seed, size, index).
std::uint64_t cell_seed(std::uint64_t base_seed, int size, int index);

/// Runs every cell of the plan; instances are generated deterministically
/// and per-cell failures become records rather than aborting the sweep.
/// jobs > 1 distributes cells across worker threads; record order is
/// canonical (size, instance, solver, model) either way.
std::vector<BenchRecord> run_bench(const BenchPlan& plan, const GenConfig& config = GenConfig{},
                                   int jobs = 1);

std::string records_to_csv(const std::vector<BenchRecord>& records);
void records_to_csv_file(const std::vector<BenchRecord>& records,
                         const std::filesystem::path& path);

/// Wall-time statistics per (size, solver, model) group, over cells that
/// ran to completion (optimal or infeasible).
struct SummaryRow {
    int size = 0;
    std::string solver;
    std::string model;
    int optimal_count = 0;
    int infeasible_count = 0;
    int timeout_count = 0;
    int error_count = 0;
    std::optional<double> mean_time_s;
    std::optional<double> median_time_s;
    std::optional<double> max_time_s;
};

std::vector<SummaryRow> aggregate(const std::vector<BenchRecord>& records);

std::string summary_to_csv(const std::vector<SummaryRow>& rows);

/// Fixed-width console rendering, 4 significant digits.
std::string summary_to_table(const std::vector<SummaryRow>& rows);

}  // namespace voltpath
