#include <set>

#include <doctest.h>

#include "helpers.hpp"
#include "voltpath/bench.hpp"
#include "voltpath/errors.hpp"

using namespace voltpath;

namespace {

BenchPlan tiny_plan() {
    BenchPlan plan;
    plan.sizes = {5, 7};
    plan.instances_per_size = 2;
    plan.base_seed = 17;
    plan.timeout_s = 30.0;
    return plan;
}

}  // namespace

TEST_CASE("per-cell seeds are stable and collision-free across the sweep") {
    std::set<std::uint64_t> seen;
    for (int size : {5, 10, 50, 100}) {
        for (int index = 0; index < 30; ++index) {
            const std::uint64_t seed = cell_seed(99, size, index);
            CHECK(seed == cell_seed(99, size, index));  // deterministic
            CHECK(seen.insert(seed).second);            // unique
        }
    }
    CHECK(cell_seed(1, 5, 0) != cell_seed(2, 5, 0));  // base seed matters
}

TEST_CASE("bench plan validation and json round-trip") {
    BenchPlan plan = tiny_plan();
    CHECK_NOTHROW(validate(plan));
    const BenchPlan loaded = load_bench_plan(save_bench_plan(plan));
    CHECK(loaded.sizes == plan.sizes);
    CHECK(loaded.instances_per_size == plan.instances_per_size);
    CHECK(loaded.base_seed == plan.base_seed);
    CHECK(loaded.solvers == plan.solvers);
    CHECK(loaded.models == plan.models);
    CHECK(loaded.timeout_s == plan.timeout_s);

    BenchPlan bad = plan;
    bad.sizes = {5, 5};
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = plan;
    bad.sizes = {8, 5};
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = plan;
    bad.sizes = {1};
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = plan;
    bad.solvers = {"simplex"};
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = plan;
    bad.models = {"ohmic"};
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = plan;
    bad.timeout_s = 0.0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = plan;
    bad.instances_per_size = 0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("a sweep covers the full cell grid in canonical order") {
    const BenchPlan plan = tiny_plan();
    const std::vector<BenchRecord> records = run_bench(plan);
    REQUIRE(records.size() == 2 * 2 * 2 * 2);  // sizes x instances x solvers x models

    size_t i = 0;
    for (int size : plan.sizes) {
        for (int index = 0; index < plan.instances_per_size; ++index) {
            const std::uint64_t seed = cell_seed(plan.base_seed, size, index);
            for (const std::string& solver : plan.solvers) {
                for (const std::string& model : plan.models) {
                    const BenchRecord& r = records[i++];
                    CHECK(r.size == size);
                    CHECK(r.seed == seed);
                    CHECK(r.solver == solver);
                    CHECK(r.model == model);
                    CHECK((r.status == "optimal" || r.status == "infeasible"));
                    CHECK(r.cost.has_value() == (r.status == "optimal"));
                    CHECK(r.wall_time_s >= 0.0);
                    CHECK(r.expanded >= 0);
                }
            }
        }
    }

    // Same plan, same records (costs and statuses; wall times vary).
    const std::vector<BenchRecord> again = run_bench(plan);
    for (size_t k = 0; k < records.size(); ++k) {
        CHECK(again[k].status == records[k].status);
        CHECK(again[k].cost.has_value() == records[k].cost.has_value());
        if (records[k].cost) CHECK(*again[k].cost == doctest::Approx(*records[k].cost));
        CHECK(again[k].expanded == records[k].expanded);
    }
}

TEST_CASE("parallel execution reproduces the sequential records") {
    const BenchPlan plan = tiny_plan();
    const std::vector<BenchRecord> seq = run_bench(plan, GenConfig{}, 1);
    const std::vector<BenchRecord> par = run_bench(plan, GenConfig{}, 3);
    REQUIRE(par.size() == seq.size());
    for (size_t k = 0; k < seq.size(); ++k) {
        CHECK(par[k].size == seq[k].size);
        CHECK(par[k].seed == seq[k].seed);
        CHECK(par[k].solver == seq[k].solver);
        CHECK(par[k].model == seq[k].model);
        CHECK(par[k].status == seq[k].status);
        if (seq[k].cost) CHECK(*par[k].cost == doctest::Approx(*seq[k].cost));
        CHECK(par[k].expanded == seq[k].expanded);
    }
}

TEST_CASE("records csv uses the documented header and blank infeasible costs") {
    BenchRecord opt{10, 123, "labeling", "linear", "optimal", 42.5, 0.001, 7};
    BenchRecord inf{10, 124, "bnb", "nominal", "infeasible", std::nullopt, 0.002, 9};
    const std::string csv = records_to_csv({opt, inf});
    CHECK(csv.rfind("size,seed,solver,model,status,cost,wall_time_s,expanded\n", 0) == 0);
    CHECK(csv.find("10,123,labeling,linear,optimal,42.5,") != std::string::npos);
    CHECK(csv.find("10,124,bnb,nominal,infeasible,,") != std::string::npos);
}

TEST_CASE("aggregation computes per-cell statistics over completed runs") {
    std::vector<BenchRecord> records;
    auto rec = [](std::string solver, std::string status, std::optional<double> cost,
                  double wall) {
        BenchRecord r;
        r.size = 20;
        r.seed = 1;
        r.solver = std::move(solver);
        r.model = "linear";
        r.status = std::move(status);
        r.cost = cost;
        r.wall_time_s = wall;
        return r;
    };
    records.push_back(rec("labeling", "optimal", 10.0, 0.1));
    records.push_back(rec("labeling", "optimal", 12.0, 0.3));
    records.push_back(rec("labeling", "infeasible", std::nullopt, 0.2));
    records.push_back(rec("labeling", "timeout", std::nullopt, 60.0));
    records.push_back(rec("bnb", "error", std::nullopt, 0.0));

    const std::vector<SummaryRow> rows = aggregate(records);
    REQUIRE(rows.size() == 2);  // (20, bnb, linear) and (20, labeling, linear)

    const SummaryRow& bnb = rows[0];
    CHECK(bnb.solver == "bnb");
    CHECK(bnb.error_count == 1);
    CHECK_FALSE(bnb.mean_time_s.has_value());  // nothing completed

    const SummaryRow& lab = rows[1];
    CHECK(lab.solver == "labeling");
    CHECK(lab.optimal_count == 2);
    CHECK(lab.infeasible_count == 1);
    CHECK(lab.timeout_count == 1);
    // Completed = optimal + infeasible runs; the timeout is excluded.
    CHECK(*lab.mean_time_s == doctest::Approx(0.2));
    CHECK(*lab.median_time_s == doctest::Approx(0.2));
    CHECK(*lab.max_time_s == doctest::Approx(0.3));

    // Shuffling the records must not change the aggregated table.
    std::vector<BenchRecord> shuffled = {records[4], records[2], records[0], records[3],
                                         records[1]};
    const std::vector<SummaryRow> rows2 = aggregate(shuffled);
    REQUIRE(rows2.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows2[i].solver == rows[i].solver);
        CHECK(rows2[i].optimal_count == rows[i].optimal_count);
        CHECK(rows2[i].infeasible_count == rows[i].infeasible_count);
        CHECK(rows2[i].timeout_count == rows[i].timeout_count);
        CHECK(rows2[i].error_count == rows[i].error_count);
        CHECK(rows2[i].mean_time_s.has_value() == rows[i].mean_time_s.has_value());
        if (rows[i].mean_time_s) {
            CHECK(*rows2[i].mean_time_s == doctest::Approx(*rows[i].mean_time_s));
        }
    }

    CHECK_THROWS_AS(aggregate({}), ValidationError);
}

TEST_CASE("summary renders to csv and a fixed-width table") {
    const std::vector<BenchRecord> records = run_bench(tiny_plan());
    const std::vector<SummaryRow> rows = aggregate(records);
    const std::string csv = summary_to_csv(rows);
    CHECK(csv.rfind("size,solver,model,optimal,infeasible,timeout,error,mean_time_s,"
                    "median_time_s,max_time_s\n",
                    0) == 0);
    const std::string table = summary_to_table(rows);
    CHECK(table.find("labeling") != std::string::npos);
    CHECK(table.find("bnb") != std::string::npos);
}

TEST_CASE("shipped bench plans parse and match the documented defaults") {
    const std::filesystem::path repo = VOLTPATH_REPO_DIR;
    const BenchPlan full = load_bench_plan_file(repo / "configs/bench_plan_full.json");
    REQUIRE(full.sizes.size() == 20);
    CHECK(full.sizes.front() == 5);
    CHECK(full.sizes.back() == 100);
    CHECK(full.instances_per_size == 30);
    CHECK(full.timeout_s == 60.0);
    CHECK(full.solvers == std::vector<std::string>{"labeling", "bnb"});
    CHECK(full.models == std::vector<std::string>{"linear", "nominal"});

    const BenchPlan smoke = load_bench_plan_file(repo / "configs/bench_plan_smoke.json");
    CHECK_NOTHROW(validate(smoke));
    CHECK(smoke.sizes.back() <= 20);  // stays quick
}
