// Benchmarks for the route solvers and the MILP exporter on generated
// instances. Instance generation is cached per size so iterations measure
// solving alone.

#include <map>

#include <benchmark/benchmark.h>

#include "voltpath/instance.hpp"
#include "voltpath/milp.hpp"
#include "voltpath/solver.hpp"

namespace {

using namespace voltpath;

const Instance& instance_of(int n) {
    static std::map<int, Instance> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, generate_instance(n, 7)).first;
    return it->second;
}

void BM_GenerateInstance(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        Instance instance = generate_instance(n, 7);
        benchmark::DoNotOptimize(instance);
    }
}
BENCHMARK(BM_GenerateInstance)->Arg(20)->Arg(50);

void BM_SolveLabeling(benchmark::State& state) {
    const Instance& instance = instance_of(static_cast<int>(state.range(0)));
    const ResourceModel model = linear_model(instance);
    for (auto _ : state) {
        PathSolution solution = solve_labeling(instance, model);
        benchmark::DoNotOptimize(solution);
    }
}
BENCHMARK(BM_SolveLabeling)->Arg(10)->Arg(20)->Arg(30);

void BM_SolveBnb(benchmark::State& state) {
    const Instance& instance = instance_of(static_cast<int>(state.range(0)));
    const ResourceModel model = linear_model(instance);
    for (auto _ : state) {
        PathSolution solution = solve_bnb(instance, model);
        benchmark::DoNotOptimize(solution);
    }
}
BENCHMARK(BM_SolveBnb)->Arg(10)->Arg(20)->Arg(30);

void BM_ExportMilp(benchmark::State& state) {
    const Instance& instance = instance_of(static_cast<int>(state.range(0)));
    const ResourceModel model = linear_model(instance);
    for (auto _ : state) {
        std::string lp = export_milp(instance, model);
        benchmark::DoNotOptimize(lp);
    }
}
BENCHMARK(BM_ExportMilp)->Arg(20)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
