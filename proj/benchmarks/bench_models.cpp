// Microbenchmarks for the battery model kernels: voltage solves, single-step
// charge updates, full-profile integration, and the least-squares fit.

#include <benchmark/benchmark.h>

#include "voltpath/battery.hpp"
#include "voltpath/models.hpp"
#include "voltpath/simulate.hpp"

namespace {

using namespace voltpath;

const BatteryConfig& cell() {
    static const BatteryConfig config = default_18650();
    return config;
}

const LinearFit& cell_fit() {
    static const LinearFit fit = fit_linear(cell().curve, cell().params, default_soc_grid(),
                                            uniform_power_grid(1.0, 10.0));
    return fit;
}

void BM_OhmicVoltage(benchmark::State& state) {
    const BatteryConfig& config = cell();
    double soc = 0.95;
    for (auto _ : state) {
        const double v = ohmic_voltage(soc, 8.0, config.curve, config.params);
        benchmark::DoNotOptimize(v);
        soc = soc > 0.3 ? soc - 1e-6 : 0.95;  // sweep the lookup table
    }
}
BENCHMARK(BM_OhmicVoltage);

void BM_RcStep(benchmark::State& state) {
    const BatteryConfig& config = cell();
    SocState s;
    s.soc = 0.95;
    for (auto _ : state) {
        SocState next = rc_step(s, {8.0, 0.5}, config.curve, config.params);
        benchmark::DoNotOptimize(next);
        s.u_hysteresis = next.u_hysteresis;  // keep soc fixed, let the RC state settle
    }
}
BENCHMARK(BM_RcStep);

void BM_NominalDelta(benchmark::State& state) {
    const BatteryConfig& config = cell();
    for (auto _ : state) {
        const double soc = nominal_delta(0.8, {8.0, 30.0}, config.params);
        benchmark::DoNotOptimize(soc);
    }
}
BENCHMARK(BM_NominalDelta);

void BM_LinearDelta(benchmark::State& state) {
    const BatteryConfig& config = cell();
    const LinearFit& fit = cell_fit();
    for (auto _ : state) {
        const double soc = linear_delta(0.8, {8.0, 30.0}, fit, config.params);
        benchmark::DoNotOptimize(soc);
    }
}
BENCHMARK(BM_LinearDelta);

void BM_IntegrateRc(benchmark::State& state) {
    const BatteryConfig& config = cell();
    const PulseProfile profile = default_18650_profile();
    const int steps = static_cast<int>(state.range(0));
    for (auto _ : state) {
        Trajectory traj = integrate(IntegratedModel::rc, 1.0, profile, steps, config.curve,
                                    config.params);
        benchmark::DoNotOptimize(traj);
    }
}
BENCHMARK(BM_IntegrateRc)->Arg(10)->Arg(100);

void BM_FitLinear(benchmark::State& state) {
    const BatteryConfig& config = cell();
    for (auto _ : state) {
        LinearFit fit = fit_linear(config.curve, config.params, default_soc_grid(),
                                   uniform_power_grid(1.0, 10.0));
        benchmark::DoNotOptimize(fit);
    }
}
BENCHMARK(BM_FitLinear);

}  // namespace

BENCHMARK_MAIN();
