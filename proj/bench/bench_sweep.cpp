// Serial vs OpenMP boundary sweep on the vdp system.

#include <benchmark/benchmark.h>

#include <numbers>

#include "delaybounds/domain.hpp"
#include "delaybounds/models.hpp"

namespace {

using namespace dbounds;

OscillatorParams vdp_params() {
    OscillatorParams p;
    p.c1 = 0.4;
    p.c2 = 0.2;
    p.omega1_sq = 1.0;
    p.omega2_sq = 4.0;
    p.d = 0.1;
    p.a1 = p.a2 = p.b1 = p.b2 = 0.1;
    p.r1 = 3.14;
    p.r2 = 6.15;
    p.s1 = 3.1;
    p.s2 = 6.28;
    p.omega0 = 5.43;
    p.mu1 = p.mu2 = 1.0;
    p.h0 = 0.5;
    p.h1 = 1.0;
    return p;
}

Probe probe_for(int method) {
    const DelaySystem sys = build_vdp_system(vdp_params());
    ProbeSettings s;
    s.span = {0.0, 40.0};
    s.varpi = 50.0;
    s.cfg.step = 0.01;
    if (method == 0) return make_reference_probe(sys, s);
    return make_scalar_bound_probe(sys, eigen_decompose(sys.A), 6, s);
}

SweepGrid grid() {
    SweepGrid g;
    g.theta_step = std::numbers::pi / 8;
    return g;
}

void BM_SweepSerial(benchmark::State& state) {
    const Probe probe = probe_for(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sweep_serial(probe, grid(), {}));
}

void BM_SweepParallel(benchmark::State& state) {
    const Probe probe = probe_for(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sweep(probe, grid(), {}));
}

}  // namespace

// argument: 0 = reference probe, 1 = scalar bound probe (K = 6)
BENCHMARK(BM_SweepSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
