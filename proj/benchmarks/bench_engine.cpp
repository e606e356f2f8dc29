#include "qspec/composite.hpp"
#include "qspec/noise.hpp"
#include "qspec/qubits.hpp"
#include "qspec/sweep.hpp"

#include <benchmark/benchmark.h>

using namespace qspec;

namespace {

void BM_TransmonSpectrum(benchmark::State& state) {
    Transmon t;
    t.EJ = 30.0, t.EC = 0.2, t.ncut = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(eigenvals(t, 6));
}
BENCHMARK(BM_TransmonSpectrum)->Arg(10)->Arg(30)->Arg(100);

void BM_FluxoniumSpectrum(benchmark::State& state) {
    Fluxonium f;
    f.cutoff = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(eigenvals(f, 6));
}
BENCHMARK(BM_FluxoniumSpectrum)->Arg(60)->Arg(110);

void BM_ZeroPiSparse(benchmark::State& state) {
    ZeroPi z;
    z.ncut = 15;
    z.grid = Grid1d{-6.0 * 3.141592653589793, 6.0 * 3.141592653589793, static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(eigenvals(z, 6));
}
BENCHMARK(BM_ZeroPiSparse)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);

HilbertSpaceDef three_mode(int td) {
    Transmon t1;
    t1.EJ = 40.0, t1.EC = 0.2, t1.ncut = 30, t1.truncated_dim = td;
    Transmon t2;
    t2.EJ = 15.0, t2.EC = 0.15, t2.ncut = 30, t2.truncated_dim = td;
    Oscillator o;
    o.E_osc = 4.5, o.truncated_dim = td;
    ProductTerm g1, g2;
    g1.g = 0.1, g1.add_hc = true;
    g1.factors = {OperatorRef{"n_operator", std::nullopt, 0}, OperatorRef{"annihilation_operator", std::nullopt, 2}};
    g2.g = 0.2, g2.add_hc = true;
    g2.factors = {OperatorRef{"n_operator", std::nullopt, 1}, OperatorRef{"creation_operator", std::nullopt, 2}};
    HilbertSpaceDef def;
    def.subsystems = {t1, t2, o};
    def.interactions = {g1, g2};
    return def;
}

void BM_DressedSpectrum(benchmark::State& state) {
    const HilbertSpaceDef def = three_mode(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(dressed_eigensys(def, 20));
}
BENCHMARK(BM_DressedSpectrum)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
    SweepDef def;
    def.hilbertspace = three_mode(4);
    def.axes = {Axis{"ng", linspace(0.0, 0.5, 16)}};
    def.bindings = {UpdateBinding{"ng", 0, std::nullopt, "ng", 0.0, 1.0}};
    def.evals_count = 20;
    def.subsys_update_info = std::map<std::string, std::vector<int>>{{"ng", {0}}};
    def.worker_count = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep(def));
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(2)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_DephasingEstimate(benchmark::State& state) {
    TunableTransmon t;
    t.EJmax = 20.0, t.EC = 0.5, t.d = 0.1, t.flux = 0.2, t.ncut = 20;
    NoiseCall call;
    for (auto _ : state) benchmark::DoNotOptimize(noise_channel(t, "tphi_1_over_f_flux", call, {}));
}
BENCHMARK(BM_DephasingEstimate);

}  // namespace

BENCHMARK_MAIN();
