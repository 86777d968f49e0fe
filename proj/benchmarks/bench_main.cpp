#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "noisefridge/reflectometry.hpp"
#include "noisefridge/spectra.hpp"
#include "noisefridge/thermo.hpp"
#include "noisefridge/units.hpp"

namespace {

using namespace noisefridge;
using namespace noisefridge::units;

void BM_SteadyStateThermalMachine(benchmark::State& state) {
  const DeviceParams p = DeviceParams::reference();
  const Liouvillian lab = thermal_machine_liouvillian(p);
  const Liouvillian l = Liouvillian::assemble(build_hamiltonian(p, p.omega), lab.dissipators);
  for (auto _ : state) benchmark::DoNotOptimize(steady_state(l.total));
}
BENCHMARK(BM_SteadyStateThermalMachine)->Unit(benchmark::kMicrosecond);

void BM_HeatCurrents(benchmark::State& state) {
  const DeviceParams p = DeviceParams::reference();
  for (auto _ : state) benchmark::DoNotOptimize(solve_heat_currents(p));
}
BENCHMARK(BM_HeatCurrents)->Unit(benchmark::kMicrosecond);

void BM_TemperatureSweep(benchmark::State& state) {
  std::vector<double> t_a;
  for (int i = 0; i < state.range(0); ++i) t_a.push_back(from_millikelvin(39.0 + 178.0 * i / state.range(0)));
  const DeviceParams p = DeviceParams::reference();
  for (auto _ : state) benchmark::DoNotOptimize(temperature_sweep(p, from_millikelvin(177.0), t_a));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TemperatureSweep)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_EmissionSpectrum(benchmark::State& state) {
  DeviceParams p = DeviceParams::reference();
  p.dims = HilbertDims::pair(2, Basis::Mode);
  const DrivenModel m = driven_liouvillian(p, {from_mhz(14.7), p.omega_s(), Mode::S});
  const DensityMatrix rho = steady_state(m.liouvillian.total);
  const auto grid = detuning_grid(from_mhz(30.0), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(emission_spectrum(m, rho, Mode::S, grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EmissionSpectrum)->Arg(201)->Arg(801)->Unit(benchmark::kMillisecond);

void BM_GlobalReflectionFit(benchmark::State& state) {
  const ReflectionModelParams m{from_ghz(6.4261), from_mhz(2.87), from_khz(98.0), 0.0, 0.0};
  std::vector<double> grid;
  for (double d : detuning_grid(from_mhz(15.0), 301)) grid.push_back(m.omega_mode + d);
  const std::vector<double> powers = {1e-14, 1e-13, 1e-12, 1e-11};
  const auto trace =
      simulate_reflection_trace(m, grid, powers, 1.4e13 * std::pow(kTwoPi * 1e6, 2), 0.01, 1);
  for (auto _ : state) benchmark::DoNotOptimize(global_reflection_fit(trace));
}
BENCHMARK(BM_GlobalReflectionFit)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
