#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "noisefridge/error.hpp"
#include "noisefridge/thermo.hpp"
#include "noisefridge/units.hpp"

namespace noisefridge {
namespace {

using namespace units;

DeviceParams at(double t_a_mk, double t_s_mk = 177.0) {
  DeviceParams p = DeviceParams::reference();
  p.n_s = occupation_from_temperature(from_millikelvin(t_s_mk), p.omega_s());
  p.n_a = occupation_from_temperature(from_millikelvin(t_a_mk), p.omega_a());
  return p;
}

void expect_relative(double value, double expected, double tolerance) {
  EXPECT_NEAR(value, expected, tolerance * std::abs(expected)) << "expected " << expected;
}

TEST(HeatCurrents, ReferencePointMatchesOracle) {
  // Oracle: row-major NumPy Liouvillian, SVD kernel.
  const HeatCurrents hc = solve_heat_currents(DeviceParams::reference());
  expect_relative(to_attowatt(hc.j_s), -1.87674394547, 1e-9);
  expect_relative(to_attowatt(hc.j_a), 1.54958928437, 1e-9);
  expect_relative(to_attowatt(hc.j_phi), 0.327154661104, 1e-9);
  EXPECT_EQ(hc.j_loss, 0.0);
}

TEST(HeatCurrents, VanishWithoutGradientOrDephasing) {
  DeviceParams p = DeviceParams::reference();
  p.n_a = p.n_s;
  const HeatCurrents equal = solve_heat_currents(p);
  EXPECT_LT(equal.max_abs(), 1e-12 * std::abs(solve_heat_currents(DeviceParams::reference()).j_s));
  p = DeviceParams::reference();
  p.gamma_phi = 0.0;
  EXPECT_LT(solve_heat_currents(p).max_abs(), 1e-30);
}

TEST(HeatCurrents, FirstLawIncludingParasiticLosses) {
  const HeatCurrents hc = solve_heat_currents(DeviceParams::reference(), true);
  // A zero-temperature loss channel can only absorb energy.
  EXPECT_GT(hc.j_loss, 0.0);
  EXPECT_LT(std::abs(hc.sum()), 1e-10 * hc.max_abs());
}

TEST(HeatCurrents, RejectsMissingChannelAndNonStationaryState) {
  const DeviceParams p = DeviceParams::reference();
  const Liouvillian full = thermal_machine_liouvillian(p);
  std::vector<Dissipator> no_phi;
  for (const auto& d : full.dissipators) {
    if (d.channel != Channel::Phi) no_phi.push_back(d);
  }
  const Liouvillian partial = Liouvillian::assemble(full.hamiltonian, no_phi);
  const DensityMatrix rho = steady_state(partial.total);
  EXPECT_THROW(heat_currents(rho, partial), Error);
  EXPECT_THROW(heat_currents(DensityMatrix::basis_state(9, 4), full), Error);
}

TEST(Linearized, ReferencePointMatchesClosedForm) {
  const HeatCurrents lin = heat_currents_linearized(DeviceParams::reference());
  expect_relative(to_attowatt(lin.j_s), -1.99326681878, 1e-10);
  expect_relative(to_attowatt(lin.j_a), 1.64579984964, 1e-10);
  expect_relative(to_attowatt(lin.j_phi), 0.347466969141, 1e-10);
  EXPECT_LT(std::abs(lin.sum()), 1e-15 * lin.max_abs());
}

TEST(Linearized, SaturatesAtLargeDephasing) {
  DeviceParams p = DeviceParams::reference();
  p.gamma_phi = 1e7 * p.gamma_s;
  const HeatCurrents lin = heat_currents_linearized(p);
  const double k = lin.j_s / (kHbar * (p.n_a - p.n_s) * p.omega_s());
  expect_relative(to_mhz(k), 1.42492982456, 1e-6);
}

TEST(Linearized, UndefinedWithoutRates) {
  DeviceParams p = DeviceParams::reference();
  p.gamma_s = p.gamma_a = p.gamma_phi = 0.0;
  EXPECT_THROW(heat_currents_linearized(p), Error);
}

TEST(Linearized, AgreesWithFullSolverAtLowOccupation) {
  // Oracle full-solver J_s (aW) with n_a = 0.
  const std::pair<double, double> oracle[] = {
      {0.01, -0.0945347122199}, {0.03, -0.28315892959}, {0.05, -0.470552006867}};
  for (const auto& [n, j_full] : oracle) {
    DeviceParams p = DeviceParams::reference();
    p.n_s = n;
    p.n_a = 0.0;
    const HeatCurrents full = solve_heat_currents(p);
    expect_relative(to_attowatt(full.j_s), j_full, 1e-9);
    const HeatCurrents lin = heat_currents_linearized(p);
    EXPECT_LT(std::abs(lin.j_s - full.j_s), 0.05 * std::abs(full.j_s));
  }
}

TEST(Linearized, ReferencePointWithinTwentyPercent) {
  // At n_s = 0.21 the second-order terms are visible: the oracle gap is 5.9%.
  const HeatCurrents full = solve_heat_currents(DeviceParams::reference());
  const HeatCurrents lin = heat_currents_linearized(DeviceParams::reference());
  const double gap = std::abs(lin.j_s - full.j_s) / std::abs(full.j_s);
  EXPECT_NEAR(gap, 1.99326681878 / 1.87674394547 - 1.0, 1e-8);
  EXPECT_LT(gap, 0.20);
}

TEST(Regime, ClassifiesAlongTheRatioAxis) {
  const auto regime_at = [](double ratio) {
    const double t_a = ratio * 0.177;
    return classify_regime(solve_heat_currents(at(1e3 * t_a)), t_a, 0.177);
  };
  EXPECT_EQ(regime_at(0.2), Regime::HeatEngine);
  EXPECT_EQ(regime_at(0.92), Regime::Refrigerator);
  EXPECT_EQ(regime_at(1.2), Regime::Accelerator);
}

TEST(Regime, SignPatternTable) {
  const HeatCurrents engine{-2.0, 1.5, 0.5};
  const HeatCurrents reversed{2.0, -1.5, -0.5};
  const HeatCurrents mixed{-2.0, 2.5, -0.5};
  EXPECT_EQ(classify_regime(engine, 0.05, 0.1), Regime::HeatEngine);
  EXPECT_EQ(classify_regime(reversed, 0.05, 0.1), Regime::Refrigerator);
  EXPECT_EQ(classify_regime(reversed, 0.2, 0.1), Regime::Accelerator);
  EXPECT_EQ(classify_regime(reversed, 0.1, 0.1), Regime::None);
  EXPECT_EQ(classify_regime(mixed, 0.05, 0.1), Regime::None);
  EXPECT_EQ(classify_regime({-2.0, 2.0 - 1e-4, 1e-4}, 0.05, 0.1), Regime::None);
  EXPECT_EQ(classify_regime({-2.0, 2.0 - 1e-4, 1e-4}, 0.05, 0.1, 0.0), Regime::HeatEngine);
}

TEST(Performance, CarnotBoundAtReferenceRatio) {
  const Performance perf = performance_metrics({}, 0.83 * 0.177, 0.177);
  ASSERT_TRUE(perf.cop_carnot.has_value());
  EXPECT_NEAR(*perf.cop_carnot, 0.83 / 0.17, 1e-12);
  EXPECT_FALSE(perf.cop.has_value());
  EXPECT_FALSE(performance_metrics({}, 0.177, 0.177).cop_carnot.has_value());
}

TEST(Performance, LinearizedCopIsModeFrequencyRatio) {
  // Inside [R] the linearized magnitudes are in the ratio omega_s : omega_a.
  const DeviceParams p = at(0.9 * 177.0);
  const HeatCurrents lin = heat_currents_linearized(p);
  const Performance perf = performance_metrics(lin, 0.9 * 0.177, 0.177);
  ASSERT_TRUE(perf.cop.has_value());
  EXPECT_NEAR(*perf.cop, p.omega_a() / (2.0 * p.g), 1e-9);
  EXPECT_NEAR(*perf.cop, 4.73656489913, 1e-9);
}

TEST(Performance, CopVanishesWithColdCurrent) {
  const Performance perf = performance_metrics({1.0, -1e-12, -(1.0 - 1e-12)}, 0.1, 0.2);
  ASSERT_TRUE(perf.cop.has_value());
  EXPECT_LT(*perf.cop, 1e-11);
}

TEST(Sweep, FirstLawOrderingAndRegimeSequence) {
  std::vector<double> t_a;
  for (double t = 39.0; t <= 217.0; t += 8.9) t_a.push_back(from_millikelvin(t));
  std::ranges::reverse(t_a);
  const auto sweep = temperature_sweep(DeviceParams::reference(), 0.177, t_a, 2);
  ASSERT_EQ(sweep.size(), t_a.size());
  std::vector<Regime> sequence;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& hc = sweep[i].currents;
    EXPECT_LT(std::abs(hc.j_s + hc.j_a + hc.j_phi), 1e-10 * hc.max_abs());
    if (i > 0) {
      EXPECT_GT(sweep[i].ratio, sweep[i - 1].ratio);
    }
    // Points whose smallest current sits in the zero band carry no regime.
    if (sweep[i].regime == Regime::None) continue;
    if (sequence.empty() || sequence.back() != sweep[i].regime) sequence.push_back(sweep[i].regime);
  }
  const std::vector<Regime> expected = {Regime::HeatEngine, Regime::Refrigerator, Regime::Accelerator};
  EXPECT_EQ(sequence, expected);
}

TEST(Sweep, BoundariesAtModeRatioAndUnity) {
  std::vector<double> t_a;
  for (double t = 39.0; t <= 217.0; t += 10.0) t_a.push_back(from_millikelvin(t));
  const DeviceParams p = DeviceParams::reference();
  const auto sweep = temperature_sweep(p, 0.177, t_a);
  const auto boundaries = regime_boundaries(p, 0.177, sweep, 1e-5);
  ASSERT_EQ(boundaries.size(), 2u);
  EXPECT_EQ(boundaries[0].below, Regime::HeatEngine);
  EXPECT_EQ(boundaries[0].above, Regime::Refrigerator);
  // All currents vanish where n_a = n_s, i.e. T_a / T_s = omega_a / omega_s.
  EXPECT_NEAR(boundaries[0].ratio, p.omega_a() / p.omega_s(), 1e-5);
  EXPECT_EQ(boundaries[1].below, Regime::Refrigerator);
  EXPECT_EQ(boundaries[1].above, Regime::Accelerator);
  EXPECT_NEAR(boundaries[1].ratio, 1.0, 1e-5);
}

TEST(Sweep, RejectsNonPositiveTemperatures) {
  const double bad[] = {0.0};
  EXPECT_THROW(temperature_sweep(DeviceParams::reference(), 0.177, bad), Error);
  const double good[] = {0.05};
  EXPECT_THROW(temperature_sweep(DeviceParams::reference(), -1.0, good), Error);
}

TEST(CopVsG, DecreasesWithCouplingAndRespectsCarnot) {
  const DeviceParams p = DeviceParams::reference();
  std::vector<double> g;
  for (double mhz : {300.0, 560.1, 900.0, 1200.0}) g.push_back(from_mhz(mhz));
  const auto rows = cop_vs_g(p, g, 0.177, 0.83, 1e-3, 2);
  ASSERT_EQ(rows.size(), g.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double w = p.omega;
    EXPECT_NEAR(rows[i].crossover_ratio, (w - g[i]) / (w + g[i]), 1e-9);
    EXPECT_LE(rows[i].cop, rows[i].cop_carnot_local);
    EXPECT_NEAR(rows[i].cop_carnot_reference, 0.83 / 0.17, 1e-12);
    EXPECT_LE(rows[i].cop_capped, rows[i].cop_carnot_reference);
    if (i > 0) {
      EXPECT_LT(rows[i].cop, rows[i - 1].cop);
    }
  }
  // Just inside [R] the full COP approaches the linearized omega_a / 2g.
  EXPECT_NEAR(rows[1].cop, p.omega_a() / (2.0 * p.g), 0.01);
}

}  // namespace
}  // namespace noisefridge
