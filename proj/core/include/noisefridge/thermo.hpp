#pragma once

#include <optional>
#include <span>
#include <vector>

#include "noisefridge/device.hpp"
#include "noisefridge/lindblad.hpp"

namespace noisefridge {

// Steady-state heat currents in watts. Positive means heat delivered from the
// machine into that channel. j_loss collects the parasitic channels and is
// zero unless they were included in the generator.
struct HeatCurrents {
  double j_s = 0.0;
  double j_a = 0.0;
  double j_phi = 0.0;
  double j_loss = 0.0;

  double sum() const { return j_s + j_a + j_phi + j_loss; }
  double max_abs() const;
};

enum class Regime { HeatEngine, Refrigerator, Accelerator, None };

const char* to_string(Regime regime) noexcept;
// One-letter tag used in CSV output: H, R, A or - for none.
const char* regime_tag(Regime regime) noexcept;

/// Raw Tr(H L_c rho) in rad/s^2 (energy flowing into the machine from c).
double channel_energy_rate(const DensityMatrix& rho, const Operator& hamiltonian,
                           const SuperOperator& channel);

/// j_c = -hbar Tr(H L_c rho) for every channel present in the generator.
/// Throws if the S, A or PHI channel is missing, if rho is not stationary
/// under the generator, or if the first law fails.
HeatCurrents heat_currents(const DensityMatrix& rho, const Liouvillian& generator);

/// First-order expansion in the occupations:
///   K = G_a G_s G_phi / (G_s G_phi + G_a (2 G_s + G_phi))
///   j_s = hbar (n_a - n_s) K (g + omega), j_a = hbar (n_a - n_s) K (g - omega),
///   j_phi = -2 g hbar (n_a - n_s) K
HeatCurrents heat_currents_linearized(const DeviceParams& params);

/// Full solve: thermal-machine Liouvillian, steady state and heat currents.
HeatCurrents solve_heat_currents(const DeviceParams& params, bool include_parasitic = false);

/// Sign pattern (j_s < 0, j_a > 0, j_phi > 0) is a heat engine; the reversed
/// pattern is a refrigerator when T_a < T_s and an accelerator when T_a > T_s.
/// Any current with |j| < band * scale makes the point unclassifiable; the
/// default scale is the largest current at this point.
Regime classify_regime(const HeatCurrents& currents, double t_a, double t_s, double band = 1e-3,
                       std::optional<double> scale = std::nullopt);

struct Performance {
  std::optional<double> cop;         // set only in the refrigerator regime
  std::optional<double> cop_carnot;  // set when T_a < T_s
};

/// cop = |j_a| / (|j_s| - |j_a|), cop_carnot = T_a / (T_s - T_a).
Performance performance_metrics(const HeatCurrents& currents, double t_a, double t_s);

struct SweepPoint {
  double ratio = 0.0;  // T_a / T_s
  double t_a = 0.0;    // K
  double t_s = 0.0;    // K
  double n_a = 0.0;
  double n_s = 0.0;
  HeatCurrents currents;
  Regime regime = Regime::None;
};

/// Steady-state heat currents at each T_a with T_s fixed. Occupations follow
/// Bose-Einstein at the respective mode frequencies. Points are sorted by
/// ratio; the classification band is taken relative to the largest current
/// anywhere in the sweep.
std::vector<SweepPoint> temperature_sweep(const DeviceParams& params, double t_s,
                                          std::span<const double> t_a_values, int threads = 1);

struct RegimeBoundary {
  Regime below = Regime::None;
  Regime above = Regime::None;
  double ratio = 0.0;
};

/// Locates every change of (strict sign) regime between adjacent sweep points
/// by bisection on T_a/T_s to `tolerance`.
std::vector<RegimeBoundary> regime_boundaries(const DeviceParams& params, double t_s,
                                              std::span<const SweepPoint> sweep,
                                              double tolerance = 1e-4);

struct CopPoint {
  double g = 0.0;                // rad/s
  double crossover_ratio = 0.0;  // heat engine / refrigerator boundary
  double eval_ratio = 0.0;       // where the COP was evaluated
  double cop = 0.0;
  double cop_carnot_local = 0.0;      // Carnot bound at eval_ratio
  double cop_carnot_reference = 0.0;  // Carnot bound at the reference ratio
  double cop_capped = 0.0;            // min(cop, cop_carnot_reference)
};

/// COP just inside the refrigeration window (crossover + inset) for each g.
std::vector<CopPoint> cop_vs_g(const DeviceParams& params, std::span<const double> g_values,
                               double t_s, double reference_ratio = 0.83, double inset = 1e-3,
                               int threads = 1);

}  // namespace noisefridge
