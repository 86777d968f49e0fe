#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "noisefridge/operators.hpp"

namespace noisefridge {

// Single-port reflection of one collective mode. All rates in rad/s.
struct ReflectionModelParams {
  double omega_mode = 0.0;
  double gamma = 0.0;           // coupling to the probed waveguide
  double gamma_prime = 0.0;     // coupling to everything else
  double gamma_phi_pure = 0.0;  // pure dephasing entering the linewidth
  double rabi = 0.0;            // probe-strength Rabi rate

  double gamma1() const { return gamma + gamma_prime; }
  double gamma2() const { return 0.5 * gamma1() + gamma_phi_pure; }
  void validate() const;
};

/// r = 1 - i G G1 (d - i G2) / (rabi^2 G2 + G1 (d^2 + G2^2)), d = omega - omega_mode.
Complex reflection_coefficient(double omega, const ReflectionModelParams& m);

struct ReflectionSample {
  double frequency = 0.0;    // rad/s
  Complex r;
  double power = 0.0;        // probe power, mW
  double noise_power = 0.0;  // injected noise power, arbitrary units
};

using ReflectionTrace = std::vector<ReflectionSample>;

/// Forward model at each (frequency, power) with rabi^2 = power_factor * power
/// and independent N(0, noise_sigma) on the real and imaginary parts.
/// Samples are ordered by power, then frequency. m.rabi is ignored.
ReflectionTrace simulate_reflection_trace(const ReflectionModelParams& m,
                                          std::span<const double> frequencies,
                                          std::span<const double> powers, double power_factor,
                                          double noise_sigma, std::uint64_t seed);

struct GlobalReflectionFit {
  ReflectionModelParams params;  // rabi left at zero
  double power_factor = 0.0;     // rabi^2 per mW, (rad/s)^2 / mW
  // 1 sigma from s^2 (J^T J)^-1 in the order omega, gamma, gamma_prime, factor.
  double sigma_omega = 0.0;
  double sigma_gamma = 0.0;
  double sigma_gamma_prime = 0.0;
  double sigma_power_factor = 0.0;
  double rms_residual = 0.0;
  int evaluations = 0;
};

/// Joint complex least squares over all powers sharing omega_mode, gamma,
/// gamma_prime and one power factor. The model depends on gamma_prime and
/// gamma_phi_pure only through G2 and on the power only through
/// rabi^2 / G1, so gamma_phi_pure must be supplied and is held fixed.
/// Initializer: omega from the deepest |r| dip of the lowest-power trace, G2
/// from the half width of 1 - Re r there, gamma from the dip depth.
GlobalReflectionFit global_reflection_fit(const ReflectionTrace& trace, double gamma_phi_pure = 0.0,
                                          int max_evaluations = 2000);

struct DephasingPoint {
  double noise_power = 0.0;
  double omega_mode = 0.0;
  double gamma_phi = 0.0;  // may come out slightly negative at zero noise
  double sigma_gamma_phi = 0.0;
};

struct DephasingFit {
  std::vector<DephasingPoint> points;  // ascending noise power
  std::optional<double> kappa_phi;     // slope of gamma_phi = kappa * power
};

/// Groups the samples by noise_power and fits (omega_mode, gamma_phi) for
/// each group with gamma, gamma_prime and rabi taken from `fixed`.
DephasingFit dephasing_noise_fit(const ReflectionTrace& trace, const ReflectionModelParams& fixed,
                                 bool fit_kappa = true);

/// Full width at half maximum of 1 - |r|^2 in rad/s.
double dip_fwhm(const ReflectionModelParams& m);

/// gamma / gamma_prime.
double selectivity(double gamma, double gamma_prime);

}  // namespace noisefridge
