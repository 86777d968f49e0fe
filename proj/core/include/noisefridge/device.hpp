#pragma once

#include <string>
#include <vector>

#include "noisefridge/operators.hpp"

namespace noisefridge {

// Physical description of the two-transmon machine at the fully hybridized
// point (both transmons at the same bare frequency). All frequencies and rates
// are angular (rad/s); occupations are dimensionless.
struct DeviceParams {
  double omega = 0.0;          // bare transmon frequency
  double g = 0.0;              // transmon-transmon exchange coupling
  double alpha = 0.0;          // anharmonicity, signed (negative for transmons)
  double gamma_s = 0.0;        // S mode into waveguide S
  double gamma_a = 0.0;        // A mode into waveguide A
  double gamma_s_prime = 0.0;  // S mode into all other channels
  double gamma_a_prime = 0.0;  // A mode into all other channels
  double gamma_phi = 0.0;      // exchange-dephasing rate
  double n_s = 0.0;            // mean photon number of waveguide S at omega_s
  double n_a = 0.0;            // mean photon number of waveguide A at omega_a
  HilbertDims dims = HilbertDims::pair(3, Basis::Mode);

  /// Spectroscopy values of the reference device at its refrigerator working
  /// point: exchange dephasing 0.94 MHz, waveguide S at 177 mK and waveguide A
  /// at 39 mK (Bose-Einstein occupations). Thermal-machine truncation.
  static DeviceParams reference();

  double omega_s() const { return omega + g; }
  double omega_a() const { return omega - g; }

  void validate() const;

  bool operator==(const DeviceParams&) const = default;
};

struct CollectiveOps {
  Operator sigma_s_minus;
  Operator sigma_s_plus;
  Operator sigma_a_minus;
  Operator sigma_a_plus;
  Operator sigma_z1;
  // Per-transmon lowering operators, in whichever basis the space uses.
  Operator sigma1_minus;
  Operator sigma2_minus;
};

// In the site basis the transmon ladders are embedded directly and the mode
// operators are (s1 +- s2)/sqrt(2). In the mode basis the roles swap: the S/A
// ladders are embedded and s1,2 = (s_s +- s_a)/sqrt(2).
CollectiveOps collective_ops(const HilbertDims& dims);

/// Lab-frame Hamiltonian in rad/s:
///   omega sum_i n_i + g (s1+ s2- + h.c.) [+ (alpha/2) sum_i s_i+ s_i+ s_i- s_i-]
/// The anharmonic term is only added for 3-level transmons in the site basis;
/// in the mode basis S and A are treated as harmonic ladders.
Operator build_hamiltonian(const DeviceParams& params);

/// Same as build_hamiltonian with the bare frequency shifted by -frame, i.e.
/// the Hamiltonian in a frame rotating at `frame` (excitation number is
/// conserved, so the shift is exact).
Operator build_hamiltonian(const DeviceParams& params, double frame);

struct EigenLevel {
  std::string label;    // |0>, |a>, |s>, |2+>_L, |2->, |2+>_U
  double numeric_ghz;   // from diagonalization
  double closed_form_ghz;
};

/// Lowest six levels of the 3-level site-basis Hamiltonian, labelled by
/// excitation number and exchange parity, with numeric and closed-form values.
/// Requires params.dims = {3, 3} in the site basis.
std::vector<EigenLevel> eigenstructure(const DeviceParams& params);

// Thermal photon occupations. Bose-Einstein is the default used everywhere;
// the Fermi-Dirac pair is provided for comparison with two-level populations.
double occupation_from_temperature(double kelvin, double omega);
double temperature_from_occupation(double occupation, double omega);
double fermi_occupation_from_temperature(double kelvin, double omega);
double temperature_from_fermi_occupation(double occupation, double omega);

// Flat-band flux noise injected on transmon 1.
struct NoiseSpec {
  double center_frequency = 0.0;  // rad/s
  double bandwidth = 0.0;         // rad/s
  double amplitude = 0.0;         // arbitrary source units
  double kappa_phi = 1.0;         // rad/s per amplitude^2

  void validate() const;
};

/// kappa_phi * amplitude^2 when the noise band covers the S-A splitting 2g,
/// zero otherwise.
double effective_dephasing_rate(const NoiseSpec& noise, double g);

}  // namespace noisefridge
