#pragma once

#include <span>
#include <utility>
#include <vector>

#include "noisefridge/device.hpp"
#include "noisefridge/lindblad.hpp"

namespace noisefridge {

enum class Mode { S, A };

const char* to_string(Mode mode) noexcept;

struct DriveSpec {
  double rabi = 0.0;             // rad/s
  double drive_frequency = 0.0;  // rad/s, lab frame
  Mode target = Mode::S;

  void validate() const;
};

// Driven machine in the frame rotating at the drive frequency. Waveguide
// occupations are ignored (zero-temperature baths).
struct DrivenModel {
  DeviceParams params;
  DriveSpec drive;
  CollectiveOps ops;
  Liouvillian liouvillian;

  const Operator& lowering(Mode mode) const;
  double waveguide_rate(Mode mode) const;   // Gamma into the mode's own waveguide
  double mode_frequency(Mode mode) const;   // lab frame
};

/// H = sum_i (omega - omega_d) n_i + g (s1+ s2- + h.c.) + (rabi/2)(s_t+ + s_t-)
/// with G_s D[s_s-], G_a D[s_a-] and (G_phi/2) D[exchange]. With
/// include_parasitic, G'_s and G'_a decay is added on the loss channels.
/// The truncation in params.dims is used as given; a two-level mode basis is
/// the natural choice since a harmonic ladder cannot saturate.
DrivenModel driven_liouvillian(const DeviceParams& params, const DriveSpec& drive,
                               bool include_parasitic = false);

struct SpectrumTrace {
  std::vector<double> detunings;  // rad/s relative to the drive, increasing
  // Inelastic emission as a photon-flux density per rad/s, so that
  // hbar * omega_mode * integral(psd) is the emitted inelastic power.
  std::vector<double> psd;
  double coherent_power = 0.0;  // W, elastic part hbar w G |<s->|^2
  double mode_frequency = 0.0;  // rad/s, lab frame
  std::vector<double> skipped;  // detunings dropped as singular
};

/// Quantum-regression spectrum of the mode's emission:
///   S(D) = G 2 Re Tr[s+ (-(L - iD))^-1 vec(s- rho - <s-> rho)] / (2 pi)
/// The resolvent is deflated with the steady-state projector, which leaves
/// the solution unchanged for D != 0 and makes D = 0 well posed. Points with
/// a numerically singular resolvent are skipped.
SpectrumTrace emission_spectrum(const DrivenModel& model, const DensityMatrix& rho_ss, Mode mode,
                                std::span<const double> detunings, int threads = 1);

/// `count` evenly spaced detunings covering [-half_span, +half_span].
std::vector<double> detuning_grid(double half_span, std::size_t count);

/// hbar * omega * integral of psd over [-span/2, span/2] by the trapezoidal
/// rule, interpolating linearly at the edges. Adds coherent_power on request.
double integrated_power(const SpectrumTrace& trace, double span, double omega,
                        bool include_coherent = false);

struct TransportPoint {
  double gamma_phi = 0.0;  // rad/s
  double p_s = 0.0;        // W, inelastic emission of S over the span
  double j_a = 0.0;        // W, hbar omega_a G_a <n_a>
};

struct TransportOptions {
  double span = 0.0;          // rad/s; defaults to 2 pi x 20 MHz when zero
  std::size_t grid_points = 801;
  bool include_parasitic = false;
  int threads = 1;
};

/// Power transfer into waveguide A and the inelastic re-emission of S as a
/// function of the exchange-dephasing rate, with the drive on S.
std::vector<TransportPoint> transport_vs_dephasing(const DeviceParams& params,
                                                   const DriveSpec& drive,
                                                   std::span<const double> gamma_phi_values,
                                                   const TransportOptions& options = {});

struct MollowFit {
  double rabi = 0.0;   // rad/s
  double scale = 0.0;  // data / model
  double rms_residual = 0.0;  // relative to the largest data value
  double side_peak = 0.0;     // model side-peak detuning, rad/s
};

/// Fits the resonance-fluorescence triplet of the S mode (drive on S at
/// omega_s, no dephasing, losses from params) to `trace` with only the Rabi
/// frequency and a multiplicative scale free. Throws "increase drive" when
/// the trace has no resolved side peak.
MollowFit mollow_calibration_fit(const SpectrumTrace& trace, const DeviceParams& params,
                                 int threads = 1);

/// Least-squares B in n = B |alpha|^2.
double amplitude_to_photon_fit(std::span<const std::pair<double, double>> points);

}  // namespace noisefridge
