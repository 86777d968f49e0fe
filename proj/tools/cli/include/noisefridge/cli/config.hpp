#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "noisefridge/device.hpp"
#include "noisefridge/spectra.hpp"

namespace noisefridge::cli {

// Parse or validation failure; line is 0 when no single line is to blame.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

// Values are kept in the units written in the file (GHz, MHz, mK, dBm) so
// that serialize() and parse_config() round-trip exactly; conversion to SI
// happens in the accessors.
struct DeviceSection {
  double omega_GHz = 5.866;
  double g_MHz = 560.1;
  double alpha_MHz = -133.0;
  double gamma_s_MHz = 2.87;
  double gamma_a_MHz = 2.83;
  double gamma_s_prime_MHz = 0.098;
  double gamma_a_prime_MHz = 0.097;
  double gamma_phi_MHz = 0.94;
  // Each waveguide takes either a temperature or an occupation.
  std::optional<double> T_s_mK = 177.0;
  std::optional<double> T_a_mK = 39.0;
  std::optional<double> n_s;
  std::optional<double> n_a;
  int levels = 3;
  Basis basis = Basis::Mode;
  bool include_parasitic = false;

  DeviceParams params() const;
  bool operator==(const DeviceSection&) const = default;
};

struct RunSection {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output_dir = "out";
  bool operator==(const RunSection&) const = default;
};

struct HeatSweepSection {
  double T_s_mK = 177.0;
  double T_a_start_mK = 39.0;
  double T_a_stop_mK = 217.0;
  double T_a_step_mK = 1.0;
  double boundary_tolerance = 1e-4;
  bool operator==(const HeatSweepSection&) const = default;
};

struct CopVsGSection {
  double T_s_mK = 177.0;
  double g_start_MHz = 300.0;
  double g_stop_MHz = 1200.0;
  int g_count = 10;
  double reference_ratio = 0.83;
  double inset = 1e-3;
  bool operator==(const CopVsGSection&) const = default;
};

// Drive for the driven-dissipative commands; the truncation here replaces
// the device truncation because a harmonic ladder cannot saturate.
struct DriveSection {
  double rabi_MHz = 1.47;
  Mode target = Mode::S;
  double detuning_MHz = 0.0;  // drive minus target-mode frequency
  int levels = 2;
  Basis basis = Basis::Mode;
  bool operator==(const DriveSection&) const = default;
};

struct SpectrumSection {
  Mode mode = Mode::S;
  double half_span_MHz = 10.0;
  int points = 801;
  bool operator==(const SpectrumSection&) const = default;
};

struct TransportSection {
  double gamma_phi_min_MHz = 0.01;
  double gamma_phi_max_MHz = 100.0;
  int count = 41;  // log-spaced between min and max
  bool include_zero = true;
  double span_MHz = 20.0;
  int grid_points = 801;
  bool operator==(const TransportSection&) const = default;
};

struct ReflectionSection {
  std::string input;  // CSV; empty means synthesize from the device
  Mode mode = Mode::S;
  double gamma_phi_pure_MHz = 0.0;
  double half_span_MHz = 15.0;
  int points = 301;
  std::vector<double> powers_dBm = {-140.0, -130.0, -120.0, -110.0};
  double power_factor_MHz2_per_mW = 1.4e13;  // (rabi/2pi)^2 per mW of probe power
  double noise_sigma = 0.0;
  bool operator==(const ReflectionSection&) const = default;
};

struct DephasingSection {
  std::string input;
  Mode mode = Mode::A;
  std::vector<double> noise_powers = {0.0, 1.0, 2.0, 3.0, 4.0};
  double kappa_MHz = 0.32;  // synthetic gamma_phi/2pi per unit noise power
  double half_span_MHz = 15.0;
  int points = 301;
  double probe_rabi_MHz = 0.0;
  double noise_sigma = 0.0;
  bool operator==(const DephasingSection&) const = default;
};

struct MollowSection {
  std::string input;  // spectrum CSV (detuning_MHz, psd_W_per_Hz)
  double rabi_MHz = 28.7;
  double half_span_MHz = 0.0;  // zero means twice the Rabi frequency
  int points = 801;
  double noise_sigma = 0.0;  // relative to the peak psd
  bool operator==(const MollowSection&) const = default;
};

struct RunConfig {
  DeviceSection device;
  RunSection run;
  HeatSweepSection heat_sweep;
  CopVsGSection cop_vs_g;
  DriveSection drive;
  SpectrumSection spectrum;
  TransportSection transport;
  ReflectionSection reflection;
  DephasingSection dephasing;
  MollowSection mollow;

  bool operator==(const RunConfig&) const = default;
};

/// Flat `[section]` headers and `key = value` lines; `#` and `;` start
/// comments. Unknown sections or keys, malformed values and out-of-range
/// values raise ConfigError with the offending line. Relative input paths are
/// resolved against `base_dir`, which must then contain them.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form listing every key; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

}  // namespace noisefridge::cli
