#include "noisefridge/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "noisefridge/error.hpp"
#include "noisefridge/thermo.hpp"
#include "noisefridge/units.hpp"

#ifndef NOISEFRIDGE_VERSION
#define NOISEFRIDGE_VERSION "unknown"
#endif

namespace noisefridge::cli {
namespace fs = std::filesystem;
using namespace units;

namespace {

// Fixed-precision text keeps the CSVs byte-stable across runs.
std::string num(double v) { return fmt::format("{:.12g}", v == 0.0 ? 0.0 : v); }

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorKind::Io, "cli", fmt::format("cannot write '{}'", path.string()));
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }
  ~CsvWriter() { out_.flush(); }

 private:
  fs::path path_;
  std::ofstream out_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cli", fmt::format("cannot write '{}'", path.string()));
  out << text;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double mhz2_to_angular2(double mhz2) { return mhz2 * std::pow(kTwoPi * 1e6, 2); }

DeviceParams driven_params(const RunConfig& c) {
  DeviceParams p = c.device.params();
  p.dims = HilbertDims::pair(c.drive.levels, c.drive.basis);
  return p;
}

DriveSpec drive_spec(const RunConfig& c, const DeviceParams& p) {
  const double mode_frequency = c.drive.target == Mode::S ? p.omega_s() : p.omega_a();
  return {from_mhz(c.drive.rabi_MHz), mode_frequency + from_mhz(c.drive.detuning_MHz),
          c.drive.target};
}

struct ModeTruth {
  double omega = 0.0;
  double gamma = 0.0;
  double gamma_prime = 0.0;
};

ModeTruth mode_truth(const DeviceParams& p, Mode mode) {
  if (mode == Mode::S) return {p.omega_s(), p.gamma_s, p.gamma_s_prime};
  return {p.omega_a(), p.gamma_a, p.gamma_a_prime};
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  }
  return out;
}

std::vector<std::string> cmd_eigen(const RunConfig& c, const fs::path& out) {
  DeviceParams p = c.device.params();
  p.dims = HilbertDims::pair(3, Basis::Site);
  const auto levels = eigenstructure(p);
  CsvWriter csv(out / "eigen.csv", {"label", "numeric_GHz", "closed_form_GHz"});
  for (const auto& level : levels) {
    csv.row({level.label, fmt::format("{:.9f}", level.numeric_ghz),
             fmt::format("{:.9f}", level.closed_form_ghz)});
  }
  return {"eigen.csv"};
}

std::vector<std::string> current_row(const std::string& model, const HeatCurrents& hc,
                                     double t_a, double t_s) {
  const Performance perf = performance_metrics(hc, t_a, t_s);
  return {model,
          num(to_attowatt(hc.j_s)),
          num(to_attowatt(hc.j_a)),
          num(to_attowatt(hc.j_phi)),
          num(to_attowatt(hc.j_loss)),
          num(to_attowatt(hc.sum())),
          regime_tag(classify_regime(hc, t_a, t_s)),
          perf.cop ? num(*perf.cop) : "nan"};
}

std::vector<std::string> cmd_steady(const RunConfig& c, const fs::path& out) {
  const DeviceParams p = c.device.params();
  const double t_s = temperature_from_occupation(p.n_s, p.omega_s());
  const double t_a = temperature_from_occupation(p.n_a, p.omega_a());
  const HeatCurrents full = solve_heat_currents(p, c.device.include_parasitic);
  const HeatCurrents lin = heat_currents_linearized(p);
  CsvWriter csv(out / "steady.csv", {"model", "J_s_aW", "J_a_aW", "J_phi_aW", "J_loss_aW",
                                     "sum_aW", "regime", "cop"});
  csv.row(current_row("full", full, t_a, t_s));
  csv.row(current_row("linearized", lin, t_a, t_s));
  return {"steady.csv"};
}

std::vector<std::string> cmd_heat_sweep(const RunConfig& c, const fs::path& out) {
  const DeviceParams p = c.device.params();
  const auto& hs = c.heat_sweep;
  const auto count =
      static_cast<int>(std::floor((hs.T_a_stop_mK - hs.T_a_start_mK) / hs.T_a_step_mK + 1e-9)) + 1;
  std::vector<double> t_a;
  for (int i = 0; i < count; ++i) {
    t_a.push_back(from_millikelvin(hs.T_a_start_mK + hs.T_a_step_mK * i));
  }
  const double t_s = from_millikelvin(hs.T_s_mK);
  spdlog::info("heat-sweep: {} points at T_s = {} mK", t_a.size(), hs.T_s_mK);
  const auto sweep = temperature_sweep(p, t_s, t_a, c.run.threads);
  {
    CsvWriter csv(out / "heat_sweep.csv", {"ratio", "T_a_mK", "T_s_mK", "n_a", "n_s", "J_s_aW",
                                           "J_a_aW", "J_phi_aW", "sum_aW", "regime"});
    for (const auto& pt : sweep) {
      const auto& hc = pt.currents;
      csv.row({num(pt.ratio), num(to_millikelvin(pt.t_a)), num(to_millikelvin(pt.t_s)),
               num(pt.n_a), num(pt.n_s), num(to_attowatt(hc.j_s)), num(to_attowatt(hc.j_a)),
               num(to_attowatt(hc.j_phi)), num(to_attowatt(hc.sum())), regime_tag(pt.regime)});
    }
  }
  const auto boundaries = regime_boundaries(p, t_s, sweep, hs.boundary_tolerance);
  CsvWriter csv(out / "heat_sweep_boundaries.csv", {"below", "above", "ratio"});
  for (const auto& b : boundaries) {
    csv.row({regime_tag(b.below), regime_tag(b.above), fmt::format("{:.6f}", b.ratio)});
  }
  return {"heat_sweep.csv", "heat_sweep_boundaries.csv"};
}

std::vector<std::string> cmd_cop_vs_g(const RunConfig& c, const fs::path& out) {
  const DeviceParams p = c.device.params();
  const auto& cg = c.cop_vs_g;
  std::vector<double> g;
  for (double v : linear_grid(cg.g_start_MHz, cg.g_stop_MHz, cg.g_count)) g.push_back(from_mhz(v));
  const auto rows = cop_vs_g(p, g, from_millikelvin(cg.T_s_mK), cg.reference_ratio, cg.inset,
                             c.run.threads);
  CsvWriter csv(out / "cop_vs_g.csv", {"g_MHz", "crossover_ratio", "eval_ratio", "cop",
                                       "cop_carnot_local", "cop_carnot_reference", "cop_capped"});
  for (const auto& r : rows) {
    csv.row({num(to_mhz(r.g)), num(r.crossover_ratio), num(r.eval_ratio), num(r.cop),
             num(r.cop_carnot_local), num(r.cop_carnot_reference), num(r.cop_capped)});
  }
  return {"cop_vs_g.csv"};
}

void write_spectrum_csv(const fs::path& path, const SpectrumTrace& trace) {
  CsvWriter csv(path, {"detuning_MHz", "psd_W_per_Hz"});
  const double to_w_per_hz = kTwoPi * kHbar * trace.mode_frequency;
  for (std::size_t i = 0; i < trace.detunings.size(); ++i) {
    csv.row({num(to_mhz(trace.detunings[i])), num(to_w_per_hz * trace.psd[i])});
  }
}

std::vector<std::string> cmd_spectrum(const RunConfig& c, const fs::path& out) {
  const DeviceParams p = driven_params(c);
  const DrivenModel model = driven_liouvillian(p, drive_spec(c, p), c.device.include_parasitic);
  const DensityMatrix rho = steady_state(model.liouvillian.total);
  const auto grid = detuning_grid(from_mhz(c.spectrum.half_span_MHz),
                                  static_cast<std::size_t>(c.spectrum.points));
  const SpectrumTrace trace = emission_spectrum(model, rho, c.spectrum.mode, grid, c.run.threads);
  if (!trace.skipped.empty()) {
    spdlog::warn("spectrum: skipped {} singular grid points", trace.skipped.size());
  }
  write_spectrum_csv(out / "spectrum.csv", trace);
  const double inelastic = integrated_power(trace, trace.detunings.back() - trace.detunings.front(),
                                            trace.mode_frequency);
  CsvWriter csv(out / "spectrum_summary.csv",
                {"mode", "mode_GHz", "coherent_power_aW", "inelastic_power_aW", "skipped_points"});
  csv.row({to_string(c.spectrum.mode), fmt::format("{:.9f}", to_ghz(trace.mode_frequency)),
           num(to_attowatt(trace.coherent_power)), num(to_attowatt(inelastic)),
           std::to_string(trace.skipped.size())});
  return {"spectrum.csv", "spectrum_summary.csv"};
}

std::vector<std::string> cmd_transport(const RunConfig& c, const fs::path& out) {
  const DeviceParams p = driven_params(c);
  const auto& t = c.transport;
  std::vector<double> gamma_phi;
  if (t.include_zero) gamma_phi.push_back(0.0);
  for (int i = 0; i < t.count; ++i) {
    const double f = t.count == 1 ? 0.0 : static_cast<double>(i) / (t.count - 1);
    gamma_phi.push_back(
        from_mhz(t.gamma_phi_min_MHz * std::pow(t.gamma_phi_max_MHz / t.gamma_phi_min_MHz, f)));
  }
  TransportOptions options;
  options.span = from_mhz(t.span_MHz);
  options.grid_points = static_cast<std::size_t>(t.grid_points);
  options.include_parasitic = c.device.include_parasitic;
  options.threads = c.run.threads;
  const auto rows = transport_vs_dephasing(p, drive_spec(c, p), gamma_phi, options);
  CsvWriter csv(out / "transport.csv", {"gamma_phi_MHz", "P_s_aW", "J_a_aW"});
  for (const auto& r : rows) {
    csv.row({num(to_mhz(r.gamma_phi)), num(to_attowatt(r.p_s)), num(to_attowatt(r.j_a))});
  }
  return {"transport.csv"};
}

void write_reflection_csv(const fs::path& path, const ReflectionTrace& trace) {
  CsvWriter csv(path, {"freq_GHz", "re_r", "im_r", "power_dBm", "noise_power"});
  for (const auto& s : trace) {
    csv.row({fmt::format("{:.12f}", to_ghz(s.frequency)), num(s.r.real()), num(s.r.imag()),
             s.power > 0.0 ? num(mw_to_dbm(s.power)) : "", num(s.noise_power)});
  }
}

std::vector<double> frequency_grid(double centre, double half_span, int points) {
  std::vector<double> grid;
  for (double d : detuning_grid(half_span, static_cast<std::size_t>(points))) {
    grid.push_back(centre + d);
  }
  return grid;
}

std::vector<std::string> cmd_fit_reflection(const RunConfig& c, const fs::path& out) {
  const auto& rc = c.reflection;
  const DeviceParams p = c.device.params();
  const ModeTruth truth = mode_truth(p, rc.mode);
  const double gamma_phi_pure = from_mhz(rc.gamma_phi_pure_MHz);
  std::vector<std::string> written;

  ReflectionTrace trace;
  if (!rc.input.empty()) {
    trace = read_reflection_csv(rc.input);
  } else {
    const ReflectionModelParams model{truth.omega, truth.gamma, truth.gamma_prime, gamma_phi_pure,
                                      0.0};
    std::vector<double> powers;
    for (double dbm : rc.powers_dBm) powers.push_back(dbm_to_mw(dbm));
    trace = simulate_reflection_trace(
        model, frequency_grid(truth.omega, from_mhz(rc.half_span_MHz), rc.points), powers,
        mhz2_to_angular2(rc.power_factor_MHz2_per_mW), rc.noise_sigma, c.run.seed);
    write_reflection_csv(out / "reflection_input.csv", trace);
    written.push_back("reflection_input.csv");
  }

  const GlobalReflectionFit fit = global_reflection_fit(trace, gamma_phi_pure);
  const auto& m = fit.params;
  const double factor_mhz2 = fit.power_factor / mhz2_to_angular2(1.0);
  std::string report;
  report += fmt::format("source = {}\n", rc.input.empty() ? "synthetic" : rc.input);
  report += fmt::format("mode = {}\n", to_string(rc.mode));
  report += fmt::format("samples = {}\n", trace.size());
  report += fmt::format("omega_GHz = {:.9f} +- {:.3g}\n", to_ghz(m.omega_mode), to_ghz(fit.sigma_omega));
  report += fmt::format("gamma_MHz = {:.6f} +- {:.3g}\n", to_mhz(m.gamma), to_mhz(fit.sigma_gamma));
  report += fmt::format("gamma_prime_MHz = {:.6f} +- {:.3g}\n", to_mhz(m.gamma_prime),
                        to_mhz(fit.sigma_gamma_prime));
  report += fmt::format("gamma_phi_pure_MHz = {:.6f} (fixed)\n", to_mhz(m.gamma_phi_pure));
  report += fmt::format("power_factor_MHz2_per_mW = {:.6g} +- {:.3g}\n", factor_mhz2,
                        fit.sigma_power_factor / mhz2_to_angular2(1.0));
  report += fmt::format("selectivity = {:.4f}\n", selectivity(m.gamma, m.gamma_prime));
  report += fmt::format("rms_residual = {:.3e}\n", fit.rms_residual);
  report += fmt::format("evaluations = {}\n", fit.evaluations);
  write_text(out / "reflection_fit.txt", report);
  written.push_back("reflection_fit.txt");
  return written;
}

std::vector<std::string> cmd_fit_dephasing(const RunConfig& c, const fs::path& out) {
  const auto& dc = c.dephasing;
  const DeviceParams p = c.device.params();
  const ModeTruth truth = mode_truth(p, dc.mode);
  const double rabi = from_mhz(dc.probe_rabi_MHz);
  std::vector<std::string> written;

  ReflectionTrace trace;
  if (!dc.input.empty()) {
    trace = read_reflection_csv(dc.input);
  } else {
    const auto grid = frequency_grid(truth.omega, from_mhz(dc.half_span_MHz), dc.points);
    const double one_mw[] = {1.0};
    for (std::size_t i = 0; i < dc.noise_powers.size(); ++i) {
      const double level = dc.noise_powers[i];
      const ReflectionModelParams model{truth.omega, truth.gamma, truth.gamma_prime,
                                        from_mhz(dc.kappa_MHz * level), 0.0};
      auto part = simulate_reflection_trace(model, grid, one_mw, rabi * rabi, dc.noise_sigma,
                                            c.run.seed + i);
      for (auto& s : part) {
        s.power = 0.0;
        s.noise_power = level;
        trace.push_back(s);
      }
    }
    write_reflection_csv(out / "dephasing_input.csv", trace);
    written.push_back("dephasing_input.csv");
  }

  const ReflectionModelParams fixed{truth.omega, truth.gamma, truth.gamma_prime, 0.0, rabi};
  const DephasingFit fit = dephasing_noise_fit(trace, fixed);
  {
    CsvWriter csv(out / "dephasing_fit.csv", {"noise_power", "omega_GHz", "gamma_phi_MHz",
                                              "sigma_gamma_phi_MHz", "fwhm_MHz"});
    for (const auto& pt : fit.points) {
      ReflectionModelParams m = fixed;
      m.omega_mode = pt.omega_mode;
      m.gamma_phi_pure = std::max(0.0, pt.gamma_phi);
      csv.row({num(pt.noise_power), fmt::format("{:.9f}", to_ghz(pt.omega_mode)),
               num(to_mhz(pt.gamma_phi)), num(to_mhz(pt.sigma_gamma_phi)),
               num(to_mhz(dip_fwhm(m)))});
    }
  }
  written.push_back("dephasing_fit.csv");
  write_text(out / "dephasing_fit.txt",
             fmt::format("mode = {}\nkappa_MHz_per_unit = {}\n", to_string(dc.mode),
                         fit.kappa_phi ? num(to_mhz(*fit.kappa_phi)) : "undefined"));
  written.push_back("dephasing_fit.txt");
  return written;
}

std::vector<std::string> cmd_calibrate_mollow(const RunConfig& c, const fs::path& out) {
  const auto& mc = c.mollow;
  DeviceParams p = c.device.params();
  std::vector<std::string> written;

  SpectrumTrace trace;
  if (!mc.input.empty()) {
    trace = read_spectrum_csv(mc.input, p.omega_s());
  } else {
    DeviceParams q = p;
    q.gamma_phi = 0.0;
    q.dims = HilbertDims::pair(2, Basis::Mode);
    const double rabi = from_mhz(mc.rabi_MHz);
    const DrivenModel model = driven_liouvillian(q, DriveSpec{rabi, q.omega_s(), Mode::S}, true);
    const double half = mc.half_span_MHz > 0.0 ? from_mhz(mc.half_span_MHz) : 2.0 * rabi;
    trace = emission_spectrum(model, steady_state(model.liouvillian.total), Mode::S,
                              detuning_grid(half, static_cast<std::size_t>(mc.points)),
                              c.run.threads);
    if (mc.noise_sigma > 0.0) {
      std::mt19937_64 rng(c.run.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      const double peak = *std::ranges::max_element(trace.psd);
      for (double& v : trace.psd) v += mc.noise_sigma * peak * normal(rng);
    }
    write_spectrum_csv(out / "mollow_input.csv", trace);
    written.push_back("mollow_input.csv");
  }

  const MollowFit fit = mollow_calibration_fit(trace, p, c.run.threads);
  std::string report;
  report += fmt::format("source = {}\n", mc.input.empty() ? "synthetic" : mc.input);
  report += fmt::format("rabi_MHz = {:.6f}\n", to_mhz(fit.rabi));
  report += fmt::format("scale = {:.6f}\n", fit.scale);
  report += fmt::format("side_peak_MHz = {:.6f}\n", to_mhz(fit.side_peak));
  report += fmt::format("rms_residual = {:.3e}\n", fit.rms_residual);
  write_text(out / "mollow_fit.txt", report);
  written.push_back("mollow_fit.txt");
  return written;
}

using Handler = std::vector<std::string> (*)(const RunConfig&, const fs::path&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table = {
      {"eigen", cmd_eigen},
      {"steady", cmd_steady},
      {"heat-sweep", cmd_heat_sweep},
      {"cop-vs-g", cmd_cop_vs_g},
      {"spectrum", cmd_spectrum},
      {"transport", cmd_transport},
      {"fit-reflection", cmd_fit_reflection},
      {"fit-dephasing", cmd_fit_dephasing},
      {"calibrate-mollow", cmd_calibrate_mollow},
  };
  return table;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Header-indexed CSV reader; rows are returned as maps keyed by column.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path,
                                                         const std::vector<std::string>& required) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cli", fmt::format("cannot read '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::Io, "cli", fmt::format("'{}' is empty", path.string()));
  }
  const auto header = split_csv_line(line);
  for (const auto& column : required) {
    if (std::ranges::find(header, column) == header.end()) {
      throw Error(ErrorKind::Io, "cli",
                  fmt::format("'{}' lacks required column {}", path.string(), column));
    }
  }
  std::vector<std::map<std::string, std::string>> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::Io, "cli",
                  fmt::format("'{}' line {}: expected {} cells", path.string(), number, header.size()));
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

double cell_number(const std::map<std::string, std::string>& row, const std::string& key,
                   double fallback) {
  const auto it = row.find(key);
  if (it == row.end() || it->second.empty()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used == it->second.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Io, "cli", fmt::format("column {}: '{}' is not a number", key, it->second));
}

void init_logging() {
  auto logger = spdlog::get(kToolName);
  if (!logger) {
    logger = spdlog::stderr_color_mt(kToolName);
    spdlog::set_default_logger(logger);
  }
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("NOISEFRIDGE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, handler] : handlers()) out.push_back(name);
    return out;
  }();
  return names;
}

bool is_command(const std::string& name) {
  return std::ranges::find(command_names(), name) != command_names().end();
}

std::string usage() {
  std::string text = fmt::format(
      "usage: {} <command> --config <file> [--out <dir>] [--threads N]\n\ncommands:\n", kToolName);
  for (const auto& name : command_names()) text += "  " + name + "\n";
  text += "\nenvironment: NOISEFRIDGE_LOG=trace|debug|info|warn|error|off\n";
  return text;
}

std::vector<std::string> dispatch(const std::string& command, const RunConfig& config,
                                  const fs::path& out_dir) {
  for (const auto& [name, handler] : handlers()) {
    if (name == command) {
      fs::create_directories(out_dir);
      return handler(config, out_dir);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "cli", fmt::format("unknown command '{}'", command));
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cli", fmt::format("cannot read '{}'", path.string()));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "cli", "SHA-256 initialisation failed");
  }
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &length);
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const RunConfig& config,
                    const std::vector<std::string>& outputs, double wall_seconds) {
  nlohmann::ordered_json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = NOISEFRIDGE_VERSION;
  manifest["command"] = command;
  manifest["seed"] = config.run.seed;
  manifest["threads"] = config.run.threads;
  manifest["wall_clock_seconds"] = wall_seconds;
  manifest["config"] = serialize(config);
  auto files = nlohmann::ordered_json::array();
  for (const auto& name : outputs) {
    const fs::path path = out_dir / name;
    files.push_back({{"file", name},
                     {"bytes", fs::file_size(path)},
                     {"sha256", sha256_file(path)}});
  }
  manifest["outputs"] = files;
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

ReflectionTrace read_reflection_csv(const fs::path& path) {
  ReflectionTrace trace;
  for (const auto& row : read_csv(path, {"freq_GHz", "re_r", "im_r"})) {
    ReflectionSample s;
    s.frequency = from_ghz(cell_number(row, "freq_GHz", 0.0));
    s.r = Complex(cell_number(row, "re_r", 0.0), cell_number(row, "im_r", 0.0));
    const double dbm = cell_number(row, "power_dBm", std::nan(""));
    s.power = std::isnan(dbm) ? 0.0 : dbm_to_mw(dbm);
    s.noise_power = cell_number(row, "noise_power", 0.0);
    trace.push_back(s);
  }
  return trace;
}

SpectrumTrace read_spectrum_csv(const fs::path& path, double mode_frequency) {
  SpectrumTrace trace;
  trace.mode_frequency = mode_frequency;
  const double from_w_per_hz = 1.0 / (kTwoPi * kHbar * mode_frequency);
  for (const auto& row : read_csv(path, {"detuning_MHz", "psd_W_per_Hz"})) {
    trace.detunings.push_back(from_mhz(cell_number(row, "detuning_MHz", 0.0)));
    trace.psd.push_back(from_w_per_hz * cell_number(row, "psd_W_per_Hz", 0.0));
  }
  return trace;
}

int run_cli(int argc, const char* const* argv) {
  init_logging();
  if (argc < 2 || !is_command(argv[1])) {
    std::cerr << usage();
    return kExitUsage;
  }
  const std::string command = argv[1];

  CLI::App app{"noisefridge thermal-machine simulator", kToolName};
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--out", out_dir, "output directory (overrides run.output_dir)");
  app.add_option("--threads", threads, "worker threads (overrides run.threads)")
      ->check(CLI::Range(1, 256));
  try {
    app.parse(argc - 1, argv + 1);
  } catch (const CLI::CallForHelp&) {
    std::cout << usage();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << usage();
    return kExitUsage;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    RunConfig config = load_config(config_path);
    if (!out_dir.empty()) config.run.output_dir = out_dir;
    if (threads > 0) config.run.threads = threads;
    const fs::path out = config.run.output_dir;
    spdlog::info("{}: writing to {}", command, out.string());
    const auto outputs = dispatch(command, config, out);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(out, command, config, outputs, wall);
    spdlog::info("{}: done in {:.3f} s", command, wall);
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << fmt::format("{} error [{}]: {}\n", to_string(e.kind()), e.module(), e.what());
    if (e.kind() == ErrorKind::Io) return kExitIo;
    if (e.kind() == ErrorKind::Config) return kExitConfig;
    return kExitModule;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace noisefridge::cli
