#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "noisefridge/cli/config.hpp"
#include "noisefridge/reflectometry.hpp"
#include "noisefridge/spectra.hpp"

namespace noisefridge::cli {

inline constexpr const char* kToolName = "noisefridge";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitModule = 4,
  kExitIo = 5,
};

const std::vector<std::string>& command_names();
bool is_command(const std::string& name);
std::string usage();

/// Runs one command and writes its artifacts into `out_dir`, returning the
/// file names in the order written. The manifest is not included.
std::vector<std::string> dispatch(const std::string& command, const RunConfig& config,
                                  const std::filesystem::path& out_dir);

/// Writes manifest.json: the resolved config, tool version, wall-clock time
/// and a SHA-256 per output file.
void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const RunConfig& config, const std::vector<std::string>& outputs,
                    double wall_seconds);

/// Full command-line entry point:
///   noisefridge <command> --config <file> [--out <dir>] [--threads N]
int run_cli(int argc, const char* const* argv);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// CSV ingestion. Reflection: freq_GHz, re_r, im_r and optional power_dBm,
// noise_power columns. Spectrum: detuning_MHz, psd_W_per_Hz with the psd
// converted to photon-flux density at `mode_frequency`.
ReflectionTrace read_reflection_csv(const std::filesystem::path& path);
SpectrumTrace read_spectrum_csv(const std::filesystem::path& path, double mode_frequency);

}  // namespace noisefridge::cli
