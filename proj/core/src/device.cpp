#include "noisefridge/device.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "noisefridge/error.hpp"
#include "noisefridge/units.hpp"

namespace noisefridge {
namespace {

constexpr const char* kModule = "device-model";

[[noreturn]] void fail(const std::string& message) {
  throw Error(ErrorKind::InvalidArgument, kModule, message);
}

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) fail(fmt::format("{} must be finite", name));
}

void require_non_negative(double value, const char* name) {
  require_finite(value, name);
  if (value < 0.0) fail(fmt::format("{} must be non-negative, got {}", name, value));
}

Operator number(const Operator& lowering) { return lowering.adjoint() * lowering; }

}  // namespace

DeviceParams DeviceParams::reference() {
  using namespace units;
  DeviceParams p;
  p.omega = from_ghz(5.866);
  p.g = from_mhz(560.1);
  p.alpha = from_mhz(-133.0);
  p.gamma_s = from_mhz(2.87);
  p.gamma_a = from_mhz(2.83);
  p.gamma_s_prime = from_khz(98.0);
  p.gamma_a_prime = from_khz(97.0);
  p.gamma_phi = from_mhz(0.94);
  p.n_s = occupation_from_temperature(from_millikelvin(177.0), p.omega_s());
  p.n_a = occupation_from_temperature(from_millikelvin(39.0), p.omega_a());
  p.dims = HilbertDims::pair(3, Basis::Mode);
  return p;
}

void DeviceParams::validate() const {
  require_finite(omega, "omega");
  require_finite(g, "g");
  require_finite(alpha, "alpha");
  if (omega <= 0.0) fail("omega must be positive");
  if (g <= 0.0) fail("g must be positive");
  if (omega - g <= 0.0) fail("antisymmetric mode frequency omega - g must be positive");
  require_non_negative(gamma_s, "gamma_s");
  require_non_negative(gamma_a, "gamma_a");
  require_non_negative(gamma_s_prime, "gamma_s_prime");
  require_non_negative(gamma_a_prime, "gamma_a_prime");
  require_non_negative(gamma_phi, "gamma_phi");
  require_non_negative(n_s, "n_s");
  require_non_negative(n_a, "n_a");
  dims.validate();
  if (dims.sites() != 2) fail("the machine has exactly two tensor factors");
}

CollectiveOps collective_ops(const HilbertDims& dims) {
  dims.validate();
  if (dims.sites() != 2) fail("collective operators need exactly two factors");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const Operator first = embed(ladder_op(dims.per_site_levels[0]), 0, dims);
  const Operator second = embed(ladder_op(dims.per_site_levels[1]), 1, dims);

  CollectiveOps ops;
  if (dims.basis == Basis::Site) {
    ops.sigma1_minus = first;
    ops.sigma2_minus = second;
    ops.sigma_s_minus = inv_sqrt2 * (first + second);
    ops.sigma_a_minus = inv_sqrt2 * (first - second);
  } else {
    ops.sigma_s_minus = first;
    ops.sigma_a_minus = second;
    ops.sigma1_minus = inv_sqrt2 * (first + second);
    ops.sigma2_minus = inv_sqrt2 * (first - second);
  }
  ops.sigma_s_plus = ops.sigma_s_minus.adjoint();
  ops.sigma_a_plus = ops.sigma_a_minus.adjoint();
  ops.sigma_z1 = ops.sigma1_minus.adjoint() * ops.sigma1_minus -
                 ops.sigma1_minus * ops.sigma1_minus.adjoint();
  return ops;
}

Operator build_hamiltonian(const DeviceParams& params) { return build_hamiltonian(params, 0.0); }

Operator build_hamiltonian(const DeviceParams& params, double frame) {
  params.validate();
  const CollectiveOps ops = collective_ops(params.dims);
  const Operator& s1 = ops.sigma1_minus;
  const Operator& s2 = ops.sigma2_minus;

  Operator h = (params.omega - frame) * (number(s1) + number(s2));
  const Operator hop = s1.adjoint() * s2;
  h += params.g * (hop + hop.adjoint());

  const bool anharmonic = params.dims.basis == Basis::Site &&
                          std::ranges::any_of(params.dims.per_site_levels,
                                              [](int levels) { return levels > 2; });
  if (anharmonic && params.alpha != 0.0) {
    for (const Operator* s : {&s1, &s2}) {
      const Operator sp = s->adjoint();
      h += 0.5 * params.alpha * (sp * sp * *s * *s);
    }
  }
  // Remove rounding asymmetry from the products above.
  return 0.5 * (h + h.adjoint());
}

std::vector<EigenLevel> eigenstructure(const DeviceParams& params) {
  params.validate();
  if (params.dims.basis != Basis::Site || params.dims.per_site_levels != std::vector<int>{3, 3}) {
    fail("eigenstructure needs 3-level transmons in the site basis");
  }
  const Operator h = build_hamiltonian(params);

  // Symmetry-adapted basis: excitation number N and exchange parity. Product
  // state |n1 n2> has index 3*n1 + n2.
  const auto ket = [](int n1, int n2) {
    ColumnVector v = ColumnVector::Zero(9);
    v(3 * n1 + n2) = 1.0;
    return v;
  };
  const double r = 1.0 / std::sqrt(2.0);
  struct Sector {
    std::vector<ColumnVector> basis;
    std::vector<std::string> labels;  // ascending energy
  };
  const std::array<Sector, 5> sectors = {{
      {{ket(0, 0)}, {"|0>"}},
      {{r * (ket(1, 0) - ket(0, 1))}, {"|a>"}},
      {{r * (ket(1, 0) + ket(0, 1))}, {"|s>"}},
      {{r * (ket(2, 0) - ket(0, 2))}, {"|2->"}},
      {{r * (ket(2, 0) + ket(0, 2)), ket(1, 1)}, {"|2+>_L", "|2+>_U"}},
  }};

  struct Found {
    std::string label;
    double omega;
  };
  std::vector<Found> found;
  for (const auto& sector : sectors) {
    const auto n = static_cast<Eigen::Index>(sector.basis.size());
    Eigen::MatrixXcd projector(9, n);
    for (Eigen::Index k = 0; k < n; ++k) projector.col(k) = sector.basis[static_cast<std::size_t>(k)];
    const Eigen::MatrixXcd block = projector.adjoint() * h * projector;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(block);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::Numerical, kModule, "sector diagonalization failed");
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      found.push_back({sector.labels[static_cast<std::size_t>(k)], solver.eigenvalues()(k)});
    }
  }

  // Every sector eigenvalue must be part of the full spectrum.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> full(h);
  const Eigen::VectorXd spectrum = full.eigenvalues();
  const double scale = spectrum.cwiseAbs().maxCoeff();
  for (const auto& level : found) {
    const double distance = (spectrum.array() - level.omega).abs().minCoeff();
    if (distance > 1e-9 * scale) {
      throw Error(ErrorKind::Numerical, kModule,
                  fmt::format("level {} not found in the full spectrum", level.label));
    }
  }

  // Levels sharing a symmetry sector cannot be told apart when they coincide.
  std::vector<std::string> clashes;
  for (std::size_t i = 0; i < found.size(); ++i) {
    for (std::size_t j = i + 1; j < found.size(); ++j) {
      const bool same_sector = found[i].label.starts_with("|2+>") && found[j].label.starts_with("|2+>");
      if (same_sector && std::abs(found[i].omega - found[j].omega) <= 1e-9 * scale) {
        clashes.push_back(fmt::format("{} and {} coincide at {:.9f} GHz", found[i].label,
                                      found[j].label, units::to_ghz(found[i].omega)));
      }
    }
  }
  if (!clashes.empty()) {
    std::ostringstream os;
    os << "degenerate labeling ambiguity:";
    for (const auto& c : clashes) os << ' ' << c << ';';
    throw Error(ErrorKind::Numerical, kModule, os.str());
  }

  const double w = params.omega;
  const double g = params.g;
  const double a = params.alpha;
  const double root = std::sqrt(16.0 * g * g + a * a);
  const auto closed_form = [&](const std::string& label) {
    if (label == "|0>") return 0.0;
    if (label == "|a>") return w - g;
    if (label == "|s>") return w + g;
    if (label == "|2+>_L") return 0.5 * (4.0 * w + a - root);
    if (label == "|2->") return 2.0 * w + a;
    return 0.5 * (4.0 * w + a + root);
  };

  std::vector<EigenLevel> levels;
  for (const auto& level : found) {
    const double expected = closed_form(level.label);
    if (std::abs(level.omega - expected) > 1e-9 * std::max(std::abs(expected), scale * 1e-3)) {
      throw Error(ErrorKind::Numerical, kModule,
                  fmt::format("numeric and closed-form values of {} disagree", level.label));
    }
    levels.push_back({level.label, units::to_ghz(level.omega), units::to_ghz(expected)});
  }
  std::ranges::sort(levels, {}, &EigenLevel::numeric_ghz);
  return levels;
}

double occupation_from_temperature(double kelvin, double omega) {
  if (!(kelvin > 0.0)) fail("temperature must be positive");
  if (!(omega > 0.0)) fail("frequency must be positive");
  return 1.0 / std::expm1(units::kHbar * omega / (units::kBoltzmann * kelvin));
}

double temperature_from_occupation(double occupation, double omega) {
  if (!(occupation > 0.0)) fail("occupation must be positive");
  if (!(omega > 0.0)) fail("frequency must be positive");
  return units::kHbar * omega / (units::kBoltzmann * std::log1p(1.0 / occupation));
}

double fermi_occupation_from_temperature(double kelvin, double omega) {
  if (!(kelvin > 0.0)) fail("temperature must be positive");
  if (!(omega > 0.0)) fail("frequency must be positive");
  return 1.0 / (std::exp(units::kHbar * omega / (units::kBoltzmann * kelvin)) + 1.0);
}

double temperature_from_fermi_occupation(double occupation, double omega) {
  if (!(occupation > 0.0 && occupation < 0.5)) {
    fail("two-level occupation must lie in (0, 0.5)");
  }
  if (!(omega > 0.0)) fail("frequency must be positive");
  return units::kHbar * omega / (units::kBoltzmann * std::log(1.0 / occupation - 1.0));
}

void NoiseSpec::validate() const {
  if (!(bandwidth > 0.0)) fail("noise bandwidth must be positive");
  require_non_negative(amplitude, "noise amplitude");
  require_non_negative(kappa_phi, "kappa_phi");
  require_finite(center_frequency, "noise center frequency");
}

double effective_dephasing_rate(const NoiseSpec& noise, double g) {
  noise.validate();
  const double gap = 2.0 * g;
  const double lo = noise.center_frequency - 0.5 * noise.bandwidth;
  const double hi = noise.center_frequency + 0.5 * noise.bandwidth;
  if (gap < lo || gap > hi) return 0.0;
  return noise.kappa_phi * noise.amplitude * noise.amplitude;
}

}  // namespace noisefridge
