#include "noisefridge/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "noisefridge/error.hpp"
#include "noisefridge/units.hpp"
#include "parallel.hpp"

namespace noisefridge {
namespace {

constexpr const char* kModule = "spectra";

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorKind::InvalidArgument, kModule, message);
}

// Trapezoid of (x, y) restricted to [lo, hi], with linear interpolation at
// the clipped ends.
double clipped_trapezoid(const std::vector<double>& x, const std::vector<double>& y, double lo,
                         double hi) {
  const auto at = [&](double t) {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    if (it == x.begin()) return y.front();
    if (it == x.end()) return y.back();
    const auto k = static_cast<std::size_t>(it - x.begin());
    const double w = (t - x[k - 1]) / (x[k] - x[k - 1]);
    return (1.0 - w) * y[k - 1] + w * y[k];
  };
  std::vector<double> xs{lo};
  std::vector<double> ys{at(lo)};
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > lo && x[i] < hi) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  }
  xs.push_back(hi);
  ys.push_back(at(hi));
  double sum = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) sum += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
  return sum;
}

}  // namespace

const char* to_string(Mode mode) noexcept { return mode == Mode::S ? "S" : "A"; }

void DriveSpec::validate() const {
  if (!(rabi >= 0.0) || !std::isfinite(rabi)) invalid("rabi frequency must be finite and >= 0");
  if (!std::isfinite(drive_frequency)) invalid("drive frequency must be finite");
}

const Operator& DrivenModel::lowering(Mode mode) const {
  return mode == Mode::S ? ops.sigma_s_minus : ops.sigma_a_minus;
}

double DrivenModel::waveguide_rate(Mode mode) const {
  return mode == Mode::S ? params.gamma_s : params.gamma_a;
}

double DrivenModel::mode_frequency(Mode mode) const {
  return mode == Mode::S ? params.omega_s() : params.omega_a();
}

DrivenModel driven_liouvillian(const DeviceParams& params, const DriveSpec& drive,
                               bool include_parasitic) {
  params.validate();
  drive.validate();
  DrivenModel model;
  model.params = params;
  model.params.n_s = 0.0;
  model.params.n_a = 0.0;
  model.drive = drive;
  model.ops = collective_ops(params.dims);

  const Operator& target = drive.target == Mode::S ? model.ops.sigma_s_minus : model.ops.sigma_a_minus;
  Operator h = build_hamiltonian(params, drive.drive_frequency);
  h += 0.5 * drive.rabi * (target + target.adjoint());

  const CollectiveOps& o = model.ops;
  const Operator exchange = o.sigma_s_plus * o.sigma_a_minus + o.sigma_a_plus * o.sigma_s_minus;
  std::vector<Dissipator> dissipators = {
      {o.sigma_s_minus, params.gamma_s, Channel::S},
      {o.sigma_a_minus, params.gamma_a, Channel::A},
      {exchange, 0.5 * params.gamma_phi, Channel::Phi},
  };
  if (include_parasitic) {
    dissipators.push_back({o.sigma_s_minus, params.gamma_s_prime, Channel::LossS});
    dissipators.push_back({o.sigma_a_minus, params.gamma_a_prime, Channel::LossA});
  }
  model.liouvillian = Liouvillian::assemble(std::move(h), std::move(dissipators));
  return model;
}

std::vector<double> detuning_grid(double half_span, std::size_t count) {
  if (!(half_span > 0.0) || count < 2) invalid("grid needs a positive span and >= 2 points");
  std::vector<double> grid(count);
  const double step = 2.0 * half_span / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = -half_span + step * static_cast<double>(i);
  }
  // Pin the centre exactly when the grid is odd-sized.
  if (count % 2 == 1) grid[count / 2] = 0.0;
  return grid;
}

SpectrumTrace emission_spectrum(const DrivenModel& model, const DensityMatrix& rho_ss, Mode mode,
                                std::span<const double> detunings, int threads) {
  if (!std::ranges::is_sorted(detunings) ||
      std::adjacent_find(detunings.begin(), detunings.end()) != detunings.end()) {
    invalid("detuning grid must be strictly increasing");
  }
  const Eigen::MatrixXcd& l = model.liouvillian.total.matrix();
  const auto n = static_cast<Eigen::Index>(rho_ss.dim());
  if (l.rows() != n * n) invalid("state and Liouvillian dimensions differ");

  const Operator& lower = model.lowering(mode);
  const Operator raise = lower.adjoint();
  const Operator& rho = rho_ss.matrix();
  const Complex mean = rho_ss.expectation(lower);
  const ColumnVector source = vectorize(lower * rho - mean * rho);

  // L - s|rho><vec(I)| has the same action on traceless vectors and no
  // kernel; s matches the scale of L so the system stays balanced.
  const double scale = l.cwiseAbs().maxCoeff();
  Eigen::MatrixXcd deflated = l;
  const ColumnVector rho_vec = scale * vectorize(rho);
  for (Eigen::Index i = 0; i < n; ++i) deflated.col(i * n + i) -= rho_vec;

  // Tr[s+ X] = sum_ij (s+)_ji X_ij = vec(s+^T) . vec(X)
  const ColumnVector probe = vectorize(raise.transpose());
  const double rate = model.waveguide_rate(mode);

  std::vector<double> values(detunings.size(), 0.0);
  std::vector<char> singular(detunings.size(), 0);
  detail::parallel_for(detunings.size(), threads, [&](std::size_t k) {
    Eigen::MatrixXcd shifted = deflated;
    shifted.diagonal().array() -= Complex(0.0, detunings[k]);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
    if (!(lu.rcond() > 1e-14)) {
      singular[k] = 1;
      return;
    }
    const ColumnVector x = lu.solve(-source);
    values[k] = rate * 2.0 * probe.dot(x).real() / units::kTwoPi;
  });

  SpectrumTrace trace;
  trace.mode_frequency = model.mode_frequency(mode);
  trace.coherent_power = units::kHbar * trace.mode_frequency * rate * std::norm(mean);
  for (std::size_t k = 0; k < detunings.size(); ++k) {
    if (singular[k]) {
      trace.skipped.push_back(detunings[k]);
    } else {
      trace.detunings.push_back(detunings[k]);
      trace.psd.push_back(values[k]);
    }
  }
  return trace;
}

double integrated_power(const SpectrumTrace& trace, double span, double omega,
                        bool include_coherent) {
  if (!(span > 0.0)) invalid("integration span must be positive");
  double coherent = include_coherent ? trace.coherent_power : 0.0;
  if (trace.detunings.size() < 2) invalid("trace needs at least two points");
  const double half = 0.5 * span;
  const double slack = 1e-9 * half;
  if (-half < trace.detunings.front() - slack || half > trace.detunings.back() + slack) {
    invalid(fmt::format("span {:.6g} MHz exceeds the grid coverage", units::to_mhz(span)));
  }
  const double lo = std::max(-half, trace.detunings.front());
  const double hi = std::min(half, trace.detunings.back());
  return units::kHbar * omega * clipped_trapezoid(trace.detunings, trace.psd, lo, hi) + coherent;
}

std::vector<TransportPoint> transport_vs_dephasing(const DeviceParams& params,
                                                   const DriveSpec& drive,
                                                   std::span<const double> gamma_phi_values,
                                                   const TransportOptions& options) {
  if (drive.target != Mode::S) invalid("transport needs the drive on the S mode");
  for (double gp : gamma_phi_values) {
    if (!(gp >= 0.0)) invalid("dephasing rates must be >= 0");
  }
  const double span = options.span > 0.0 ? options.span : units::from_mhz(20.0);
  const std::vector<double> grid = detuning_grid(0.5 * span, options.grid_points);

  std::vector<TransportPoint> out(gamma_phi_values.size());
  detail::parallel_for(out.size(), options.threads, [&](std::size_t i) {
    DeviceParams p = params;
    p.gamma_phi = gamma_phi_values[i];
    const DrivenModel model = driven_liouvillian(p, drive, options.include_parasitic);
    const DensityMatrix rho = steady_state(model.liouvillian.total);
    const SpectrumTrace trace = emission_spectrum(model, rho, Mode::S, grid);

    const Operator& a = model.ops.sigma_a_minus;
    const double population = rho.expectation(a.adjoint() * a).real();
    out[i].gamma_phi = p.gamma_phi;
    out[i].j_a = units::kHbar * p.omega_a() * p.gamma_a * population;
    out[i].p_s = integrated_power(trace, span, trace.mode_frequency);
  });
  return out;
}

MollowFit mollow_calibration_fit(const SpectrumTrace& trace, const DeviceParams& params,
                                 int threads) {
  const std::vector<double>& x = trace.detunings;
  const std::vector<double>& y = trace.psd;
  if (x.size() < 5) invalid("trace too short for a triplet fit");

  // Side peak: the largest local maximum at positive detuning that is
  // separated from the centre by a local minimum.
  std::size_t centre = 0;
  while (centre + 1 < x.size() && x[centre + 1] <= 0.0) ++centre;
  std::size_t valley = 0;
  std::size_t peak = 0;
  for (std::size_t i = centre + 1; i + 1 < x.size(); ++i) {
    if (valley == 0 && y[i] < y[i - 1] && y[i] <= y[i + 1]) valley = i;
    if (valley != 0 && i > valley && y[i] > y[i - 1] && y[i] >= y[i + 1] &&
        (peak == 0 || y[i] > y[peak])) {
      peak = i;
    }
  }
  if (peak == 0) {
    throw Error(ErrorKind::Numerical, kModule, "Mollow side peaks not resolved; increase drive");
  }
  const double guess = x[peak];

  DeviceParams p = params;
  p.gamma_phi = 0.0;
  p.dims = HilbertDims::pair(2, Basis::Mode);
  const auto model_trace = [&](double rabi) {
    const DrivenModel model = driven_liouvillian(p, DriveSpec{rabi, p.omega_s(), Mode::S}, true);
    return emission_spectrum(model, steady_state(model.liouvillian.total), Mode::S, x, threads);
  };
  const auto best_scale = [&](const std::vector<double>& m) {
    const double mm = std::inner_product(m.begin(), m.end(), m.begin(), 0.0);
    return mm > 0.0 ? std::inner_product(y.begin(), y.end(), m.begin(), 0.0) / mm : 0.0;
  };
  const auto cost = [&](double rabi) {
    const SpectrumTrace m = model_trace(rabi);
    if (m.psd.size() != y.size()) return std::numeric_limits<double>::infinity();
    const double s = best_scale(m.psd);
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += std::pow(y[i] - s * m.psd[i], 2);
    return sum;
  };

  std::uintmax_t iterations = 200;
  const auto best =
      boost::math::tools::brent_find_minima(cost, 0.7 * guess, 1.3 * guess, 48, iterations);

  MollowFit fit;
  fit.rabi = best.first;
  const SpectrumTrace m = model_trace(fit.rabi);
  fit.scale = best_scale(m.psd);
  const double peak_value = *std::ranges::max_element(y);
  fit.rms_residual = std::sqrt(best.second / static_cast<double>(y.size())) / peak_value;
  // The model side peak lies past the valley found in the data.
  std::size_t model_peak = valley;
  for (std::size_t i = valley; i < m.psd.size(); ++i) {
    if (m.psd[i] > m.psd[model_peak]) model_peak = i;
  }
  fit.side_peak = x[model_peak];
  return fit;
}

double amplitude_to_photon_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) invalid("need at least two (amplitude, photons) points");
  double num = 0.0;
  double den = 0.0;
  for (const auto& [alpha, n] : points) {
    if (!(alpha >= 0.0) || !(n >= 0.0)) invalid("amplitudes and photon numbers must be >= 0");
    const double a2 = alpha * alpha;
    num += n * a2;
    den += a2 * a2;
  }
  if (den == 0.0) invalid("all amplitudes are zero");
  return num / den;
}

}  // namespace noisefridge
