#include "noisefridge/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

#include "noisefridge/error.hpp"
#include "noisefridge/units.hpp"
#include "parallel.hpp"

namespace noisefridge {
namespace {

constexpr const char* kModule = "thermo";

DeviceParams at_temperatures(DeviceParams params, double t_a, double t_s) {
  params.n_s = occupation_from_temperature(t_s, params.omega_s());
  params.n_a = occupation_from_temperature(t_a, params.omega_a());
  return params;
}

}  // namespace

double HeatCurrents::max_abs() const {
  return std::max({std::abs(j_s), std::abs(j_a), std::abs(j_phi), std::abs(j_loss)});
}

const char* to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::HeatEngine: return "HEAT_ENGINE";
    case Regime::Refrigerator: return "REFRIGERATOR";
    case Regime::Accelerator: return "ACCELERATOR";
    case Regime::None: return "NONE";
  }
  return "NONE";
}

const char* regime_tag(Regime regime) noexcept {
  switch (regime) {
    case Regime::HeatEngine: return "H";
    case Regime::Refrigerator: return "R";
    case Regime::Accelerator: return "A";
    case Regime::None: return "-";
  }
  return "-";
}

double channel_energy_rate(const DensityMatrix& rho, const Operator& hamiltonian,
                           const SuperOperator& channel) {
  const Operator flow = channel.apply(rho.matrix());
  return (hamiltonian * flow).trace().real();
}

HeatCurrents heat_currents(const DensityMatrix& rho, const Liouvillian& generator) {
  for (Channel c : {Channel::S, Channel::A, Channel::Phi}) {
    if (!generator.has_channel(c)) {
      throw Error(ErrorKind::InvalidArgument, kModule,
                  fmt::format("generator has no {} channel", to_string(c)));
    }
  }
  const ColumnVector v = vectorize(rho.matrix());
  const double residual = generator.total.apply(v).norm();
  if (residual > 1e-6 * generator.total.matrix().norm() * v.norm()) {
    throw Error(ErrorKind::Numerical, kModule,
                fmt::format("state is not stationary (residual {:.3e})", residual));
  }

  const Operator& h = generator.hamiltonian;
  const auto current = [&](Channel c) {
    return -units::kHbar * channel_energy_rate(rho, h, generator.channel(c));
  };
  HeatCurrents out;
  out.j_s = current(Channel::S);
  out.j_a = current(Channel::A);
  out.j_phi = current(Channel::Phi);
  out.j_loss = current(Channel::LossS) + current(Channel::LossA);

  // Energy conservation holds up to the stationarity residual of rho.
  const double floor = units::kHbar * h.norm() * residual;
  if (std::abs(out.sum()) > 1e-10 * out.max_abs() + 10.0 * floor) {
    throw Error(ErrorKind::Numerical, kModule,
                fmt::format("first law violated: sum {:.3e} W", out.sum()));
  }
  return out;
}

HeatCurrents heat_currents_linearized(const DeviceParams& params) {
  params.validate();
  const double gs = params.gamma_s;
  const double ga = params.gamma_a;
  const double gp = params.gamma_phi;
  const double denominator = gs * gp + ga * (2.0 * gs + gp);
  if (denominator == 0.0) {
    throw Error(ErrorKind::InvalidArgument, kModule,
                "linearized currents undefined when all coupling rates vanish");
  }
  const double k = ga * gs * gp / denominator;
  const double drive = units::kHbar * (params.n_a - params.n_s) * k;
  HeatCurrents out;
  out.j_s = drive * (params.g + params.omega);
  out.j_a = drive * (params.g - params.omega);
  out.j_phi = -2.0 * params.g * drive;
  return out;
}

HeatCurrents solve_heat_currents(const DeviceParams& params, bool include_parasitic) {
  const Liouvillian lab = thermal_machine_liouvillian(params, include_parasitic);
  // Every jump operator shifts the excitation number by a fixed amount, so
  // the frame rotating at omega has the same steady state and a generator
  // roughly omega/g times smaller in norm, which is what limits the accuracy
  // of the kernel vector.
  const Liouvillian rotating =
      Liouvillian::assemble(build_hamiltonian(params, params.omega), lab.dissipators);
  return heat_currents(steady_state(rotating.total), lab);
}

Regime classify_regime(const HeatCurrents& currents, double t_a, double t_s, double band,
                       std::optional<double> scale) {
  const double reference = scale.value_or(currents.max_abs());
  const double threshold = band * reference;
  for (double j : {currents.j_s, currents.j_a, currents.j_phi}) {
    if (!(std::abs(j) > threshold)) return Regime::None;
  }
  if (currents.j_s < 0.0 && currents.j_a > 0.0 && currents.j_phi > 0.0) {
    return Regime::HeatEngine;
  }
  if (currents.j_s > 0.0 && currents.j_a < 0.0 && currents.j_phi < 0.0) {
    if (t_a < t_s) return Regime::Refrigerator;
    if (t_a > t_s) return Regime::Accelerator;
  }
  return Regime::None;
}

Performance performance_metrics(const HeatCurrents& currents, double t_a, double t_s) {
  Performance out;
  if (t_a > 0.0 && t_s > 0.0 && t_a < t_s) out.cop_carnot = t_a / (t_s - t_a);
  if (classify_regime(currents, t_a, t_s, 0.0) == Regime::Refrigerator) {
    const double denominator = std::abs(currents.j_s) - std::abs(currents.j_a);
    if (denominator > 0.0) out.cop = std::abs(currents.j_a) / denominator;
  }
  return out;
}

std::vector<SweepPoint> temperature_sweep(const DeviceParams& params, double t_s,
                                          std::span<const double> t_a_values, int threads) {
  params.validate();
  if (!(t_s > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "T_s must be positive");
  for (double t : t_a_values) {
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "T_a must be positive");
  }

  std::vector<SweepPoint> points(t_a_values.size());
  detail::parallel_for(points.size(), threads, [&](std::size_t i) {
    const double t_a = t_a_values[i];
    const DeviceParams p = at_temperatures(params, t_a, t_s);
    SweepPoint& point = points[i];
    point.t_a = t_a;
    point.t_s = t_s;
    point.ratio = t_a / t_s;
    point.n_a = p.n_a;
    point.n_s = p.n_s;
    point.currents = solve_heat_currents(p);
  });

  double scale = 0.0;
  for (const auto& point : points) scale = std::max(scale, point.currents.max_abs());
  for (auto& point : points) {
    point.regime = classify_regime(point.currents, point.t_a, point.t_s, 1e-3, scale);
  }
  std::ranges::stable_sort(points, {}, &SweepPoint::ratio);
  return points;
}

std::vector<RegimeBoundary> regime_boundaries(const DeviceParams& params, double t_s,
                                              std::span<const SweepPoint> sweep,
                                              double tolerance) {
  const auto strict = [&](double ratio) {
    const double t_a = ratio * t_s;
    return classify_regime(solve_heat_currents(at_temperatures(params, t_a, t_s)), t_a, t_s, 0.0);
  };

  struct Labeled {
    double ratio;
    Regime regime;
  };
  std::vector<Labeled> labeled;
  for (const auto& point : sweep) {
    const Regime r = classify_regime(point.currents, point.t_a, point.t_s, 0.0);
    if (r != Regime::None) labeled.push_back({point.ratio, r});
  }

  std::vector<RegimeBoundary> boundaries;
  for (std::size_t i = 1; i < labeled.size(); ++i) {
    if (labeled[i].regime == labeled[i - 1].regime) continue;
    double lo = labeled[i - 1].ratio;
    double hi = labeled[i].ratio;
    while (hi - lo > tolerance) {
      const double mid = 0.5 * (lo + hi);
      (strict(mid) == labeled[i - 1].regime ? lo : hi) = mid;
    }
    boundaries.push_back({labeled[i - 1].regime, labeled[i].regime, 0.5 * (lo + hi)});
  }
  return boundaries;
}

std::vector<CopPoint> cop_vs_g(const DeviceParams& params, std::span<const double> g_values,
                               double t_s, double reference_ratio, double inset, int threads) {
  params.validate();
  if (!(reference_ratio > 0.0 && reference_ratio < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "reference ratio must lie in (0, 1)");
  }
  std::vector<CopPoint> rows(g_values.size());
  detail::parallel_for(rows.size(), threads, [&](std::size_t i) {
    DeviceParams p = params;
    p.g = g_values[i];
    p.validate();

    // j_a changes sign at the heat-engine/refrigerator crossover.
    const auto j_a = [&](double ratio) {
      return solve_heat_currents(at_temperatures(p, ratio * t_s, t_s)).j_a;
    };
    const double guess = p.omega_a() / p.omega_s();
    double lo = std::max(1e-3, guess - 0.05);
    double hi = std::min(0.999, guess + 0.05);
    double f_lo = j_a(lo);
    double f_hi = j_a(hi);
    while (f_lo * f_hi > 0.0 && (lo > 1e-3 || hi < 0.999)) {
      lo = std::max(1e-3, lo - 0.1);
      hi = std::min(0.999, hi + 0.1);
      f_lo = j_a(lo);
      f_hi = j_a(hi);
    }
    if (f_lo * f_hi > 0.0) {
      throw Error(ErrorKind::Convergence, kModule,
                  fmt::format("no refrigeration crossover for g/2pi = {} MHz", units::to_mhz(p.g)));
    }
    std::uintmax_t iterations = 100;
    const auto root = boost::math::tools::toms748_solve(
        j_a, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(40), iterations);

    CopPoint& row = rows[i];
    row.g = p.g;
    row.crossover_ratio = 0.5 * (root.first + root.second);
    row.eval_ratio = row.crossover_ratio + inset;
    const double t_a = row.eval_ratio * t_s;
    const HeatCurrents hc = solve_heat_currents(at_temperatures(p, t_a, t_s));
    const Performance perf = performance_metrics(hc, t_a, t_s);
    row.cop = perf.cop.value_or(std::numeric_limits<double>::quiet_NaN());
    row.cop_carnot_local = perf.cop_carnot.value_or(std::numeric_limits<double>::quiet_NaN());
    row.cop_carnot_reference = reference_ratio / (1.0 - reference_ratio);
    row.cop_capped = std::min(row.cop, row.cop_carnot_reference);
  });
  return rows;
}

}  // namespace noisefridge
