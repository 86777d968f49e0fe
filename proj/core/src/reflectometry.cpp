#include "noisefridge/reflectometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include <fmt/format.h>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "noisefridge/error.hpp"
#include "noisefridge/units.hpp"

namespace noisefridge {
namespace {

constexpr const char* kModule = "reflectometry";

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorKind::InvalidArgument, kModule, message);
}

// Unvalidated forward model; fits may probe slightly unphysical points.
Complex model_r(double delta, double gamma, double gamma1, double gamma2, double rabi2) {
  const Complex numerator = Complex(0.0, 1.0) * gamma * gamma1 * Complex(delta, -gamma2);
  const double denominator = rabi2 * gamma2 + gamma1 * (delta * delta + gamma2 * gamma2);
  return 1.0 - numerator / denominator;
}

// Eigen's minpack-style functor interface.
struct Residuals {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  int n_inputs = 0;
  int n_values = 0;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> evaluate;

  int inputs() const { return n_inputs; }
  int values() const { return n_values; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    evaluate(x, f);
    return 0;
  }
};

struct LmResult {
  Eigen::VectorXd x;
  Eigen::VectorXd covariance_diagonal;  // scaled coordinates
  double rms = 0.0;
  int evaluations = 0;
};

LmResult least_squares(const Residuals& residuals, Eigen::VectorXd x, int max_evaluations) {
  Eigen::NumericalDiff<Residuals, Eigen::Central> diff(residuals);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals, Eigen::Central>> lm(diff);
  lm.parameters.maxfev = max_evaluations;
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  const auto status = lm.minimize(x);
  using namespace Eigen::LevenbergMarquardtSpace;
  if (status == ImproperInputParameters || status == TooManyFunctionEvaluation ||
      !x.allFinite()) {
    throw Error(ErrorKind::Convergence, kModule,
                fmt::format("least squares did not converge (status {}, {} evaluations)",
                            static_cast<int>(status), lm.nfev));
  }

  LmResult out;
  out.x = x;
  out.evaluations = static_cast<int>(lm.nfev);
  Eigen::VectorXd f(residuals.values());
  residuals(x, f);
  const auto m = static_cast<double>(residuals.values());
  const auto p = static_cast<double>(residuals.inputs());
  out.rms = std::sqrt(f.squaredNorm() / m);
  Eigen::MatrixXd jac(residuals.values(), residuals.inputs());
  diff.df(x, jac);
  const double s2 = m > p ? f.squaredNorm() / (m - p) : 0.0;
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  out.covariance_diagonal = s2 * jtj.completeOrthogonalDecomposition().pseudoInverse().diagonal();
  return out;
}

struct Group {
  std::vector<double> frequency;
  std::vector<Complex> r;
};

std::map<double, Group> group_by(const ReflectionTrace& trace, double ReflectionSample::*key) {
  std::map<double, Group> groups;
  for (const auto& s : trace) {
    Group& g = groups[s.*key];
    g.frequency.push_back(s.frequency);
    g.r.push_back(s.r);
  }
  return groups;
}

struct DipEstimate {
  double omega = 0.0;
  double hwhm = 0.0;
  double depth = 0.0;  // max of 1 - Re r
};

// Resonance from the |r| minimum; width and depth from the Lorentzian 1 - Re r.
DipEstimate estimate_dip(const Group& g) {
  if (g.frequency.size() < 5) invalid("each trace needs at least five samples");
  std::vector<std::size_t> order(g.frequency.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::ranges::sort(order, {}, [&](std::size_t i) { return g.frequency[i]; });

  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i : order) {
    x.push_back(g.frequency[i]);
    y.push_back(1.0 - g.r[i].real());
  }
  std::size_t centre = 0;
  double best = std::abs(g.r[order[0]]);
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (std::abs(g.r[order[k]]) < best) {
      best = std::abs(g.r[order[k]]);
      centre = k;
    }
  }
  DipEstimate out;
  out.omega = x[centre];
  out.depth = y[centre];
  const double half = 0.5 * out.depth;
  const auto crossing = [&](int direction) {
    auto k = static_cast<std::ptrdiff_t>(centre);
    const auto last = static_cast<std::ptrdiff_t>(x.size()) - 1;
    while (k + direction >= 0 && k + direction <= last) {
      const auto next = k + direction;
      if (y[static_cast<std::size_t>(next)] < half) {
        const double y0 = y[static_cast<std::size_t>(k)];
        const double y1 = y[static_cast<std::size_t>(next)];
        const double x0 = x[static_cast<std::size_t>(k)];
        const double x1 = x[static_cast<std::size_t>(next)];
        return x0 + (half - y0) / (y1 - y0) * (x1 - x0);
      }
      k = next;
    }
    return x[static_cast<std::size_t>(k)];
  };
  out.hwhm = 0.5 * (crossing(1) - crossing(-1));
  if (!(out.hwhm > 0.0) || !(out.depth > 0.0)) {
    throw Error(ErrorKind::Numerical, kModule, "no resonance dip found in the trace");
  }
  return out;
}

}  // namespace

void ReflectionModelParams::validate() const {
  for (double v : {omega_mode, gamma, gamma_prime, gamma_phi_pure, rabi}) {
    if (!std::isfinite(v)) invalid("reflection parameters must be finite");
  }
  if (gamma < 0.0 || gamma_prime < 0.0 || gamma_phi_pure < 0.0 || rabi < 0.0) {
    invalid("reflection rates must be >= 0");
  }
  if (!(gamma1() > 0.0)) invalid("total mode linewidth must be positive");
}

Complex reflection_coefficient(double omega, const ReflectionModelParams& m) {
  m.validate();
  return model_r(omega - m.omega_mode, m.gamma, m.gamma1(), m.gamma2(), m.rabi * m.rabi);
}

ReflectionTrace simulate_reflection_trace(const ReflectionModelParams& m,
                                          std::span<const double> frequencies,
                                          std::span<const double> powers, double power_factor,
                                          double noise_sigma, std::uint64_t seed) {
  m.validate();
  if (!std::ranges::is_sorted(frequencies)) invalid("frequency grid must be increasing");
  if (!(noise_sigma >= 0.0)) invalid("noise sigma must be >= 0");
  if (!(power_factor >= 0.0)) invalid("power factor must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ReflectionTrace trace;
  trace.reserve(frequencies.size() * powers.size());
  for (double power : powers) {
    if (!(power >= 0.0)) invalid("probe power must be >= 0");
    const double rabi2 = power_factor * power;
    for (double w : frequencies) {
      Complex r = model_r(w - m.omega_mode, m.gamma, m.gamma1(), m.gamma2(), rabi2);
      if (noise_sigma > 0.0) {
        const double re = normal(rng);
        const double im = normal(rng);
        r += noise_sigma * Complex(re, im);
      }
      trace.push_back({w, r, power, 0.0});
    }
  }
  return trace;
}

GlobalReflectionFit global_reflection_fit(const ReflectionTrace& trace, double gamma_phi_pure,
                                          int max_evaluations) {
  if (!(gamma_phi_pure >= 0.0)) invalid("fixed dephasing must be >= 0");
  const auto groups = group_by(trace, &ReflectionSample::power);
  if (groups.size() < 2) invalid("global fit needs at least two probe powers");

  const DipEstimate low = estimate_dip(groups.begin()->second);
  const DipEstimate high = estimate_dip(groups.rbegin()->second);
  const double gamma2_0 = low.hwhm;
  const double gamma_0 = low.depth * gamma2_0;
  double gamma_prime_0 = 2.0 * (gamma2_0 - gamma_phi_pure) - gamma_0;
  if (gamma_prime_0 <= 0.01 * gamma_0) gamma_prime_0 = 0.03 * gamma_0;
  const double gamma1_0 = gamma_0 + gamma_prime_0;
  const double p_high = groups.rbegin()->first;
  double factor_0 = (high.hwhm * high.hwhm - gamma2_0 * gamma2_0) * gamma1_0 / gamma2_0 / p_high;
  if (!(factor_0 > 0.0)) factor_0 = gamma1_0 * gamma2_0 / p_high;

  const double s = gamma2_0;
  const double omega_0 = low.omega;
  const auto unpack = [&](const Eigen::VectorXd& x) {
    return std::array<double, 4>{omega_0 + s * x(0), s * x(1), s * x(2), factor_0 * x(3)};
  };

  Residuals residuals;
  residuals.n_inputs = 4;
  residuals.n_values = static_cast<int>(2 * trace.size());
  residuals.evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& f) {
    const auto [omega, gamma, gamma_prime, factor] = unpack(x);
    const double gamma1 = gamma + gamma_prime;
    const double gamma2 = 0.5 * gamma1 + gamma_phi_pure;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const ReflectionSample& smp = trace[i];
      const Complex d =
          model_r(smp.frequency - omega, gamma, gamma1, gamma2, factor * smp.power) - smp.r;
      f(static_cast<Eigen::Index>(2 * i)) = d.real();
      f(static_cast<Eigen::Index>(2 * i + 1)) = d.imag();
    }
  };

  Eigen::VectorXd x(4);
  x << 0.0, gamma_0 / s, gamma_prime_0 / s, 1.0;
  const LmResult lm = least_squares(residuals, x, max_evaluations);
  const auto [omega, gamma, gamma_prime, factor] = unpack(lm.x);
  if (!(gamma > 0.0) || !(gamma_prime > 0.0) || !(factor > 0.0)) {
    throw Error(ErrorKind::Convergence, kModule,
                fmt::format("parameter at bound: gamma/2pi = {:.6g} MHz, gamma'/2pi = {:.6g} MHz, "
                            "factor = {:.6g}",
                            units::to_mhz(gamma), units::to_mhz(gamma_prime), factor));
  }

  GlobalReflectionFit out;
  out.params = {omega, gamma, gamma_prime, gamma_phi_pure, 0.0};
  out.power_factor = factor;
  const auto& c = lm.covariance_diagonal;
  out.sigma_omega = s * std::sqrt(std::max(0.0, c(0)));
  out.sigma_gamma = s * std::sqrt(std::max(0.0, c(1)));
  out.sigma_gamma_prime = s * std::sqrt(std::max(0.0, c(2)));
  out.sigma_power_factor = factor_0 * std::sqrt(std::max(0.0, c(3)));
  out.rms_residual = lm.rms;
  out.evaluations = lm.evaluations;
  return out;
}

DephasingFit dephasing_noise_fit(const ReflectionTrace& trace, const ReflectionModelParams& fixed,
                                 bool fit_kappa) {
  fixed.validate();
  const auto groups = group_by(trace, &ReflectionSample::noise_power);
  if (groups.empty()) invalid("no reflection samples to fit");
  const double gamma1 = fixed.gamma1();
  const double s = 0.5 * gamma1;
  const double rabi2 = fixed.rabi * fixed.rabi;

  DephasingFit out;
  for (const auto& [noise_power, group] : groups) {
    const DipEstimate dip = estimate_dip(group);
    const double omega_0 = dip.omega;
    Residuals residuals;
    residuals.n_inputs = 2;
    residuals.n_values = static_cast<int>(2 * group.r.size());
    residuals.evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& f) {
      const double omega = omega_0 + s * x(0);
      const double gamma2 = 0.5 * gamma1 + s * x(1);
      for (std::size_t i = 0; i < group.r.size(); ++i) {
        const Complex d =
            model_r(group.frequency[i] - omega, fixed.gamma, gamma1, gamma2, rabi2) - group.r[i];
        f(static_cast<Eigen::Index>(2 * i)) = d.real();
        f(static_cast<Eigen::Index>(2 * i + 1)) = d.imag();
      }
    };
    Eigen::VectorXd x(2);
    x << 0.0, std::max(0.0, dip.hwhm - 0.5 * gamma1) / s;
    const LmResult lm = least_squares(residuals, x, 1000);
    out.points.push_back({noise_power, omega_0 + s * lm.x(0), s * lm.x(1),
                          s * std::sqrt(std::max(0.0, lm.covariance_diagonal(1)))});
  }

  if (fit_kappa) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : out.points) {
      num += p.noise_power * p.gamma_phi;
      den += p.noise_power * p.noise_power;
    }
    if (den > 0.0) out.kappa_phi = num / den;
  }
  return out;
}

double dip_fwhm(const ReflectionModelParams& m) {
  m.validate();
  const auto absorbed = [&](double delta) {
    return 1.0 - std::norm(model_r(delta, m.gamma, m.gamma1(), m.gamma2(), m.rabi * m.rabi));
  };
  const double peak = absorbed(0.0);
  if (!(peak > 0.0)) throw Error(ErrorKind::Numerical, kModule, "no absorption dip");
  // 1 - |r|^2 decreases monotonically in |delta| whenever gamma <= 2 G2.
  double lo = 0.0;
  double hi = m.gamma2() + m.rabi;
  while (absorbed(hi) > 0.5 * peak) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (absorbed(mid) > 0.5 * peak ? lo : hi) = mid;
  }
  return lo + hi;
}

double selectivity(double gamma, double gamma_prime) {
  if (!(gamma >= 0.0) || !(gamma_prime > 0.0)) {
    invalid("selectivity needs gamma >= 0 and gamma_prime > 0");
  }
  return gamma / gamma_prime;
}

}  // namespace noisefridge
