#include "noisefridge/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "noisefridge/error.hpp"

namespace noisefridge {
namespace {

constexpr const char* kModule = "lindblad-engine";

// Iterative refinement of a trace-one kernel vector. Residuals are formed in
// extended precision; corrections solve (L - s|rho><vec(I)|) d = -r - s tau rho
// with tau the trace defect, which fixes both L rho = 0 and Tr rho = 1. The
// rank-one term is scaled to the size of L to keep the system well balanced.
Operator refine_kernel(const Eigen::MatrixXcd& l, const Operator& rho0) {
  using Wide = std::complex<long double>;
  using WideMatrix = Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic>;
  using WideVector = Eigen::Matrix<Wide, Eigen::Dynamic, 1>;
  const auto n = rho0.rows();

  const ColumnVector v0 = vectorize(rho0);
  const double scale = l.cwiseAbs().maxCoeff();
  Eigen::MatrixXcd deflated = l;
  for (Eigen::Index i = 0; i < n; ++i) deflated.col(i * n + i) -= scale * v0;
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(deflated);
  if (!(lu.rcond() > 1e-15)) return rho0;

  const WideMatrix wide_l = l.cast<Wide>();
  WideVector v = v0.cast<Wide>();
  for (int iteration = 0; iteration < 3; ++iteration) {
    const WideVector r = wide_l * v;
    Wide trace = 0.0L;
    for (Eigen::Index i = 0; i < n; ++i) trace += v(i * n + i);
    const ColumnVector rhs =
        (-r - (static_cast<long double>(scale) * (1.0L - trace)) * v0.cast<Wide>()).cast<Complex>();
    v += lu.solve(rhs).cast<Wide>();
  }
  Operator rho = unvectorize(v.cast<Complex>());
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace

const char* to_string(Channel channel) noexcept {
  switch (channel) {
    case Channel::S: return "S";
    case Channel::A: return "A";
    case Channel::Phi: return "PHI";
    case Channel::LossS: return "LOSS_S";
    case Channel::LossA: return "LOSS_A";
  }
  return "?";
}

SuperOperator dissipator_superop(const Dissipator& dissipator) {
  const Operator& x = dissipator.jump;
  if (x.rows() != x.cols()) {
    throw Error(ErrorKind::InvalidArgument, kModule, "jump operator must be square");
  }
  if (!(dissipator.rate >= 0.0) || !std::isfinite(dissipator.rate)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "dissipator rate must be finite and >= 0");
  }
  const Operator id = Operator::Identity(x.rows(), x.cols());
  const Operator xdx = x.adjoint() * x;
  SuperOperator d = sandwich_superop(x, x.adjoint());
  d += -0.5 * sandwich_superop(xdx, id);
  d += -0.5 * sandwich_superop(id, xdx);
  return dissipator.rate * d;
}

Liouvillian Liouvillian::assemble(Operator hamiltonian, std::vector<Dissipator> dissipators) {
  Liouvillian l;
  l.total = commutator_superop(hamiltonian);
  for (const auto& d : dissipators) {
    if (d.jump.rows() != hamiltonian.rows()) {
      throw Error(ErrorKind::InvalidArgument, kModule,
                  "jump operator dimension does not match the Hamiltonian");
    }
    if (d.rate > 0.0) l.total += dissipator_superop(d);
  }
  l.hamiltonian = std::move(hamiltonian);
  l.dissipators = std::move(dissipators);
  return l;
}

SuperOperator Liouvillian::channel(Channel channel) const {
  SuperOperator sum = SuperOperator::zero(static_cast<std::size_t>(hamiltonian.rows()));
  for (const auto& d : dissipators) {
    if (d.channel == channel && d.rate > 0.0) sum += dissipator_superop(d);
  }
  return sum;
}

bool Liouvillian::has_channel(Channel channel) const {
  return std::ranges::any_of(dissipators, [&](const Dissipator& d) { return d.channel == channel; });
}

Liouvillian thermal_machine_liouvillian(const DeviceParams& params, bool include_parasitic) {
  params.validate();
  const CollectiveOps ops = collective_ops(params.dims);
  const Operator exchange =
      ops.sigma_s_plus * ops.sigma_a_minus + ops.sigma_a_plus * ops.sigma_s_minus;

  std::vector<Dissipator> dissipators = {
      {ops.sigma_s_minus, params.gamma_s * (params.n_s + 1.0), Channel::S},
      {ops.sigma_s_plus, params.gamma_s * params.n_s, Channel::S},
      {ops.sigma_a_minus, params.gamma_a * (params.n_a + 1.0), Channel::A},
      {ops.sigma_a_plus, params.gamma_a * params.n_a, Channel::A},
      {exchange, 0.5 * params.gamma_phi, Channel::Phi},
  };
  if (include_parasitic) {
    dissipators.push_back({ops.sigma_s_minus, params.gamma_s_prime, Channel::LossS});
    dissipators.push_back({ops.sigma_a_minus, params.gamma_a_prime, Channel::LossA});
  }
  return Liouvillian::assemble(build_hamiltonian(params), std::move(dissipators));
}

DensityMatrix::DensityMatrix(Operator rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() == 0) {
    throw Error(ErrorKind::InvalidArgument, kModule, "density matrix must be square");
  }
  if (!rho_.allFinite()) {
    throw Error(ErrorKind::Numerical, kModule, "density matrix has non-finite entries");
  }
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorKind::Numerical, kModule, "density matrix is not Hermitian");
  }
  if (std::abs(rho_.trace() - Complex(1.0)) > 1e-10) {
    throw Error(ErrorKind::Numerical, kModule,
                fmt::format("density matrix trace {} differs from 1", rho_.trace().real()));
  }
  const Operator hermitian = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> solver(hermitian, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-9) {
    throw Error(ErrorKind::Numerical, kModule,
                fmt::format("density matrix has negative eigenvalue {}",
                            solver.eigenvalues().minCoeff()));
  }
}

DensityMatrix DensityMatrix::basis_state(std::size_t dim, std::size_t k) {
  const auto n = static_cast<Eigen::Index>(dim);
  Operator rho = Operator::Zero(n, n);
  rho(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
  return DensityMatrix(std::move(rho));
}

double trace_distance(const Operator& a, const Operator& b) {
  const Operator diff = a - b;
  Eigen::SelfAdjointEigenSolver<Operator> solver(0.5 * (diff + diff.adjoint()),
                                                 Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

DensityMatrix steady_state(const SuperOperator& generator) {
  const Eigen::MatrixXcd& l = generator.matrix();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(l, true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::Numerical, kModule, "eigendecomposition of the Liouvillian failed");
  }
  const Eigen::VectorXd magnitudes = solver.eigenvalues().cwiseAbs();
  Eigen::Index smallest = 0;
  const double lambda_min = magnitudes.minCoeff(&smallest);
  const double lambda_max = magnitudes.maxCoeff();
  if (lambda_min >= 1e-6 * lambda_max) {
    throw Error(ErrorKind::Numerical, kModule,
                fmt::format("kernel not found: smallest |eigenvalue| {:.3e} vs largest {:.3e}",
                            lambda_min, lambda_max));
  }
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < magnitudes.size(); ++k) {
    if (k != smallest) gap = std::min(gap, magnitudes(k));
  }
  // The absolute floor catches several exact zeros that happen to differ by
  // more than three decades in their rounding noise.
  if (!(gap > 1e3 * lambda_min && gap > 1e-12 * lambda_max)) {
    throw Error(ErrorKind::Numerical, kModule,
                fmt::format("non-unique steady state: spectral gap {:.3e} vs |lambda_min| {:.3e}",
                            gap, lambda_min));
  }

  Operator rho = unvectorize(solver.eigenvectors().col(smallest));
  const Complex trace = rho.trace();
  if (std::abs(trace) < 1e-12 * rho.cwiseAbs().maxCoeff()) {
    throw Error(ErrorKind::Numerical, kModule, "kernel vector has vanishing trace");
  }
  rho /= trace;
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho = refine_kernel(l, rho);

  const double residual = (l * vectorize(rho)).norm();
  if (residual > 1e-8 * l.norm() * vectorize(rho).norm()) {
    throw Error(ErrorKind::Numerical, kModule,
                fmt::format("kernel not found: residual {:.3e}", residual));
  }
  return DensityMatrix(std::move(rho));
}

DensityMatrix evolve(const DensityMatrix& rho0, const SuperOperator& generator, double t_final,
                     double dt) {
  if (!(dt > 0.0) || !(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "evolve needs dt > 0 and t_final >= 0");
  }
  if (generator.hilbert_dim() != rho0.dim()) {
    throw Error(ErrorKind::InvalidArgument, kModule, "state and generator dimensions differ");
  }
  if (t_final == 0.0) return rho0;

  const auto steps = static_cast<long long>(std::ceil(t_final / dt));
  const double h = t_final / static_cast<double>(steps);
  const Eigen::MatrixXcd& l = generator.matrix();
  const auto n = static_cast<Eigen::Index>(rho0.dim());

  ColumnVector v = vectorize(rho0.matrix());
  ColumnVector k1(v.size()), k2(v.size()), k3(v.size()), k4(v.size()), tmp(v.size());
  const Complex trace0 = rho0.matrix().trace();
  const auto trace_of = [n](const ColumnVector& x) {
    Complex t = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) t += x(i * n + i);
    return t;
  };
  const auto unstable = [] {
    return Error(ErrorKind::Numerical, kModule,
                 "RK4 integration unstable (trace drift); use a smaller dt");
  };

  for (long long step = 0; step < steps; ++step) {
    k1.noalias() = l * v;
    tmp = v + (0.5 * h) * k1;
    k2.noalias() = l * tmp;
    tmp = v + (0.5 * h) * k2;
    k3.noalias() = l * tmp;
    tmp = v + h * k3;
    k4.noalias() = l * tmp;
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((step & 1023) == 0 || step + 1 == steps) {
      // A physical state has Frobenius norm <= 1; growth means divergence.
      if (!v.allFinite() || v.norm() > 10.0 || std::abs(trace_of(v) - trace0) > 1e-8) {
        throw unstable();
      }
    }
  }
  Operator rho = unvectorize(v);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho));
}

}  // namespace noisefridge
