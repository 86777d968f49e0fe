#pragma once

#include <vector>

#include "noisefridge/device.hpp"
#include "noisefridge/operators.hpp"

namespace noisefridge {

// Physical channel a dissipator exchanges energy with. Heat currents are
// accounted per channel.
enum class Channel { S, A, Phi, LossS, LossA };

const char* to_string(Channel channel) noexcept;

struct Dissipator {
  Operator jump;
  double rate = 0.0;  // rad/s
  Channel channel = Channel::S;
};

/// rate * (X rho X^+ - 1/2 {X^+ X, rho}) in vectorized form.
SuperOperator dissipator_superop(const Dissipator& dissipator);

// A generator together with the pieces it was assembled from, so per-channel
// energy flows can be evaluated against the same Hamiltonian.
struct Liouvillian {
  Operator hamiltonian;
  std::vector<Dissipator> dissipators;
  SuperOperator total;

  static Liouvillian assemble(Operator hamiltonian, std::vector<Dissipator> dissipators);

  /// Sum of the dissipators tagged with `channel` (zero if there are none).
  SuperOperator channel(Channel channel) const;
  bool has_channel(Channel channel) const;
};

/// -i[H, .] + G_s (n_s+1) D[s_s-] + G_s n_s D[s_s+] + G_a (n_a+1) D[s_a-]
///  + G_a n_a D[s_a+] + (G_phi/2) D[s_s+ s_a- + s_a+ s_s-]
/// With include_parasitic, zero-temperature losses G'_s D[s_s-] and
/// G'_a D[s_a-] are added on their own channels.
Liouvillian thermal_machine_liouvillian(const DeviceParams& params, bool include_parasitic = false);

// Hermitian, unit-trace, positive semidefinite (to 1e-9).
class DensityMatrix {
 public:
  /// Validates the invariants; throws on violation.
  explicit DensityMatrix(Operator rho);

  /// |k><k| in the computational basis.
  static DensityMatrix basis_state(std::size_t dim, std::size_t k);

  const Operator& matrix() const { return rho_; }
  std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
  Complex expectation(const Operator& op) const { return (op * rho_).trace(); }

 private:
  Operator rho_;
};

double trace_distance(const Operator& a, const Operator& b);

/// Kernel of L by full dense eigendecomposition, Hermitized and normalized.
/// Throws "non-unique steady state" when the zero eigenvalue is not isolated
/// and "kernel not found" when the residual is too large.
DensityMatrix steady_state(const SuperOperator& generator);

/// Classic fourth-order Runge-Kutta integration of d vec(rho)/dt = L vec(rho)
/// with the largest step <= dt that divides t_final evenly.
DensityMatrix evolve(const DensityMatrix& rho0, const SuperOperator& generator, double t_final,
                     double dt);

}  // namespace noisefridge
