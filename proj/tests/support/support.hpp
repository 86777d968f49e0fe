#pragma once

#include <cstdint>
#include <random>

#include "noisefridge/device.hpp"
#include "noisefridge/operators.hpp"

namespace noisefridge::testing {

inline Operator random_matrix(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Operator m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(normal(rng), normal(rng));
  }
  return m;
}

// Random positive unit-trace state.
inline Operator random_density(Eigen::Index n, std::mt19937_64& rng) {
  const Operator a = random_matrix(n, rng);
  Operator rho = a * a.adjoint();
  return rho / rho.trace();
}

inline double max_abs(const Operator& m) { return m.cwiseAbs().maxCoeff(); }

inline DeviceParams reference_with(HilbertDims dims) {
  DeviceParams p = DeviceParams::reference();
  p.dims = std::move(dims);
  return p;
}

}  // namespace noisefridge::testing
