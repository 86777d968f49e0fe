#include "noisefridge/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "noisefridge/error.hpp"

namespace noisefridge {
namespace {

constexpr const char* kModule = "operator-core";

[[noreturn]] void fail(const std::string& message) {
  throw Error(ErrorKind::InvalidArgument, kModule, message);
}

std::size_t exact_sqrt(std::size_t n) {
  auto root = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  return root * root == n ? root : 0;
}

}  // namespace

const char* to_string(Basis basis) noexcept {
  return basis == Basis::Site ? "site" : "mode";
}

HilbertDims HilbertDims::pair(int levels, Basis basis) {
  HilbertDims dims{{levels, levels}, basis};
  dims.validate();
  return dims;
}

std::size_t HilbertDims::total() const {
  std::size_t n = 1;
  for (int levels : per_site_levels) n *= static_cast<std::size_t>(levels);
  return n;
}

void HilbertDims::validate() const {
  if (per_site_levels.empty()) fail("hilbert space needs at least one factor");
  for (int levels : per_site_levels) {
    if (levels != 2 && levels != 3) {
      fail("unsupported truncation: " + std::to_string(levels) + " levels");
    }
  }
}

Operator ladder_op(int levels) {
  if (levels != 2 && levels != 3) {
    fail("unsupported truncation: " + std::to_string(levels) + " levels");
  }
  Operator a = Operator::Zero(levels, levels);
  for (int k = 1; k < levels; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

Operator embed(const Operator& op, std::size_t site, const HilbertDims& dims) {
  dims.validate();
  if (site >= dims.sites()) {
    fail("site " + std::to_string(site) + " out of range for " +
         std::to_string(dims.sites()) + " factors");
  }
  if (op.rows() != dims.per_site_levels[site] || op.cols() != op.rows()) {
    fail("operator dimension " + std::to_string(op.rows()) + " does not match factor " +
         std::to_string(site) + " with " + std::to_string(dims.per_site_levels[site]) +
         " levels");
  }
  Operator result = Operator::Identity(1, 1);
  for (std::size_t k = 0; k < dims.sites(); ++k) {
    const Operator factor =
        k == site ? op : Operator::Identity(dims.per_site_levels[k], dims.per_site_levels[k]);
    Operator next = Eigen::kroneckerProduct(result, factor);
    result = std::move(next);
  }
  return result;
}

ColumnVector vectorize(const Operator& rho) {
  if (rho.rows() != rho.cols()) fail("vectorize expects a square matrix");
  return Eigen::Map<const ColumnVector>(rho.data(), rho.size());
}

Operator unvectorize(const ColumnVector& v) {
  const std::size_t dim = exact_sqrt(static_cast<std::size_t>(v.size()));
  if (dim == 0) fail("vector length " + std::to_string(v.size()) + " is not a perfect square");
  const auto n = static_cast<Eigen::Index>(dim);
  return Eigen::Map<const Operator>(v.data(), n, n);
}

SuperOperator::SuperOperator(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) fail("superoperator must be square");
  hilbert_dim_ = exact_sqrt(static_cast<std::size_t>(matrix_.rows()));
  if (hilbert_dim_ == 0) {
    fail("superoperator dimension " + std::to_string(matrix_.rows()) +
         " is not a perfect square");
  }
}

SuperOperator SuperOperator::zero(std::size_t hilbert_dim) {
  const auto n = static_cast<Eigen::Index>(hilbert_dim * hilbert_dim);
  return SuperOperator(Eigen::MatrixXcd::Zero(n, n));
}

SuperOperator SuperOperator::identity(std::size_t hilbert_dim) {
  const auto n = static_cast<Eigen::Index>(hilbert_dim * hilbert_dim);
  return SuperOperator(Eigen::MatrixXcd::Identity(n, n));
}

ColumnVector SuperOperator::apply(const ColumnVector& v) const {
  if (v.size() != matrix_.cols()) fail("vector length does not match superoperator");
  return matrix_ * v;
}

Operator SuperOperator::apply(const Operator& rho) const {
  return unvectorize(apply(vectorize(rho)));
}

SuperOperator& SuperOperator::operator+=(const SuperOperator& other) {
  if (other.matrix_.rows() != matrix_.rows()) fail("superoperator dimension mismatch");
  matrix_ += other.matrix_;
  return *this;
}

SuperOperator& SuperOperator::operator*=(Complex factor) {
  matrix_ *= factor;
  return *this;
}

SuperOperator sandwich_superop(const Operator& a, const Operator& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    fail("sandwich_superop needs two square operators of equal dimension");
  }
  return SuperOperator(Eigen::kroneckerProduct(b.transpose(), a).eval());
}

SuperOperator commutator_superop(const Operator& hamiltonian) {
  const Operator id = Operator::Identity(hamiltonian.rows(), hamiltonian.cols());
  return Complex(0.0, -1.0) *
         (sandwich_superop(hamiltonian, id) - sandwich_superop(id, hamiltonian));
}

bool is_hermitian(const Operator& op, double tolerance) {
  if (op.rows() != op.cols()) return false;
  return (op - op.adjoint()).cwiseAbs().maxCoeff() <= tolerance * std::max(1.0, op.cwiseAbs().maxCoeff());
}

}  // namespace noisefridge
