#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace noisefridge {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using ColumnVector = Eigen::VectorXcd;

// Which physical degrees of freedom the tensor factors describe.
//   Site: factor 0 is transmon 1 (the dephased one), factor 1 is transmon 2.
//   Mode: factor 0 is the symmetric mode S, factor 1 the antisymmetric mode A.
enum class Basis { Site, Mode };

const char* to_string(Basis basis) noexcept;

struct HilbertDims {
  std::vector<int> per_site_levels;
  Basis basis = Basis::Site;

  // Two factors with the same truncation.
  static HilbertDims pair(int levels, Basis basis);

  std::size_t total() const;
  std::size_t sites() const { return per_site_levels.size(); }
  // Throws unless every factor has 2 or 3 levels.
  void validate() const;

  bool operator==(const HilbertDims&) const = default;
};

/// Truncated lowering operator with sqrt(k) at (k-1, k). Only 2 and 3 levels
/// are supported.
Operator ladder_op(int levels);

/// op on factor `site`, identity elsewhere. Factor 0 is the leftmost Kronecker
/// factor.
Operator embed(const Operator& op, std::size_t site, const HilbertDims& dims);

// Column-stacking vectorization: vec([[a, b], [c, d]]) = (a, c, b, d). With
// this convention vec(A X B) = (B^T kron A) vec(X).
ColumnVector vectorize(const Operator& rho);
Operator unvectorize(const ColumnVector& v);

class SuperOperator {
 public:
  SuperOperator() = default;
  // Throws if the matrix is not square with a perfect-square dimension.
  explicit SuperOperator(Eigen::MatrixXcd matrix);

  static SuperOperator zero(std::size_t hilbert_dim);
  static SuperOperator identity(std::size_t hilbert_dim);

  std::size_t hilbert_dim() const { return hilbert_dim_; }
  std::size_t dim2() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

  ColumnVector apply(const ColumnVector& v) const;
  Operator apply(const Operator& rho) const;

  SuperOperator& operator+=(const SuperOperator& other);
  SuperOperator& operator*=(Complex factor);

  friend SuperOperator operator+(SuperOperator a, const SuperOperator& b) { return a += b; }
  friend SuperOperator operator-(SuperOperator a, const SuperOperator& b) {
    return a += SuperOperator(-b.matrix_);
  }
  friend SuperOperator operator*(Complex factor, SuperOperator a) { return a *= factor; }
  friend SuperOperator operator*(double factor, SuperOperator a) { return a *= Complex(factor); }

 private:
  Eigen::MatrixXcd matrix_;
  std::size_t hilbert_dim_ = 0;
};

/// rho -> A rho B, i.e. B^T kron A under column stacking.
SuperOperator sandwich_superop(const Operator& a, const Operator& b);

/// rho -> -i [H, rho].
SuperOperator commutator_superop(const Operator& hamiltonian);

bool is_hermitian(const Operator& op, double tolerance = 1e-12);

}  // namespace noisefridge
