#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace shatterlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Compressed sparse row matrix of complex doubles, square n x n.
///
/// Invariants: row_offsets has n+1 nondecreasing entries starting at 0;
/// column indices inside each row are strictly increasing and in [0, n);
/// values.size() == col_indices.size() == row_offsets[n]; all values finite.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  explicit CsrMatrix(std::int64_t n);  // empty (nnz = 0)
  CsrMatrix(std::int64_t n, std::vector<std::int64_t> row_offsets,
            std::vector<std::int64_t> col_indices, std::vector<Complex> values);

  static CsrMatrix identity(std::int64_t n);
  /// Keeps every entry that is not exactly zero.
  static CsrMatrix from_dense(const Matrix& a);

  std::int64_t n() const noexcept { return n_; }
  std::int64_t nnz() const noexcept { return static_cast<std::int64_t>(values_.size()); }
  const std::vector<std::int64_t>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<std::int64_t>& col_indices() const noexcept { return col_indices_; }
  const std::vector<Complex>& values() const noexcept { return values_; }

  Matrix to_dense() const;
  CsrMatrix scaled(Complex factor) const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  void validate() const;

  std::int64_t n_ = 0;
  std::vector<std::int64_t> row_offsets_{0};
  std::vector<std::int64_t> col_indices_;
  std::vector<Complex> values_;
};

/// Structural union a + b.
CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b);

/// y = A v. Rows are distributed over OpenMP threads.
Vector matvec(const CsrMatrix& a, const Vector& v);
/// Single-threaded reference for matvec().
Vector matvec_serial(const CsrMatrix& a, const Vector& v);

/// Throws DomainError if any entry is NaN or infinite, or the matrix is not square.
void require_square_finite(const Matrix& a, const char* what);

/// Singular values, sorted nonincreasing.
std::vector<double> singular_values(const Matrix& a);

/// Largest singular value.
double operator_norm(const Matrix& a);

/// Eigenvalues with unit right and left eigenvectors paired by index.
struct EigDecomposition {
  std::vector<Complex> eigenvalues;
  Matrix right_vectors;  // V, unit columns, A v_j = lambda_j v_j
  Matrix left_vectors;   // W, unit columns, w_j^* A = lambda_j w_j^*
  double residual = 0.0; // max_j |A v_j - lambda_j v_j|
  /// True when V could not be inverted and W was recovered per eigenvalue
  /// from the null space of A - lambda_j I.
  bool left_from_nullspace = false;
};

/// Dense eigendecomposition (Hessenberg reduction + shifted QR on the Schur form).
/// Left eigenvectors are the normalized columns of V^{-H}.
/// Throws NonConvergence if the QR iteration stalls.
EigDecomposition eig(const Matrix& a);

/// max_j |w_j^* A - lambda_j w_j^*|.
double left_residual(const Matrix& a, const EigDecomposition& d);

}  // namespace shatterlab
