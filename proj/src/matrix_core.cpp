#include "shatterlab/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "shatterlab/errors.hpp"

namespace shatterlab {

namespace {

bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

CsrMatrix::CsrMatrix(std::int64_t n) : n_(n), row_offsets_(static_cast<std::size_t>(n) + 1, 0) {
  if (n < 1) throw DomainError("sparse matrix side length must be positive, got " + std::to_string(n));
}

CsrMatrix::CsrMatrix(std::int64_t n, std::vector<std::int64_t> row_offsets,
                     std::vector<std::int64_t> col_indices, std::vector<Complex> values)
    : n_(n),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  validate();
}

void CsrMatrix::validate() const {
  if (n_ < 1) throw DomainError("sparse matrix side length must be positive, got " + std::to_string(n_));
  if (row_offsets_.size() != static_cast<std::size_t>(n_) + 1 || row_offsets_.front() != 0)
    throw DomainError("row_offsets must have n+1 entries starting at 0");
  if (col_indices_.size() != values_.size() ||
      static_cast<std::int64_t>(values_.size()) != row_offsets_.back())
    throw DomainError("len(values) and len(col_indices) must equal row_offsets[n]");
  for (std::int64_t i = 0; i < n_; ++i) {
    if (row_offsets_[i + 1] < row_offsets_[i]) throw DomainError("row_offsets must be nondecreasing");
    for (std::int64_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      const auto c = col_indices_[p];
      if (c < 0 || c >= n_) throw DomainError("column index out of range in row " + std::to_string(i));
      if (p > row_offsets_[i] && c <= col_indices_[p - 1])
        throw DomainError("column indices must be strictly increasing in row " + std::to_string(i));
      if (!is_finite(values_[p])) throw DomainError("non-finite value in sparse matrix");
    }
  }
}

CsrMatrix CsrMatrix::identity(std::int64_t n) {
  std::vector<std::int64_t> offsets(static_cast<std::size_t>(n) + 1);
  std::vector<std::int64_t> cols(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i <= n; ++i) offsets[i] = i;
  for (std::int64_t i = 0; i < n; ++i) cols[i] = i;
  return CsrMatrix(n, std::move(offsets), std::move(cols), std::vector<Complex>(n, Complex(1.0, 0.0)));
}

CsrMatrix CsrMatrix::from_dense(const Matrix& a) {
  require_square_finite(a, "from_dense");
  const auto n = static_cast<std::int64_t>(a.rows());
  std::vector<std::int64_t> offsets{0};
  std::vector<std::int64_t> cols;
  std::vector<Complex> vals;
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      if (a(i, j) != Complex(0.0, 0.0)) {
        cols.push_back(j);
        vals.push_back(a(i, j));
      }
    }
    offsets.push_back(static_cast<std::int64_t>(cols.size()));
  }
  return CsrMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

Matrix CsrMatrix::to_dense() const {
  Matrix d = Matrix::Zero(n_, n_);
  for (std::int64_t i = 0; i < n_; ++i)
    for (std::int64_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) d(i, col_indices_[p]) = values_[p];
  return d;
}

CsrMatrix CsrMatrix::scaled(Complex factor) const {
  CsrMatrix out = *this;
  for (auto& v : out.values_) v *= factor;
  return out;
}

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.n() != b.n())
    throw DimensionError("cannot add " + std::to_string(a.n()) + "x" + std::to_string(a.n()) + " and " +
                         std::to_string(b.n()) + "x" + std::to_string(b.n()) + " sparse matrices");
  const auto n = a.n();
  const auto& ao = a.row_offsets();
  const auto& bo = b.row_offsets();
  const auto& ac = a.col_indices();
  const auto& bc = b.col_indices();
  std::vector<std::int64_t> offsets{0};
  std::vector<std::int64_t> cols;
  std::vector<Complex> vals;
  cols.reserve(static_cast<std::size_t>(a.nnz() + b.nnz()));
  vals.reserve(cols.capacity());
  for (std::int64_t i = 0; i < n; ++i) {
    auto p = ao[i];
    auto q = bo[i];
    while (p < ao[i + 1] || q < bo[i + 1]) {
      if (q >= bo[i + 1] || (p < ao[i + 1] && ac[p] < bc[q])) {
        cols.push_back(ac[p]);
        vals.push_back(a.values()[p++]);
      } else if (p >= ao[i + 1] || bc[q] < ac[p]) {
        cols.push_back(bc[q]);
        vals.push_back(b.values()[q++]);
      } else {
        cols.push_back(ac[p]);
        vals.push_back(a.values()[p++] + b.values()[q++]);
      }
    }
    offsets.push_back(static_cast<std::int64_t>(cols.size()));
  }
  return CsrMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

namespace {

void check_matvec_dims(const CsrMatrix& a, const Vector& v) {
  if (v.size() != a.n())
    throw DimensionError("matvec: matrix is " + std::to_string(a.n()) + "x" + std::to_string(a.n()) +
                         " but vector has length " + std::to_string(v.size()));
}

inline Complex row_dot(const CsrMatrix& a, const Vector& v, std::int64_t i) {
  const auto* cols = a.col_indices().data();
  const auto* vals = a.values().data();
  Complex acc(0.0, 0.0);
  for (auto p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) acc += vals[p] * v[cols[p]];
  return acc;
}

}  // namespace

Vector matvec(const CsrMatrix& a, const Vector& v) {
  check_matvec_dims(a, v);
  const auto n = a.n();
  Vector y(n);
#pragma omp parallel for schedule(static) if (a.nnz() > 20000)
  for (std::int64_t i = 0; i < n; ++i) y[i] = row_dot(a, v, i);
  return y;
}

Vector matvec_serial(const CsrMatrix& a, const Vector& v) {
  check_matvec_dims(a, v);
  Vector y(a.n());
  for (std::int64_t i = 0; i < a.n(); ++i) y[i] = row_dot(a, v, i);
  return y;
}

void require_square_finite(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw DimensionError(std::string(what) + ": expected a nonempty square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  if (!a.allFinite()) throw DomainError(std::string(what) + ": matrix has non-finite entries");
}

std::vector<double> singular_values(const Matrix& a) {
  if (a.size() == 0) return {};
  if (!a.allFinite()) throw DomainError("singular_values: matrix has non-finite entries");
  Eigen::BDCSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a).front();
}

EigDecomposition eig(const Matrix& a) {
  require_square_finite(a, "eig");
  const auto n = a.rows();
  const long max_iters = 30 * static_cast<long>(n);

  Eigen::ComplexEigenSolver<Matrix> solver;
  solver.setMaxIterations(max_iters);
  solver.compute(a, true);
  if (solver.info() != Eigen::Success) throw NonConvergence("eig: Schur QR iteration did not converge", max_iters);

  EigDecomposition d;
  d.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  d.right_vectors = solver.eigenvectors();
  for (Eigen::Index j = 0; j < n; ++j) d.right_vectors.col(j).normalize();

  Eigen::FullPivLU<Matrix> lu(d.right_vectors);
  Matrix w;
  if (lu.isInvertible()) {
    w = lu.inverse().adjoint();
  } else {
    // V is singular to working precision, so its inverse carries no information.
    // Take each left eigenvector as the left null vector of A - lambda_j I.
    d.left_from_nullspace = true;
    w.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      Matrix shifted = a - d.eigenvalues[j] * Matrix::Identity(n, n);
      Eigen::JacobiSVD<Matrix> svd(shifted, Eigen::ComputeFullU);
      w.col(j) = svd.matrixU().col(n - 1);
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const double nrm = w.col(j).norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NonConvergence("eig: left eigenvector normalization failed", max_iters);
    w.col(j) /= nrm;
  }
  d.left_vectors = std::move(w);

  double res = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    res = std::max(res, (a * d.right_vectors.col(j) - d.eigenvalues[j] * d.right_vectors.col(j)).norm());
  d.residual = res;
  return d;
}

double left_residual(const Matrix& a, const EigDecomposition& d) {
  double res = 0.0;
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    const Eigen::RowVectorXcd wa = d.left_vectors.col(j).adjoint() * a;
    res = std::max(res, (wa - d.eigenvalues[j] * d.left_vectors.col(j).adjoint()).norm());
  }
  return res;
}

}  // namespace shatterlab
