#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "shatterlab/errors.hpp"
#include "shatterlab/matrix_core.hpp"
#include "shatterlab/noise.hpp"

using namespace shatterlab;
using C = Complex;

namespace {

Matrix mat2(C a, C b, C c, C d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST(Csr, RejectsBrokenInvariants) {
  EXPECT_THROW(CsrMatrix(2, {0, 1}, {0}, {C(1)}), DomainError);
  EXPECT_THROW(CsrMatrix(2, {0, 2, 2}, {1, 0}, {C(1), C(1)}), DomainError);
  EXPECT_THROW(CsrMatrix(2, {0, 1, 1}, {2}, {C(1)}), DomainError);
  EXPECT_THROW(CsrMatrix(2, {0, 1, 1}, {0}, {C(NAN)}), DomainError);
  EXPECT_THROW(CsrMatrix(0), DomainError);
}

TEST(Csr, DenseRoundTrip) {
  const Matrix a = mat2(C(1, 1), 0, C(0, -2), 3);
  const CsrMatrix s = CsrMatrix::from_dense(a);
  EXPECT_EQ(s.nnz(), 3);
  EXPECT_EQ(s.to_dense(), a);
}

TEST(Matvec, Examples) {
  const Vector v = oracle::random_unit_vector(5, 1);
  EXPECT_EQ(matvec(CsrMatrix::identity(5), v), v);
  EXPECT_EQ(matvec(CsrMatrix(5), v), Vector::Zero(5));
  const CsrMatrix a = CsrMatrix::from_dense(mat2(C(1, 1), 0, 0, 2));
  Vector y = matvec(a, Vector::Ones(2));
  EXPECT_EQ(y(0), C(1, 1));
  EXPECT_EQ(y(1), C(2, 0));
  EXPECT_THROW(matvec(a, Vector::Ones(3)), DimensionError);
}

TEST(Matvec, MatchesDenseProduct) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CsrMatrix s = sample_sparse_noise({40, 0.2, 1.0, seed});
    const Vector v = oracle::random_unit_vector(40, seed + 100);
    const Matrix d = s.to_dense();
    const double tol = 1e-14 * d.norm() * v.norm();
    EXPECT_LE((matvec(s, v) - d * v).norm(), tol);
    EXPECT_EQ(matvec(s, v), matvec_serial(s, v));
  }
}

TEST(Add, StructuralUnion) {
  const CsrMatrix a = CsrMatrix::from_dense(mat2(1, 0, 0, 2));
  const CsrMatrix b = CsrMatrix::from_dense(mat2(0, 5, 0, C(0, 1)));
  const CsrMatrix c = add(a, b);
  EXPECT_EQ(c.nnz(), 3);
  EXPECT_EQ(c.to_dense(), a.to_dense() + b.to_dense());
  EXPECT_THROW(add(a, CsrMatrix(3)), DimensionError);
}

TEST(OperatorNorm, Examples) {
  EXPECT_NEAR(operator_norm(Matrix::Identity(4, 4)), 1.0, 1e-14);
  EXPECT_EQ(operator_norm(Matrix::Zero(3, 3)), 0.0);
  EXPECT_NEAR(operator_norm(mat2(3, 0, 0, C(0, 4))), 4.0, 1e-14);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = oracle::random_matrix(9, seed);
    EXPECT_NEAR(operator_norm(a), singular_values(a)[0], 1e-10 * singular_values(a)[0]);
  }
}

TEST(SingularValues, Examples) {
  for (double s : singular_values(Matrix::Identity(5, 5))) EXPECT_NEAR(s, 1.0, 1e-14);
  const auto s = singular_values(mat2(0, 2, 0, 0));
  EXPECT_NEAR(s[0], 2.0, 1e-14);
  EXPECT_NEAR(s[1], 0.0, 1e-14);
}

TEST(SingularValues, GramOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix a = oracle::random_matrix(4, seed);
    const auto s = singular_values(a);
    const auto g = oracle::gram_singular_values(a);
    ASSERT_EQ(s.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(s[i], g[i], 1e-8);
    for (std::size_t i = 1; i < 4; ++i) EXPECT_GE(s[i - 1], s[i]);
  }
}

TEST(SingularValues, UnitaryIsFlat) {
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (double s : singular_values(oracle::random_unitary(16, seed))) EXPECT_NEAR(s, 1.0, 1e-10);
}

TEST(Eig, Diagonal) {
  const auto d = eig(mat2(1, 0, 0, 2));
  std::vector<double> re{d.eigenvalues[0].real(), d.eigenvalues[1].real()};
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], 1.0, 1e-14);
  EXPECT_NEAR(re[1], 2.0, 1e-14);
  // V = I up to phase and order
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(d.right_vectors.col(j).cwiseAbs().maxCoeff(), 1.0, 1e-14);
}

TEST(Eig, Rotation) {
  const auto d = eig(mat2(0, 1, -1, 0));
  std::vector<double> im{d.eigenvalues[0].imag(), d.eigenvalues[1].imag()};
  std::sort(im.begin(), im.end());
  EXPECT_NEAR(im[0], -1.0, 1e-12);
  EXPECT_NEAR(im[1], 1.0, 1e-12);
  for (auto z : d.eigenvalues) EXPECT_NEAR(z.real(), 0.0, 1e-12);
}

TEST(Eig, JordanBlockFlagsDefect) {
  const auto d = eig(mat2(0, 1, 0, 0));
  for (auto z : d.eigenvalues) EXPECT_LT(std::abs(z), 1e-7);
  for (int j = 0; j < 2; ++j)
    EXPECT_LT(std::abs(d.left_vectors.col(j).dot(d.right_vectors.col(j))), 1e-7);
}

TEST(Eig, ResidualsOnRandomMatrices) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix a = oracle::random_matrix(20, seed);
    const auto d = eig(a);
    const double na = operator_norm(a);
    EXPECT_LE(d.residual, 1e-8 * na);
    EXPECT_LE(left_residual(a, d), 1e-8 * na);
    for (Eigen::Index j = 0; j < 20; ++j) {
      EXPECT_NEAR(d.right_vectors.col(j).norm(), 1.0, 1e-12);
      EXPECT_NEAR(d.left_vectors.col(j).norm(), 1.0, 1e-12);
      EXPECT_LE((a * d.right_vectors.col(j) - d.eigenvalues[j] * d.right_vectors.col(j)).norm(), 1e-8 * na);
      EXPECT_LE((d.left_vectors.col(j).adjoint() * a - d.eigenvalues[j] * d.left_vectors.col(j).adjoint()).norm(),
                1e-8 * na);
    }
  }
}

TEST(RequireSquareFinite, Rejects) {
  EXPECT_THROW(require_square_finite(Matrix::Zero(2, 3), "t"), DimensionError);
  Matrix a = Matrix::Zero(2, 2);
  a(1, 1) = C(INFINITY, 0);
  EXPECT_THROW(require_square_finite(a, "t"), DomainError);
}
