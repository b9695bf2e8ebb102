#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "shatterlab/diagnostics.hpp"
#include "shatterlab/errors.hpp"

using namespace shatterlab;
using C = Complex;

namespace {

Matrix mat2(C a, C b, C c, C d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix diag(std::initializer_list<C> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (C x : d) v(i++) = x;
  return v.asDiagonal();
}

// Index of the entry of `ev` closest to z.
std::size_t nearest(const std::vector<C>& ev, C z) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < ev.size(); ++j)
    if (std::abs(ev[j] - z) < std::abs(ev[best] - z)) best = j;
  return best;
}

}  // namespace

TEST(ConditionNumbers, NormalMatricesAreOne) {
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (double k : eigenvalue_condition_numbers(oracle::random_hermitian(8, seed))) EXPECT_NEAR(k, 1.0, 1e-8);
}

TEST(ConditionNumbers, TwoByTwo) {
  // eigenvalues 0, 1; right (1,0), (1,1)/sqrt2; left (1,-1)/sqrt2, (0,1)
  for (double k : eigenvalue_condition_numbers(mat2(0, 1, 0, 1))) EXPECT_NEAR(k, std::sqrt(2.0), 1e-12);
}

TEST(ConditionNumbers, JordanIsInfinite) {
  for (double k : eigenvalue_condition_numbers(mat2(0, 1, 0, 0))) EXPECT_TRUE(std::isinf(k));
}

TEST(KappaV, Examples) {
  const auto d = kappa_v_bounds(diag({1, 2, 3}));
  EXPECT_NEAR(d.lower, 1.0, 1e-14);
  EXPECT_NEAR(d.upper, 3.0, 1e-14);
  EXPECT_NEAR(d.direct, 1.0, 1e-14);
  const auto b = kappa_v_bounds(mat2(0, 1, 0, 1));
  EXPECT_NEAR(b.lower, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(b.upper, 2.0 * std::sqrt(2.0), 1e-12);
  const auto j = kappa_v_bounds(mat2(0, 1, 0, 0));
  EXPECT_TRUE(std::isinf(j.lower) && std::isinf(j.upper) && std::isinf(j.direct));
}

TEST(KappaV, ScaleBySeven) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = oracle::random_matrix(7, seed);
    const auto x = kappa_v_bounds(a);
    const auto y = kappa_v_bounds(Matrix(7.0 * a));
    EXPECT_NEAR(y.lower / x.lower, 1.0, 1e-10);
    EXPECT_NEAR(y.upper / x.upper, 1.0, 1e-10);
  }
}

TEST(KappaV, Sandwich) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix a = oracle::random_matrix(10, seed);
    const auto b = kappa_v_bounds(a);
    EXPECT_LE(b.lower, b.upper);
    EXPECT_LE(b.upper, 10.0 * b.lower * (1.0 + 1e-12));
  }
}

TEST(Gap, Examples) {
  EXPECT_NEAR(min_eigenvalue_gap(diag({0, 1, 3})), 1.0, 1e-14);
  EXPECT_EQ(min_eigenvalue_gap(diag({5, 5})), 0.0);
  EXPECT_THROW(min_eigenvalue_gap(diag({5})), DomainError);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = eig(oracle::random_matrix(6, seed));
    EXPECT_EQ(min_eigenvalue_gap(d.eigenvalues), oracle::brute_force_gap(d.eigenvalues));
  }
}

TEST(ShiftedSigma, Examples) {
  EXPECT_NEAR(shifted_sigma(diag({1, 2, 4}), 2.0, 0), 0.0, 1e-14);
  for (std::int64_t m = 0; m < 4; ++m) EXPECT_NEAR(shifted_sigma(Matrix::Identity(4, 4), 0.0, m), 1.0, 1e-14);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = oracle::random_matrix(5, seed);
    const C z(0.3, -0.2);
    const auto g = oracle::gram_singular_values(a - z * Matrix::Identity(5, 5));
    EXPECT_NEAR(shifted_sigma(a, z, 1), g[3], 1e-8);
  }
  EXPECT_THROW(shifted_sigma(Matrix::Identity(3, 3), 0.0, 3), DomainError);
}

TEST(ExponentialBound, Examples) {
  EXPECT_DOUBLE_EQ(exponential_kappa_bound(0.5, 2), 16.0);
  EXPECT_DOUBLE_EQ(exponential_kappa_bound(1.0, 3), 24.0);
  EXPECT_THROW(exponential_kappa_bound(1.0, 1), DomainError);
  EXPECT_THROW(exponential_kappa_bound(0.0, 3), DomainError);
}

TEST(ExponentialBound, HoldsForContractions) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Matrix a = oracle::random_matrix(5, seed);
    a /= operator_norm(a);
    const double eta = min_eigenvalue_gap(a);
    ASSERT_GT(eta, 0.0);
    EXPECT_LE(kappa_v_bounds(a).direct, exponential_kappa_bound(eta, 5) * (1.0 + 1e-6));
  }
}

TEST(Weyl, Examples) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g;
    EXPECT_TRUE(weyl_pair_check(oracle::random_matrix(8, seed), C(g(gen), g(gen))));
  }
  // normal matrix: equality
  const Matrix n = diag({C(0.5, 0), C(0, 2), C(-3, 0)});
  EXPECT_TRUE(weyl_pair_check(n, 0.0));
  const auto s = singular_values(n);
  EXPECT_NEAR(0.5 * 2.0, s[2] * s[1], 1e-14);
  // Jordan at z = 1: |lambda - z|^2 = 1, det of [[-1,1],[0,-1]] has modulus 1
  EXPECT_TRUE(weyl_pair_check(mat2(0, 1, 0, 0), 1.0));
  const auto sj = singular_values(mat2(-1, 1, 0, -1));
  EXPECT_NEAR(sj[0] * sj[1], 1.0, 1e-14);
}

TEST(DiskContainment, SampledPoints) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix a = oracle::random_matrix(6, seed);
    const double eps = 1e-3 * (1.0 + static_cast<double>(seed % 7));
    const auto disk = guaranteed_pseudospectral_disk(a, eps);
    for (int p = 0; p < 50; ++p) {
      const double r = disk.radius * std::sqrt(u(gen));
      const double t = 2.0 * M_PI * u(gen);
      const C z = disk.center + std::polar(r, t);
      EXPECT_LE(shifted_sigma(a, z, 0), eps);
    }
  }
}

TEST(Rref, IdentityColumns) {
  const Matrix b = Matrix::Identity(5, 5).leftCols(2);
  const auto r = rref_basis(b);
  EXPECT_EQ(r.row_order, (std::vector<std::int64_t>{0, 1, 2, 3, 4}));
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(r.diagonal(j) - 1.0), 0.0, 1e-14);
  EXPECT_LE(r.lower.norm(), 1e-14);
}

TEST(Rref, ProjectorOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix b = oracle::random_unitary(4, seed).leftCols(2);
    const auto r = rref_basis(b);
    const Matrix s = r.basis();
    const Matrix proj = s * (s.adjoint() * s).inverse() * s.adjoint();
    EXPECT_LE((proj - b * b.adjoint()).norm(), 1e-10);
  }
}

TEST(Rref, PivotBound) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + gen() % 15);
    const auto k = static_cast<Eigen::Index>(1 + gen() % n);
    const Matrix b = oracle::random_unitary(n, 1000 + trial).leftCols(k);
    const auto r = rref_basis(b);
    for (Eigen::Index j = 0; j < k; ++j) EXPECT_GE(std::abs(r.diagonal(j)), 1.0 / std::sqrt(double(n)) - 1e-12);
    const Matrix s = r.stacked();
    for (Eigen::Index j = 0; j < k; ++j) EXPECT_NEAR(s.col(j).norm(), 1.0, 1e-12);
  }
}

TEST(Rref, RankDeficient) {
  Matrix b = Matrix::Zero(4, 2);
  b(0, 0) = 1.0;
  b(0, 1) = 2.0;
  EXPECT_THROW(rref_basis(b), DomainError);
}

TEST(Levy, ClosedForms) {
  Vector e1 = Vector::Zero(16);
  e1(0) = 1.0;
  const Vector flat = Vector::Constant(16, 1.0 / 4.0);
  const std::int64_t trials = 20000;
  for (double rho : {0.1, 0.5, 1.0})
    for (double r : {0.1, 0.5, 1.0, 2.0}) {
      const auto p = levy_concentration({e1, r, rho, trials, 3});
      EXPECT_NEAR(p.estimate, oracle::levy_e1(rho, r), 3.0 * p.std_error) << rho << " " << r;
    }
  for (double r : {0.1, 0.5, 1.0, 2.0}) {
    const auto p = levy_concentration({flat, r, 1.0, trials, 4});
    EXPECT_NEAR(p.estimate, 1.0 - std::exp(-r * r), 3.0 * p.std_error);
  }
  EXPECT_EQ(levy_concentration({flat, 100.0, 0.3, 1000, 5}).estimate, 1.0);
  const auto p = levy_concentration({e1, 1.0, 0.5, trials, 6});
  EXPECT_NEAR(p.estimate, 0.5 + 0.5 * (1.0 - std::exp(-1.0)), 3.0 * p.std_error);
}

TEST(Levy, SerialMatchesParallel) {
  const ConcentrationQuery q{oracle::random_unit_vector(10, 2), 0.4, 0.3, 5000, 9};
  EXPECT_EQ(levy_concentration(q).estimate, levy_concentration_serial(q).estimate);
}

TEST(Levy, Validation) {
  EXPECT_THROW(levy_concentration({Vector::Ones(3), 1.0, 0.5, 10, 0}), DomainError);
  EXPECT_THROW(levy_concentration({oracle::random_unit_vector(3, 1), 0.0, 0.5, 10, 0}), DomainError);
}

TEST(SparseProximity, Examples) {
  Vector e1 = Vector::Zero(8);
  e1(0) = 1.0;
  // p(e1, 0.1) at rho = 0.1 is about 0.901 >= s = 0.5 and only one coordinate is large
  EXPECT_TRUE(sparse_proximity_check(e1, 0.1, 0.5, 0.1, 4000, 1));
  EXPECT_TRUE(sparse_proximity_check(Vector::Constant(8, 1.0 / std::sqrt(8.0)), 0.01, 0.01, 1.0, 4000, 2));
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
    EXPECT_TRUE(sparse_proximity_check(oracle::random_unit_vector(12, seed), 0.05, 0.3, 0.2, 400, seed));
}

TEST(Classify, Examples) {
  Vector e1 = Vector::Zero(8);
  e1(0) = 1.0;
  EXPECT_EQ(comp_incomp_classify(e1, 0.1, 0.5, 0.1, 4000, 1), SphereClass::Compressible);
  const Vector flat = Vector::Constant(8, 1.0 / std::sqrt(8.0));
  EXPECT_EQ(comp_incomp_classify(flat, 0.1, 0.5, 1.0, 4000, 2), SphereClass::Incompressible);
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_NE(comp_incomp_classify(oracle::random_unit_vector(8, seed), 1.0, 1.0, 0.5, 500, seed),
              SphereClass::Compressible);
}

TEST(ScaleInvariance, ConditionNumbersAndGap) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix a = oracle::random_matrix(6, seed);
    const auto d = eig(a);
    const auto k = eigenvalue_condition_numbers(d);
    const double eta = min_eigenvalue_gap(d.eigenvalues);
    for (double sigma : {1e-3, 1.0, 1e3}) {
      const auto ds = eig(Matrix(sigma * a));
      const auto ks = eigenvalue_condition_numbers(ds);
      for (std::size_t j = 0; j < k.size(); ++j) {
        const auto i = nearest(ds.eigenvalues, sigma * d.eigenvalues[j]);
        EXPECT_NEAR(ks[i] / k[j], 1.0, 1e-8);
      }
      EXPECT_NEAR(min_eigenvalue_gap(ds.eigenvalues) / (sigma * eta), 1.0, 1e-8);
    }
  }
}

TEST(Diagnose, Report) {
  const auto r = diagnose(diag({0, 1, 3}));
  EXPECT_NEAR(r.eta, 1.0, 1e-14);
  EXPECT_FALSE(r.defective);
  EXPECT_NEAR(r.sigma_n, 0.0, 1e-14);
  EXPECT_NEAR(r.sigma_n_minus_1, 1.0, 1e-14);
  const auto j = diagnose(mat2(0, 1, 0, 0));
  EXPECT_TRUE(j.defective);
  EXPECT_TRUE(std::isinf(j.kappa_v_upper));
}
