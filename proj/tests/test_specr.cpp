#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "shatterlab/errors.hpp"
#include "shatterlab/experiments.hpp"
#include "shatterlab/philox.hpp"
#include "shatterlab/specr.hpp"

using namespace shatterlab;
using C = Complex;

namespace {

double relative_error(double estimate, double truth) { return std::abs(estimate - truth) / truth; }

}  // namespace

TEST(PowerNorm, ScalarMatrices) {
  const Vector b = oracle::random_unit_vector(6, 1) * 3.0;
  EXPECT_NEAR(power_norm(CsrMatrix::identity(6), b, 5).log_norm, std::log(3.0), 1e-14);
  const Vector u = oracle::random_unit_vector(6, 2);
  const auto two = power_norm(CsrMatrix::identity(6).scaled(2.0), u, 10);
  EXPECT_NEAR(two.log_norm, 10.0 * std::log(2.0), 1e-12);
  ASSERT_EQ(two.trace.size(), 10u);
  EXPECT_NEAR(two.trace[2], 3.0 * std::log(2.0), 1e-12);
  const auto ten = power_norm(CsrMatrix::identity(6).scaled(10.0), u, 400);
  EXPECT_NEAR(ten.log_norm, 921.0340371976183, 1e-9);
  EXPECT_TRUE(std::isfinite(ten.log_norm));
}

TEST(PowerNorm, Errors) {
  EXPECT_THROW(power_norm(CsrMatrix::identity(3), Vector::Zero(3), 2), DomainError);
  EXPECT_THROW(power_norm(CsrMatrix::identity(3), Vector::Ones(3), 0), DomainError);
  EXPECT_THROW(power_norm(CsrMatrix::identity(3), Vector::Ones(4), 1), DimensionError);
}

TEST(ExactSpectralRadius, Examples) {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = -3.0;
  d(2, 2) = C(0, 2);
  EXPECT_NEAR(exact_spectral_radius(d), 3.0, 1e-14);
  Matrix j = Matrix::Zero(2, 2);
  j(0, 1) = 1.0;
  EXPECT_LT(exact_spectral_radius(j), 1e-7);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = oracle::random_matrix(6, seed);
    EXPECT_GE(exact_spectral_radius(a), std::abs(a.trace()) / 6.0 - 1e-12);
  }
}

TEST(Specr, Iterations) {
  // K = 2 log 64 / log 16 = 3
  const double k = 3.0 * std::log(64.0 / 1e-3) / 0.1;
  EXPECT_EQ(specr_iterations(64, 0.25, 1.0, 0.1, 1e-3), static_cast<std::int64_t>(std::ceil(k)));
}

TEST(Specr, ScaledIdentity) {
  const CsrMatrix m = CsrMatrix::identity(64).scaled(2.0);
  SpecrConfig cfg;
  cfg.rho = 0.25;
  cfg.eps = 0.1;
  cfg.delta = 1e-3;
  cfg.seed = 5;
  const auto out = specr_estimate(m, cfg);
  const double spr = exact_spectral_radius(out.perturbed.to_dense());
  EXPECT_LE(relative_error(out.estimate, spr), 0.1);
  EXPECT_EQ(out.k_used, specr_iterations(64, 0.25, 2.0, 0.1, 1e-3));
  EXPECT_EQ(static_cast<std::int64_t>(out.log_norm_trace.size()), out.k_used);
  EXPECT_LE(out.perturbation_norm, cfg.delta);
  EXPECT_EQ(out.nnz_perturbed, out.perturbed.nnz());
}

TEST(Specr, LongRunConverges) {
  const Matrix g = build_family({FamilyKind::GinibreDense, 32, 1.0, "", 17});
  SpecrConfig cfg;
  cfg.rho = 0.25;
  cfg.eps = 0.2;
  cfg.seed = 3;
  const CsrMatrix m = CsrMatrix::from_dense(g);
  cfg.k_override = 10 * specr_iterations(32, cfg.rho, 1.0, cfg.eps, cfg.delta);
  const auto out = specr_estimate(m, cfg);
  EXPECT_LE(relative_error(out.estimate, exact_spectral_radius(out.perturbed.to_dense())), 0.01);
}

TEST(Specr, JordanTracksPerturbedRadius) {
  const std::int64_t n = 32;
  const CsrMatrix m = CsrMatrix::from_dense(build_family({FamilyKind::JordanBlock, n, 1.0, "", 0}));
  SpecrConfig cfg;
  cfg.rho = 0.5;
  cfg.eps = 0.1;
  cfg.delta = 1e-3;
  cfg.seed = 11;
  const auto out = specr_estimate(m, cfg);
  const double spr = exact_spectral_radius(out.perturbed.to_dense());
  // the unperturbed block has |M^k|^(1/k) = 1 for k < n and spr(M) = 0
  EXPECT_LE(relative_error(out.estimate, spr), 0.1);
  EXPECT_GT(spr, 0.5);
  EXPECT_LT(spr, 1.0);
}

TEST(Specr, KOneIsOneMatvec) {
  const CsrMatrix m = CsrMatrix::from_dense(build_family({FamilyKind::GinibreDense, 16, 2.0, "", 2}));
  SpecrConfig cfg;
  cfg.rho = 0.5;
  cfg.seed = 4;
  cfg.k_override = 1;
  const auto out = specr_estimate(m, cfg);
  rng::Stream s(cfg.seed, rng::Domain::GaussVector, 0, 0);
  Vector b(16);
  for (int i = 0; i < 16; ++i) b[i] = s.complex_gaussian();
  const Vector ab = out.perturbed.to_dense() * b;
  EXPECT_NEAR(out.estimate, ab.norm() / b.norm(), 1e-12 * out.estimate);
}

TEST(Specr, Deterministic) {
  const CsrMatrix m = CsrMatrix::identity(40);
  SpecrConfig cfg;
  cfg.rho = 0.3;
  cfg.seed = 8;
  const auto a = specr_estimate(m, cfg);
  const auto b = specr_estimate(m, cfg);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.log_norm_trace, b.log_norm_trace);
  EXPECT_EQ(a.perturbed, b.perturbed);
}

TEST(Specr, Preconditions) {
  SpecrConfig cfg;
  cfg.rho = 0.5;
  EXPECT_THROW(specr_estimate(CsrMatrix::identity(8).scaled(0.5), cfg), DomainError);
  cfg.rho = 0.1;
  EXPECT_THROW(specr_estimate(CsrMatrix::identity(8), cfg), DomainError);
  cfg.rho = 0.5;
  cfg.eps = 1.0;
  EXPECT_THROW(specr_estimate(CsrMatrix::identity(8), cfg), DomainError);
  cfg.eps = 0.1;
  cfg.delta = 0.0;
  EXPECT_THROW(specr_estimate(CsrMatrix::identity(8), cfg), DomainError);
  cfg.delta = 1e-3;
  cfg.k_override = 0;
  EXPECT_THROW(specr_estimate(CsrMatrix::identity(8), cfg), DomainError);
}

TEST(Specr, MedianErrorShrinksWithK) {
  const CsrMatrix m = CsrMatrix::from_dense(build_family({FamilyKind::GinibreDense, 32, 1.0, "", 21}));
  SpecrConfig cfg;
  cfg.rho = 0.25;
  cfg.seed = 1;
  cfg.k_override = 1;
  const CsrMatrix a = specr_estimate(m, cfg).perturbed;
  const double spr = exact_spectral_radius(a.to_dense());
  double prev = INFINITY;
  for (std::int64_t k : {32, 64, 128, 256, 512, 1024}) {
    std::vector<double> errs;
    for (std::uint64_t s = 0; s < 31; ++s) {
      const Vector b = oracle::random_unit_vector(32, 500 + s);
      errs.push_back(relative_error(std::exp(power_norm(a, b, k).log_norm / static_cast<double>(k)), spr));
    }
    std::nth_element(errs.begin(), errs.begin() + 15, errs.end());
    // past the transient the error decays like 1/k
    EXPECT_LT(errs[15], 0.75 * prev) << k;
    prev = errs[15];
  }
}

TEST(Specr, PerturbationNormWithinDelta) {
  for (std::int64_t n : {32, 64})
    for (double rho : {0.1, 0.5})
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SpecrConfig cfg;
        cfg.rho = rho;
        cfg.delta = 1e-2;
        cfg.seed = seed;
        cfg.k_override = 1;
        EXPECT_LE(specr_estimate(CsrMatrix::identity(n), cfg).perturbation_norm, cfg.delta);
      }
}
