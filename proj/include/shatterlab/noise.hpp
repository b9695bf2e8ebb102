#pragma once

#include <cstdint>

#include "shatterlab/matrix_core.hpp"
#include "shatterlab/philox.hpp"

namespace shatterlab {

/// Parameters of the sparse complex-Gaussian perturbation: each of the n^2
/// entries is independently present with probability rho and then equals
/// scale * g with g standard complex Gaussian.
struct NoiseSpec {
  std::int64_t n = 0;
  double rho = 1.0;
  double scale = 1.0;
  std::uint64_t seed = 0;

  /// Throws DomainError naming the violated bound.
  void validate() const;
};

/// K = 2 log(n) / log(n rho), the exponent multiplier in the shattering tail bounds.
struct KParam {
  double value;
};

KParam k_param(std::int64_t n, double rho);

/// n^2 rho.
double expected_nnz(std::int64_t n, double rho);

Complex sample_complex_gaussian(rng::Stream& stream);

/// Draws N_g for the given trial. Row i reads stream (seed, Noise, trial, i):
/// for each column j in order, one uniform decides presence (u < rho) and a
/// present entry consumes one complex Gaussian. Rows are sampled in parallel;
/// the result does not depend on the thread count.
CsrMatrix sample_sparse_noise(const NoiseSpec& spec, std::uint32_t trial = 0);
/// Single-threaded reference for sample_sparse_noise().
CsrMatrix sample_sparse_noise_serial(const NoiseSpec& spec, std::uint32_t trial = 0);

/// M + scale * N_g. Sparse input stays sparse (structural union).
CsrMatrix perturb(const CsrMatrix& m, const NoiseSpec& spec, std::uint32_t trial = 0);
Matrix perturb(const Matrix& m, const NoiseSpec& spec, std::uint32_t trial = 0);

/// Number of rows of the sparse matrix without any stored entry.
std::int64_t empty_row_count(const CsrMatrix& a);

}  // namespace shatterlab
