#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shatterlab/matrix_core.hpp"

namespace shatterlab {

/// Spectral radius up to mixed forward-backward error: the estimate is within
/// a factor (1 +- eps) of spr(M + E) for a random E with |E| <= delta.
struct SpecrConfig {
  double rho = 1.0;
  double eps = 0.1;
  double delta = 1e-3;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> k_override;

  void validate() const;
};

struct SpecrOutcome {
  double estimate = 0.0;
  std::int64_t k_used = 0;
  std::int64_t nnz_perturbed = 0;
  double perturbation_norm = 0.0;      // |(delta/n) N|
  std::vector<double> log_norm_trace;  // log |A^j b| for j = 1..k
  CsrMatrix perturbed;                 // the realized A = M + (delta/n) N
};

struct PowerNorm {
  double log_norm;            // log |A^k b|, -inf if the iterate vanished
  std::vector<double> trace;  // log |A^j b|, j = 1..k
};

/// log |A^k b| with the iterate rescaled to unit norm at every step.
PowerNorm power_norm(const CsrMatrix& a, const Vector& b, std::int64_t k);

/// ceil(2 (log n / log(n rho)) log(n |M| / delta) / eps).
std::int64_t specr_iterations(std::int64_t n, double rho, double m_norm, double eps, double delta);

/// Samples N at sparsity rho, forms A = M + (delta/n) N, draws a standard complex
/// Gaussian b and returns (|A^k b| / |b|)^(1/k).
/// Requires |M| >= 1 and n rho > 1.
SpecrOutcome specr_estimate(const CsrMatrix& m, const SpecrConfig& cfg);

/// max_j |lambda_j| from the dense eigensolver.
double exact_spectral_radius(const Matrix& a);

}  // namespace shatterlab
