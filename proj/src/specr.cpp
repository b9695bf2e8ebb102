#include "shatterlab/specr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "shatterlab/errors.hpp"
#include "shatterlab/noise.hpp"
#include "shatterlab/philox.hpp"

namespace shatterlab {

void SpecrConfig::validate() const {
  std::ostringstream os;
  if (!(eps > 0.0 && eps < 1.0)) os << "eps must satisfy 0 < eps < 1, got " << eps;
  else if (!(delta > 0.0 && delta < 1.0)) os << "delta must satisfy 0 < delta < 1, got " << delta;
  else if (!(rho > 0.0 && rho <= 1.0)) os << "rho must satisfy 0 < rho <= 1, got " << rho;
  else if (k_override && *k_override < 1) os << "k must be a positive integer, got " << *k_override;
  const auto msg = os.str();
  if (!msg.empty()) throw DomainError(msg);
}

PowerNorm power_norm(const CsrMatrix& a, const Vector& b, std::int64_t k) {
  if (k < 1) throw DomainError("power_norm needs k >= 1");
  if (b.size() != a.n()) throw DimensionError("power_norm: vector length does not match matrix");
  const double bn = b.norm();
  if (!(bn > 0.0)) throw DomainError("power_norm needs a nonzero start vector");

  PowerNorm out{std::log(bn), {}};
  out.trace.reserve(static_cast<std::size_t>(k));
  Vector x = b / bn;
  for (std::int64_t step = 0; step < k; ++step) {
    Vector y = matvec(a, x);
    const double nrm = y.norm();
    if (!(nrm > 0.0)) {
      out.log_norm = -std::numeric_limits<double>::infinity();
      out.trace.resize(static_cast<std::size_t>(k), out.log_norm);
      return out;
    }
    out.log_norm += std::log(nrm);
    out.trace.push_back(out.log_norm);
    x = y / nrm;
  }
  return out;
}

std::int64_t specr_iterations(std::int64_t n, double rho, double m_norm, double eps, double delta) {
  const double nd = static_cast<double>(n);
  const double k = 2.0 * (std::log(nd) / std::log(nd * rho)) * std::log(nd * m_norm / delta) / eps;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(k)));
}

SpecrOutcome specr_estimate(const CsrMatrix& m, const SpecrConfig& cfg) {
  cfg.validate();
  const auto n = m.n();
  if (!(static_cast<double>(n) * cfg.rho > 1.0)) {
    std::ostringstream os;
    os << "spectral radius estimator needs n*rho > 1, got " << static_cast<double>(n) * cfg.rho;
    throw DomainError(os.str());
  }
  const double m_norm = operator_norm(m.to_dense());
  // the norm comes from an SVD, so a matrix normalised to 1 may land a few ulps short
  if (!(m_norm >= 1.0 - 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << "spectral radius estimator needs |M| >= 1, got " << m_norm;
    throw DomainError(os.str());
  }

  const NoiseSpec spec{n, cfg.rho, 1.0, cfg.seed};
  const CsrMatrix noise = sample_sparse_noise(spec).scaled(cfg.delta / static_cast<double>(n));

  SpecrOutcome out;
  out.perturbed = add(m, noise);
  out.nnz_perturbed = out.perturbed.nnz();
  out.perturbation_norm = operator_norm(noise.to_dense());
  out.k_used = cfg.k_override ? *cfg.k_override : specr_iterations(n, cfg.rho, m_norm, cfg.eps, cfg.delta);

  rng::Stream s(cfg.seed, rng::Domain::GaussVector, 0u, 0u);
  Vector b(n);
  for (std::int64_t i = 0; i < n; ++i) b[i] = s.complex_gaussian();

  auto pn = power_norm(out.perturbed, b, out.k_used);
  out.estimate = std::exp((pn.log_norm - std::log(b.norm())) / static_cast<double>(out.k_used));
  out.log_norm_trace = std::move(pn.trace);
  return out;
}

double exact_spectral_radius(const Matrix& a) {
  const auto d = eig(a);
  double r = 0.0;
  for (const auto& lam : d.eigenvalues) r = std::max(r, std::abs(lam));
  return r;
}

}  // namespace shatterlab
