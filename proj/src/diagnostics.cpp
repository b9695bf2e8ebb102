#include "shatterlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "shatterlab/errors.hpp"
#include "shatterlab/philox.hpp"

namespace shatterlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<double> eigenvalue_condition_numbers(const EigDecomposition& d, double defect_threshold) {
  const auto n = d.right_vectors.cols();
  std::vector<double> kappa(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const double overlap = std::abs(d.left_vectors.col(j).dot(d.right_vectors.col(j)));
    const double norms = d.left_vectors.col(j).norm() * d.right_vectors.col(j).norm();
    kappa[j] = overlap < defect_threshold ? kInf : norms / overlap;
  }
  return kappa;
}

std::vector<double> eigenvalue_condition_numbers(const Matrix& a, double defect_threshold) {
  return eigenvalue_condition_numbers(eig(a), defect_threshold);
}

KappaVBounds kappa_v_bounds(const EigDecomposition& d, double defect_threshold) {
  const auto kappa = eigenvalue_condition_numbers(d, defect_threshold);
  if (std::any_of(kappa.begin(), kappa.end(), [](double k) { return std::isinf(k); })) return {kInf, kInf, kInf};
  const double n = static_cast<double>(kappa.size());
  double lower = 0.0;
  double sumsq = 0.0;
  for (double k : kappa) {
    lower = std::max(lower, k);
    sumsq += k * k;
  }
  const auto sv = singular_values(d.right_vectors);
  const double direct = sv.back() > 0.0 ? sv.front() / sv.back() : kInf;
  return {lower, std::sqrt(n * sumsq), direct};
}

KappaVBounds kappa_v_bounds(const Matrix& a, double defect_threshold) {
  return kappa_v_bounds(eig(a), defect_threshold);
}

double min_eigenvalue_gap(std::span<const Complex> eigenvalues) {
  if (eigenvalues.size() < 2) throw DomainError("minimum eigenvalue gap needs n >= 2");
  double gap = kInf;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i)
    for (std::size_t j = i + 1; j < eigenvalues.size(); ++j) gap = std::min(gap, std::abs(eigenvalues[i] - eigenvalues[j]));
  return gap;
}

double min_eigenvalue_gap(const Matrix& a) {
  require_square_finite(a, "min_eigenvalue_gap");
  if (a.rows() < 2) throw DomainError("minimum eigenvalue gap needs n >= 2");
  const auto d = eig(a);
  return min_eigenvalue_gap(d.eigenvalues);
}

double shifted_sigma(const Matrix& a, Complex z, std::int64_t m) {
  require_square_finite(a, "shifted_sigma");
  const auto n = static_cast<std::int64_t>(a.rows());
  if (m < 0 || m >= n)
    throw DomainError("shifted_sigma: need 0 <= m < n, got m = " + std::to_string(m) + ", n = " + std::to_string(n));
  const Matrix shifted = a - z * Matrix::Identity(n, n);
  const auto sv = singular_values(shifted);
  return sv[static_cast<std::size_t>(n - 1 - m)];
}

double exponential_kappa_bound(double eta, std::int64_t n) {
  if (n < 2) throw DomainError("exponential kappa bound needs n >= 2 (eta is undefined for n = 1)");
  if (!(eta > 0.0)) {
    std::ostringstream os;
    os << "exponential kappa bound needs eta > 0, got " << eta;
    throw DomainError(os.str());
  }
  return static_cast<double>(n) * std::ldexp(1.0, static_cast<int>(std::min<std::int64_t>(n, 4096))) *
         std::pow(eta, 1.0 - static_cast<double>(n));
}

bool weyl_pair_check(const Matrix& a, Complex z) {
  require_square_finite(a, "weyl_pair_check");
  const auto n = a.rows();
  if (n < 2) throw DomainError("weyl_pair_check needs n >= 2");
  const auto d = eig(a);
  std::vector<double> dist(d.eigenvalues.size());
  for (std::size_t j = 0; j < dist.size(); ++j) dist[j] = std::abs(d.eigenvalues[j] - z);
  std::partial_sort(dist.begin(), dist.begin() + 2, dist.end());
  const auto sv = singular_values(a - z * Matrix::Identity(n, n));
  const double norm = operator_norm(a);
  return dist[0] * dist[1] >= sv[n - 1] * sv[n - 2] - 1e-10 * norm * norm;
}

PseudospectralDisk guaranteed_pseudospectral_disk(const Matrix& a, double eps) {
  if (!(eps > 0.0)) throw DomainError("pseudospectral disk needs eps > 0");
  const auto d = eig(a);
  const auto kappa = eigenvalue_condition_numbers(d);
  const auto worst = std::max_element(kappa.begin(), kappa.end()) - kappa.begin();
  if (std::isinf(kappa[worst])) throw DomainError("pseudospectral disk needs a diagonalizable matrix");
  const double eta = min_eigenvalue_gap(d.eigenvalues);
  if (!(eta > 0.0)) throw DomainError("pseudospectral disk needs distinct eigenvalues");
  const double n = static_cast<double>(a.rows());
  return {d.eigenvalues[worst], 0.5 * std::min(eta / n, kappa[worst] * eps), kappa[worst]};
}

Matrix RrefBasis::stacked() const {
  const auto k = diagonal.size();
  Matrix s(k + lower.rows(), k);
  s.topRows(k) = diagonal.asDiagonal();
  s.bottomRows(lower.rows()) = lower;
  return s;
}

Matrix RrefBasis::basis() const {
  const Matrix s = stacked();
  Matrix out(s.rows(), s.cols());
  for (Eigen::Index t = 0; t < s.rows(); ++t) out.row(row_order[t]) = s.row(t);
  return out;
}

RrefBasis rref_basis(const Matrix& b) {
  const auto n = b.rows();
  const auto k = b.cols();
  if (k < 1 || k > n) throw DimensionError("rref_basis: need an n x k matrix with 1 <= k <= n");
  if (!b.allFinite()) throw DomainError("rref_basis: non-finite input");

  Matrix c = b;
  std::vector<std::int64_t> pivot_row(static_cast<std::size_t>(k), -1);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff()) * static_cast<double>(n);

  auto eliminate = [&](Eigen::Index col, Eigen::Index row) {
    c.col(col) /= c(row, col);
    for (Eigen::Index other = 0; other < k; ++other) {
      if (other == col) continue;
      const Complex f = c(row, other);
      if (f != Complex(0.0, 0.0)) c.col(other) -= f * c.col(col);
    }
  };

  for (Eigen::Index t = 0; t < k; ++t) {
    double best = -1.0;
    Eigen::Index bi = -1;
    Eigen::Index bc = -1;
    for (Eigen::Index col = t; col < k; ++col)
      for (Eigen::Index i = 0; i < n; ++i)
        if (!used[i] && std::abs(c(i, col)) > best) {
          best = std::abs(c(i, col));
          bi = i;
          bc = col;
        }
    if (!(best > tol)) throw DomainError("rref_basis: columns are linearly dependent");
    c.col(t).swap(c.col(bc));
    used[bi] = true;
    pivot_row[t] = bi;
    eliminate(t, bi);
  }

  // Complete pivoting alone does not bound every entry by its pivot. Each swap
  // below multiplies |det| of the pivot block by |c(i, j)| > 1, so it terminates.
  for (int sweep = 0; sweep < 64 * static_cast<int>(k) + 64; ++sweep) {
    double worst = 1.0;
    Eigen::Index wi = -1;
    Eigen::Index wj = -1;
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (!used[i] && std::abs(c(i, j)) > worst) {
          worst = std::abs(c(i, j));
          wi = i;
          wj = j;
        }
    if (wi < 0) break;
    used[pivot_row[wj]] = false;
    used[wi] = true;
    pivot_row[wj] = wi;
    eliminate(wj, wi);
  }

  RrefBasis out;
  out.row_order = pivot_row;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!used[i]) out.row_order.push_back(i);
  Matrix s(n, k);
  for (Eigen::Index t = 0; t < n; ++t) s.row(t) = c.row(out.row_order[t]);
  for (Eigen::Index j = 0; j < k; ++j) s.col(j).normalize();
  out.diagonal = s.topRows(k).diagonal();
  out.lower = s.bottomRows(n - k);
  return out;
}

void ConcentrationQuery::validate() const {
  if (v.size() < 1) throw DomainError("concentration query needs a nonempty vector");
  if (std::abs(v.norm() - 1.0) > 1e-12) throw DomainError("concentration query vector must have unit norm");
  if (!(r > 0.0)) throw DomainError("concentration radius r must be positive");
  if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("rho must satisfy 0 < rho <= 1");
  if (trials < 1 || trials > static_cast<std::int64_t>(UINT32_MAX)) throw DomainError("trials must be in [1, 2^32)");
}

namespace {

bool small_ball_hit(const ConcentrationQuery& q, std::int64_t trial) {
  rng::Stream s(q.seed, rng::Domain::Levy, static_cast<std::uint32_t>(trial), 0u);
  Complex x(0.0, 0.0);
  for (Eigen::Index j = 0; j < q.v.size(); ++j) {
    if (s.uniform() < q.rho) x += s.complex_gaussian() * std::conj(q.v[j]);
  }
  return std::abs(x) <= q.r;
}

ConcentrationEstimate binomial_estimate(std::int64_t hits, std::int64_t trials) {
  const double t = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / t;
  return {p, std::sqrt(std::max(p * (1.0 - p), 1.0 / t) / t)};
}

}  // namespace

ConcentrationEstimate levy_concentration(const ConcentrationQuery& q) {
  q.validate();
  std::int64_t hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits)
  for (std::int64_t t = 0; t < q.trials; ++t) hits += small_ball_hit(q, t) ? 1 : 0;
  return binomial_estimate(hits, q.trials);
}

ConcentrationEstimate levy_concentration_serial(const ConcentrationQuery& q) {
  q.validate();
  std::int64_t hits = 0;
  for (std::int64_t t = 0; t < q.trials; ++t) hits += small_ball_hit(q, t) ? 1 : 0;
  return binomial_estimate(hits, q.trials);
}

bool sparse_proximity_check(const Vector& v, double r, double s, double rho, std::int64_t trials,
                            std::uint64_t seed) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("sparse_proximity_check needs 0 < s < 1");
  const auto p = levy_concentration({v, r, rho, trials, seed});
  if (p.estimate - 3.0 * p.std_error < s) return true;
  const double threshold = r * std::sqrt(2.0 / s);
  const auto large = std::count_if(v.data(), v.data() + v.size(), [&](Complex x) { return std::abs(x) >= threshold; });
  return static_cast<double>(large) <= std::log(2.0 / s) / rho;
}

SphereClass comp_incomp_classify(const Vector& v, double r, double s, double rho, std::int64_t trials,
                                 std::uint64_t seed) {
  const auto p = levy_concentration({v, r, rho, trials, seed});
  if (p.estimate - 3.0 * p.std_error >= s) return SphereClass::Compressible;
  if (p.estimate + 3.0 * p.std_error <= s) return SphereClass::Incompressible;
  return SphereClass::Boundary;
}

SpectralReport diagnose(const Matrix& a, double defect_threshold) {
  require_square_finite(a, "diagnose");
  if (a.rows() < 2) throw DomainError("diagnose needs n >= 2");
  const auto d = eig(a);
  SpectralReport r;
  r.eigenvalues = d.eigenvalues;
  r.kappa_j = eigenvalue_condition_numbers(d, defect_threshold);
  r.defective = std::any_of(r.kappa_j.begin(), r.kappa_j.end(), [](double k) { return std::isinf(k); });
  const auto bounds = kappa_v_bounds(d, defect_threshold);
  r.kappa_v_lower = bounds.lower;
  r.kappa_v_upper = bounds.upper;
  r.kappa_v_direct = bounds.direct;
  r.eta = min_eigenvalue_gap(d.eigenvalues);
  const auto sv = singular_values(a);
  r.sigma_n = sv[sv.size() - 1];
  r.sigma_n_minus_1 = sv[sv.size() - 2];
  return r;
}

}  // namespace shatterlab
