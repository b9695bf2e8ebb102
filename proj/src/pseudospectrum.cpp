#include "shatterlab/pseudospectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "shatterlab/errors.hpp"
#include "shatterlab/philox.hpp"

namespace shatterlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x <- (T - z)^{-1} x, T upper triangular (column-oriented back substitution).
// dinv holds 1 / (T_jj - z).
void upper_solve(const Matrix& t, const Vector& dinv, Vector& x) {
  const auto n = t.rows();
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    x[j] *= dinv[j];
    if (j > 0) x.head(j).noalias() -= x[j] * t.col(j).head(j);
  }
}

// x <- (T - z)^{-*} x, forward substitution with the conjugate transpose.
void adjoint_solve(const Matrix& t, const Vector& dinv, Vector& x) {
  const auto n = t.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) x[i] -= t.col(i).head(i).dot(x.head(i));  // dot() conjugates its first argument
    x[i] *= std::conj(dinv[i]);
  }
}

}  // namespace

SigmaMinEvaluator::SigmaMinEvaluator(const Matrix& a) : a_(a), eigvec_cond_(kInf) {
  require_square_finite(a, "SigmaMinEvaluator");
  const auto n = a.rows();
  Eigen::ComplexSchur<Matrix> schur(n);
  schur.setMaxIterations(30 * n);
  schur.compute(a, false);
  if (schur.info() != Eigen::Success) throw NonConvergence("complex Schur form did not converge", 30 * n);
  t_ = schur.matrixT();
  eigenvalues_.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) eigenvalues_[i] = t_(i, i);

  try {
    const auto d = eig(a);
    const auto sv = singular_values(d.right_vectors);
    if (sv.back() > 0.0) eigvec_cond_ = sv.front() / sv.back();
  } catch (const NonConvergence&) {
    eigvec_cond_ = kInf;
  }

  rng::Stream s(0x5eed5eedULL, rng::Domain::Auxiliary, 0u, 0u);
  start_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) start_[i] = s.complex_gaussian();
  start_.normalize();
}

double SigmaMinEvaluator::reference(Complex z) const {
  const auto n = a_.rows();
  const auto sv = singular_values(z * Matrix::Identity(n, n) - a_);
  return sv.back();
}

double SigmaMinEvaluator::shifted_norm(Complex c) const {
  const auto n = a_.rows();
  return operator_norm(a_ - c * Matrix::Identity(n, n));
}

double SigmaMinEvaluator::operator()(Complex z) const { return lanczos(z, start_, nullptr); }

double SigmaMinEvaluator::operator()(Complex z, Vector& guess) const {
  if (guess.size() != t_.rows()) guess = start_;
  return lanczos(z, guess, &guess);
}

double SigmaMinEvaluator::lanczos(Complex z, const Vector& start, Vector* ritz) const {
  const auto n = t_.rows();
  if (n == 1) return std::abs(z - t_(0, 0));

  // Lanczos with full reorthogonalization for the largest eigenvalue theta of
  // (T - z)^{-1} (T - z)^{-*}; sigma_min = theta^{-1/2}.
  struct Workspace {
    Matrix q;
    Vector w;
    Vector dinv;
    Eigen::VectorXd alpha, beta;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  };
  thread_local Workspace ws;
  const Eigen::Index max_steps = n;
  if (ws.q.rows() != n) {
    ws.q.resize(n, std::min<Eigen::Index>(max_steps + 1, 24));
    ws.w.resize(n);
    ws.dinv.resize(n);
    ws.alpha.resize(max_steps);
    ws.beta.resize(max_steps);
  }
  auto& q = ws.q;
  auto& w = ws.w;
  auto& alpha = ws.alpha;
  auto& beta = ws.beta;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex d = t_(i, i) - z;
    if (d == Complex(0.0, 0.0)) return 0.0;
    ws.dinv[i] = 1.0 / d;
  }
  q.col(0) = start;
  double theta = 0.0;
  Eigen::Index steps = 0;
  for (Eigen::Index k = 0; k < max_steps; ++k) {
    w = q.col(k);
    adjoint_solve(t_, ws.dinv, w);
    upper_solve(t_, ws.dinv, w);
    alpha[k] = q.col(k).dot(w).real();
    w -= alpha[k] * q.col(k);
    if (k > 0) w -= beta[k - 1] * q.col(k - 1);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j <= k; ++j) w -= q.col(j).dot(w) * q.col(j);
    beta[k] = w.norm();

    const Eigen::Index m = k + 1;
    steps = m;
    double residual;
    if (m == 1) {
      theta = alpha[0];
      residual = beta[0];
    } else {
      ws.tri.computeFromTridiagonal(alpha.head(m), beta.head(m - 1), Eigen::ComputeEigenvectors);
      theta = ws.tri.eigenvalues()[m - 1];
      residual = beta[k] * std::abs(ws.tri.eigenvectors()(m - 1, m - 1));
    }
    if (!std::isfinite(theta)) return 0.0;
    if (residual <= 1e-10 * theta || m == n || !(beta[k] > 0.0)) break;
    if (k + 1 >= q.cols()) q.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(max_steps + 1, 2 * q.cols()));
    q.col(k + 1) = w / beta[k];
  }
  if (!(theta > 0.0)) return 0.0;
  if (ritz) {
    if (steps == 1) {
      *ritz = q.col(0);
    } else {
      *ritz = q.leftCols(steps) * ws.tri.eigenvectors().col(steps - 1).cast<Complex>();
    }
    *ritz += 1e-3 * start_;  // blend in the fixed start vector
    const double nrm = ritz->norm();
    if (nrm > 0.0) *ritz /= nrm;
    else *ritz = start_;
  }
  return 1.0 / std::sqrt(theta);
}

namespace {

void check_grid_args(double radius, std::int64_t resolution) {
  if (resolution < 2) throw DomainError("pseudospectrum grid needs resolution >= 2");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("pseudospectrum grid needs radius > 0");
}

}  // namespace

PseudospectrumGrid pseudospectrum_grid(const Matrix& a, std::vector<double> eps_levels, Complex center,
                                       double radius, std::int64_t resolution) {
  check_grid_args(radius, resolution);
  const SigmaMinEvaluator ev(a);
  PseudospectrumGrid g{center, radius, resolution, {}, std::move(eps_levels)};
  g.sigma_min_field.resize(static_cast<std::size_t>(resolution * resolution));
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t k = 0; k < resolution * resolution; ++k) g.sigma_min_field[k] = ev(g.node(k % resolution, k / resolution));
  return g;
}

PseudospectrumGrid pseudospectrum_grid_serial(const Matrix& a, std::vector<double> eps_levels, Complex center,
                                              double radius, std::int64_t resolution) {
  check_grid_args(radius, resolution);
  const SigmaMinEvaluator ev(a);
  PseudospectrumGrid g{center, radius, resolution, {}, std::move(eps_levels)};
  g.sigma_min_field.resize(static_cast<std::size_t>(resolution * resolution));
  for (std::int64_t k = 0; k < resolution * resolution; ++k)
    g.sigma_min_field[k] = ev.reference(g.node(k % resolution, k / resolution));
  return g;
}

namespace {

struct CellGrid {
  Complex center;
  double radius;
  std::int64_t resolution;
  double h;  // cell side

  Complex block_center(std::int64_t i0, std::int64_t i1, std::int64_t j0, std::int64_t j1) const {
    return {center.real() - radius + 0.5 * static_cast<double>(i0 + i1) * h,
            center.imag() - radius + 0.5 * static_cast<double>(j0 + j1) * h};
  }
  double half_diagonal(std::int64_t wi, std::int64_t wj) const {
    return 0.5 * h * std::hypot(static_cast<double>(wi), static_cast<double>(wj));
  }
};

void check_area_args(const SigmaMinEvaluator& ev, double eps, Complex center, double radius,
                     std::int64_t resolution) {
  if (!(eps > 0.0)) throw DomainError("pseudospectral area needs eps > 0");
  if (resolution < 1) throw DomainError("pseudospectral area needs resolution >= 1");
  const double needed = ev.shifted_norm(center) + eps;
  if (!(radius >= needed)) {
    std::ostringstream os;
    os << "pseudospectral area needs radius >= |A - center| + eps = " << needed << ", got " << radius;
    throw DomainError(os.str());
  }
}

struct Tally {
  std::int64_t inside = 0;
  std::int64_t boundary = 0;
  std::int64_t evaluations = 0;
};

// Recursive halving of the block [i0,i1) x [j0,j1) with Lipschitz pruning.
void refine(const SigmaMinEvaluator& ev, const CellGrid& g, double eps, std::int64_t i0, std::int64_t i1,
            std::int64_t j0, std::int64_t j1, Tally& tally, Vector& guess) {
  const auto wi = i1 - i0;
  const auto wj = j1 - j0;
  const Complex z = g.block_center(i0, i1, j0, j1);
  // Every cell center lies within r of z. A cell is decided without its own
  // evaluation only if it is provably inside or outside by more than its
  // half diagonal, so that it cannot be a boundary cell either.
  const double r = g.half_diagonal(wi - 1, wj - 1);
  const double cell_hd = g.half_diagonal(1, 1);
  const std::int64_t cells = wi * wj;

  // sigma_min(z - A) <= dist(z, spectrum) <= cond(V) sigma_min(z - A).
  double dist = kInf;
  for (const auto& lam : ev.eigenvalues()) dist = std::min(dist, std::abs(z - lam));
  if (dist + r < eps - cell_hd) {
    tally.inside += cells;
    return;
  }
  const double cond = ev.eigvec_condition();
  if (cond < 1e8 && (dist - r) / (cond * (1.0 + 1e-6)) > eps + cell_hd) return;

  if (cells <= 16) {
    for (auto j = j0; j < j1; ++j)
      for (auto i = i0; i < i1; ++i) {
        const double s = ev(g.block_center(i, i + 1, j, j + 1), guess);
        ++tally.evaluations;
        if (s <= eps) ++tally.inside;
        if (std::abs(s - eps) <= cell_hd) ++tally.boundary;
      }
    return;
  }
  const double s = ev(z, guess);
  ++tally.evaluations;
  if (s - r > eps + cell_hd) return;
  if (s + r < eps - cell_hd) {
    tally.inside += cells;
    return;
  }
  if (wi >= wj) {
    const auto mid = i0 + wi / 2;
    refine(ev, g, eps, i0, mid, j0, j1, tally, guess);
    refine(ev, g, eps, mid, i1, j0, j1, tally, guess);
  } else {
    const auto mid = j0 + wj / 2;
    refine(ev, g, eps, i0, i1, j0, mid, tally, guess);
    refine(ev, g, eps, i0, i1, mid, j1, tally, guess);
  }
}

AreaEstimate finish(const CellGrid& g, const Tally& t) {
  const double cell_area = g.h * g.h;
  return {static_cast<double>(t.inside) * cell_area, static_cast<double>(t.boundary) * cell_area, t.inside,
          t.boundary, t.evaluations};
}

}  // namespace

AreaEstimate pseudospectral_area(const SigmaMinEvaluator& ev, double eps, Complex center, double radius,
                                 std::int64_t resolution) {
  check_area_args(ev, eps, center, radius, resolution);
  const CellGrid g{center, radius, resolution, 2.0 * radius / static_cast<double>(resolution)};

  // Fixed tiling so the tasks, and therefore the sums, do not depend on threads.
  const std::int64_t tiles = std::min<std::int64_t>(8, resolution);
  std::vector<Tally> partial(static_cast<std::size_t>(tiles * tiles));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t k = 0; k < tiles * tiles; ++k) {
    const auto ti = k % tiles;
    const auto tj = k / tiles;
    Vector guess;
    refine(ev, g, eps, ti * resolution / tiles, (ti + 1) * resolution / tiles, tj * resolution / tiles,
           (tj + 1) * resolution / tiles, partial[k], guess);
  }
  Tally total;
  for (const auto& p : partial) {
    total.inside += p.inside;
    total.boundary += p.boundary;
    total.evaluations += p.evaluations;
  }
  return finish(g, total);
}

AreaEstimate pseudospectral_area(const Matrix& a, double eps, Complex center, double radius,
                                 std::int64_t resolution) {
  const SigmaMinEvaluator ev(a);
  return pseudospectral_area(ev, eps, center, radius, resolution);
}

AreaEstimate pseudospectral_area_uniform_serial(const SigmaMinEvaluator& ev, double eps, Complex center,
                                                double radius, std::int64_t resolution) {
  check_area_args(ev, eps, center, radius, resolution);
  const CellGrid g{center, radius, resolution, 2.0 * radius / static_cast<double>(resolution)};
  const double cell_hd = g.half_diagonal(1, 1);
  Tally t;
  for (std::int64_t j = 0; j < resolution; ++j)
    for (std::int64_t i = 0; i < resolution; ++i) {
      const double s = ev(g.block_center(i, i + 1, j, j + 1));
      ++t.evaluations;
      if (s <= eps) ++t.inside;
      if (std::abs(s - eps) <= cell_hd) ++t.boundary;
    }
  return finish(g, t);
}

}  // namespace shatterlab
