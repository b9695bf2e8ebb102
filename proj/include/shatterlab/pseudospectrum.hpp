#pragma once

#include <cstdint>
#include <vector>

#include "shatterlab/matrix_core.hpp"

namespace shatterlab {

/// Evaluates z -> sigma_min(z I - A) repeatedly for one matrix.
///
/// The constructor computes the complex Schur form A = Q T Q^*; each call then
/// runs Lanczos on (T - z)^{-1} (T - z)^{-*} using two O(n^2) triangular solves
/// per step. reference() is the dense-SVD definition kept for testing.
class SigmaMinEvaluator {
 public:
  explicit SigmaMinEvaluator(const Matrix& a);

  double operator()(Complex z) const;
  /// Same value, but Lanczos starts from `guess` and leaves the converged
  /// singular vector there. Neighbouring points then need fewer steps.
  double operator()(Complex z, Vector& guess) const;
  double reference(Complex z) const;

  Eigen::Index n() const noexcept { return t_.rows(); }
  /// Diagonal of the Schur factor.
  const std::vector<Complex>& eigenvalues() const noexcept { return eigenvalues_; }
  /// cond(V) of the computed eigenvector matrix, +inf if unavailable.
  double eigvec_condition() const noexcept { return eigvec_cond_; }
  /// |A - c I|.
  double shifted_norm(Complex c) const;

 private:
  double lanczos(Complex z, const Vector& start, Vector* ritz) const;

  Matrix a_;
  Matrix t_;
  Vector start_;
  std::vector<Complex> eigenvalues_;
  double eigvec_cond_;
};

/// sigma_min(z I - A) at the nodes of a uniform resolution x resolution grid
/// spanning the square [c - R, c + R] x [c - R, c + R] (corners included).
struct PseudospectrumGrid {
  Complex center{0.0, 0.0};
  double radius = 1.0;
  std::int64_t resolution = 2;
  std::vector<double> sigma_min_field;  // row-major: index iy * resolution + ix
  std::vector<double> eps_levels;

  double spacing() const { return 2.0 * radius / static_cast<double>(resolution - 1); }
  Complex node(std::int64_t ix, std::int64_t iy) const {
    return {center.real() - radius + spacing() * static_cast<double>(ix),
            center.imag() - radius + spacing() * static_cast<double>(iy)};
  }
  double at(std::int64_t ix, std::int64_t iy) const { return sigma_min_field[iy * resolution + ix]; }
};

/// Nodes evaluated in parallel with the fast evaluator.
PseudospectrumGrid pseudospectrum_grid(const Matrix& a, std::vector<double> eps_levels, Complex center,
                                       double radius, std::int64_t resolution);
/// Single-threaded reference: dense SVD at every node.
PseudospectrumGrid pseudospectrum_grid_serial(const Matrix& a, std::vector<double> eps_levels, Complex center,
                                              double radius, std::int64_t resolution);

struct AreaEstimate {
  double area = 0.0;         // (cells whose center has sigma_min <= eps) * cell area
  double error_bound = 0.0;  // (boundary cells) * cell area
  std::int64_t cells_inside = 0;
  std::int64_t boundary_cells = 0;
  std::int64_t evaluations = 0;
};

/// Full-cell counting of vol Lambda_eps(A) on the resolution x resolution cell
/// grid covering the square circumscribing B(center, radius).
///
/// A cell counts iff sigma_min at its center is <= eps. A cell is a boundary
/// cell when |sigma_min(center) - eps| <= half its diagonal; since sigma_min is
/// 1-Lipschitz every other cell lies entirely inside or outside Lambda_eps, so
/// |area - vol Lambda_eps| <= error_bound. Blocks of cells are skipped or
/// accepted whole with the same Lipschitz argument, which gives the same
/// count as evaluating every cell.
///
/// Requires radius >= |A - center I| + eps so that Lambda_eps lies in the disk.
AreaEstimate pseudospectral_area(const Matrix& a, double eps, Complex center, double radius,
                                 std::int64_t resolution);
AreaEstimate pseudospectral_area(const SigmaMinEvaluator& ev, double eps, Complex center, double radius,
                                 std::int64_t resolution);
/// Reference: evaluates every cell center, single-threaded.
AreaEstimate pseudospectral_area_uniform_serial(const SigmaMinEvaluator& ev, double eps, Complex center,
                                                double radius, std::int64_t resolution);

}  // namespace shatterlab
