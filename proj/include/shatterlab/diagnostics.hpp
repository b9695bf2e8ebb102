#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shatterlab/matrix_core.hpp"

namespace shatterlab {

/// |w_j^* v_j| below this marks eigenpair j as numerically defective.
inline constexpr double kDefectiveThreshold = 1e-13;

/// Every regularity quantity of one matrix.
struct SpectralReport {
  std::vector<Complex> eigenvalues;
  std::vector<double> kappa_j;  // eigenvalue condition numbers, +inf when defective
  double kappa_v_lower = 0.0;   // max_j kappa_j
  double kappa_v_upper = 0.0;   // sqrt(n sum_j kappa_j^2)
  double kappa_v_direct = 0.0;  // |V| |V^-1| for the unit-column eigenvector matrix
  double eta = 0.0;             // minimum eigenvalue gap
  double sigma_n = 0.0;
  double sigma_n_minus_1 = 0.0;
  bool defective = false;
};

struct KappaVBounds {
  double lower;
  double upper;
  double direct;
};

/// kappa(lambda_j) = |v_j| |w_j| / |w_j^* v_j|, +inf where |w_j^* v_j| < threshold.
std::vector<double> eigenvalue_condition_numbers(const EigDecomposition& d,
                                                 double defect_threshold = kDefectiveThreshold);
std::vector<double> eigenvalue_condition_numbers(const Matrix& a, double defect_threshold = kDefectiveThreshold);

/// The sandwich max_j kappa_j <= kappa_V <= sqrt(n sum kappa_j^2) plus cond(V).
/// All three are +inf for a defective matrix.
KappaVBounds kappa_v_bounds(const EigDecomposition& d, double defect_threshold = kDefectiveThreshold);
KappaVBounds kappa_v_bounds(const Matrix& a, double defect_threshold = kDefectiveThreshold);

/// min_{i != j} |lambda_i - lambda_j| over the computed eigenvalues. Requires n >= 2.
double min_eigenvalue_gap(std::span<const Complex> eigenvalues);
double min_eigenvalue_gap(const Matrix& a);

/// sigma_{n-m}(A - z I), i.e. the (m+1)-th smallest singular value.
double shifted_sigma(const Matrix& a, Complex z, std::int64_t m);

/// n 2^n eta^(1-n): a bound on kappa_V(A) valid whenever |A| <= 1.
double exponential_kappa_bound(double eta, std::int64_t n);

/// Checks |lambda_i - z||lambda_j - z| >= sigma_n(A - z) sigma_{n-1}(A - z) - 1e-10 |A|^2
/// for the two eigenvalues closest to z.
bool weyl_pair_check(const Matrix& a, Complex z);

/// Ball around the worst-conditioned eigenvalue lambda_1 that lies inside the
/// eps-pseudospectrum: radius = min(eta/n, kappa(lambda_1) eps) / 2.
struct PseudospectralDisk {
  Complex center;
  double radius;
  double kappa;
};
PseudospectralDisk guaranteed_pseudospectral_disk(const Matrix& a, double eps);

/// Column space basis in row echelon form: basis() = P [D; X] with D diagonal,
/// unit columns, and |D_jj| >= 1/sqrt(n).
struct RrefBasis {
  std::vector<std::int64_t> row_order;  // row t of [D; X] is row row_order[t] of P [D; X]
  Vector diagonal;                      // D_jj
  Matrix lower;                         // X, (n-k) x k

  Matrix stacked() const;  // [D; X]
  Matrix basis() const;    // P [D; X]
};

/// Gauss-Jordan elimination with complete pivoting, followed by pivot swaps
/// until no entry exceeds its column's pivot in modulus. Throws DomainError
/// when the columns of b are linearly dependent.
RrefBasis rref_basis(const Matrix& b);

struct ConcentrationQuery {
  Vector v;  // unit vector
  double r = 1.0;
  double rho = 1.0;
  std::int64_t trials = 10000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ConcentrationEstimate {
  double estimate;
  double std_error;
};

/// Monte-Carlo estimate of p(v, r) = Pr(|<g (.) delta_rho, v>| <= r).
///
/// The small-ball supremum over centers is taken at 0: the inner product is a
/// mixture of centered circular Gaussians and an atom at 0, so a ball around 0
/// carries the most mass. Not valid for shifted models.
///
/// std_error is the binomial standard error, floored at 1/trials when the
/// estimate is 0 or 1.
ConcentrationEstimate levy_concentration(const ConcentrationQuery& q);
ConcentrationEstimate levy_concentration_serial(const ConcentrationQuery& q);

/// Tests the implication p(v, r) >= s  =>  #{j : |v_j| >= r sqrt(2/s)} <= log(2/s)/rho.
/// The antecedent counts as established only when estimate - 3 SE >= s.
bool sparse_proximity_check(const Vector& v, double r, double s, double rho, std::int64_t trials,
                            std::uint64_t seed);

enum class SphereClass { Compressible, Incompressible, Boundary };

/// Compressible if estimate - 3 SE >= s, incompressible if estimate + 3 SE <= s.
SphereClass comp_incomp_classify(const Vector& v, double r, double s, double rho, std::int64_t trials,
                                 std::uint64_t seed);

/// Full report for A (z = 0 for the singular values). Requires n >= 2.
SpectralReport diagnose(const Matrix& a, double defect_threshold = kDefectiveThreshold);

}  // namespace shatterlab
