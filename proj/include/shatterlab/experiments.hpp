#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shatterlab/diagnostics.hpp"
#include "shatterlab/matrix_core.hpp"

namespace shatterlab {

// ---- test matrices -------------------------------------------------------

enum class FamilyKind { Zero, Identity, JordanBlock, GrcarLike, GinibreDense, Diagonal, FromFile };

/// A deterministic test matrix M, rescaled so that |M| = norm_target (except Zero).
///
/// Diagonal puts the eigenvalues at norm_target * exp(2 pi i k / n) (a normal
/// matrix). GinibreDense draws one Ginibre sample from `seed`. FromFile reads
/// a Matrix Market file and rescales it only if norm_target > 0.
struct MatrixFamily {
  FamilyKind kind = FamilyKind::Zero;
  std::int64_t n = 0;
  double norm_target = 1.0;
  std::string path;
  std::uint64_t seed = 0;
};

Matrix build_family(const MatrixFamily& family);
const char* family_name(FamilyKind kind);
std::optional<FamilyKind> family_from_name(const std::string& name);

// ---- fitting -------------------------------------------------------------

struct LogSlopeFit {
  double slope;
  double std_error;
  double intercept;
  std::int64_t points_used;
};

/// Ordinary least squares of log y on log x over the points with y in [y_lo, y_hi].
/// Throws DomainError with fewer than 3 usable points or degenerate x.
LogSlopeFit fit_log_slope(std::span<const std::pair<double, double>> points, double y_lo, double y_hi);

/// Geometric grid from start to stop (inclusive) with `points` entries.
std::vector<double> geometric_grid(double start, double stop, std::int64_t points);

// ---- sigma_{n-m} tail campaign --------------------------------------------

struct TailCampaignConfig {
  MatrixFamily family;
  double rho = 1.0;
  double scale = 1.0;
  std::int64_t m = 0;
  Complex shift{0.0, 0.0};
  std::vector<double> eps_grid;  // strictly decreasing, >= 4 points
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CdfPoint {
  double eps;
  std::int64_t count;
  double fraction;
};

struct TailCampaignResult {
  std::vector<CdfPoint> empirical_cdf;  // in eps_grid order
  std::optional<double> fitted_slope;
  std::optional<double> slope_stderr;
  std::int64_t fit_points = 0;
  std::string fit_note;  // reason when no slope could be fitted
  std::int64_t trials_used = 0;
  std::vector<double> samples;  // sigma_{n-m}(A_t - z) per trial
};

/// Trial t draws A_t = M + scale * N_g from noise stream (seed, t); the slope is
/// fitted to the CDF points with fraction in [5/trials, 0.5].
TailCampaignResult run_tail_campaign(const TailCampaignConfig& cfg);
TailCampaignResult run_tail_campaign_serial(const TailCampaignConfig& cfg);

// ---- kappa_V / eta shattering campaign ---------------------------------

struct RhoLaw {
  enum class Kind { Constant, Power, LogSquared } kind = Kind::Constant;
  double value = 1.0;  // rho, alpha (rho = n^(alpha-1)) or c (rho = c log^2(n)/n)

  double rho(std::int64_t n) const;
  std::string label() const;
};

struct ShatterCampaignConfig {
  MatrixFamily family;  // n is taken from n_list
  std::vector<RhoLaw> rho_laws;
  std::vector<std::int64_t> n_list;
  std::int64_t trials = 100;
  std::uint64_t seed = 0;
  double scale = 1.0;

  void validate() const;
};

struct ShatterTrialRecord {
  std::int64_t trial;
  double kappa_v_lower;
  double kappa_v_upper;
  double kappa_v_direct;
  double eta;
  double sigma_n;
  std::int64_t nnz;
  std::int64_t untouched_rows;
  bool defective;
};

struct Quantiles {
  double q10;
  double q50;
  double q90;
};

struct ShatterCell {
  std::int64_t n;
  std::string law;
  double rho;
  double k_param;
  double m_norm;
  std::vector<ShatterTrialRecord> records;
  Quantiles log_kappa_upper;
  Quantiles log_inv_eta;
  double reference_log_kappa;    // 10 K log(|M| + n^2 rho)
  double reference_log_inv_eta;  // 35 K log(|M| + n^2 rho)
  std::int64_t trials_with_untouched_rows;
  std::int64_t sandwich_violations;  // lower <= upper <= n lower fails
};

struct GrowthFit {
  std::string law;
  std::optional<LogSlopeFit> vs_n;      // median log kappa_upper against n
  std::optional<LogSlopeFit> vs_log_n;  // median log kappa_upper against log n
};

struct ShatterCampaignResult {
  std::vector<ShatterCell> cells;  // n_list-major within each law
  std::vector<GrowthFit> growth;
};

ShatterCampaignResult run_shatter_campaign(const ShatterCampaignConfig& cfg);

// ---- pseudospectral area campaign ---------------------------------------

struct AreaCampaignConfig {
  MatrixFamily family;
  double rho = 1.0;
  double scale = 1.0;
  std::vector<double> eps_grid;
  std::int64_t trials = 10;
  /// Fixed cell grid: resolution x resolution cells for every eps.
  std::int64_t grid_resolution = 0;
  /// Alternative to grid_resolution: each eps gets cells of side eps / cells_per_eps.
  double cells_per_eps = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AreaPoint {
  double eps;
  double mean_area;
  double std_error;
  double mean_error_bound;
};

struct AreaCampaignResult {
  std::vector<AreaPoint> points;
  LogSlopeFit fit;
  std::int64_t evaluations = 0;
};

/// Each trial covers B(0, |A| + max eps) with the cell grid; every eps must
/// span at least 5 cells.
AreaCampaignResult run_area_campaign(const AreaCampaignConfig& cfg);

// ---- coupon-collector probe ---------------------------------------------

struct CouponConfig {
  std::int64_t n = 256;
  std::vector<double> c_list;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CouponPoint {
  double c;
  double rho;  // c log(n) / n
  std::int64_t hits;
  double fraction;  // trials with at least one noise row left empty
};

std::vector<CouponPoint> coupon_collector_probe(const CouponConfig& cfg);

}  // namespace shatterlab
