#include "shatterlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "parallel.hpp"
#include "shatterlab/errors.hpp"
#include "shatterlab/io.hpp"
#include "shatterlab/noise.hpp"
#include "shatterlab/philox.hpp"
#include "shatterlab/pseudospectrum.hpp"

namespace shatterlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void domain_fail(const std::string& msg) { throw DomainError(msg); }

void validate_family(const MatrixFamily& f, bool need_n = true) {
  if (need_n && f.kind != FamilyKind::FromFile && f.n < 1) domain_fail("family n must be >= 1");
  if (f.kind == FamilyKind::FromFile) {
    if (f.path.empty()) domain_fail("FromFile family needs a path");
    return;
  }
  if (f.kind != FamilyKind::Zero && !(f.norm_target > 0.0 && std::isfinite(f.norm_target))) {
    std::ostringstream os;
    os << "norm_target must be > 0 for family " << family_name(f.kind) << ", got " << f.norm_target;
    domain_fail(os.str());
  }
}

void rescale(Matrix& m, double target) {
  const double nrm = operator_norm(m);
  if (nrm > 0.0) m *= target / nrm;
}

void validate_eps_grid(const std::vector<double>& grid, std::size_t min_points, bool decreasing) {
  if (grid.size() < min_points) domain_fail("eps_grid needs at least " + std::to_string(min_points) + " points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && std::isfinite(grid[i]))) domain_fail("eps_grid entries must be positive and finite");
    if (decreasing && i > 0 && !(grid[i] < grid[i - 1])) domain_fail("eps_grid must be strictly decreasing");
  }
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Nearest-rank quantile of an already sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto t = static_cast<double>(sorted.size());
  auto idx = static_cast<std::int64_t>(std::ceil(q * t)) - 1;
  idx = std::clamp<std::int64_t>(idx, 0, static_cast<std::int64_t>(sorted.size()) - 1);
  return sorted[static_cast<std::size_t>(idx)];
}

Quantiles quantiles(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return {quantile_sorted(v, 0.1), quantile_sorted(v, 0.5), quantile_sorted(v, 0.9)};
}

Matrix draw_perturbed(const Matrix& m, double rho, double scale, std::uint64_t seed, std::int64_t trial) {
  const NoiseSpec spec{m.rows(), rho, scale, seed};
  return perturb(m, spec, static_cast<std::uint32_t>(trial));
}

TailCampaignResult finish_tail(const TailCampaignConfig& cfg, std::vector<double> samples) {
  TailCampaignResult out;
  out.trials_used = cfg.trials;
  const auto t = static_cast<double>(cfg.trials);
  std::vector<std::pair<double, double>> fit_pts;
  for (double eps : cfg.eps_grid) {
    const auto count = std::count_if(samples.begin(), samples.end(), [&](double s) { return s <= eps; });
    const double frac = static_cast<double>(count) / t;
    out.empirical_cdf.push_back({eps, static_cast<std::int64_t>(count), frac});
    fit_pts.emplace_back(eps, frac);
  }
  try {
    const auto fit = fit_log_slope(fit_pts, 5.0 / t, 0.5);
    out.fitted_slope = fit.slope;
    out.slope_stderr = fit.std_error;
    out.fit_points = fit.points_used;
  } catch (const DomainError& e) {
    out.fit_note = e.what();
  }
  out.samples = std::move(samples);
  return out;
}

}  // namespace

// ---- families ---------------------------------------------------------------

const char* family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Zero: return "zero";
    case FamilyKind::Identity: return "identity";
    case FamilyKind::JordanBlock: return "jordan";
    case FamilyKind::GrcarLike: return "grcar";
    case FamilyKind::GinibreDense: return "ginibre";
    case FamilyKind::Diagonal: return "diagonal";
    case FamilyKind::FromFile: return "file";
  }
  return "unknown";
}

std::optional<FamilyKind> family_from_name(const std::string& name) {
  for (auto k : {FamilyKind::Zero, FamilyKind::Identity, FamilyKind::JordanBlock, FamilyKind::GrcarLike,
                 FamilyKind::GinibreDense, FamilyKind::Diagonal, FamilyKind::FromFile})
    if (name == family_name(k)) return k;
  return std::nullopt;
}

Matrix build_family(const MatrixFamily& f) {
  validate_family(f);
  const auto n = f.n;
  Matrix m;
  switch (f.kind) {
    case FamilyKind::Zero:
      return Matrix::Zero(n, n);
    case FamilyKind::Identity:
      return Matrix::Identity(n, n) * f.norm_target;
    case FamilyKind::JordanBlock:
      m = Matrix::Zero(n, n);
      for (std::int64_t i = 0; i + 1 < n; ++i) m(i, i + 1) = 1.0;
      if (n == 1) return m;
      return m * f.norm_target;
    case FamilyKind::GrcarLike:
      m = Matrix::Zero(n, n);
      for (std::int64_t i = 0; i < n; ++i) {
        if (i > 0) m(i, i - 1) = -1.0;
        for (std::int64_t d = 0; d <= 3 && i + d < n; ++d) m(i, i + d) = 1.0;
      }
      rescale(m, f.norm_target);
      return m;
    case FamilyKind::GinibreDense:
      m.resize(n, n);
      for (std::int64_t i = 0; i < n; ++i) {
        rng::Stream s(f.seed, rng::Domain::Family, 0u, static_cast<std::uint32_t>(i));
        for (std::int64_t j = 0; j < n; ++j) m(i, j) = s.complex_gaussian();
      }
      rescale(m, f.norm_target);
      return m;
    case FamilyKind::Diagonal:
      m = Matrix::Zero(n, n);
      for (std::int64_t k = 0; k < n; ++k)
        m(k, k) = std::polar(f.norm_target, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
      return m;
    case FamilyKind::FromFile: {
      m = io::read_matrix_market(f.path).matrix.to_dense();
      if (f.n > 0 && m.rows() != f.n)
        throw DimensionError("matrix file '" + f.path + "' has n = " + std::to_string(m.rows()) + ", expected " +
                             std::to_string(f.n));
      if (f.norm_target > 0.0) rescale(m, f.norm_target);
      return m;
    }
  }
  domain_fail("unknown family");
}

// ---- fitting ----------------------------------------------------------------

LogSlopeFit fit_log_slope(std::span<const std::pair<double, double>> points, double y_lo, double y_hi) {
  std::vector<double> xs, ys;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0 && std::isfinite(x) && y > 0.0 && std::isfinite(y))) continue;
    if (y < y_lo || y > y_hi) continue;
    xs.push_back(std::log(x));
    ys.push_back(std::log(y));
  }
  const auto m = static_cast<std::int64_t>(xs.size());
  if (m < 3) domain_fail("slope fit needs at least 3 points in the window, found " + std::to_string(m));
  const double mx = mean(xs), my = mean(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::int64_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) domain_fail("slope fit: degenerate x values");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (std::int64_t i = 0; i < m; ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ssr += r * r;
  }
  return {slope, std::sqrt(ssr / static_cast<double>(m - 2) / sxx), intercept, m};
}

std::vector<double> geometric_grid(double start, double stop, std::int64_t points) {
  if (!(start > 0.0 && stop > 0.0)) domain_fail("geometric grid needs positive endpoints");
  if (points < 2) domain_fail("geometric grid needs at least 2 points");
  std::vector<double> out(static_cast<std::size_t>(points));
  const double ls = std::log(start), le = std::log(stop);
  for (std::int64_t i = 0; i < points; ++i)
    out[i] = std::exp(ls + (le - ls) * static_cast<double>(i) / static_cast<double>(points - 1));
  out.front() = start;
  out.back() = stop;
  return out;
}

// ---- tail -------------------------------------------------------------------

void TailCampaignConfig::validate() const {
  validate_family(family);
  NoiseSpec{family.n, rho, scale, seed}.validate();
  if (m < 0 || m >= family.n)
    domain_fail("m must satisfy 0 <= m < n, got m = " + std::to_string(m) + ", n = " + std::to_string(family.n));
  if (trials < 100) domain_fail("trials must be >= 100, got " + std::to_string(trials));
  validate_eps_grid(eps_grid, 4, true);
}

TailCampaignResult run_tail_campaign(const TailCampaignConfig& cfg) {
  cfg.validate();
  const Matrix m = build_family(cfg.family);
  std::vector<double> samples(static_cast<std::size_t>(cfg.trials));
  detail::parallel_for(cfg.trials, [&](std::int64_t t) {
    samples[t] = shifted_sigma(draw_perturbed(m, cfg.rho, cfg.scale, cfg.seed, t), cfg.shift, cfg.m);
  });
  return finish_tail(cfg, std::move(samples));
}

TailCampaignResult run_tail_campaign_serial(const TailCampaignConfig& cfg) {
  cfg.validate();
  const Matrix m = build_family(cfg.family);
  std::vector<double> samples(static_cast<std::size_t>(cfg.trials));
  for (std::int64_t t = 0; t < cfg.trials; ++t) {
    const NoiseSpec spec{m.rows(), cfg.rho, cfg.scale, cfg.seed};
    const Matrix a = m + sample_sparse_noise_serial(spec, static_cast<std::uint32_t>(t)).to_dense();
    samples[t] = shifted_sigma(a, cfg.shift, cfg.m);
  }
  return finish_tail(cfg, std::move(samples));
}

// ---- shatter ----------------------------------------------------------------

double RhoLaw::rho(std::int64_t n) const {
  const double nd = static_cast<double>(n);
  switch (kind) {
    case Kind::Constant: return value;
    case Kind::Power: return std::pow(nd, value - 1.0);
    case Kind::LogSquared: return value * std::log(nd) * std::log(nd) / nd;
  }
  return value;
}

std::string RhoLaw::label() const {
  switch (kind) {
    case Kind::Constant: return "const(" + io::format_double(value) + ")";
    case Kind::Power: return "power(" + io::format_double(value) + ")";
    case Kind::LogSquared: return "log2(" + io::format_double(value) + ")";
  }
  return "?";
}

void ShatterCampaignConfig::validate() const {
  if (rho_laws.empty()) domain_fail("rho_laws must not be empty");
  if (n_list.empty()) domain_fail("n_list must not be empty");
  if (trials < 1) domain_fail("trials must be >= 1");
  if (!(scale > 0.0 && std::isfinite(scale))) domain_fail("scale must be > 0");
  for (auto n : n_list) {
    if (n < 2) domain_fail("every n must be >= 2, got " + std::to_string(n));
    MatrixFamily f = family;
    f.n = n;
    validate_family(f);
    for (const auto& law : rho_laws) {
      const double r = law.rho(n);
      std::ostringstream os;
      if (!(r > 0.0 && r <= 1.0)) os << "rho law " << law.label() << " gives rho = " << r << " at n = " << n
                                      << ", outside 0 < rho <= 1";
      else if (!(static_cast<double>(n) * r > 1.0))
        os << "rho law " << law.label() << " gives n*rho = " << static_cast<double>(n) * r << " <= 1 at n = " << n;
      if (!os.str().empty()) domain_fail(os.str());
    }
  }
}

ShatterCampaignResult run_shatter_campaign(const ShatterCampaignConfig& cfg) {
  cfg.validate();
  ShatterCampaignResult out;
  for (const auto& law : cfg.rho_laws) {
    GrowthFit growth{law.label(), std::nullopt, std::nullopt};
    std::vector<std::pair<double, double>> vs_n, vs_log_n;
    for (auto n : cfg.n_list) {
      MatrixFamily f = cfg.family;
      f.n = n;
      const Matrix m = build_family(f);
      ShatterCell cell;
      cell.n = n;
      cell.law = law.label();
      cell.rho = law.rho(n);
      cell.k_param = k_param(n, cell.rho).value;
      cell.m_norm = operator_norm(m);
      const double log_ref = std::log(cell.m_norm + static_cast<double>(n) * static_cast<double>(n) * cell.rho);
      cell.reference_log_kappa = 10.0 * cell.k_param * log_ref;
      cell.reference_log_inv_eta = 35.0 * cell.k_param * log_ref;
      cell.records.resize(static_cast<std::size_t>(cfg.trials));

      const NoiseSpec spec{n, cell.rho, cfg.scale, cfg.seed};
      detail::parallel_for(cfg.trials, [&](std::int64_t t) {
        const CsrMatrix noise = sample_sparse_noise(spec, static_cast<std::uint32_t>(t));
        const Matrix a = m + noise.to_dense();
        const auto d = eig(a);
        const auto kb = kappa_v_bounds(d);
        const auto sv = singular_values(a);
        auto& r = cell.records[t];
        r.trial = t;
        r.kappa_v_lower = kb.lower;
        r.kappa_v_upper = kb.upper;
        r.kappa_v_direct = kb.direct;
        r.eta = min_eigenvalue_gap(d.eigenvalues);
        r.sigma_n = sv.back();
        r.nnz = noise.nnz();
        r.untouched_rows = empty_row_count(noise);
        r.defective = !std::isfinite(kb.upper);
      });

      std::vector<double> lk, le;
      cell.trials_with_untouched_rows = 0;
      cell.sandwich_violations = 0;
      constexpr double tol = 1e-12;
      for (const auto& r : cell.records) {
        lk.push_back(std::log(r.kappa_v_upper));
        le.push_back(r.eta > 0.0 ? -std::log(r.eta) : kInf);
        if (r.untouched_rows > 0) ++cell.trials_with_untouched_rows;
        if (!r.defective) {
          const double nd = static_cast<double>(n);
          const bool ok = r.kappa_v_lower <= r.kappa_v_upper * (1.0 + tol) &&
                          r.kappa_v_upper <= nd * r.kappa_v_lower * (1.0 + tol) &&
                          r.kappa_v_lower <= r.kappa_v_direct * (1.0 + 1e-8);
          if (!ok) ++cell.sandwich_violations;
        }
      }
      cell.log_kappa_upper = quantiles(lk);
      cell.log_inv_eta = quantiles(le);
      vs_n.emplace_back(static_cast<double>(n), cell.log_kappa_upper.q50);
      vs_log_n.emplace_back(std::log(static_cast<double>(n)), cell.log_kappa_upper.q50);
      out.cells.push_back(std::move(cell));
    }
    try {
      growth.vs_n = fit_log_slope(vs_n, 0.0, std::numeric_limits<double>::max());
      growth.vs_log_n = fit_log_slope(vs_log_n, 0.0, std::numeric_limits<double>::max());
    } catch (const DomainError&) {
    }
    out.growth.push_back(std::move(growth));
  }
  return out;
}

// ---- area -------------------------------------------------------------------

void AreaCampaignConfig::validate() const {
  validate_family(family);
  NoiseSpec{family.n, rho, scale, seed}.validate();
  validate_eps_grid(eps_grid, 3, false);
  if (trials < 1) domain_fail("trials must be >= 1");
  if (cells_per_eps > 0.0) {
    if (grid_resolution != 0) domain_fail("set either grid_resolution or cells_per_eps, not both");
    if (!(cells_per_eps >= 5.0 && std::isfinite(cells_per_eps)))
      domain_fail("cells_per_eps must be >= 5 so that every eps spans 5 cells");
  } else if (grid_resolution < 2) {
    domain_fail("grid_resolution must be >= 2 (or give cells_per_eps)");
  }
}

AreaCampaignResult run_area_campaign(const AreaCampaignConfig& cfg) {
  cfg.validate();
  const Matrix m = build_family(cfg.family);
  const double eps_max = *std::max_element(cfg.eps_grid.begin(), cfg.eps_grid.end());
  const double eps_min = *std::min_element(cfg.eps_grid.begin(), cfg.eps_grid.end());
  const auto ne = cfg.eps_grid.size();
  const auto nt = static_cast<std::size_t>(cfg.trials);
  std::vector<double> area(ne * nt), bound(ne * nt);
  std::vector<std::int64_t> evals(nt, 0);

  detail::parallel_for(cfg.trials, [&](std::int64_t t) {
    const Matrix a = draw_perturbed(m, cfg.rho, cfg.scale, cfg.seed, t);
    const SigmaMinEvaluator ev(a);
    const double radius = ev.shifted_norm(Complex(0.0, 0.0)) + eps_max;
    for (std::size_t e = 0; e < ne; ++e) {
      const double eps = cfg.eps_grid[e];
      std::int64_t res = cfg.grid_resolution;
      if (cfg.cells_per_eps > 0.0) res = static_cast<std::int64_t>(std::ceil(2.0 * radius * cfg.cells_per_eps / eps));
      if (2.0 * radius / static_cast<double>(res) > eps / 5.0 * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "grid resolution too coarse: trial " << t << " needs grid_resolution >= "
           << static_cast<std::int64_t>(std::ceil(10.0 * radius / eps_min)) << " so that eps = " << eps
           << " spans 5 cells";
        domain_fail(os.str());
      }
      const auto est = pseudospectral_area(ev, eps, Complex(0.0, 0.0), radius, res);
      area[e * nt + t] = est.area;
      bound[e * nt + t] = est.error_bound;
      evals[t] += est.evaluations;
    }
  });

  AreaCampaignResult out;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t e = 0; e < ne; ++e) {
    std::vector<double> a(area.begin() + e * nt, area.begin() + (e + 1) * nt);
    std::vector<double> b(bound.begin() + e * nt, bound.begin() + (e + 1) * nt);
    const double mu = mean(a);
    double var = 0.0;
    for (double x : a) var += (x - mu) * (x - mu);
    const double se = nt > 1 ? std::sqrt(var / static_cast<double>(nt - 1) / static_cast<double>(nt)) : 0.0;
    out.points.push_back({cfg.eps_grid[e], mu, se, mean(b)});
    pts.emplace_back(cfg.eps_grid[e], mu);
  }
  for (auto v : evals) out.evaluations += v;
  out.fit = fit_log_slope(pts, std::numeric_limits<double>::min(), std::numeric_limits<double>::max());
  return out;
}

// ---- coupon -----------------------------------------------------------------

void CouponConfig::validate() const {
  if (n < 8) domain_fail("coupon probe needs n >= 8, got " + std::to_string(n));
  if (c_list.empty()) domain_fail("c_list must not be empty");
  for (double c : c_list)
    if (!(c > 0.0 && std::isfinite(c))) domain_fail("every c must be positive and finite");
  if (trials < 1) domain_fail("trials must be >= 1");
}

std::vector<CouponPoint> coupon_collector_probe(const CouponConfig& cfg) {
  cfg.validate();
  const double nd = static_cast<double>(cfg.n);
  std::vector<CouponPoint> out;
  for (std::size_t ci = 0; ci < cfg.c_list.size(); ++ci) {
    const double c = cfg.c_list[ci];
    const double rho = std::min(1.0, c * std::log(nd) / nd);
    const NoiseSpec spec{cfg.n, rho, 1.0, cfg.seed};
    std::vector<unsigned char> hit(static_cast<std::size_t>(cfg.trials), 0);
    detail::parallel_for(cfg.trials, [&](std::int64_t t) {
      const auto idx = static_cast<std::uint32_t>(ci * static_cast<std::size_t>(cfg.trials) + t);
      hit[t] = empty_row_count(sample_sparse_noise(spec, idx)) > 0 ? 1 : 0;
    });
    const auto hits = std::count(hit.begin(), hit.end(), 1);
    out.push_back({c, rho, static_cast<std::int64_t>(hits), static_cast<double>(hits) / static_cast<double>(cfg.trials)});
  }
  return out;
}

}  // namespace shatterlab
