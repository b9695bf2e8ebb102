#include "shatterlab/noise.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "shatterlab/errors.hpp"

namespace shatterlab {

void NoiseSpec::validate() const {
  if (n < 1) throw DomainError("n must be positive, got " + std::to_string(n));
  if (!(rho > 0.0 && rho <= 1.0)) {
    std::ostringstream os;
    os << "rho must satisfy 0 < rho <= 1, got " << rho;
    throw DomainError(os.str());
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    std::ostringstream os;
    os << "scale must satisfy scale > 0, got " << scale;
    throw DomainError(os.str());
  }
  if (n > static_cast<std::int64_t>(UINT32_MAX)) throw DomainError("n exceeds the stream row index range");
}

KParam k_param(std::int64_t n, double rho) {
  const double nr = static_cast<double>(n) * rho;
  if (!(nr > 1.0)) {
    std::ostringstream os;
    os << "K requires n*rho > 1, got n*rho = " << nr;
    throw DomainError(os.str());
  }
  return {2.0 * std::log(static_cast<double>(n)) / std::log(nr)};
}

double expected_nnz(std::int64_t n, double rho) {
  const auto nd = static_cast<double>(n);
  return nd * nd * rho;
}

Complex sample_complex_gaussian(rng::Stream& stream) { return stream.complex_gaussian(); }

namespace {

struct RowDraw {
  std::vector<std::int64_t> cols;
  std::vector<Complex> vals;
};

RowDraw draw_row(const NoiseSpec& spec, std::uint32_t trial, std::int64_t row) {
  rng::Stream s(spec.seed, rng::Domain::Noise, trial, static_cast<std::uint32_t>(row));
  RowDraw r;
  for (std::int64_t j = 0; j < spec.n; ++j) {
    if (s.uniform() < spec.rho) {
      r.cols.push_back(j);
      r.vals.push_back(spec.scale * s.complex_gaussian());
    }
  }
  return r;
}

CsrMatrix assemble(std::int64_t n, std::vector<RowDraw>& rows) {
  std::vector<std::int64_t> offsets(static_cast<std::size_t>(n) + 1, 0);
  for (std::int64_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + static_cast<std::int64_t>(rows[i].cols.size());
  std::vector<std::int64_t> cols;
  std::vector<Complex> vals;
  cols.reserve(static_cast<std::size_t>(offsets.back()));
  vals.reserve(static_cast<std::size_t>(offsets.back()));
  for (auto& r : rows) {
    cols.insert(cols.end(), r.cols.begin(), r.cols.end());
    vals.insert(vals.end(), r.vals.begin(), r.vals.end());
  }
  return CsrMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

}  // namespace

CsrMatrix sample_sparse_noise(const NoiseSpec& spec, std::uint32_t trial) {
  spec.validate();
  std::vector<RowDraw> rows(static_cast<std::size_t>(spec.n));
#pragma omp parallel for schedule(static) if (spec.n >= 256)
  for (std::int64_t i = 0; i < spec.n; ++i) rows[i] = draw_row(spec, trial, i);
  return assemble(spec.n, rows);
}

CsrMatrix sample_sparse_noise_serial(const NoiseSpec& spec, std::uint32_t trial) {
  spec.validate();
  std::vector<RowDraw> rows(static_cast<std::size_t>(spec.n));
  for (std::int64_t i = 0; i < spec.n; ++i) rows[i] = draw_row(spec, trial, i);
  return assemble(spec.n, rows);
}

CsrMatrix perturb(const CsrMatrix& m, const NoiseSpec& spec, std::uint32_t trial) {
  if (m.n() != spec.n)
    throw DimensionError("perturb: matrix is " + std::to_string(m.n()) + "x" + std::to_string(m.n()) +
                         " but noise spec has n = " + std::to_string(spec.n));
  return add(m, sample_sparse_noise(spec, trial));
}

Matrix perturb(const Matrix& m, const NoiseSpec& spec, std::uint32_t trial) {
  require_square_finite(m, "perturb");
  if (m.rows() != spec.n)
    throw DimensionError("perturb: matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.rows()) +
                         " but noise spec has n = " + std::to_string(spec.n));
  const CsrMatrix noise = sample_sparse_noise(spec, trial);
  Matrix out = m;
  for (std::int64_t i = 0; i < noise.n(); ++i)
    for (auto p = noise.row_offsets()[i]; p < noise.row_offsets()[i + 1]; ++p)
      out(i, noise.col_indices()[p]) += noise.values()[p];
  return out;
}

std::int64_t empty_row_count(const CsrMatrix& a) {
  std::int64_t count = 0;
  for (std::int64_t i = 0; i < a.n(); ++i)
    if (a.row_offsets()[i + 1] == a.row_offsets()[i]) ++count;
  return count;
}

}  // namespace shatterlab
