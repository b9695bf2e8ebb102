#include "shatterlab/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "shatterlab/errors.hpp"

namespace shatterlab::io {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> split(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    const auto start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

class LineReader {
 public:
  LineReader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  bool next(std::string_view& line) {
    while (pos_ < text_.size() || (pos_ == text_.size() && !done_)) {
      if (pos_ == text_.size()) {
        done_ = true;
        return false;
      }
      auto end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      line = text_.substr(pos_, end - pos_);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      pos_ = end + 1 > text_.size() ? text_.size() : end + 1;
      if (end == text_.size()) done_ = true;
      ++line_no_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what, std::size_t column = 1) const {
    throw ParseError(what, source_ + ":" + std::to_string(line_no_) + ":" + std::to_string(column));
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
  bool done_ = false;
};

bool is_comment_or_blank(std::string_view line) {
  for (char c : line) {
    if (c == '%') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::int64_t parse_index(const LineReader& r, const Token& t) {
  std::int64_t v = 0;
  const auto* end = t.text.data() + t.text.size();
  auto [p, ec] = std::from_chars(t.text.data(), end, v);
  if (ec != std::errc() || p != end) r.fail("expected an integer, got '" + std::string(t.text) + "'", t.column);
  return v;
}

double parse_value(const LineReader& r, const Token& t) {
  double v = 0.0;
  const auto* end = t.text.data() + t.text.size();
  auto [p, ec] = std::from_chars(t.text.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v))
    r.fail("expected a finite number, got '" + std::string(t.text) + "'", t.column);
  return v;
}

}  // namespace

LoadedMatrix parse_matrix_market(std::string_view text, const std::string& source) {
  LineReader r(text, source);
  std::string_view line;
  if (!r.next(line)) r.fail("empty input");
  const auto header = split(line);
  if (header.size() != 5 || lower(header[0].text) != "%%matrixmarket" || lower(header[1].text) != "matrix")
    r.fail("expected '%%MatrixMarket matrix <format> <field> <symmetry>' header");
  const auto format = lower(header[2].text);
  const auto field = lower(header[3].text);
  const auto symmetry = lower(header[4].text);
  if (format != "coordinate" && format != "array") r.fail("unsupported format '" + format + "'", header[2].column);
  if (field != "complex" && field != "real" && field != "integer" && field != "pattern")
    r.fail("unsupported field '" + field + "'", header[3].column);
  if (field == "pattern" && format == "array") r.fail("pattern field requires coordinate format", header[3].column);
  if (symmetry != "general") r.fail("unsupported symmetry '" + symmetry + "' (only general)", header[4].column);

  do {
    if (!r.next(line)) r.fail("missing size line");
  } while (is_comment_or_blank(line));

  const auto size = split(line);
  const std::size_t expect_size = format == "coordinate" ? 3 : 2;
  if (size.size() != expect_size) r.fail("size line must have " + std::to_string(expect_size) + " integers");
  const auto rows = parse_index(r, size[0]);
  const auto cols = parse_index(r, size[1]);
  if (rows < 1 || rows != cols) r.fail("matrix must be square and nonempty", size[0].column);
  const auto n = rows;
  const std::size_t per_value = field == "complex" ? 2 : (field == "pattern" ? 0 : 1);

  auto read_value = [&](const std::vector<Token>& toks, std::size_t first) -> Complex {
    if (per_value == 0) return {1.0, 0.0};
    const double re = parse_value(r, toks[first]);
    const double im = per_value == 2 ? parse_value(r, toks[first + 1]) : 0.0;
    return {re, im};
  };

  LoadedMatrix out;
  if (format == "coordinate") {
    out.layout = Layout::Coordinate;
    const auto nnz = parse_index(r, size[2]);
    if (nnz < 0 || nnz > n * n) r.fail("entry count out of range", size[2].column);
    std::vector<std::map<std::int64_t, Complex>> row_entries(static_cast<std::size_t>(n));
    std::int64_t seen = 0;
    while (seen < nnz) {
      if (!r.next(line)) r.fail("expected " + std::to_string(nnz) + " entries, found " + std::to_string(seen));
      if (is_comment_or_blank(line)) continue;
      const auto toks = split(line);
      if (toks.size() != 2 + per_value)
        r.fail("entry must have " + std::to_string(2 + per_value) + " fields, got " + std::to_string(toks.size()));
      const auto i = parse_index(r, toks[0]);
      const auto j = parse_index(r, toks[1]);
      if (i < 1 || i > n) r.fail("row index out of range", toks[0].column);
      if (j < 1 || j > n) r.fail("column index out of range", toks[1].column);
      if (!row_entries[i - 1].emplace(j - 1, read_value(toks, 2)).second) r.fail("duplicate entry", toks[0].column);
      ++seen;
    }
    std::vector<std::int64_t> offsets{0};
    std::vector<std::int64_t> col_idx;
    std::vector<Complex> vals;
    for (const auto& row : row_entries) {
      for (const auto& [j, v] : row) {
        col_idx.push_back(j);
        vals.push_back(v);
      }
      offsets.push_back(static_cast<std::int64_t>(col_idx.size()));
    }
    out.matrix = CsrMatrix(n, std::move(offsets), std::move(col_idx), std::move(vals));
  } else {
    out.layout = Layout::Array;
    Matrix dense(n, n);
    std::int64_t seen = 0;
    while (seen < n * n) {
      if (!r.next(line)) r.fail("expected " + std::to_string(n * n) + " values, found " + std::to_string(seen));
      if (is_comment_or_blank(line)) continue;
      const auto toks = split(line);
      if (toks.size() != per_value)
        r.fail("value line must have " + std::to_string(per_value) + " fields, got " + std::to_string(toks.size()));
      dense(seen % n, seen / n) = read_value(toks, 0);
      ++seen;
    }
    // Explicit zeros of the array are not stored; to_dense() restores them.
    out.matrix = CsrMatrix::from_dense(dense);
  }
  while (r.next(line))
    if (!is_comment_or_blank(line)) r.fail("unexpected trailing data");
  return out;
}

LoadedMatrix read_matrix_market(const std::string& path) { return parse_matrix_market(read_file(path), path); }

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

double parse_double(std::string_view s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("not a number: '" + std::string(s) + "'", "");
  return v;
}

std::string format_matrix_market(const CsrMatrix& a) {
  std::string out = "%%MatrixMarket matrix coordinate complex general\n";
  out += std::to_string(a.n()) + " " + std::to_string(a.n()) + " " + std::to_string(a.nnz()) + "\n";
  for (std::int64_t i = 0; i < a.n(); ++i)
    for (auto p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) {
      const auto v = a.values()[p];
      out += std::to_string(i + 1) + " " + std::to_string(a.col_indices()[p] + 1) + " " + format_double(v.real()) +
             " " + format_double(v.imag()) + "\n";
    }
  return out;
}

std::string format_matrix_market_array(const Matrix& a) {
  std::string out = "%%MatrixMarket matrix array complex general\n";
  out += std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out += format_double(a(i, j).real()) + " " + format_double(a(i, j).imag()) + "\n";
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path + "': " + ec.message());
}

std::string grid_to_csv(const PseudospectrumGrid& g) {
  std::string out = "re,im,sigma_min\n";
  for (std::int64_t iy = 0; iy < g.resolution; ++iy)
    for (std::int64_t ix = 0; ix < g.resolution; ++ix) {
      const auto z = g.node(ix, iy);
      out += format_double(z.real()) + "," + format_double(z.imag()) + "," + format_double(g.at(ix, iy)) + "\n";
    }
  return out;
}

std::string grid_to_json(const PseudospectrumGrid& g) {
  nlohmann::ordered_json j;
  j["schema"] = "shatterlab.pseudospectrum/1";
  j["center"] = {g.center.real(), g.center.imag()};
  j["radius"] = g.radius;
  j["resolution"] = g.resolution;
  j["spacing"] = g.spacing();
  j["eps_levels"] = g.eps_levels;
  j["layout"] = "row-major, index = iy * resolution + ix, z = center - radius(1+i) + spacing (ix + i iy)";
  j["sigma_min"] = g.sigma_min_field;
  return j.dump(1) + "\n";
}

}  // namespace shatterlab::io
