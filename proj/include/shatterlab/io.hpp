#pragma once

#include <string>
#include <string_view>

#include "shatterlab/matrix_core.hpp"
#include "shatterlab/pseudospectrum.hpp"

namespace shatterlab::io {

/// Storage variant found in the file header.
enum class Layout { Coordinate, Array };

struct LoadedMatrix {
  Layout layout = Layout::Coordinate;
  CsrMatrix matrix;
};

/// Matrix Market reader: "%%MatrixMarket matrix {coordinate|array} {complex|real|integer|pattern} general".
/// Coordinate entries are "row col re im" with 1-based indices; array entries
/// are column-major. Errors carry "source:line:column".
LoadedMatrix parse_matrix_market(std::string_view text, const std::string& source = "<input>");
LoadedMatrix read_matrix_market(const std::string& path);

/// Coordinate complex general, entries in row-major order.
std::string format_matrix_market(const CsrMatrix& a);
/// Array complex general (column-major).
std::string format_matrix_market_array(const Matrix& a);

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan" otherwise.
std::string format_double(double x);
/// Inverse of format_double. Throws ParseError on anything else.
double parse_double(std::string_view s);

std::string read_file(const std::string& path);
/// Writes to a temporary sibling and renames it over path.
void write_file_atomic(const std::string& path, std::string_view content);

/// "re,im,sigma_min" rows in field order.
std::string grid_to_csv(const PseudospectrumGrid& g);
/// Metadata plus the row-major field.
std::string grid_to_json(const PseudospectrumGrid& g);

}  // namespace shatterlab::io
