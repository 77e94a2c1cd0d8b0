#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <type_traits>
#include <vector>

#include "homeig/dense.hpp"
#include "homeig/errors.hpp"

// Reader and writer for the real subset of the Matrix Market exchange format:
//   %%MatrixMarket matrix <coordinate|array> real <general|symmetric>
//   % comments
//   rows cols [nnz]
//   entries
namespace homeig {

enum class MarketFormat { array, coordinate };
enum class MarketSymmetry { general, symmetric };

class MatrixMarketError : public Error {
 public:
  enum class Kind {
    MalformedHeader,
    NonRealField,
    UnsupportedSymmetry,
    MalformedSize,
    MalformedEntry,
    IndexOutOfRange,
    DuplicateEntry,
    EntryCount,
    NotSquare,
  };

  MatrixMarketError(Kind kind, const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), kind_(kind), line_(line) {}
  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

/// A parsed (possibly rectangular) real matrix, stored row-major.
struct MarketData {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  MarketFormat format = MarketFormat::array;
  MarketSymmetry symmetry = MarketSymmetry::general;

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

namespace detail {

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t p = 0;
  while (p < line.size()) {
    while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
    std::size_t q = p;
    while (q < line.size() && !std::isspace(static_cast<unsigned char>(line[q]))) ++q;
    if (q > p) tokens.push_back(line.substr(p, q - p));
    p = q;
  }
  return tokens;
}

template <class T>
bool parse_number(std::string_view token, T& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if constexpr (std::is_floating_point_v<T>) {
    if (first != last && *first == '+') ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace detail

inline MarketData read_market_data(std::string_view text) {
  using Kind = MatrixMarketError::Kind;
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  {
    std::size_t start = 0, lineno = 1;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.emplace_back(lineno++, line);
      if (end == text.size()) break;
      start = end + 1;
    }
  }
  if (lines.empty() || lines.front().second.rfind("%%MatrixMarket", 0) != 0)
    throw MatrixMarketError(Kind::MalformedHeader, "missing %%MatrixMarket banner", 1);

  const auto header = detail::split_ws(lines.front().second);
  if (header.size() != 5 || detail::lowercase(header[1]) != "matrix")
    throw MatrixMarketError(Kind::MalformedHeader, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1);

  MarketData out;
  const std::string format = detail::lowercase(header[2]);
  const std::string field = detail::lowercase(header[3]);
  const std::string symmetry = detail::lowercase(header[4]);
  if (format == "array") out.format = MarketFormat::array;
  else if (format == "coordinate") out.format = MarketFormat::coordinate;
  else throw MatrixMarketError(Kind::MalformedHeader, "unknown format '" + format + "'", 1);
  if (field == "integer" || field == "complex" || field == "pattern")
    throw MatrixMarketError(Kind::NonRealField, "field '" + field + "' is not supported (real only)", 1);
  if (field != "real") throw MatrixMarketError(Kind::MalformedHeader, "unknown field '" + field + "'", 1);
  if (symmetry == "general") out.symmetry = MarketSymmetry::general;
  else if (symmetry == "symmetric") out.symmetry = MarketSymmetry::symmetric;
  else if (symmetry == "skew-symmetric" || symmetry == "hermitian")
    throw MatrixMarketError(Kind::UnsupportedSymmetry, "symmetry '" + symmetry + "' is not supported", 1);
  else throw MatrixMarketError(Kind::MalformedHeader, "unknown symmetry '" + symmetry + "'", 1);

  // Content lines: skip comments and blank lines.
  std::vector<std::pair<std::size_t, std::vector<std::string_view>>> body;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto& [lineno, line] = lines[l];
    if (!line.empty() && line.front() == '%') continue;
    auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;
    body.emplace_back(lineno, std::move(tokens));
  }
  if (body.empty()) throw MatrixMarketError(Kind::MalformedSize, "missing size line");

  const auto& [size_line, size_tokens] = body.front();
  const std::size_t expected_size_tokens = out.format == MarketFormat::array ? 2 : 3;
  std::size_t nnz = 0;
  if (size_tokens.size() != expected_size_tokens ||
      !detail::parse_number(size_tokens[0], out.rows) ||
      !detail::parse_number(size_tokens[1], out.cols) ||
      (out.format == MarketFormat::coordinate && !detail::parse_number(size_tokens[2], nnz)) ||
      out.rows == 0 || out.cols == 0)
    throw MatrixMarketError(Kind::MalformedSize, "malformed size line", size_line);
  if (out.symmetry == MarketSymmetry::symmetric && out.rows != out.cols)
    throw MatrixMarketError(Kind::NotSquare, "symmetric storage needs a square matrix", size_line);

  out.values.assign(out.rows * out.cols, 0.0);
  const std::size_t entries = body.size() - 1;

  if (out.format == MarketFormat::array) {
    // Column-major; symmetric storage lists the lower triangle only.
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t c = 0; c < out.cols; ++c)
      for (std::size_t r = out.symmetry == MarketSymmetry::symmetric ? c : 0; r < out.rows; ++r)
        slots.emplace_back(r, c);
    if (entries != slots.size())
      throw MatrixMarketError(Kind::EntryCount,
                              "expected " + std::to_string(slots.size()) + " entries, found " +
                                  std::to_string(entries));
    for (std::size_t e = 0; e < entries; ++e) {
      const auto& [lineno, tokens] = body[e + 1];
      double v = 0.0;
      if (tokens.size() != 1 || !detail::parse_number(tokens[0], v) || !std::isfinite(v))
        throw MatrixMarketError(Kind::MalformedEntry, "expected one finite real value", lineno);
      const auto [r, c] = slots[e];
      out.values[r * out.cols + c] = v;
      if (out.symmetry == MarketSymmetry::symmetric) out.values[c * out.cols + r] = v;
    }
    return out;
  }

  if (entries != nnz)
    throw MatrixMarketError(Kind::EntryCount, "expected " + std::to_string(nnz) +
                                                  " entries, found " + std::to_string(entries));
  std::vector<bool> seen(out.rows * out.cols, false);
  for (std::size_t e = 0; e < entries; ++e) {
    const auto& [lineno, tokens] = body[e + 1];
    std::size_t r = 0, c = 0;
    double v = 0.0;
    if (tokens.size() != 3 || !detail::parse_number(tokens[0], r) ||
        !detail::parse_number(tokens[1], c) || !detail::parse_number(tokens[2], v) ||
        !std::isfinite(v))
      throw MatrixMarketError(Kind::MalformedEntry, "expected 'row col value'", lineno);
    if (r < 1 || r > out.rows || c < 1 || c > out.cols)
      throw MatrixMarketError(Kind::IndexOutOfRange,
                              "index (" + std::to_string(r) + ", " + std::to_string(c) +
                                  ") outside " + std::to_string(out.rows) + "x" +
                                  std::to_string(out.cols),
                              lineno);
    --r;
    --c;
    if (seen[r * out.cols + c])
      throw MatrixMarketError(Kind::DuplicateEntry,
                              "duplicate entry (" + std::to_string(r + 1) + ", " +
                                  std::to_string(c + 1) + ")",
                              lineno);
    seen[r * out.cols + c] = true;
    out.values[r * out.cols + c] = v;
    if (out.symmetry == MarketSymmetry::symmetric && r != c) {
      seen[c * out.cols + r] = true;
      out.values[c * out.cols + r] = v;
    }
  }
  return out;
}

inline DenseMatrix parse_matrix_market(std::string_view text) {
  MarketData data = read_market_data(text);
  if (data.rows != data.cols)
    throw MatrixMarketError(MatrixMarketError::Kind::NotSquare,
                            "expected a square matrix, got " + std::to_string(data.rows) + "x" +
                                std::to_string(data.cols));
  return DenseMatrix(data.rows, std::move(data.values));
}

/// Serializes row-major `values` (rows x cols). Values use the shortest round-trip decimal.
/// Symmetric storage requires an exactly symmetric square matrix; coordinate output skips
/// +0.0 entries (but keeps -0.0 so the round trip is bitwise).
inline std::string write_market_data(std::size_t rows, std::size_t cols,
                                     std::span<const double> values, MarketFormat format,
                                     MarketSymmetry symmetry) {
  if (values.size() != rows * cols) throw DimensionMismatch("write_market_data: size mismatch");
  const bool sym = symmetry == MarketSymmetry::symmetric;
  if (sym) {
    if (rows != cols) throw InvalidArgument("symmetric storage needs a square matrix");
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < r; ++c)
        if (std::bit_cast<std::uint64_t>(values[r * cols + c]) !=
            std::bit_cast<std::uint64_t>(values[c * cols + r]))
          throw NotSymmetric(std::abs(values[r * cols + c] - values[c * cols + r]));
  }
  std::ostringstream os;
  os << "%%MatrixMarket matrix " << (format == MarketFormat::array ? "array" : "coordinate")
     << " real " << (sym ? "symmetric" : "general") << '\n';
  if (format == MarketFormat::array) {
    os << rows << ' ' << cols << '\n';
    for (std::size_t c = 0; c < cols; ++c)
      for (std::size_t r = sym ? c : 0; r < rows; ++r)
        os << detail::format_double(values[r * cols + c]) << '\n';
    return os.str();
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> nz;
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t r = sym ? c : 0; r < rows; ++r) {
      const double v = values[r * cols + c];
      if (v != 0.0 || std::signbit(v)) nz.emplace_back(r + 1, c + 1, v);
    }
  os << rows << ' ' << cols << ' ' << nz.size() << '\n';
  for (const auto& [r, c, v] : nz) os << r << ' ' << c << ' ' << detail::format_double(v) << '\n';
  return os.str();
}

inline std::string write_matrix_market(const DenseMatrix& m, MarketFormat format,
                                       MarketSymmetry symmetry = MarketSymmetry::general) {
  return write_market_data(m.size(), m.size(), m.entries(), format, symmetry);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline DenseMatrix load_matrix_market(const std::string& path) {
  return parse_matrix_market(read_text_file(path));
}

}  // namespace homeig
