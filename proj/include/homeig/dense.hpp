#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "homeig/errors.hpp"

namespace homeig {

using Vector = std::vector<double>;

inline double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionMismatch("dot: vector lengths differ");
  double s = 0.0;
  for (std::size_t p = 0; p < u.size(); ++p) s += u[p] * v[p];
  return s;
}

inline double norm2(std::span<const double> v) {
  // Scaled accumulation so entries near the overflow threshold stay finite.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double x : v) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Flip the sign of `v` so that its largest-magnitude entry is positive.
/// Ties go to the lowest index.
inline void canonicalize_sign(std::span<double> v) {
  std::size_t best = 0;
  for (std::size_t p = 1; p < v.size(); ++p)
    if (std::abs(v[p]) > std::abs(v[best])) best = p;
  if (!v.empty() && v[best] < 0.0)
    for (double& x : v) x = -x;
}

/// Square real matrix, row-major, finite entries only.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
    if (n == 0) throw InvalidArgument("matrix dimension must be positive");
  }

  DenseMatrix(std::size_t n, std::vector<double> row_major) : n_(n), data_(std::move(row_major)) {
    if (n == 0) throw InvalidArgument("matrix dimension must be positive");
    if (data_.size() != n * n)
      throw DimensionMismatch("expected " + std::to_string(n * n) + " entries, got " +
                              std::to_string(data_.size()));
    check_finite();
  }

  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
    if (n_ == 0) throw InvalidArgument("matrix dimension must be positive");
    data_.reserve(n_ * n_);
    for (const auto& row : rows) {
      if (row.size() != n_) throw DimensionMismatch("matrix rows must all have length n");
      data_.insert(data_.end(), row.begin(), row.end());
    }
    check_finite();
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n);
    for (std::size_t p = 0; p < n; ++p) m(p, p) = 1.0;
    return m;
  }

  static DenseMatrix diagonal(std::span<const double> d) {
    DenseMatrix m(d.size());
    for (std::size_t p = 0; p < d.size(); ++p) m(p, p) = d[p];
    m.check_finite();
    return m;
  }

  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }

  std::span<const double> entries() const { return data_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * n_, n_);
  }

  double max_abs() const { return homeig::max_abs(data_); }

  double frobenius_norm() const { return norm2(data_); }

  double asymmetry() const {
    double worst = 0.0;
    for (std::size_t p = 0; p < n_; ++p)
      for (std::size_t q = p + 1; q < n_; ++q)
        worst = std::max(worst, std::abs((*this)(p, q) - (*this)(q, p)));
    return worst;
  }

  bool is_symmetric(double sym_tol) const {
    return asymmetry() <= sym_tol * std::max(1.0, max_abs());
  }

  bool exactly_symmetric() const { return asymmetry() == 0.0; }

  Vector apply(std::span<const double> x) const {
    if (x.size() != n_) throw DimensionMismatch("matrix-vector product: length mismatch");
    Vector y(n_, 0.0);
    for (std::size_t r = 0; r < n_; ++r) y[r] = dot(row(r), x);
    return y;
  }

  DenseMatrix transposed() const {
    DenseMatrix t(n_);
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  /// Throws NonFiniteEntry on the first NaN/Inf.
  void check_finite() const {
    for (std::size_t idx = 0; idx < data_.size(); ++idx)
      if (!std::isfinite(data_[idx])) throw NonFiniteEntry(idx / n_, idx % n_);
  }

  friend DenseMatrix operator+(const DenseMatrix& x, const DenseMatrix& y) {
    return combine(x, y, [](double u, double v) { return u + v; });
  }
  friend DenseMatrix operator-(const DenseMatrix& x, const DenseMatrix& y) {
    return combine(x, y, [](double u, double v) { return u - v; });
  }
  friend DenseMatrix operator*(double s, const DenseMatrix& x) {
    DenseMatrix out = x;
    for (double& v : out.data_) v *= s;
    out.check_finite();
    return out;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  template <class Op>
  static DenseMatrix combine(const DenseMatrix& x, const DenseMatrix& y, Op op) {
    if (x.n_ != y.n_) throw DimensionMismatch("matrix dimensions differ");
    DenseMatrix out(x.n_);
    for (std::size_t idx = 0; idx < x.data_.size(); ++idx)
      out.data_[idx] = op(x.data_[idx], y.data_[idx]);
    out.check_finite();
    return out;
  }

  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Column vectors of a matrix given as a list of n-vectors.
inline DenseMatrix from_columns(std::span<const Vector> columns) {
  const std::size_t n = columns.size();
  DenseMatrix m(n);
  for (std::size_t c = 0; c < n; ++c) {
    if (columns[c].size() != n) throw DimensionMismatch("column length differs from count", c);
    for (std::size_t r = 0; r < n; ++r) m(r, c) = columns[c][r];
  }
  m.check_finite();
  return m;
}

inline std::vector<Vector> to_columns(const DenseMatrix& m) {
  std::vector<Vector> cols(m.size(), Vector(m.size()));
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < m.size(); ++c) cols[c][r] = m(r, c);
  return cols;
}

}  // namespace homeig
