#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "homeig/dense.hpp"
#include "homeig/errors.hpp"
#include "homeig/operator_core.hpp"

namespace homeig {

/// Maclaurin coefficients of the eigenvalue paths lambda_i(theta) = sum_r a(i,r) theta^r
/// and of the coordinates phi_{i,k}(theta) = <x_i(theta), e_k> = sum_r b(i,k,r) theta^r.
class SeriesCoefficients {
 public:
  SeriesCoefficients() = default;

  /// Orders 0 filled in: a(i,0) = lambda_i(0), b(i,k,0) = delta_ik; higher orders zero.
  SeriesCoefficients(std::span<const double> base_values, std::size_t order)
      : n_(base_values.size()),
        order_(order),
        a_(n_ * (order + 1), 0.0),
        b_(n_ * n_ * (order + 1), 0.0),
        base_values_(base_values.begin(), base_values.end()) {
    for (std::size_t i = 0; i < n_; ++i) {
      a_[index(i, 0)] = base_values_[i];
      b_[index(i, i, 0)] = 1.0;
    }
  }

  std::size_t size() const { return n_; }
  std::size_t order() const { return order_; }
  std::span<const double> base_values() const { return base_values_; }

  double a(std::size_t i, std::size_t r) const { return a_[index(i, r)]; }
  double b(std::size_t i, std::size_t k, std::size_t r) const { return b_[index(i, k, r)]; }
  double& a(std::size_t i, std::size_t r) { return a_[index(i, r)]; }
  double& b(std::size_t i, std::size_t k, std::size_t r) { return b_[index(i, k, r)]; }

  /// a(i, 0..R), contiguous.
  std::span<const double> lambda_series(std::size_t i) const {
    return std::span<const double>(a_).subspan(index(i, 0), order_ + 1);
  }
  /// b(i, k, 0..R), contiguous.
  std::span<const double> coordinate_series(std::size_t i, std::size_t k) const {
    return std::span<const double>(b_).subspan(index(i, k, 0), order_ + 1);
  }

  /// max(|a(i,r)|, max_k |b(i,k,r)|), the per-order magnitude used by the diagnostics.
  double magnitude(std::size_t i, std::size_t r) const {
    double c = std::abs(a(i, r));
    for (std::size_t k = 0; k < n_; ++k) c = std::max(c, std::abs(b(i, k, r)));
    return c;
  }

  /// Copy restricted to orders 0..order.
  SeriesCoefficients truncated(std::size_t order) const {
    if (order > order_) throw InvalidArgument("cannot truncate to a higher order");
    SeriesCoefficients out(base_values_, order);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t r = 0; r <= order; ++r) {
        out.a(i, r) = a(i, r);
        for (std::size_t k = 0; k < n_; ++k) out.b(i, k, r) = b(i, k, r);
      }
    return out;
  }

  friend bool operator==(const SeriesCoefficients&, const SeriesCoefficients&) = default;

 private:
  std::size_t index(std::size_t i, std::size_t r) const { return i * (order_ + 1) + r; }
  std::size_t index(std::size_t i, std::size_t k, std::size_t r) const {
    return (i * n_ + k) * (order_ + 1) + r;
  }

  std::size_t n_ = 0;
  std::size_t order_ = 0;
  std::vector<double> a_;
  std::vector<double> b_;
  Vector base_values_;
};

/// Throws DegenerateBaseSpectrum for the first pair (i < k) closer than
/// gap_tol * max(1, maxabs(values)).
inline void check_nondegenerate(std::span<const double> values, double gap_tol) {
  const double bound = gap_tol * std::max(1.0, max_abs(values));
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t k = i + 1; k < values.size(); ++k) {
      const double gap = std::abs(values[i] - values[k]);
      if (gap <= bound) throw DegenerateBaseSpectrum(i, k, gap);
    }
}

struct SeriesOptions {
  /// Worker threads over the eigen-index; 0 picks hardware concurrency.
  unsigned threads = 1;
};

namespace detail {

// Fills orders 1..R of eigen-index i. W is the coupling matrix transposed, so row k holds
// W[.][k] contiguously.
inline void recurse_index(const DenseMatrix& Wt, std::span<const double> lambda0,
                          std::size_t i, SeriesCoefficients& c) {
  const std::size_t n = lambda0.size();
  const std::size_t R = c.order();
  Vector prev(n);
  for (std::size_t r = 1; r <= R; ++r) {
    for (std::size_t j = 0; j < n; ++j) prev[j] = c.b(i, j, r - 1);

    // a(i,r) = sum_j X[j][i] b(i,j,r-1) - lambda_i b(i,i,r-1), written with W = X - diag(lambda).
    const double ar = dot(Wt.row(i), prev);
    if (!std::isfinite(ar)) throw NonFiniteCoefficient(i, std::nullopt, r);
    c.a(i, r) = ar;

    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      double s = dot(Wt.row(k), prev);
      for (std::size_t m = 1; m < r; ++m) s -= c.a(i, r - m) * c.b(i, k, m);
      const double bk = s / (lambda0[i] - lambda0[k]);
      if (!std::isfinite(bk)) throw NonFiniteCoefficient(i, k, r);
      c.b(i, k, r) = bk;
    }
    // b(i,i,r) stays 0: the (1 - delta_ik) prefactor fixes <x_i(theta), e_i> = 1.
  }
}

}  // namespace detail

/// Coefficients through order R. Each eigen-index is independent; within an index, order r
/// uses only orders below r, so truncating a higher-order result reproduces a lower-order
/// one bit for bit.
inline SeriesCoefficients compute_coefficients(const HomotopyProblem& problem, std::size_t order,
                                               SeriesOptions options = {}) {
  const auto lambda0 = problem.basis().values();
  check_nondegenerate(lambda0, problem.tolerances().gap);

  SeriesCoefficients coeffs(lambda0, order);
  const std::size_t n = problem.size();
  const DenseMatrix Wt = problem.coupling().transposed();

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) detail::recurse_index(Wt, lambda0, i, coeffs);
    return coeffs;
  }

  // Strided partition; every worker writes disjoint slices of the tensors.
  std::vector<std::exception_ptr> failures(n);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < n; i += threads) {
          try {
            detail::recurse_index(Wt, lambda0, i, coeffs);
          } catch (...) {
            failures[i] = std::current_exception();
            return;
          }
        }
      });
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return coeffs;
}

struct OrderCoefficients {
  Vector a;      // a(i, r) for every i
  DenseMatrix b; // b(i, k, r) stored at (i, k)
};

/// a(i,1) = X[i][i] - lambda_i(0), b(i,k,1) = (1 - delta_ik) X[i][k] / (lambda_i(0) - lambda_k(0)).
inline OrderCoefficients closed_form_order1(const HomotopyProblem& problem) {
  const auto lambda0 = problem.basis().values();
  check_nondegenerate(lambda0, problem.tolerances().gap);
  const auto& X = problem.interaction();
  const std::size_t n = problem.size();

  OrderCoefficients out{Vector(n), DenseMatrix(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.a[i] = X(i, i) - lambda0[i];
    for (std::size_t k = 0; k < n; ++k)
      if (k != i) out.b(i, k) = X(i, k) / (lambda0[i] - lambda0[k]);
  }
  return out;
}

/// Second-order closed forms:
///   a(i,2)   = sum_{j != i} X[i][j] X[j][i] / (lambda_i - lambda_j)
///   b(i,k,2) = ( sum_{j != i} X[j][k] X[i][j] / (lambda_i - lambda_j)
///               + X[i][k] (1 - X[i][i] / (lambda_i - lambda_k)) ) / (lambda_i - lambda_k)
/// This agrees with the recursion at r = 2 (the X[i][k] term absorbs -lambda_k b(i,k,1) and
/// the a(i,1) b(i,k,1) product).
inline OrderCoefficients closed_form_order2(const HomotopyProblem& problem) {
  const auto lambda0 = problem.basis().values();
  check_nondegenerate(lambda0, problem.tolerances().gap);
  const auto& X = problem.interaction();
  const std::size_t n = problem.size();

  OrderCoefficients out{Vector(n, 0.0), DenseMatrix(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double a2 = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) a2 += X(i, j) * X(j, i) / (lambda0[i] - lambda0[j]);
    out.a[i] = a2;

    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const double dik = lambda0[i] - lambda0[k];
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) s += X(j, k) * X(i, j) / (lambda0[i] - lambda0[j]);
      s += X(i, k) * (1.0 - X(i, i) / dik);
      out.b(i, k) = s / dik;
    }
  }
  return out;
}

}  // namespace homeig
