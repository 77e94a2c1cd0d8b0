#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "homeig/dense.hpp"
#include "homeig/errors.hpp"
#include "homeig/operator_core.hpp"

// Independent reference eigensolver. Nothing in the series code path calls into this file;
// it supplies K's basis when the caller has none and checks results afterwards.
namespace homeig {

struct OracleEigenDecomposition {
  std::size_t n = 0;
  Vector values;               // ascending
  std::vector<Vector> vectors; // orthonormal, aligned with values, sign-canonical
};

struct JacobiOptions {
  double tol = 1e-14;
  int max_sweeps = 50;
  double sym_tol = 1e-12;
};

/// Cyclic-by-row Jacobi rotations until the off-diagonal Frobenius norm drops to
/// tol * ||A||_F.
inline OracleEigenDecomposition jacobi_eigen(const DenseMatrix& A, JacobiOptions options = {}) {
  const std::size_t n = A.size();
  if (n == 0) throw InvalidArgument("jacobi_eigen: empty matrix");
  if (!A.is_symmetric(options.sym_tol)) throw NotSymmetric(A.asymmetry());

  // Work on the symmetrized copy so the rotations see an exactly symmetric matrix.
  std::vector<double> a(n * n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) a[p * n + q] = 0.5 * (A(p, q) + A(q, p));
  std::vector<double> v(n * n, 0.0);
  for (std::size_t p = 0; p < n; ++p) v[p * n + p] = 1.0;

  auto at = [&](std::size_t p, std::size_t q) -> double& { return a[p * n + q]; };
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q)
        if (p != q) s += at(p, q) * at(p, q);
    return std::sqrt(s);
  };

  const double target = options.tol * A.frobenius_norm();
  int sweep = 0;
  double off = off_norm();
  while (off > target) {
    if (sweep == options.max_sweeps) throw NoConvergence(sweep, off);
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        // Symmetric Schur decomposition of the (p, q) 2x2 block.
        const double tau = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
    off = off_norm();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return at(x, x) < at(y, y); });

  OracleEigenDecomposition out;
  out.n = n;
  out.values.resize(n);
  out.vectors.assign(n, Vector(n));
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = at(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.vectors[j][k] = v[k * n + order[j]];
    canonicalize_sign(out.vectors[j]);
  }
  return out;
}

/// Decomposition of theta * L + (1 - theta) * K.
inline OracleEigenDecomposition combo_eigen(const DenseMatrix& K, const DenseMatrix& L,
                                            double theta, JacobiOptions options = {}) {
  if (!K.is_symmetric(options.sym_tol)) throw NotSymmetric(K.asymmetry(), "K");
  if (!L.is_symmetric(options.sym_tol)) throw NotSymmetric(L.asymmetry(), "L");
  return jacobi_eigen(homotopy_matrix(K, L, theta), options);
}

struct PairMatch {
  std::vector<std::size_t> permutation;  // reference i -> candidate permutation[i]
  double min_overlap = 1.0;
  bool ambiguous = false;
};

/// Greedy assignment on |<ref_i, cand_j>| / (||ref_i|| ||cand_j||), largest overlaps first,
/// no column reused. Ambiguous when some matched overlap is not safely above 1/sqrt(2).
inline PairMatch match_pairs(std::span<const Vector> reference,
                             const OracleEigenDecomposition& candidate) {
  const std::size_t n = reference.size();
  if (candidate.vectors.size() != n) throw DimensionMismatch("match_pairs: counts differ");
  std::vector<std::tuple<double, std::size_t, std::size_t>> overlaps;
  overlaps.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (reference[i].size() != n) throw DimensionMismatch("match_pairs: reference length", i);
    const double ri = norm2(reference[i]);
    if (ri == 0.0) throw ZeroVector("match_pairs: zero reference vector");
    for (std::size_t j = 0; j < n; ++j) {
      const double cj = norm2(candidate.vectors[j]);
      overlaps.emplace_back(std::abs(dot(reference[i], candidate.vectors[j])) / (ri * cj), i, j);
    }
  }
  std::stable_sort(overlaps.begin(), overlaps.end(),
                   [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });

  PairMatch out;
  out.permutation.assign(n, n);
  std::vector<bool> used(n, false);
  std::size_t assigned = 0;
  for (const auto& [overlap, i, j] : overlaps) {
    if (assigned == n) break;
    if (out.permutation[i] != n || used[j]) continue;
    out.permutation[i] = j;
    used[j] = true;
    ++assigned;
    out.min_overlap = std::min(out.min_overlap, overlap);
  }
  out.ambiguous = out.min_overlap < std::sqrt(0.5) + 1e-12;
  return out;
}

/// Basis of a symmetric K from the oracle; lambda_i(0) recomputed as Rayleigh quotients.
inline EigenBasis oracle_basis(const DenseMatrix& K, const Tolerances& tol = {}) {
  JacobiOptions options;
  options.sym_tol = tol.sym;
  auto dec = jacobi_eigen(K, options);
  return EigenBasis::of(K, std::move(dec.vectors), tol);
}

/// HomotopyProblem for symmetric K and L, with K's basis from the oracle.
inline HomotopyProblem symmetric_problem(const DenseMatrix& K, const DenseMatrix& L,
                                         const Tolerances& tol = {}) {
  if (!L.is_symmetric(tol.sym)) throw NotSymmetric(L.asymmetry(), "L");
  return HomotopyProblem(K, L, oracle_basis(K, tol), tol);
}

/// (lambda_i(h) - lambda_i(0)) / h, with lambda_i(h) taken from the oracle at theta = h and
/// matched to K's i-th oracle eigenvector.
inline double finite_difference_slope(const DenseMatrix& K, const DenseMatrix& L, std::size_t i,
                                      double h) {
  if (!(h > 0.0 && h <= 0.1)) throw InvalidArgument("finite_difference_slope: need 0 < h <= 0.1");
  if (i >= K.size()) throw InvalidArgument("finite_difference_slope: index out of range");
  const EigenBasis basis = oracle_basis(K);
  const auto moved = combo_eigen(K, L, h);
  const auto match = match_pairs(basis.vectors(), moved);
  if (match.ambiguous) throw AmbiguousMatch(match.min_overlap);
  return (moved.values[match.permutation[i]] - basis.value(i)) / h;
}

}  // namespace homeig
