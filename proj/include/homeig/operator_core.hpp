#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "homeig/dense.hpp"
#include "homeig/errors.hpp"

namespace homeig {

/// Scale-relative tolerances shared by the validation routines.
struct Tolerances {
  double ortho = 1e-10;
  double eig = 1e-10;
  double gap = 1e-10;
  double sym = 1e-12;
};

struct OrthonormalityReport {
  bool ok = true;
  // Worst pair (zero-based) and its inner product.
  std::size_t m = 0;
  std::size_t n = 0;
  double value = 0.0;
  double deviation = 0.0;

  explicit operator bool() const { return ok; }
};

/// Checks |<e_m, e_n> - delta_mn| <= ortho_tol for every pair. Expects n vectors of
/// length n.
inline OrthonormalityReport validate_orthonormal_basis(std::span<const Vector> vectors,
                                                       double ortho_tol) {
  const std::size_t n = vectors.size();
  if (n == 0) throw DimensionMismatch("basis is empty");
  for (std::size_t v = 0; v < n; ++v) {
    if (vectors[v].size() != n)
      throw DimensionMismatch("basis vector has length " + std::to_string(vectors[v].size()) +
                                  ", expected " + std::to_string(n),
                              v);
    for (double x : vectors[v])
      if (!std::isfinite(x)) throw DimensionMismatch("basis vector has non-finite entries", v);
  }
  OrthonormalityReport report;
  report.deviation = -1.0;
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t q = 0; q < n; ++q) {
      const double ip = dot(vectors[m], vectors[q]);
      const double dev = std::abs(ip - (m == q ? 1.0 : 0.0));
      if (dev > report.deviation) report = {true, m, q, ip, dev};
    }
  }
  report.ok = report.deviation <= ortho_tol;
  return report;
}

struct BaseEigenvalues {
  Vector values;
  double max_residual = 0.0;
  std::size_t worst = 0;
};

/// lambda_i(0) = <K e_i, e_i>, with the eigen-residual check
/// ||K e_i - lambda_i e_i|| <= eig_tol * max(1, maxabs(K)).
inline BaseEigenvalues base_eigenvalues(const DenseMatrix& K, std::span<const Vector> vectors,
                                        double eig_tol = Tolerances{}.eig) {
  const std::size_t n = K.size();
  if (vectors.size() != n) throw DimensionMismatch("basis size differs from K dimension");
  BaseEigenvalues out;
  out.values.resize(n);
  const double bound = eig_tol * std::max(1.0, K.max_abs());
  for (std::size_t i = 0; i < n; ++i) {
    if (vectors[i].size() != n) throw DimensionMismatch("basis vector length differs from n", i);
    Vector Ke = K.apply(vectors[i]);
    const double lambda = dot(Ke, vectors[i]);
    out.values[i] = lambda;
    for (std::size_t p = 0; p < n; ++p) Ke[p] -= lambda * vectors[i][p];
    const double res = norm2(Ke);
    if (res > out.max_residual || i == 0) {
      out.max_residual = res;
      out.worst = i;
    }
  }
  if (out.max_residual > bound) throw NotAnEigenbasis(out.worst, out.max_residual);
  return out;
}

/// Orthonormal eigenvectors e_i of some K together with lambda_i(0).
class EigenBasis {
 public:
  EigenBasis() = default;

  /// Validates orthonormality and eigen-residuals; values are Rayleigh quotients.
  static EigenBasis of(const DenseMatrix& K, std::vector<Vector> vectors,
                       const Tolerances& tol = {}) {
    require_orthonormal(vectors, tol.ortho);
    auto base = base_eigenvalues(K, vectors, tol.eig);
    return EigenBasis(std::move(vectors), std::move(base.values));
  }

  /// Uses caller-supplied eigenvalues; the residual check runs against those values.
  static EigenBasis with_values(const DenseMatrix& K, std::vector<Vector> vectors, Vector values,
                                const Tolerances& tol = {}) {
    require_orthonormal(vectors, tol.ortho);
    if (values.size() != vectors.size())
      throw DimensionMismatch("eigenvalue count differs from basis size");
    check_residuals(K, vectors, values, tol.eig);
    return EigenBasis(std::move(vectors), std::move(values));
  }

  std::size_t size() const { return values_.size(); }
  std::span<const Vector> vectors() const { return vectors_; }
  std::span<const double> vector(std::size_t i) const { return vectors_[i]; }
  std::span<const double> values() const { return values_; }
  double value(std::size_t i) const { return values_[i]; }

  /// True when the basis is exactly the standard basis, entry for entry.
  bool is_standard() const {
    for (std::size_t i = 0; i < vectors_.size(); ++i)
      for (std::size_t p = 0; p < vectors_.size(); ++p)
        if (vectors_[i][p] != (i == p ? 1.0 : 0.0)) return false;
    return true;
  }

  /// Residuals of the stored pairs against K; throws NotAnEigenbasis past eig_tol.
  void check_against(const DenseMatrix& K, double eig_tol) const {
    if (K.size() != size()) throw DimensionMismatch("basis size differs from K dimension");
    check_residuals(K, vectors_, values_, eig_tol);
  }

 private:
  EigenBasis(std::vector<Vector> vectors, Vector values)
      : vectors_(std::move(vectors)), values_(std::move(values)) {}

  static void require_orthonormal(std::span<const Vector> vectors, double ortho_tol) {
    const auto report = validate_orthonormal_basis(vectors, ortho_tol);
    if (!report) throw NotOrthonormal(report.m, report.n, report.value);
  }

  static void check_residuals(const DenseMatrix& K, std::span<const Vector> vectors,
                              std::span<const double> values, double eig_tol) {
    const std::size_t n = K.size();
    if (vectors.size() != n) throw DimensionMismatch("basis size differs from K dimension");
    const double bound = eig_tol * std::max(1.0, K.max_abs());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(values[i])) throw NotAnEigenbasis(i, values[i]);
      Vector Ke = K.apply(vectors[i]);
      for (std::size_t p = 0; p < n; ++p) Ke[p] -= values[i] * vectors[i][p];
      const double res = norm2(Ke);
      if (res > bound) throw NotAnEigenbasis(i, res);
    }
  }

  std::vector<Vector> vectors_;
  Vector values_;
};

/// X[m][n] = <A e_m, e_n> for an arbitrary operator A. For the standard basis this is a
/// plain transpose copy.
inline DenseMatrix project_onto_basis(const DenseMatrix& A, const EigenBasis& basis) {
  const std::size_t n = A.size();
  if (basis.size() != n) throw DimensionMismatch("operator and basis dimensions differ");
  if (basis.is_standard()) return A.transposed();
  DenseMatrix X(n);
  for (std::size_t m = 0; m < n; ++m) {
    const Vector Ae = A.apply(basis.vector(m));
    for (std::size_t q = 0; q < n; ++q) X(m, q) = dot(Ae, basis.vector(q));
  }
  X.check_finite();
  return X;
}

/// X[m][n] = <L e_m, e_n>. Note the index order: for non-symmetric L with the standard
/// basis, X is the transpose of L.
struct InteractionMatrix {
  DenseMatrix X;

  std::size_t size() const { return X.size(); }
  double operator()(std::size_t m, std::size_t n) const { return X(m, n); }
};

inline InteractionMatrix interaction_matrix(const DenseMatrix& L, const EigenBasis& basis) {
  return InteractionMatrix{project_onto_basis(L, basis)};
}

/// theta * (L x) + (1 - theta) * (K x)
inline Vector homotopy_apply(const DenseMatrix& K, const DenseMatrix& L, double theta,
                             std::span<const double> x) {
  if (K.size() != L.size()) throw DimensionMismatch("K and L dimensions differ");
  const Vector Lx = L.apply(x);
  const Vector Kx = K.apply(x);
  Vector y(Lx.size());
  for (std::size_t p = 0; p < y.size(); ++p) y[p] = theta * Lx[p] + (1.0 - theta) * Kx[p];
  return y;
}

/// The matrix theta * L + (1 - theta) * K.
inline DenseMatrix homotopy_matrix(const DenseMatrix& K, const DenseMatrix& L, double theta) {
  if (K.size() != L.size()) throw DimensionMismatch("K and L dimensions differ");
  std::vector<double> m(K.size() * K.size());
  for (std::size_t idx = 0; idx < m.size(); ++idx)
    m[idx] = theta * L.entries()[idx] + (1.0 - theta) * K.entries()[idx];
  return DenseMatrix(K.size(), std::move(m));
}

/// K, L, an eigenbasis of K and the projections the series recursion needs.
class HomotopyProblem {
 public:
  HomotopyProblem(DenseMatrix K, DenseMatrix L, EigenBasis basis, const Tolerances& tol = {})
      : K_(std::move(K)), L_(std::move(L)), basis_(std::move(basis)), tol_(tol) {
    if (K_.size() != L_.size()) throw DimensionMismatch("K and L dimensions differ");
    basis_.check_against(K_, tol_.eig);
    X_ = interaction_matrix(L_, basis_);
    coupling_ = project_onto_basis(L_ - K_, basis_);
  }

  std::size_t size() const { return K_.size(); }
  const DenseMatrix& K() const { return K_; }
  const DenseMatrix& L() const { return L_; }
  const EigenBasis& basis() const { return basis_; }
  const InteractionMatrix& interaction() const { return X_; }
  const Tolerances& tolerances() const { return tol_; }

  /// W[m][n] = <(L - K) e_m, e_n>. Equal to X - diag(lambda(0)) for an exact eigenbasis,
  /// and exactly zero when L == K.
  const DenseMatrix& coupling() const { return coupling_; }

 private:
  DenseMatrix K_, L_;
  EigenBasis basis_;
  Tolerances tol_;
  InteractionMatrix X_;
  DenseMatrix coupling_;
};

}  // namespace homeig
