#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "homeig/dense.hpp"
#include "homeig/errors.hpp"
#include "homeig/operator_core.hpp"
#include "homeig/series.hpp"

namespace homeig {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Coefficients below this magnitude are ignored by the radius fit.
inline constexpr double kUnderflowFloor = 1e-300;

struct EigenpairResult {
  std::size_t index = 0;  // zero-based
  double theta = 1.0;
  double lambda_value = 0.0;
  Vector vector;            // unit 2-norm, largest-magnitude entry positive
  Vector raw_gauge_vector;  // <x, e_i> = 1
  Vector lambda_coefficients;
  double residual = 0.0;
  double radius_estimate = kInfinity;
  double tail_estimate = 0.0;
  bool converged = false;
};

/// Horner evaluation of sum_r a(i,r) theta^r.
inline double eval_lambda(const SeriesCoefficients& coeffs, std::size_t i, double theta) {
  const auto a = coeffs.lambda_series(i);
  double acc = 0.0;
  for (std::size_t r = a.size(); r-- > 0;) acc = acc * theta + a[r];
  return acc;
}

struct EigenvectorValue {
  Vector raw;   // sum_j phi_{i,j}(theta) e_j
  Vector unit;  // raw / ||raw||, sign-canonical
};

inline EigenvectorValue eval_eigenvector(const SeriesCoefficients& coeffs, const EigenBasis& basis,
                                         std::size_t i, double theta) {
  const std::size_t n = coeffs.size();
  if (basis.size() != n) throw DimensionMismatch("basis and coefficients dimensions differ");
  EigenvectorValue out{Vector(n, 0.0), {}};
  for (std::size_t j = 0; j < n; ++j) {
    const auto bj = coeffs.coordinate_series(i, j);
    double phi = 0.0;
    for (std::size_t r = bj.size(); r-- > 0;) phi = phi * theta + bj[r];
    if (phi == 0.0) continue;
    const auto e = basis.vector(j);
    for (std::size_t p = 0; p < n; ++p) out.raw[p] += phi * e[p];
  }
  const double norm = norm2(out.raw);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw ZeroVector("eigenvector " + std::to_string(i + 1) + " has norm " + std::to_string(norm));
  out.unit = out.raw;
  for (double& x : out.unit) x /= norm;
  canonicalize_sign(out.unit);
  return out;
}

/// ||M(theta) x - lambda x|| / max(1, ||x|| * maxabs(M(theta))), from K and L directly.
inline double residual(const DenseMatrix& K, const DenseMatrix& L, double theta, double lambda,
                       std::span<const double> x) {
  Vector r = homotopy_apply(K, L, theta, x);
  for (std::size_t p = 0; p < r.size(); ++p) r[p] -= lambda * x[p];
  double scale = 0.0;
  for (std::size_t idx = 0; idx < K.entries().size(); ++idx)
    scale = std::max(scale, std::abs(theta * L.entries()[idx] + (1.0 - theta) * K.entries()[idx]));
  return norm2(r) / std::max(1.0, norm2(x) * scale);
}

/// Heuristic convergence radius of the index-i series: exp(-slope) of a least-squares line
/// through log c_r over the last `window` orders, c_r = max(|a(i,r)|, max_k |b(i,k,r)|).
/// Returns +inf when every tail coefficient is below the underflow floor.
inline double estimate_radius(const SeriesCoefficients& coeffs, std::size_t i,
                              std::size_t window = 8) {
  if (window < 3) throw InvalidArgument("radius window must be at least 3");
  const std::size_t R = coeffs.order();
  if (R < window + 2) throw InsufficientOrder(R, window);

  std::vector<double> xs, ys;
  for (std::size_t r = R + 1 - window; r <= R; ++r) {
    const double c = coeffs.magnitude(i, r);
    if (c > kUnderflowFloor) {
      xs.push_back(static_cast<double>(r));
      ys.push_back(std::log(c));
    }
  }
  if (xs.empty()) return kInfinity;
  if (xs.size() == 1) return std::exp(-ys[0] / xs[0]);  // root test on the lone survivor

  const double count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t p = 0; p < xs.size(); ++p) {
    mx += xs[p];
    my += ys[p];
  }
  mx /= count;
  my /= count;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t p = 0; p < xs.size(); ++p) {
    sxy += (xs[p] - mx) * (ys[p] - my);
    sxx += (xs[p] - mx) * (xs[p] - mx);
  }
  return std::exp(-sxy / sxx);
}

/// Geometric tail bound c_R theta^R q / (1 - q), q = theta / radius; +inf outside the disk.
inline double tail_estimate(const SeriesCoefficients& coeffs, std::size_t i, double theta,
                            double radius) {
  if (theta < 0.0) throw InvalidArgument("tail estimate needs theta >= 0");
  if (theta >= radius) return kInfinity;
  const std::size_t R = coeffs.order();
  const double cR = coeffs.magnitude(i, R);
  if (cR == 0.0) return 0.0;
  const double q = theta / radius;
  return cR * std::pow(theta, static_cast<double>(R)) * q / (1.0 - q);
}

struct SolveOptions {
  double convergence_tol = 1e-9;
  std::size_t window = 8;
  SeriesOptions series = {};
};

/// Largest admissible radius window for a given order, clamped to [3, requested].
inline std::size_t radius_window(std::size_t order, std::size_t requested) {
  if (order < 5) throw InsufficientOrder(order, 3);
  return std::min(requested, order - 2);
}

/// Evaluates already computed coefficients at theta and scores each eigenpair.
inline std::vector<EigenpairResult> evaluate_results(const HomotopyProblem& problem,
                                                     const SeriesCoefficients& coeffs,
                                                     double theta, const SolveOptions& options) {
  const std::size_t window = radius_window(coeffs.order(), options.window);
  std::vector<EigenpairResult> results;
  results.reserve(problem.size());
  for (std::size_t i = 0; i < problem.size(); ++i) {
    EigenpairResult res;
    res.index = i;
    res.theta = theta;
    res.lambda_value = eval_lambda(coeffs, i, theta);
    const auto lc = coeffs.lambda_series(i);
    res.lambda_coefficients.assign(lc.begin(), lc.end());
    auto vec = eval_eigenvector(coeffs, problem.basis(), i, theta);
    res.raw_gauge_vector = std::move(vec.raw);
    res.vector = std::move(vec.unit);
    res.residual = residual(problem.K(), problem.L(), theta, res.lambda_value, res.vector);
    res.radius_estimate = estimate_radius(coeffs, i, window);
    res.tail_estimate = tail_estimate(coeffs, i, std::abs(theta), res.radius_estimate);
    res.converged = std::isfinite(res.lambda_value) && std::abs(theta) < res.radius_estimate &&
                    res.tail_estimate <= options.convergence_tol;
    results.push_back(std::move(res));
  }
  return results;
}

inline std::vector<EigenpairResult> solve_at(const HomotopyProblem& problem, std::size_t order,
                                             double theta, const SolveOptions& options = {}) {
  radius_window(order, options.window);
  const auto coeffs = compute_coefficients(problem, order, options.series);
  return evaluate_results(problem, coeffs, theta, options);
}

/// Eigenpairs of L: the series evaluated at theta = 1.
inline std::vector<EigenpairResult> solve_at_one(const HomotopyProblem& problem,
                                                 std::size_t order,
                                                 double convergence_tol = 1e-9) {
  SolveOptions options;
  options.convergence_tol = convergence_tol;
  return solve_at(problem, order, 1.0, options);
}

}  // namespace homeig
