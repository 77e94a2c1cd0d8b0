#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "homeig/dense.hpp"
#include "homeig/errors.hpp"
#include "homeig/evaluation.hpp"
#include "homeig/operator_core.hpp"
#include "homeig/oracle.hpp"
#include "homeig/series.hpp"

namespace homeig {

/// Breakpoints 0 = theta_0 < ... < theta_S = 1 with a series order and convergence
/// tolerance per stage.
struct StagePlan {
  std::vector<double> breakpoints;
  std::vector<std::size_t> orders;
  std::vector<double> tolerances;

  std::size_t stages() const { return breakpoints.empty() ? 0 : breakpoints.size() - 1; }

  static StagePlan uniform(std::size_t stages, std::size_t order, double tol = 1e-9) {
    if (stages == 0) throw InvalidArgument("stage plan needs at least one stage");
    StagePlan plan;
    for (std::size_t s = 0; s <= stages; ++s)
      plan.breakpoints.push_back(static_cast<double>(s) / static_cast<double>(stages));
    plan.breakpoints.back() = 1.0;
    plan.orders.assign(stages, order);
    plan.tolerances.assign(stages, tol);
    return plan;
  }

  void validate() const {
    if (breakpoints.size() < 2) throw InvalidArgument("stage plan needs at least one stage");
    if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
      throw InvalidArgument("stage plan must run from 0 to 1");
    for (std::size_t s = 0; s + 1 < breakpoints.size(); ++s) {
      const double step = breakpoints[s + 1] - breakpoints[s];
      if (!(step > 0.0 && step <= 1.0))
        throw InvalidArgument("stage breakpoints must be strictly increasing");
    }
    if (orders.size() != stages() || tolerances.size() != stages())
      throw InvalidArgument("stage plan needs one order and one tolerance per stage");
  }
};

/// (1 - t) K_s + t L with K_s = M(theta_s). Equals M(theta_s + t (1 - theta_s)).
inline DenseMatrix stage_operator(const DenseMatrix& K, const DenseMatrix& L, double theta_s,
                                  double t) {
  return homotopy_matrix(homotopy_matrix(K, L, theta_s), L, t);
}

/// Local parameter at which a stage starting at theta_s reaches theta_next.
inline double local_target(double theta_s, double theta_next) {
  return (theta_next - theta_s) / (1.0 - theta_s);
}

struct StageReport {
  double theta_start = 0.0;
  double theta_end = 1.0;
  double local_t = 1.0;
  double min_radius = kInfinity;  // in local units
  double max_tail = 0.0;
};

struct StagedResult {
  std::vector<EigenpairResult> results;
  std::vector<StageReport> stages;
};

namespace detail {

inline void require_symmetric_pair(const DenseMatrix& K, const DenseMatrix& L,
                                   const Tolerances& tol) {
  if (!K.is_symmetric(tol.sym)) throw NotSymmetric(K.asymmetry(), "K");
  if (!L.is_symmetric(tol.sym)) throw NotSymmetric(L.asymmetry(), "L");
  if (K.size() != L.size()) throw DimensionMismatch("K and L dimensions differ");
}

inline SeriesCoefficients stage_coefficients(const HomotopyProblem& problem, std::size_t order,
                                             std::size_t stage) {
  try {
    return compute_coefficients(problem, order);
  } catch (const DegenerateBaseSpectrum& e) {
    throw e.at_stage(stage);
  }
}

/// Next stage problem: evaluated vectors at local t, modified Gram-Schmidt in index order,
/// Rayleigh quotients against M(theta_next). The stage K is rebuilt as V diag(lambda) V^T so
/// that the basis is an exact eigenbasis of the operator the recursion assumes.
inline HomotopyProblem rebase(const HomotopyProblem& problem, const SeriesCoefficients& coeffs,
                              const DenseMatrix& K, const DenseMatrix& L, double theta_next,
                              double t, std::size_t stage, const Tolerances& tol) {
  const std::size_t n = problem.size();
  std::vector<Vector> vs(n);
  for (std::size_t i = 0; i < n; ++i) vs[i] = eval_eigenvector(coeffs, problem.basis(), i, t).unit;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double proj = dot(vs[j], vs[i]);
      for (std::size_t p = 0; p < n; ++p) vs[i][p] -= proj * vs[j][p];
    }
    const double pivot = norm2(vs[i]);
    if (pivot < 1e-8) throw ReorthonormalizationFailure(stage, i, pivot);
    for (double& x : vs[i]) x /= pivot;
  }

  const DenseMatrix Ks = homotopy_matrix(K, L, theta_next);
  Vector values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = dot(Ks.apply(vs[i]), vs[i]);

  DenseMatrix rebuilt(n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p; q < n; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += values[i] * vs[i][p] * vs[i][q];
      rebuilt(p, q) = s;
      rebuilt(q, p) = s;
    }
  EigenBasis basis = EigenBasis::with_values(rebuilt, std::move(vs), std::move(values), tol);
  return HomotopyProblem(std::move(rebuilt), L, std::move(basis), tol);
}

inline StageReport summarize(const std::vector<EigenpairResult>& results, double theta_start,
                             double theta_end, double t) {
  StageReport report{theta_start, theta_end, t, kInfinity, 0.0};
  for (const auto& r : results) {
    report.min_radius = std::min(report.min_radius, r.radius_estimate);
    report.max_tail = std::max(report.max_tail, r.tail_estimate);
  }
  return report;
}

}  // namespace detail

/// Staged homotopy from K to L. Stage 0 uses the oracle basis of K; every later stage
/// restarts the series from the re-orthonormalized eigenvectors of the previous stage.
/// Results are indexed by K's ascending eigenvalue order and scored against L directly.
inline StagedResult staged_solve(const DenseMatrix& K, const DenseMatrix& L,
                                 const StagePlan& plan, const Tolerances& tol = {}) {
  detail::require_symmetric_pair(K, L, tol);
  plan.validate();

  StagedResult out;
  HomotopyProblem problem(K, L, oracle_basis(K, tol), tol);
  const std::size_t S = plan.stages();
  for (std::size_t s = 0; s < S; ++s) {
    const double theta_s = plan.breakpoints[s];
    const double theta_next = plan.breakpoints[s + 1];
    const double t = s + 1 == S ? 1.0 : local_target(theta_s, theta_next);
    const auto coeffs = detail::stage_coefficients(problem, plan.orders[s], s);
    SolveOptions options;
    options.convergence_tol = plan.tolerances[s];
    auto results = evaluate_results(problem, coeffs, t, options);
    out.stages.push_back(detail::summarize(results, theta_s, theta_next, t));
    if (s + 1 == S) {
      out.results = std::move(results);
      break;
    }
    problem = detail::rebase(problem, coeffs, K, L, theta_next, t, s + 1, tol);
  }
  return out;
}

/// Chooses breakpoints so each stage steps a `safety` fraction of its estimated radius.
inline StagePlan auto_stage(const DenseMatrix& K, const DenseMatrix& L, std::size_t order,
                            double safety = 0.5, double convergence_tol = 1e-9,
                            const Tolerances& tol = {}) {
  if (!(safety > 0.0 && safety < 1.0)) throw InvalidArgument("auto_stage: safety must be in (0, 1)");
  detail::require_symmetric_pair(K, L, tol);
  const std::size_t window = radius_window(order, 8);

  StagePlan plan;
  plan.breakpoints.push_back(0.0);
  HomotopyProblem problem(K, L, oracle_basis(K, tol), tol);
  double theta = 0.0;
  for (std::size_t s = 0;; ++s) {
    const auto coeffs = detail::stage_coefficients(problem, order, s);
    double rho = kInfinity;
    for (std::size_t i = 0; i < problem.size(); ++i)
      rho = std::min(rho, estimate_radius(coeffs, i, window));
    const double next = std::min(1.0, theta + safety * rho * (1.0 - theta));
    if (next < 1.0 && next - theta < 1e-3) throw StallError(theta, next - theta);
    plan.breakpoints.push_back(next);
    plan.orders.push_back(order);
    plan.tolerances.push_back(convergence_tol);
    if (next == 1.0) break;
    problem = detail::rebase(problem, coeffs, K, L, next, local_target(theta, next), s + 1, tol);
    theta = next;
  }
  return plan;
}

struct TrajectoryRow {
  double theta = 0.0;
  std::size_t index = 0;  // zero-based
  double lambda_series = 0.0;
  std::optional<double> lambda_oracle;
  double residual = 0.0;
};

struct TrajectoryTable {
  std::vector<TrajectoryRow> rows;
};

/// Series values of every eigenpair along `grid`, optionally next to oracle eigenvalues of
/// M(theta) matched by eigenvector overlap. The oracle column is left empty when K or L is
/// not symmetric or the match at that theta is ambiguous.
inline TrajectoryTable sweep(const HomotopyProblem& problem, std::span<const double> grid,
                             std::size_t order, bool with_oracle) {
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!std::isfinite(grid[g])) throw InvalidArgument("sweep grid values must be finite");
    if (g > 0 && grid[g] < grid[g - 1]) throw InvalidArgument("sweep grid must be ascending");
  }
  TrajectoryTable table;
  if (grid.empty()) return table;

  const auto coeffs = compute_coefficients(problem, order);
  const auto& tol = problem.tolerances();
  const bool oracle_ok = with_oracle && problem.K().is_symmetric(tol.sym) &&
                         problem.L().is_symmetric(tol.sym);
  const std::size_t n = problem.size();

  for (double theta : grid) {
    std::vector<Vector> units(n);
    std::vector<TrajectoryRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double lambda = eval_lambda(coeffs, i, theta);
      auto vec = eval_eigenvector(coeffs, problem.basis(), i, theta);
      rows[i] = {theta, i, lambda, std::nullopt,
                 residual(problem.K(), problem.L(), theta, lambda, vec.unit)};
      units[i] = std::move(vec.unit);
    }
    if (oracle_ok) {
      const auto dec = combo_eigen(problem.K(), problem.L(), theta);
      const auto match = match_pairs(units, dec);
      if (!match.ambiguous)
        for (std::size_t i = 0; i < n; ++i) rows[i].lambda_oracle = dec.values[match.permutation[i]];
    }
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

}  // namespace homeig
