#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "homeig/evaluation.hpp"
#include "homeig/oracle.hpp"

namespace homeig {

struct OracleComparison {
  std::size_t index = 0;
  double oracle_lambda = 0.0;
  double lambda_error = 0.0;  // absolute
  double vector_error = 0.0;  // 2-norm of the difference of sign-canonical unit vectors
  double min_overlap = 1.0;
  bool ambiguous = false;
};

/// Series eigenpairs against the oracle decomposition of M(theta), matched by overlap.
inline std::vector<OracleComparison> compare_with_oracle(const std::vector<EigenpairResult>& results,
                                                         const DenseMatrix& K,
                                                         const DenseMatrix& L, double theta) {
  const auto dec = combo_eigen(K, L, theta);
  std::vector<Vector> reference;
  reference.reserve(results.size());
  for (const auto& r : results) reference.push_back(r.vector);
  const auto match = match_pairs(reference, dec);

  std::vector<OracleComparison> out;
  out.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::size_t j = match.permutation[i];
    OracleComparison c;
    c.index = results[i].index;
    c.oracle_lambda = dec.values[j];
    c.lambda_error = std::abs(results[i].lambda_value - dec.values[j]);
    Vector diff = results[i].vector;
    for (std::size_t p = 0; p < diff.size(); ++p) diff[p] -= dec.vectors[j][p];
    c.vector_error = norm2(diff);
    c.min_overlap = match.min_overlap;
    c.ambiguous = match.ambiguous;
    out.push_back(c);
  }
  return out;
}

}  // namespace homeig
