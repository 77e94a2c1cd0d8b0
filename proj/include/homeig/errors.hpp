#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

// Exception hierarchy for the homeig library. Index fields are zero-based;
// messages print them one-based, matching the CLI and report output.
namespace homeig {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what,
                             std::optional<std::size_t> index = std::nullopt)
      : Error(index ? what + " (vector " + std::to_string(*index + 1) + ")" : what),
        index_(index) {}
  std::optional<std::size_t> index() const { return index_; }

 private:
  std::optional<std::size_t> index_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NonFiniteEntry : public Error {
 public:
  NonFiniteEntry(std::size_t row, std::size_t col)
      : Error("non-finite matrix entry at (" + std::to_string(row + 1) + ", " +
              std::to_string(col + 1) + ")"),
        row_(row), col_(col) {}
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_, col_;
};

class NotAnEigenbasis : public Error {
 public:
  NotAnEigenbasis(std::size_t index, double residual)
      : Error("vector " + std::to_string(index + 1) +
              " is not an eigenvector of K (residual " + std::to_string(residual) + ")"),
        index_(index), residual_(residual) {}
  std::size_t index() const { return index_; }
  double residual() const { return residual_; }

 private:
  std::size_t index_;
  double residual_;
};

class NotOrthonormal : public Error {
 public:
  NotOrthonormal(std::size_t m, std::size_t n, double value)
      : Error("basis is not orthonormal: <e" + std::to_string(m + 1) + ", e" +
              std::to_string(n + 1) + "> = " + std::to_string(value)),
        m_(m), n_(n), value_(value) {}
  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }
  double value() const { return value_; }

 private:
  std::size_t m_, n_;
  double value_;
};

class DegenerateBaseSpectrum : public Error {
 public:
  DegenerateBaseSpectrum(std::size_t i, std::size_t k, double gap,
                         std::optional<std::size_t> stage = std::nullopt)
      : Error(message(i, k, gap, stage)), i_(i), k_(k), gap_(gap), stage_(stage) {}
  std::size_t i() const { return i_; }
  std::size_t k() const { return k_; }
  double gap() const { return gap_; }
  std::optional<std::size_t> stage() const { return stage_; }

  DegenerateBaseSpectrum at_stage(std::size_t stage) const {
    return DegenerateBaseSpectrum(i_, k_, gap_, stage);
  }

 private:
  static std::string message(std::size_t i, std::size_t k, double gap,
                             std::optional<std::size_t> stage) {
    std::string msg = "degenerate base spectrum: eigenvalues " + std::to_string(i + 1) +
                      " and " + std::to_string(k + 1) + " differ by " + std::to_string(gap);
    if (stage) msg += " at stage " + std::to_string(*stage);
    return msg;
  }
  std::size_t i_, k_;
  double gap_;
  std::optional<std::size_t> stage_;
};

// k is empty for an eigenvalue coefficient a(i, r).
class NonFiniteCoefficient : public Error {
 public:
  NonFiniteCoefficient(std::size_t i, std::optional<std::size_t> k, std::size_t r)
      : Error(k ? "non-finite coefficient b(" + std::to_string(i + 1) + ", " +
                      std::to_string(*k + 1) + ", " + std::to_string(r) + ")"
                : "non-finite coefficient a(" + std::to_string(i + 1) + ", " +
                      std::to_string(r) + ")"),
        i_(i), k_(k), r_(r) {}
  std::size_t i() const { return i_; }
  std::optional<std::size_t> k() const { return k_; }
  std::size_t r() const { return r_; }

 private:
  std::size_t i_;
  std::optional<std::size_t> k_;
  std::size_t r_;
};

class ZeroVector : public Error {
 public:
  using Error::Error;
};

class InsufficientOrder : public Error {
 public:
  InsufficientOrder(std::size_t order, std::size_t window)
      : Error("series order " + std::to_string(order) + " too low for radius window " +
              std::to_string(window) + " (need order >= window + 2)"),
        order_(order), window_(window) {}
  std::size_t order() const { return order_; }
  std::size_t window() const { return window_; }

 private:
  std::size_t order_, window_;
};

class NotSymmetric : public Error {
 public:
  explicit NotSymmetric(double asymmetry, const std::string& name = "matrix")
      : Error(name + " is not symmetric (max asymmetry " + std::to_string(asymmetry) + ")"),
        asymmetry_(asymmetry) {}
  double asymmetry() const { return asymmetry_; }

 private:
  double asymmetry_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(int sweeps, double off_norm)
      : Error("Jacobi iteration did not converge after " + std::to_string(sweeps) +
              " sweeps (off-diagonal norm " + std::to_string(off_norm) + ")"),
        sweeps_(sweeps), off_norm_(off_norm) {}
  int sweeps() const { return sweeps_; }
  double off_norm() const { return off_norm_; }

 private:
  int sweeps_;
  double off_norm_;
};

class AmbiguousMatch : public Error {
 public:
  explicit AmbiguousMatch(double min_overlap)
      : Error("eigenvector matching is ambiguous (minimum overlap " +
              std::to_string(min_overlap) + ")"),
        min_overlap_(min_overlap) {}
  double min_overlap() const { return min_overlap_; }

 private:
  double min_overlap_;
};

class ReorthonormalizationFailure : public Error {
 public:
  ReorthonormalizationFailure(std::size_t stage, std::size_t index, double pivot)
      : Error("Gram-Schmidt pivot " + std::to_string(pivot) + " for vector " +
              std::to_string(index + 1) + " at stage " + std::to_string(stage) +
              ": stage basis collapsed"),
        stage_(stage), index_(index), pivot_(pivot) {}
  std::size_t stage() const { return stage_; }
  std::size_t index() const { return index_; }
  double pivot() const { return pivot_; }

 private:
  std::size_t stage_, index_;
  double pivot_;
};

class StallError : public Error {
 public:
  StallError(double theta, double step)
      : Error("automatic staging stalled at theta = " + std::to_string(theta) +
              " (step " + std::to_string(step) + ")"),
        theta_(theta), step_(step) {}
  double theta() const { return theta_; }
  double step() const { return step_; }

 private:
  double theta_, step_;
};

}  // namespace homeig
