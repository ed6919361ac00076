#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sv {

/// Execution policy for the dual-implementation kernels. The serial variants
/// are the reference implementations kept for tests and benchmarks; the
/// parallel variants are the production path.
enum class Exec { serial, parallel };

/// Dense row-major matrix. Rows are contiguous so the Cholesky and matvec
/// inner loops run over contiguous memory.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

  double* row(std::size_t i) { return a_.data() + i * cols_; }
  const double* row(std::size_t i) const { return a_.data() + i * cols_; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

/// Lower Cholesky factor L with C = L·Lᵗ.
/// Each entry is a serial dot product over a row prefix, so the result is
/// bit-identical for any thread count. Throws not_positive_definite when a
/// pivot is non-positive or non-finite.
Matrix cholesky_lower(const Matrix& c, Exec exec = Exec::parallel);

/// Like cholesky_lower, but on failure retries once with `jitter` added to
/// the diagonal before giving up.
Matrix cholesky_lower_jittered(const Matrix& c, double jitter,
                               Exec exec = Exec::parallel);

/// Solve L·x = y by forward substitution (no explicit inverse).
std::vector<double> forward_substitute(const Matrix& lower,
                                       std::span<const double> y);

/// y = L·x for a lower-triangular L. Row dot products are serial, rows are
/// independent, so serial and parallel paths agree bitwise.
std::vector<double> lower_matvec(const Matrix& lower, std::span<const double> x,
                                 Exec exec = Exec::parallel);

}  // namespace sv
