#include "svboot/linalg.hpp"

#include <cmath>
#include <cstdint>

#include "svboot/errors.hpp"

namespace sv {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    s += a[k] * b[k];
  }
  return s;
}

}  // namespace

Matrix cholesky_lower(const Matrix& c, Exec exec) {
  if (c.rows() != c.cols()) {
    throw domain_error("cholesky_lower: matrix must be square");
  }
  const std::int64_t n = static_cast<std::int64_t>(c.rows());
  Matrix lower(n, n, 0.0);

  for (std::int64_t j = 0; j < n; ++j) {
    const double* lj = lower.row(j);
    const double pivot = c(j, j) - dot(lj, lj, j);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw not_positive_definite("cholesky_lower: non-positive pivot at row " +
                                  std::to_string(j));
    }
    const double ljj = std::sqrt(pivot);
    lower(j, j) = ljj;

    // Column work shrinks as j grows; below the cutoff the parallel-for
    // barrier costs more than the column, so fall back to the serial loop
    // (same arithmetic, identical result).
    if (exec == Exec::parallel && (n - j) * j > 64 * 1024) {
#pragma omp parallel for schedule(static)
      for (std::int64_t i = j + 1; i < n; ++i) {
        lower(i, j) = (c(i, j) - dot(lower.row(i), lj, j)) / ljj;
      }
    } else {
      for (std::int64_t i = j + 1; i < n; ++i) {
        lower(i, j) = (c(i, j) - dot(lower.row(i), lj, j)) / ljj;
      }
    }
  }
  return lower;
}

Matrix cholesky_lower_jittered(const Matrix& c, double jitter, Exec exec) {
  try {
    return cholesky_lower(c, exec);
  } catch (const not_positive_definite&) {
    Matrix bumped = c;
    for (std::size_t i = 0; i < bumped.rows(); ++i) {
      bumped(i, i) += jitter;
    }
    return cholesky_lower(bumped, exec);
  }
}

std::vector<double> forward_substitute(const Matrix& lower,
                                       std::span<const double> y) {
  const std::size_t n = lower.rows();
  if (y.size() != n) {
    throw length_mismatch("forward_substitute: vector length != matrix size");
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = dot(lower.row(i), x.data(), i);
    x[i] = (y[i] - s) / lower(i, i);
  }
  return x;
}

std::vector<double> lower_matvec(const Matrix& lower, std::span<const double> x,
                                 Exec exec) {
  const std::int64_t n = static_cast<std::int64_t>(lower.rows());
  if (x.size() != lower.rows()) {
    throw length_mismatch("lower_matvec: vector length != matrix size");
  }
  std::vector<double> y(n);
  if (exec == Exec::parallel && n >= 512) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      y[i] = dot(lower.row(i), x.data(), i + 1);
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      y[i] = dot(lower.row(i), x.data(), i + 1);
    }
  }
  return y;
}

}  // namespace sv
