#pragma once

// Test-only reference implementations, independent of the library code they
// check.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "svboot/rng.hpp"
#include "svboot/spatial.hpp"

namespace oracle {

/// Brute-force Matheron estimate: per bin, a full scan over all pairs with
/// the textbook membership test edge[k] < d <= edge[k+1].
struct BruteVariogram {
  std::vector<double> gamma;
  std::vector<std::int64_t> counts;
};

inline BruteVariogram brute_force_variogram(const std::vector<sv::Point>& pts,
                                            const std::vector<double>& z,
                                            const std::vector<double>& edges) {
  const std::size_t nbins = edges.size() - 1;
  BruteVariogram out;
  out.gamma.assign(nbins, std::nan(""));
  out.counts.assign(nbins, 0);
  for (std::size_t k = 0; k < nbins; ++k) {
    double sum = 0.0;
    std::int64_t count = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const double dx = pts[i].x - pts[j].x;
        const double dy = pts[i].y - pts[j].y;
        const double d = std::sqrt(dx * dx + dy * dy);
        if (d > edges[k] && d <= edges[k + 1] && d > 0.0) {
          const double dz = z[i] - z[j];
          sum += dz * dz;
          ++count;
        }
      }
    }
    out.counts[k] = count;
    if (count > 0) {
      out.gamma[k] = sum / (2.0 * static_cast<double>(count));
    }
  }
  return out;
}

/// Empirical quantile as the ceil(p*n)-th order statistic (1-based).
inline double empirical_quantile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(xs.size())));
  return xs[rank == 0 ? 0 : rank - 1];
}

inline double mean_of(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) {
    m += x;
  }
  return m / static_cast<double>(xs.size());
}

inline double sd_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) {
    ss += (x - m) * (x - m);
  }
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

/// Random spatial dataset on a square of the given side.
inline std::pair<std::vector<sv::Point>, std::vector<double>> random_dataset(
    std::size_t n, double side, sv::RngStream& stream) {
  std::vector<sv::Point> pts(n);
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = {side * stream.u01(), side * stream.u01()};
    z[i] = 10.0 * stream.normal();
  }
  return {std::move(pts), std::move(z)};
}

}  // namespace oracle
