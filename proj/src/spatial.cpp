#include "svboot/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "svboot/errors.hpp"

namespace sv {

namespace {

double euclid(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

constexpr std::size_t kRowBlock = 64;

}  // namespace

SpatialDataset::SpatialDataset(std::vector<Point> coords,
                               std::vector<double> values)
    : coords_(std::move(coords)), values_(std::move(values)) {
  if (coords_.size() != values_.size()) {
    throw domain_error("SpatialDataset: coords and values differ in length");
  }
  if (coords_.size() < 2) {
    throw domain_error("SpatialDataset: need at least 2 points");
  }
  for (const auto& p : coords_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw domain_error("SpatialDataset: non-finite coordinate");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw domain_error("SpatialDataset: non-finite attribute value");
    }
  }
}

LagGrid::LagGrid(double max_dist, std::size_t n_lags) : max_dist_(max_dist) {
  if (!(max_dist > 0.0) || !std::isfinite(max_dist)) {
    throw domain_error("LagGrid: max_dist must be positive and finite");
  }
  if (n_lags < 1) {
    throw domain_error("LagGrid: need at least one lag");
  }
  edges_.resize(n_lags + 1);
  centers_.resize(n_lags);
  for (std::size_t k = 0; k <= n_lags; ++k) {
    edges_[k] = max_dist * static_cast<double>(k) / static_cast<double>(n_lags);
  }
  edges_.front() = 0.0;
  edges_.back() = max_dist;
  for (std::size_t k = 0; k < n_lags; ++k) {
    centers_[k] = 0.5 * (edges_[k] + edges_[k + 1]);
  }
}

std::ptrdiff_t LagGrid::bin_of(double d) const {
  if (!(d > 0.0) || d > max_dist_) {
    return -1;
  }
  // First edge >= d, searched past the leading 0 edge; exact on boundaries.
  const auto it = std::lower_bound(edges_.begin() + 1, edges_.end(), d);
  return (it - edges_.begin()) - 1;
}

std::vector<PairDistance> pairwise_distances(const SpatialDataset& data) {
  const std::size_t n = data.size();
  std::vector<PairDistance> out;
  out.reserve(n * (n - 1) / 2);
  const auto& pts = data.coords();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out.push_back({static_cast<std::uint32_t>(i),
                     static_cast<std::uint32_t>(j), euclid(pts[i], pts[j])});
    }
  }
  return out;
}

BinnedPairs bin_pairs(std::span<const Point> coords, const LagGrid& grid) {
  BinnedPairs bp;
  bp.counts.assign(grid.n_lags(), 0);
  const std::size_t n = coords.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::ptrdiff_t k = grid.bin_of(euclid(coords[i], coords[j]));
      if (k < 0) {
        continue;
      }
      bp.i.push_back(static_cast<std::uint32_t>(i));
      bp.j.push_back(static_cast<std::uint32_t>(j));
      bp.bin.push_back(static_cast<std::uint32_t>(k));
      ++bp.counts[static_cast<std::size_t>(k)];
    }
  }
  return bp;
}

namespace {

EmpiricalVariogram assemble(const LagGrid& grid, std::vector<double> sums,
                            std::vector<std::int64_t> counts) {
  const std::size_t nbins = grid.n_lags();
  EmpiricalVariogram ev{grid, std::vector<double>(nbins), std::move(counts)};
  bool any = false;
  for (std::size_t k = 0; k < nbins; ++k) {
    if (ev.pair_counts[k] > 0) {
      ev.gamma_hat[k] =
          sums[k] / (2.0 * static_cast<double>(ev.pair_counts[k]));
      any = true;
    } else {
      ev.gamma_hat[k] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (!any) {
    throw all_bins_empty("empirical_variogram: no pair inside (0, max_dist]");
  }
  return ev;
}

}  // namespace

EmpiricalVariogram empirical_variogram(const SpatialDataset& data,
                                       const LagGrid& grid, Exec exec) {
  const std::size_t n = data.size();
  const std::size_t nbins = grid.n_lags();
  const auto& pts = data.coords();
  const auto& z = data.values();

  if (exec == Exec::serial) {
    std::vector<double> sums(nbins, 0.0);
    std::vector<std::int64_t> counts(nbins, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::ptrdiff_t k = grid.bin_of(euclid(pts[i], pts[j]));
        if (k < 0) {
          continue;
        }
        const double dz = z[i] - z[j];
        sums[static_cast<std::size_t>(k)] += dz * dz;
        ++counts[static_cast<std::size_t>(k)];
      }
    }
    return assemble(grid, std::move(sums), std::move(counts));
  }

  // Fixed-size row blocks, merged in block order: the accumulation order is
  // a function of the data alone, never of the thread count.
  const std::size_t nblocks = (n + kRowBlock - 1) / kRowBlock;
  std::vector<std::vector<double>> block_sums(nblocks,
                                              std::vector<double>(nbins, 0.0));
  std::vector<std::vector<std::int64_t>> block_counts(
      nblocks, std::vector<std::int64_t>(nbins, 0));

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
    auto& sums = block_sums[b];
    auto& counts = block_counts[b];
    const std::size_t i_end = std::min(n, (b + 1) * kRowBlock);
    for (std::size_t i = b * kRowBlock; i < i_end; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::ptrdiff_t k = grid.bin_of(euclid(pts[i], pts[j]));
        if (k < 0) {
          continue;
        }
        const double dz = z[i] - z[j];
        sums[static_cast<std::size_t>(k)] += dz * dz;
        ++counts[static_cast<std::size_t>(k)];
      }
    }
  }

  std::vector<double> sums(nbins, 0.0);
  std::vector<std::int64_t> counts(nbins, 0);
  for (std::size_t b = 0; b < nblocks; ++b) {
    for (std::size_t k = 0; k < nbins; ++k) {
      sums[k] += block_sums[b][k];
      counts[k] += block_counts[b][k];
    }
  }
  return assemble(grid, std::move(sums), std::move(counts));
}

EmpiricalVariogram empirical_variogram_from_pairs(const BinnedPairs& pairs,
                                                  std::span<const double> values,
                                                  const LagGrid& grid) {
  std::vector<double> sums(grid.n_lags(), 0.0);
  const std::size_t m = pairs.i.size();
  for (std::size_t p = 0; p < m; ++p) {
    const double dz = values[pairs.i[p]] - values[pairs.j[p]];
    sums[pairs.bin[p]] += dz * dz;
  }
  return assemble(grid, std::move(sums), pairs.counts);
}

double sample_variance(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) {
    throw domain_error("sample_variance: need at least 2 values");
  }
  double mean = 0.0;
  for (double v : values) {
    mean += v;
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(n - 1);
}

}  // namespace sv
