#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "svboot/linalg.hpp"

namespace sv {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Planar coordinates plus one attribute value per point.
/// Validated at construction: equal lengths, N >= 2, all entries finite.
class SpatialDataset {
 public:
  SpatialDataset(std::vector<Point> coords, std::vector<double> values);

  const std::vector<Point>& coords() const { return coords_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return coords_.size(); }

 private:
  std::vector<Point> coords_;
  std::vector<double> values_;
};

/// K equidistant lag intervals covering (0, max_dist].
class LagGrid {
 public:
  LagGrid(double max_dist, std::size_t n_lags);

  double max_dist() const { return max_dist_; }
  std::size_t n_lags() const { return edges_.size() - 1; }
  const std::vector<double>& bin_edges() const { return edges_; }
  const std::vector<double>& bin_centers() const { return centers_; }

  /// Bin index for a pairwise distance under the half-open rule
  /// edge[k] < d <= edge[k+1]; -1 when d <= 0 or d > max_dist.
  std::ptrdiff_t bin_of(double d) const;

 private:
  double max_dist_ = 0.0;
  std::vector<double> edges_;
  std::vector<double> centers_;
};

/// Matheron's method-of-moments semi-variogram estimate per lag bin.
/// Bins with no pairs carry count 0 and gamma_hat NaN.
struct EmpiricalVariogram {
  LagGrid grid;
  std::vector<double> gamma_hat;
  std::vector<std::int64_t> pair_counts;
};

struct PairDistance {
  std::uint32_t i;
  std::uint32_t j;
  double distance;
};

/// All N(N-1)/2 pairwise Euclidean distances, i < j, in (i, j) lexicographic
/// order. O(N^2) memory; intended for N up to a few thousand.
std::vector<PairDistance> pairwise_distances(const SpatialDataset& data);

/// Pairs with distance inside (0, max_dist], pre-assigned to lag bins.
/// Coordinates are fixed across bootstrap replicates, so this is computed
/// once and the per-replicate estimate reduces to one pass over the pairs.
struct BinnedPairs {
  std::vector<std::uint32_t> i;
  std::vector<std::uint32_t> j;
  std::vector<std::uint32_t> bin;
  std::vector<std::int64_t> counts;  // per-bin pair counts, fixed
};

BinnedPairs bin_pairs(std::span<const Point> coords, const LagGrid& grid);

/// Matheron's estimator over the lag grid. Pairs at distance 0 or beyond
/// max_dist are excluded. Throws all_bins_empty when nothing falls in range.
/// The parallel path accumulates over fixed row blocks merged in index
/// order, so its output does not depend on the thread count.
EmpiricalVariogram empirical_variogram(const SpatialDataset& data,
                                       const LagGrid& grid,
                                       Exec exec = Exec::parallel);

/// Same estimate evaluated from precomputed binned pairs and a replicate's
/// attribute values.
EmpiricalVariogram empirical_variogram_from_pairs(const BinnedPairs& pairs,
                                                  std::span<const double> values,
                                                  const LagGrid& grid);

/// Unbiased sample variance (divisor N-1).
double sample_variance(std::span<const double> values);

}  // namespace sv
