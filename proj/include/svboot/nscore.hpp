#pragma once

#include <span>
#include <utility>
#include <vector>

namespace sv {

/// Lookup table pairing the sorted attribute values with the standard-normal
/// quantiles assigned to their ranks. Drives the inverse transform.
struct NormalScoreTable {
  std::vector<double> sorted_z;  // ascending
  std::vector<double> scores;    // ascending, symmetric about 0
};

/// Empirical normal-score transform: the value of rank r (1-based, ties
/// broken by original index) maps to the standard-normal quantile at the
/// Hazen plotting position (r - 0.5) / N. Scores are mirrored around the
/// median so the set is exactly symmetric.
std::pair<std::vector<double>, NormalScoreTable> nscore_forward(
    std::span<const double> values);

/// Back-transform Gaussian values through the table: piecewise-linear
/// interpolation of sorted_z against scores, clamped to the sample extremes
/// outside the score range.
std::vector<double> nscore_inverse(std::span<const double> y,
                                   const NormalScoreTable& table);

}  // namespace sv
