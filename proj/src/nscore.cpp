#include "svboot/nscore.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "svboot/errors.hpp"
#include "svboot/gauss.hpp"

namespace sv {

std::pair<std::vector<double>, NormalScoreTable> nscore_forward(
    std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) {
    throw domain_error("nscore_forward: need at least 2 values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw domain_error("nscore_forward: non-finite value");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });

  // Quantiles for the lower half, mirrored to the upper half; symmetry and
  // a zero sum hold exactly rather than to rounding.
  std::vector<double> scores(n);
  for (std::size_t r = 0; r < n / 2; ++r) {
    const double p = (static_cast<double>(r) + 0.5) / static_cast<double>(n);
    const double s = inv_norm_cdf(p);
    scores[r] = s;
    scores[n - 1 - r] = -s;
  }
  if (n % 2 == 1) {
    scores[n / 2] = 0.0;
  }

  NormalScoreTable table;
  table.sorted_z.resize(n);
  table.scores = scores;
  std::vector<double> transformed(n);
  for (std::size_t r = 0; r < n; ++r) {
    table.sorted_z[r] = values[order[r]];
    transformed[order[r]] = scores[r];
  }
  return {std::move(transformed), std::move(table)};
}

std::vector<double> nscore_inverse(std::span<const double> y,
                                   const NormalScoreTable& table) {
  const auto& s = table.scores;
  const auto& z = table.sorted_z;
  if (s.empty() || s.size() != z.size()) {
    throw length_mismatch("nscore_inverse: malformed table");
  }

  std::vector<double> out(y.size());
  for (std::size_t idx = 0; idx < y.size(); ++idx) {
    const double v = y[idx];
    if (v <= s.front()) {
      out[idx] = z.front();
      continue;
    }
    if (v >= s.back()) {
      out[idx] = z.back();
      continue;
    }
    const auto it = std::upper_bound(s.begin(), s.end(), v);
    const std::size_t hi = static_cast<std::size_t>(it - s.begin());
    const std::size_t lo = hi - 1;
    const double t = (v - s[lo]) / (s[hi] - s[lo]);
    out[idx] = z[lo] + t * (z[hi] - z[lo]);
  }
  return out;
}

}  // namespace sv
