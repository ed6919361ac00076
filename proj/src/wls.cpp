#include "svboot/wls.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "svboot/errors.hpp"

namespace sv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Log-parameter vector for the simplex search.
using Vec3 = std::array<double, 3>;

struct SimplexOutcome {
  Vec3 x{};
  double fx = kInf;
  int iterations = 0;
  bool converged = false;
};

// Nelder-Mead with standard coefficients. Deterministic: vertex ordering
// breaks ties by insertion index.
template <typename F>
SimplexOutcome nelder_mead(const F& f, const Vec3& x0, double step,
                           int max_iterations, double rel_tolerance) {
  constexpr int kDim = 3;
  constexpr int kVerts = kDim + 1;

  std::array<Vec3, kVerts> xs;
  std::array<double, kVerts> fs;
  xs[0] = x0;
  for (int v = 1; v < kVerts; ++v) {
    xs[v] = x0;
    xs[v][v - 1] += step;
  }
  for (int v = 0; v < kVerts; ++v) {
    fs[v] = f(xs[v]);
  }

  std::array<int, kVerts> idx{0, 1, 2, 3};
  auto order = [&] {
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return fs[a] < fs[b] || (fs[a] == fs[b] && a < b);
    });
  };

  SimplexOutcome out;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    order();
    const int lo = idx[0];
    const int hi = idx[kVerts - 1];
    const int second_hi = idx[kVerts - 2];

    const double fl = fs[lo];
    const double fh = fs[hi];
    if (std::isfinite(fh) &&
        2.0 * std::fabs(fh - fl) <=
            rel_tolerance * (std::fabs(fh) + std::fabs(fl) + 1e-300)) {
      out.converged = true;
      break;
    }
    double spread = 0.0;
    for (int v = 0; v < kVerts; ++v) {
      for (int d = 0; d < kDim; ++d) {
        spread = std::max(spread, std::fabs(xs[v][d] - xs[lo][d]));
      }
    }
    if (spread <= 1e-10) {  // simplex collapsed (log-space coordinates)
      out.converged = true;
      break;
    }

    Vec3 centroid{};
    for (int v = 0; v < kVerts; ++v) {
      if (v == hi) {
        continue;
      }
      for (int d = 0; d < kDim; ++d) {
        centroid[d] += xs[v][d];
      }
    }
    for (int d = 0; d < kDim; ++d) {
      centroid[d] /= kDim;
    }

    auto blend = [&](double coef) {
      Vec3 p;
      for (int d = 0; d < kDim; ++d) {
        p[d] = centroid[d] + coef * (xs[hi][d] - centroid[d]);
      }
      return p;
    };

    const Vec3 reflected = blend(-1.0);
    const double fr = f(reflected);

    if (fr < fl) {
      const Vec3 expanded = blend(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        xs[hi] = expanded;
        fs[hi] = fe;
      } else {
        xs[hi] = reflected;
        fs[hi] = fr;
      }
      continue;
    }
    if (fr < fs[second_hi]) {
      xs[hi] = reflected;
      fs[hi] = fr;
      continue;
    }

    const Vec3 contracted = blend(fr < fh ? -0.5 : 0.5);
    const double fc = f(contracted);
    if (fc < std::min(fr, fh)) {
      xs[hi] = contracted;
      fs[hi] = fc;
      continue;
    }

    // Shrink toward the best vertex.
    for (int v = 0; v < kVerts; ++v) {
      if (v == lo) {
        continue;
      }
      for (int d = 0; d < kDim; ++d) {
        xs[v][d] = xs[lo][d] + 0.5 * (xs[v][d] - xs[lo][d]);
      }
      fs[v] = f(xs[v]);
    }
  }

  order();
  out.x = xs[idx[0]];
  out.fx = fs[idx[0]];
  out.iterations = iter;
  return out;
}

struct NonEmptyBins {
  std::vector<double> distance;
  std::vector<double> gamma;
  std::vector<double> weight;
};

NonEmptyBins collect_bins(const EmpiricalVariogram& ev) {
  NonEmptyBins bins;
  const auto& centers = ev.grid.bin_centers();
  for (std::size_t k = 0; k < ev.pair_counts.size(); ++k) {
    if (ev.pair_counts[k] > 0) {
      bins.distance.push_back(centers[k]);
      bins.gamma.push_back(ev.gamma_hat[k]);
      bins.weight.push_back(static_cast<double>(ev.pair_counts[k]));
    }
  }
  return bins;
}

double loss_over_bins(const NonEmptyBins& bins, const ExpVariogramParams& p) {
  double loss = 0.0;
  for (std::size_t k = 0; k < bins.distance.size(); ++k) {
    const double model =
        p.nugget + p.partial_sill * (1.0 - std::exp(-bins.distance[k] / p.shape));
    const double r = bins.gamma[k] - model;
    loss += bins.weight[k] * r * r;
  }
  return std::isfinite(loss) ? loss : kInf;
}

}  // namespace

void FitConfig::validate() const {
  if (!(screen_threshold > 0.0) || max_iterations <= 0 ||
      !(rel_tolerance > 0.0) || n_restarts <= 0) {
    throw domain_error("FitConfig: all fields must be positive");
  }
}

double wls_loss(const ExpVariogramParams& params, const EmpiricalVariogram& ev) {
  const NonEmptyBins bins = collect_bins(ev);
  if (bins.distance.empty()) {
    throw all_bins_empty("wls_loss: no nonempty bin");
  }
  return loss_over_bins(bins, params);
}

ExpVariogramParams initial_guess(const EmpiricalVariogram& ev) {
  const NonEmptyBins bins = collect_bins(ev);
  const std::size_t m = bins.distance.size();
  if (m < 2) {
    throw insufficient_bins("initial_guess: need at least two nonempty bins");
  }

  const std::size_t tail_len = (m + 2) / 3;  // last third, rounded up
  double total_sill = 0.0;
  for (std::size_t k = m - tail_len; k < m; ++k) {
    total_sill += bins.gamma[k];
  }
  total_sill /= static_cast<double>(tail_len);

  // Tiny positive floor keeps the log-space search well-defined even for
  // degenerate (flat or constant) input.
  const double floor_val = std::max(1e-6 * total_sill, 1e-12);

  ExpVariogramParams p;
  p.nugget = std::max(bins.gamma.front(), floor_val);
  p.partial_sill = std::max(total_sill - p.nugget, floor_val);
  p.shape = ev.grid.max_dist() / 3.0;
  return p;
}

FitResult fit_wls(const EmpiricalVariogram& ev, const FitConfig& cfg) {
  cfg.validate();
  const NonEmptyBins bins = collect_bins(ev);
  if (bins.distance.size() < 3) {
    throw insufficient_bins("fit_wls: need at least three nonempty bins");
  }

  const ExpVariogramParams guess = initial_guess(ev);

  auto objective = [&](const Vec3& u) {
    for (double ui : u) {
      if (!(ui > -300.0 && ui < 300.0)) {
        return kInf;
      }
    }
    const ExpVariogramParams p{std::exp(u[0]), std::exp(u[1]), std::exp(u[2])};
    return loss_over_bins(bins, p);
  };

  // Restart 0 starts at the guess; later restarts scale one coordinate by
  // 0.5 or 2, cycling through coordinates.
  SimplexOutcome best;
  int best_restart = -1;
  for (int r = 0; r < cfg.n_restarts; ++r) {
    ExpVariogramParams start = guess;
    if (r > 0) {
      const int coord = (r - 1) % 3;
      const double factor = (r % 2 == 1) ? 0.5 : 2.0;
      if (coord == 0) {
        start.nugget *= factor;
      } else if (coord == 1) {
        start.partial_sill *= factor;
      } else {
        start.shape *= factor;
      }
    }
    const Vec3 u0{std::log(start.nugget), std::log(start.partial_sill),
                  std::log(start.shape)};
    const SimplexOutcome run = nelder_mead(objective, u0, std::log(2.0),
                                           cfg.max_iterations, cfg.rel_tolerance);
    if (best_restart < 0 || run.fx < best.fx) {
      best = run;
      best_restart = r;
    }
  }

  FitResult result;
  result.params = ExpVariogramParams{std::exp(best.x[0]), std::exp(best.x[1]),
                                     std::exp(best.x[2])};
  result.loss_value = best.fx;
  result.n_iterations = best.iterations;
  result.converged_numerically = best.converged;
  result.passes_screen = result.params.nugget < cfg.screen_threshold &&
                         result.params.partial_sill < cfg.screen_threshold &&
                         result.params.shape < cfg.screen_threshold;
  return result;
}

void to_json(nlohmann::json& j, const FitResult& r) {
  j = nlohmann::json{{"params", r.params},
                     {"loss", r.loss_value},
                     {"n_iterations", r.n_iterations},
                     {"converged_numerically", r.converged_numerically},
                     {"passes_screen", r.passes_screen}};
}

}  // namespace sv
