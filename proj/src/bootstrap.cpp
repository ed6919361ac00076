#include "svboot/bootstrap.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "svboot/errors.hpp"
#include "svboot/model.hpp"
#include "svboot/nscore.hpp"

namespace sv {

namespace {

constexpr std::uint64_t kBootstrapDomain = 0x626f6f74;  // stream namespace

}  // namespace

void Filter::validate() const {
  switch (kind) {
    case Kind::none:
      return;
    case Kind::check:
      if (!(tau > 0.0)) {
        throw domain_error("Filter: check filter needs tau > 0");
      }
      return;
    case Kind::quantile:
      if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw domain_error("Filter: quantile filter needs alpha in (0, 1]");
      }
      return;
  }
}

void BootstrapConfig::validate() const {
  if (b < 2) {
    throw domain_error("BootstrapConfig: need b >= 2");
  }
  if (max_attempts_factor < 1) {
    throw domain_error("BootstrapConfig: max_attempts_factor must be >= 1");
  }
  filter.validate();
  fit_cfg.validate();
}

std::vector<double> resample(std::span<const double> x, RngStream& stream) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = x[stream.uniform_index(n)];
  }
  return out;
}

bool check_filter_accepts(const ExpVariogramParams& theta_star, double tau,
                          double sample_var) {
  if (!(sample_var > 0.0)) {
    throw domain_error("check_filter_accepts: sample variance must be > 0");
  }
  return !(theta_star.total_sill() > tau * sample_var);
}

std::int64_t quantile_pool_size(std::int64_t b, double alpha) {
  return static_cast<std::int64_t>(
      std::ceil(static_cast<double>(b) / alpha));
}

std::array<std::vector<double>, 3> quantile_filter(
    const std::array<std::vector<double>, 3>& estimates, double alpha,
    std::int64_t b) {
  const std::size_t pool = static_cast<std::size_t>(quantile_pool_size(b, alpha));
  std::array<std::vector<double>, 3> kept;
  for (std::size_t p = 0; p < 3; ++p) {
    if (estimates[p].size() != pool) {
      throw length_mismatch("quantile_filter: estimate list length != ceil(B/alpha)");
    }
    kept[p] = estimates[p];
    std::sort(kept[p].begin(), kept[p].end());
    kept[p].resize(static_cast<std::size_t>(b));
  }
  return kept;
}

double se_from_replicates(std::span<const double> retained) {
  // Accumulate over sorted values so replicate order cannot leak into the
  // estimate, even at the last bit.
  std::vector<double> sorted(retained.begin(), retained.end());
  std::sort(sorted.begin(), sorted.end());
  return std::sqrt(sample_variance(sorted));
}

Decorrelated decorrelate(const Matrix& covariance, std::span<const double> y) {
  Matrix factor = cholesky_lower(covariance);
  std::vector<double> x = forward_substitute(factor, y);
  return {std::move(factor), std::move(x)};
}

std::vector<double> recorrelate(const Matrix& factor,
                                std::span<const double> x_star) {
  return lower_matvec(factor, x_star);
}

BootstrapRun run_generalized_bootstrap(const SpatialDataset& data,
                                       const LagGrid& grid,
                                       const BootstrapConfig& cfg) {
  cfg.validate();

  const EmpiricalVariogram ev = empirical_variogram(data, grid);
  const FitResult base = fit_wls(ev, cfg.fit_cfg);
  if (!base.passes_screen) {
    throw base_fit_failed("bootstrap: base fit failed the convergence screen");
  }

  auto [y, table] = nscore_forward(data.values());

  const BinnedPairs pairs = bin_pairs(data.coords(), grid);
  const EmpiricalVariogram ev_scores =
      empirical_variogram_from_pairs(pairs, y, grid);
  const FitResult scores_fit = fit_wls(ev_scores, cfg.fit_cfg);
  if (!scores_fit.passes_screen) {
    throw base_fit_failed(
        "bootstrap: normal-score fit failed the convergence screen");
  }

  const Matrix covariance =
      covariance_matrix(data.coords(), scores_fit.params);
  const double jitter = 1e-10 * scores_fit.params.total_sill();
  const Matrix factor = cholesky_lower_jittered(covariance, jitter);
  const std::vector<double> x = forward_substitute(factor, y);

  const double sample_var = sample_variance(data.values());

  // One attempt = resample, recorrelate, back-transform, refit. Attempt k
  // is a pure function of (seed, k); the engine consumes attempts strictly
  // in index order, so the outcome is independent of how many run
  // concurrently.
  auto run_attempt = [&](std::int64_t k) {
    RngStream stream(derive_seed(cfg.seed, kBootstrapDomain,
                                 static_cast<std::uint64_t>(k)));
    const std::vector<double> x_star = resample(x, stream);
    const std::vector<double> y_star = lower_matvec(factor, x_star, Exec::serial);
    const std::vector<double> z_star = nscore_inverse(y_star, table);
    const EmpiricalVariogram ev_star =
        empirical_variogram_from_pairs(pairs, z_star, grid);
    return fit_wls(ev_star, cfg.fit_cfg).params;
  };

  // Check mode keeps drawing until B replicates pass the variance check
  // (the check itself is the replicate-level convergence test). Quantile
  // mode takes exactly ceil(B/alpha) replicates and lets the filter trim
  // them; no replicate is drawn twice.

  const bool quantile_mode = cfg.filter.kind == Filter::Kind::quantile;
  const std::int64_t target =
      quantile_mode ? quantile_pool_size(cfg.b, cfg.filter.alpha) : cfg.b;
  const std::int64_t budget = target * cfg.max_attempts_factor;
  const std::int64_t wave =
      std::max<std::int64_t>(64, std::min<std::int64_t>(1024, target));

  std::array<std::vector<double>, 3> collected;
  for (auto& list : collected) {
    list.reserve(static_cast<std::size_t>(target));
  }
  std::int64_t discarded_filter = 0;
  std::int64_t attempts_consumed = 0;
  bool done = false;

  std::vector<ExpVariogramParams> outcomes;
  for (std::int64_t base_idx = 0; base_idx < budget && !done;
       base_idx += wave) {
    const std::int64_t count = std::min(wave, budget - base_idx);
    outcomes.assign(static_cast<std::size_t>(count), {});

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t w = 0; w < count; ++w) {
      outcomes[static_cast<std::size_t>(w)] = run_attempt(base_idx + w);
    }

    for (std::int64_t w = 0; w < count && !done; ++w) {
      const ExpVariogramParams& theta_star =
          outcomes[static_cast<std::size_t>(w)];
      ++attempts_consumed;
      if (cfg.filter.kind == Filter::Kind::check &&
          !check_filter_accepts(theta_star, cfg.filter.tau, sample_var)) {
        ++discarded_filter;
      } else {
        collected[0].push_back(theta_star.nugget);
        collected[1].push_back(theta_star.partial_sill);
        collected[2].push_back(theta_star.shape);
        done = static_cast<std::int64_t>(collected[0].size()) == target;
      }
    }
  }

  if (!done) {
    throw attempt_budget_exhausted(
        "bootstrap: attempt budget exhausted before enough replicates were "
        "accepted",
        attempts_consumed, static_cast<std::int64_t>(collected[0].size()),
        discarded_filter, 0);
  }

  BootstrapRun run;
  run.theta_hat = base.params;
  run.theta_tilde = scores_fit.params;
  run.n_discarded_screen = 0;

  if (quantile_mode) {
    const auto kept = quantile_filter(collected, cfg.filter.alpha, cfg.b);
    run.retained_nugget = kept[0];
    run.retained_partial_sill = kept[1];
    run.retained_shape = kept[2];
    run.n_generated = target;
    run.n_discarded_filter = target - cfg.b;
  } else {
    run.retained_nugget = std::move(collected[0]);
    run.retained_partial_sill = std::move(collected[1]);
    run.retained_shape = std::move(collected[2]);
    run.n_generated = attempts_consumed;
    run.n_discarded_filter = discarded_filter;
  }

  run.se_nugget = se_from_replicates(run.retained_nugget);
  run.se_partial_sill = se_from_replicates(run.retained_partial_sill);
  run.se_shape = se_from_replicates(run.retained_shape);
  return run;
}

void to_json(nlohmann::json& j, const Filter& f) {
  switch (f.kind) {
    case Filter::Kind::none:
      j = nlohmann::json{{"kind", "none"}};
      break;
    case Filter::Kind::check:
      j = nlohmann::json{{"kind", "check"}, {"tau", f.tau}};
      break;
    case Filter::Kind::quantile:
      j = nlohmann::json{{"kind", "quantile"}, {"alpha", f.alpha}};
      break;
  }
}

nlohmann::json bootstrap_run_json(const BootstrapRun& run,
                                  const BootstrapConfig& cfg) {
  return nlohmann::json{
      {"config",
       {{"b", cfg.b},
        {"filter", cfg.filter},
        {"seed", cfg.seed},
        {"max_attempts_factor", cfg.max_attempts_factor}}},
      {"theta_hat", run.theta_hat},
      {"theta_tilde", run.theta_tilde},
      {"se",
       {{"nugget", run.se_nugget},
        {"partial_sill", run.se_partial_sill},
        {"shape", run.se_shape}}},
      {"counts",
       {{"generated", run.n_generated},
        {"discarded_filter", run.n_discarded_filter},
        {"discarded_screen", run.n_discarded_screen}}},
      {"retained",
       {{"nugget", run.retained_nugget},
        {"partial_sill", run.retained_partial_sill},
        {"shape", run.retained_shape}}}};
}

}  // namespace sv
