#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "svboot/linalg.hpp"
#include "svboot/rng.hpp"
#include "svboot/spatial.hpp"
#include "svboot/wls.hpp"

namespace sv {

/// Replicate filter applied after the convergence screen.
struct Filter {
  enum class Kind { none, check, quantile };

  Kind kind = Kind::none;
  double tau = 0.0;    // check: discard when c0* + sill* > tau * Var(Z)
  double alpha = 0.0;  // quantile: keep the smallest B of ceil(B/alpha)

  static Filter none() { return {Kind::none, 0.0, 0.0}; }
  static Filter check(double tau) { return {Kind::check, tau, 0.0}; }
  static Filter quantile(double alpha) { return {Kind::quantile, 0.0, alpha}; }

  void validate() const;
};

struct BootstrapConfig {
  std::int64_t b = 1000;  // retained replicates
  Filter filter = Filter::none();
  std::uint64_t seed = 0;
  std::int64_t max_attempts_factor = 50;
  FitConfig fit_cfg{};

  void validate() const;
};

/// Everything the bootstrap produces: the two base fits, the retained
/// replicate estimates per parameter (each of length B), the standard
/// errors, and the attempt accounting.
struct BootstrapRun {
  ExpVariogramParams theta_hat;    // fit on the original data
  ExpVariogramParams theta_tilde;  // fit on the normal scores
  std::vector<double> retained_nugget;
  std::vector<double> retained_partial_sill;
  std::vector<double> retained_shape;
  double se_nugget = 0.0;
  double se_partial_sill = 0.0;
  double se_shape = 0.0;
  std::int64_t n_generated = 0;
  std::int64_t n_discarded_filter = 0;
  // The convergence screen applies to the base fits; replicates go through
  // the filter only, so this stays 0 and exists for the run schema.
  std::int64_t n_discarded_screen = 0;
};

/// Sample with replacement, one uniform index draw per output element.
std::vector<double> resample(std::span<const double> x, RngStream& stream);

/// True when the replicate survives the check filter: its model-implied
/// total variance may not exceed tau times the sample variance (equality
/// retains).
bool check_filter_accepts(const ExpVariogramParams& theta_star, double tau,
                          double sample_var);

/// Number of replicates the quantile filter needs as input: ceil(B / alpha).
std::int64_t quantile_pool_size(std::int64_t b, double alpha);

/// Per-parameter quantile filtering: sort each list ascending and keep the
/// smallest B entries. Lists must all have length ceil(B/alpha); the
/// retained sets for different parameters may come from different
/// replicates.
std::array<std::vector<double>, 3> quantile_filter(
    const std::array<std::vector<double>, 3>& estimates, double alpha,
    std::int64_t b);

/// Sample standard deviation (divisor B-1) of the retained estimates.
double se_from_replicates(std::span<const double> retained);

/// Decorrelate/recorrelate pair used by the engine; exposed for testing.
/// decorrelate solves L·x = y for the Cholesky factor of C; recorrelate is
/// y* = L·x*.
struct Decorrelated {
  Matrix factor;
  std::vector<double> x;
};
Decorrelated decorrelate(const Matrix& covariance, std::span<const double> y);
std::vector<double> recorrelate(const Matrix& factor,
                                std::span<const double> x_star);

/// The full generalized bootstrap: base fits on the data and its normal
/// scores (both must pass the convergence screen), model-based
/// decorrelation, replicate resampling/refitting, the configured replicate
/// filter, and per-parameter standard errors.
///
/// Replicate k draws from an RNG stream derived from (seed, k) and the
/// retained set is the first acceptable replicates in attempt order, so the
/// result is identical for any worker count.
BootstrapRun run_generalized_bootstrap(const SpatialDataset& data,
                                       const LagGrid& grid,
                                       const BootstrapConfig& cfg);

void to_json(nlohmann::json& j, const Filter& f);
nlohmann::json bootstrap_run_json(const BootstrapRun& run,
                                  const BootstrapConfig& cfg);

}  // namespace sv
