#pragma once

#include <json.hpp>

#include "svboot/model.hpp"
#include "svboot/spatial.hpp"

namespace sv {

/// Optimizer controls. screen_threshold is the convergence screen bound
/// applied to every fitted component; it matches the simulation-scale
/// default but is configurable because it depends on the data's variance
/// scale.
struct FitConfig {
  double screen_threshold = 1000.0;
  int max_iterations = 2000;
  double rel_tolerance = 1e-8;
  int n_restarts = 3;

  void validate() const;
};

struct FitResult {
  ExpVariogramParams params;
  double loss_value = 0.0;
  int n_iterations = 0;
  bool converged_numerically = false;
  bool passes_screen = false;
};

/// Pair-count-weighted squared deviation between the empirical estimate and
/// the model at the bin representative distances. Empty bins carry weight 0.
double wls_loss(const ExpVariogramParams& params, const EmpiricalVariogram& ev);

/// Heuristic start: nugget from the first nonempty bin, total sill from the
/// mean over the last third of nonempty bins, shape from max_dist / 3.
/// Needs at least two nonempty bins.
ExpVariogramParams initial_guess(const EmpiricalVariogram& ev);

/// Minimize wls_loss by a Nelder-Mead simplex over log-parameters (which
/// keeps all components positive), taking the best of n_restarts runs
/// started from deterministic perturbations of the initial guess.
/// Fully deterministic; needs at least three nonempty bins.
FitResult fit_wls(const EmpiricalVariogram& ev, const FitConfig& cfg = {});

void to_json(nlohmann::json& j, const FitResult& r);

}  // namespace sv
