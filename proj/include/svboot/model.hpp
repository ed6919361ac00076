#pragma once

#include <span>

#include <json.hpp>

#include "svboot/linalg.hpp"
#include "svboot/spatial.hpp"

namespace sv {

/// Exponential semi-variogram parameters: nugget, partial sill and shape
/// (range parameter). All strictly positive.
struct ExpVariogramParams {
  double nugget = 0.0;
  double partial_sill = 0.0;
  double shape = 0.0;

  double total_sill() const { return nugget + partial_sill; }

  /// Throws domain_error unless all three components are positive and finite.
  void validate() const;
};

/// Model semi-variance at distance h: 0 at h = 0, otherwise
/// nugget + partial_sill * (1 - exp(-h / shape)).
double eval_model(const ExpVariogramParams& params, double h);

/// Model covariance at distance h: total sill minus the semi-variance, i.e.
/// the full variance at h = 0 and partial_sill * exp(-h / shape) beyond.
double model_covariance(const ExpVariogramParams& params, double h);

/// Distance at which the model reaches the nugget plus 95% of the partial
/// sill: shape * ln(20).
double practical_range(const ExpVariogramParams& params);

/// Model covariance matrix over a set of locations: total sill on the
/// diagonal, model_covariance(d_ij) elsewhere. Entries are independent, so
/// serial and parallel paths agree bitwise.
Matrix covariance_matrix(std::span<const Point> coords,
                         const ExpVariogramParams& params,
                         Exec exec = Exec::parallel);

void to_json(nlohmann::json& j, const ExpVariogramParams& p);
void from_json(const nlohmann::json& j, ExpVariogramParams& p);

}  // namespace sv
