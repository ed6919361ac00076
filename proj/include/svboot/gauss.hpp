#pragma once

namespace sv {

/// Standard normal quantile function (inverse CDF), accurate to full double
/// precision (Wichura's AS 241 rational approximations).
/// Requires 0 < p < 1; throws domain_error otherwise.
double inv_norm_cdf(double p);

/// Standard normal CDF, via the complementary error function.
double norm_cdf(double x);

}  // namespace sv
