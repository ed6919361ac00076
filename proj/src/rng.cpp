#include "svboot/rng.hpp"

#include "svboot/gauss.hpp"

namespace sv {

double RngStream::normal() { return inv_norm_cdf(u01()); }

}  // namespace sv
