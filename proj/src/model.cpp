#include "svboot/model.hpp"

#include <cmath>
#include <cstdint>

#include "svboot/errors.hpp"

namespace sv {

void ExpVariogramParams::validate() const {
  const bool ok = nugget > 0.0 && std::isfinite(nugget) && partial_sill > 0.0 &&
                  std::isfinite(partial_sill) && shape > 0.0 &&
                  std::isfinite(shape);
  if (!ok) {
    throw domain_error(
        "ExpVariogramParams: nugget, partial_sill and shape must be positive "
        "and finite");
  }
}

double eval_model(const ExpVariogramParams& params, double h) {
  if (h < 0.0) {
    throw domain_error("eval_model: negative distance");
  }
  if (h == 0.0) {
    return 0.0;
  }
  return params.nugget + params.partial_sill * (1.0 - std::exp(-h / params.shape));
}

double model_covariance(const ExpVariogramParams& params, double h) {
  if (h < 0.0) {
    throw domain_error("model_covariance: negative distance");
  }
  return params.total_sill() - eval_model(params, h);
}

double practical_range(const ExpVariogramParams& params) {
  return params.shape * std::log(20.0);
}

Matrix covariance_matrix(std::span<const Point> coords,
                         const ExpVariogramParams& params, Exec exec) {
  const std::int64_t n = static_cast<std::int64_t>(coords.size());
  const double sill = params.total_sill();
  Matrix c(n, n);

  auto fill_row = [&](std::int64_t i) {
    c(i, i) = sill;
    for (std::int64_t j = 0; j < i; ++j) {
      const double dx = coords[i].x - coords[j].x;
      const double dy = coords[i].y - coords[j].y;
      const double d = std::sqrt(dx * dx + dy * dy);
      const double cov =
          (d == 0.0) ? sill : params.partial_sill * std::exp(-d / params.shape);
      c(i, j) = cov;
      c(j, i) = cov;
    }
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
      fill_row(i);
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      fill_row(i);
    }
  }
  return c;
}

void to_json(nlohmann::json& j, const ExpVariogramParams& p) {
  j = nlohmann::json{{"nugget", p.nugget},
                     {"partial_sill", p.partial_sill},
                     {"shape", p.shape}};
}

void from_json(const nlohmann::json& j, ExpVariogramParams& p) {
  j.at("nugget").get_to(p.nugget);
  j.at("partial_sill").get_to(p.partial_sill);
  j.at("shape").get_to(p.shape);
  p.validate();
}

}  // namespace sv
