#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "svboot/bootstrap.hpp"
#include "svboot/errors.hpp"
#include "svboot/mc.hpp"
#include "svboot/model.hpp"
#include "svboot/rng.hpp"

namespace {

// Correlated test dataset: a dense cluster so the lag bins are well filled.
sv::SpatialDataset correlated_dataset(std::size_t n, std::uint64_t seed) {
  sv::RngStream stream(seed);
  std::vector<sv::Point> pts(n);
  for (auto& p : pts) {
    p = {3750.0 + 2500.0 * stream.u01(), 3750.0 + 2500.0 * stream.u01()};
  }
  std::vector<double> z =
      sv::simulate_gaussian_field(pts, sv::kGeneratingParams, stream);
  return sv::SpatialDataset(std::move(pts), std::move(z));
}

bool runs_equal(const sv::BootstrapRun& a, const sv::BootstrapRun& b) {
  return a.retained_nugget == b.retained_nugget &&
         a.retained_partial_sill == b.retained_partial_sill &&
         a.retained_shape == b.retained_shape && a.se_nugget == b.se_nugget &&
         a.se_partial_sill == b.se_partial_sill &&
         a.se_shape == b.se_shape && a.n_generated == b.n_generated &&
         a.n_discarded_filter == b.n_discarded_filter &&
         a.n_discarded_screen == b.n_discarded_screen;
}

}  // namespace

TEST_CASE("resample draws from the input with replacement") {
  sv::RngStream stream(1);
  const std::vector<double> single{42.0};
  CHECK(sv::resample(single, stream) == single);

  const std::vector<double> xs{1.0, 2.5, -3.0, 7.0, 0.0};
  sv::RngStream s1(9);
  const auto out = sv::resample(xs, s1);
  REQUIRE(out.size() == xs.size());
  for (double v : out) {
    CHECK(std::find(xs.begin(), xs.end(), v) != xs.end());
  }

  sv::RngStream s2(9);
  CHECK(sv::resample(xs, s2) == out);
}

TEST_CASE("check filter discards on strict excess only") {
  CHECK_FALSE(sv::check_filter_accepts({100.0, 60.0, 50.0}, 1.5, 100.0));
  CHECK(sv::check_filter_accepts({100.0, 50.0, 50.0}, 1.5, 100.0));
  CHECK(sv::check_filter_accepts({1.0, 1.0, 1.0}, 1e6, 100.0));
  CHECK_THROWS_AS(sv::check_filter_accepts({1, 1, 1}, 1.5, 0.0),
                  sv::domain_error);
}

TEST_CASE("quantile pool size is ceil(B/alpha)") {
  CHECK(sv::quantile_pool_size(100, 0.8) == 125);
  CHECK(sv::quantile_pool_size(100, 1.0) == 100);
  CHECK(sv::quantile_pool_size(100, 0.75) == 134);
  CHECK(sv::quantile_pool_size(7, 0.9) == 8);
}

TEST_CASE("quantile filter keeps the smallest B per parameter") {
  const std::array<std::vector<double>, 3> estimates{
      std::vector<double>{3.0, 1.0, 2.0}, std::vector<double>{9.0, 7.0, 8.0},
      std::vector<double>{0.5, 0.1, 0.9}};
  const auto kept = sv::quantile_filter(estimates, 2.0 / 3.0, 2);
  CHECK(kept[0] == std::vector<double>{1.0, 2.0});
  CHECK(kept[1] == std::vector<double>{7.0, 8.0});
  CHECK(kept[2] == std::vector<double>{0.1, 0.5});

  // alpha = 1 keeps the whole multiset.
  const auto all = sv::quantile_filter(estimates, 1.0, 3);
  CHECK(all[0] == std::vector<double>{1.0, 2.0, 3.0});

  CHECK_THROWS_AS(sv::quantile_filter(estimates, 0.5, 2), sv::length_mismatch);
}

TEST_CASE("replicate SE is the B-1 sample standard deviation") {
  CHECK(sv::se_from_replicates(std::vector<double>{5.0, 5.0, 5.0}) == 0.0);
  CHECK(sv::se_from_replicates(std::vector<double>{1.0, 3.0}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(sv::se_from_replicates(std::vector<double>{3.0, 1.0}) ==
        sv::se_from_replicates(std::vector<double>{1.0, 3.0}));
}

TEST_CASE("decorrelate and recorrelate invert each other") {
  sv::RngStream stream(14);

  SUBCASE("identity covariance is a no-op") {
    sv::Matrix eye(5, 5);
    for (std::size_t i = 0; i < 5; ++i) {
      eye(i, i) = 1.0;
    }
    std::vector<double> y{1.0, -1.0, 2.0, 0.0, 0.5};
    const auto dec = sv::decorrelate(eye, y);
    CHECK(dec.x == y);
    CHECK(sv::recorrelate(dec.factor, dec.x) == y);
  }

  SUBCASE("round trip on model covariance matrices up to n = 200") {
    for (std::size_t n : {20UL, 100UL, 200UL}) {
      auto [pts, unused] = oracle::random_dataset(n, 1500.0, stream);
      const sv::Matrix c =
          sv::covariance_matrix(pts, {2.0, 6.0, 350.0});
      std::vector<double> y(n);
      for (auto& v : y) {
        v = stream.normal();
      }
      const auto dec = sv::decorrelate(c, y);
      const auto back = sv::recorrelate(dec.factor, dec.x);
      double diff = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        diff = std::max(diff, std::fabs(back[i] - y[i]));
      }
      CHECK(diff < 1e-8);
    }
  }

  SUBCASE("zero input recorrelates to zero") {
    sv::Matrix eye(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      eye(i, i) = 2.0;
    }
    const auto lower = sv::cholesky_lower(eye);
    const std::vector<double> zero(3, 0.0);
    CHECK(sv::recorrelate(lower, zero) == zero);
  }
}

TEST_CASE("bootstrap run satisfies the check-filter invariants") {
  const auto data = correlated_dataset(200, 77);
  const sv::LagGrid grid(900.0, 10);
  sv::BootstrapConfig cfg;
  cfg.b = 60;
  cfg.filter = sv::Filter::check(1.5);
  cfg.seed = 1234;

  const auto run = sv::run_generalized_bootstrap(data, grid, cfg);
  REQUIRE(run.retained_nugget.size() == 60);
  REQUIRE(run.retained_partial_sill.size() == 60);
  REQUIRE(run.retained_shape.size() == 60);

  const double var = sv::sample_variance(data.values());
  for (std::size_t i = 0; i < 60; ++i) {
    CHECK(run.retained_nugget[i] + run.retained_partial_sill[i] <=
          1.5 * var);
  }
  CHECK(run.n_generated ==
        60 + run.n_discarded_filter + run.n_discarded_screen);
  CHECK(run.se_nugget >= 0.0);
  CHECK(run.theta_hat.nugget > 0.0);
}

TEST_CASE("quantile mode generates the exact pool and trims per parameter") {
  const auto data = correlated_dataset(180, 99);
  const sv::LagGrid grid(900.0, 10);

  sv::BootstrapConfig cfg;
  cfg.b = 40;
  cfg.filter = sv::Filter::quantile(0.8);
  cfg.seed = 555;
  const auto run = sv::run_generalized_bootstrap(data, grid, cfg);

  CHECK(run.n_generated == 50);  // ceil(40 / 0.8)
  CHECK(run.n_discarded_filter == 10);
  REQUIRE(run.retained_nugget.size() == 40);

  // The same seed with alpha = 1 and B = 50 reproduces the full screened
  // pool, so the per-parameter quantile bound can be checked against it.
  sv::BootstrapConfig pool_cfg = cfg;
  pool_cfg.b = 50;
  pool_cfg.filter = sv::Filter::quantile(1.0);
  const auto pool = sv::run_generalized_bootstrap(data, grid, pool_cfg);
  REQUIRE(pool.retained_nugget.size() == 50);

  const double q_nugget = oracle::empirical_quantile(pool.retained_nugget, 0.8);
  const double q_sill =
      oracle::empirical_quantile(pool.retained_partial_sill, 0.8);
  const double q_shape = oracle::empirical_quantile(pool.retained_shape, 0.8);
  CHECK(*std::max_element(run.retained_nugget.begin(),
                          run.retained_nugget.end()) <= q_nugget);
  CHECK(*std::max_element(run.retained_partial_sill.begin(),
                          run.retained_partial_sill.end()) <= q_sill);
  CHECK(*std::max_element(run.retained_shape.begin(),
                          run.retained_shape.end()) <= q_shape);

  // Each retained list is sorted ascending (smallest B per parameter).
  CHECK(std::is_sorted(run.retained_nugget.begin(), run.retained_nugget.end()));
}

TEST_CASE("bootstrap is deterministic across repeats and thread counts") {
  const auto data = correlated_dataset(150, 31);
  const sv::LagGrid grid(900.0, 10);
  sv::BootstrapConfig cfg;
  cfg.b = 30;
  cfg.filter = sv::Filter::check(2.0);
  cfg.seed = 2718;

  const auto run1 = sv::run_generalized_bootstrap(data, grid, cfg);
  const auto run2 = sv::run_generalized_bootstrap(data, grid, cfg);
  CHECK(runs_equal(run1, run2));

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto serial = sv::run_generalized_bootstrap(data, grid, cfg);
  omp_set_num_threads(saved);
  CHECK(runs_equal(run1, serial));

  // Different seeds explore different replicates.
  cfg.seed = 2719;
  const auto other = sv::run_generalized_bootstrap(data, grid, cfg);
  CHECK_FALSE(runs_equal(run1, other));
}

TEST_CASE("hopeless screen threshold aborts the base fit") {
  const auto data = correlated_dataset(120, 8);
  const sv::LagGrid grid(900.0, 10);
  sv::BootstrapConfig cfg;
  cfg.b = 10;
  cfg.fit_cfg.screen_threshold = 1e-6;
  CHECK_THROWS_AS(sv::run_generalized_bootstrap(data, grid, cfg),
                  sv::base_fit_failed);
}

TEST_CASE("an impossible check threshold exhausts the attempt budget") {
  const auto data = correlated_dataset(100, 12);
  const sv::LagGrid grid(900.0, 10);
  sv::BootstrapConfig cfg;
  cfg.b = 8;
  cfg.filter = sv::Filter::check(1e-9);
  cfg.seed = 5;
  cfg.max_attempts_factor = 3;
  try {
    sv::run_generalized_bootstrap(data, grid, cfg);
    FAIL("expected attempt_budget_exhausted");
  } catch (const sv::attempt_budget_exhausted& e) {
    CHECK(e.n_generated == 8 * 3);
    CHECK(e.n_retained == 0);
    CHECK(e.n_discarded_filter + e.n_discarded_screen == e.n_generated);
  }
}

TEST_CASE("config validation rejects bad values") {
  sv::BootstrapConfig cfg;
  cfg.b = 1;
  CHECK_THROWS_AS(cfg.validate(), sv::domain_error);
  cfg.b = 10;
  cfg.filter = sv::Filter::check(-1.0);
  CHECK_THROWS_AS(cfg.validate(), sv::domain_error);
  cfg.filter = sv::Filter::quantile(1.5);
  CHECK_THROWS_AS(cfg.validate(), sv::domain_error);
  cfg.filter = sv::Filter::quantile(0.9);
  CHECK_NOTHROW(cfg.validate());
}
