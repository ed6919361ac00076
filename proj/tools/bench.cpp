// Benchmark of the OpenMP kernels against their serial reference
// implementations. Also cross-checks that both paths agree.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "svboot/bootstrap.hpp"
#include "svboot/linalg.hpp"
#include "svboot/mc.hpp"
#include "svboot/model.hpp"
#include "svboot/rng.hpp"
#include "svboot/spatial.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_of(const std::function<void()>& fn, int reps) {
  // One warm-up, then best of reps.
  fn();
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    const auto t1 = Clock::now();
    best = std::min(best,
                    std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void print_row(const char* name, double serial_ms, double parallel_ms,
               double max_diff) {
  std::printf("%-24s %12.2f %12.2f %9.2fx   max|diff| %.3g\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms, max_diff);
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      quick = true;
    }
  }

  const std::size_t n_points = quick ? 400 : 2000;
  const std::size_t n_chol = quick ? 300 : 1200;
  const int reps = quick ? 2 : 5;

  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-24s %12s %12s %10s\n", "kernel", "serial [ms]",
              "parallel [ms]", "speedup");

  sv::RngStream stream(7);
  std::vector<sv::Point> pts(n_points);
  std::vector<double> vals(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    pts[i] = {10000.0 * stream.u01(), 10000.0 * stream.u01()};
    vals[i] = stream.normal();
  }
  const sv::SpatialDataset data(pts, vals);
  const sv::LagGrid grid(4000.0, 10);
  const sv::ExpVariogramParams params{60.0, 40.0, 200.0};

  {
    sv::EmpiricalVariogram ev_s = sv::empirical_variogram(data, grid, sv::Exec::serial);
    sv::EmpiricalVariogram ev_p = sv::empirical_variogram(data, grid);
    double diff = 0.0;
    for (std::size_t k = 0; k < ev_s.gamma_hat.size(); ++k) {
      diff = std::max(diff, std::fabs(ev_s.gamma_hat[k] - ev_p.gamma_hat[k]));
    }
    const double ts = time_of(
        [&] { sv::empirical_variogram(data, grid, sv::Exec::serial); }, reps);
    const double tp =
        time_of([&] { sv::empirical_variogram(data, grid); }, reps);
    print_row("empirical_variogram", ts, tp, diff);
  }

  {
    std::vector<sv::Point> cpts(pts.begin(), pts.begin() + n_chol);
    sv::Matrix c_s = sv::covariance_matrix(cpts, params, sv::Exec::serial);
    sv::Matrix c_p = sv::covariance_matrix(cpts, params);
    double diff = 0.0;
    for (std::size_t i = 0; i < n_chol; ++i) {
      for (std::size_t j = 0; j < n_chol; ++j) {
        diff = std::max(diff, std::fabs(c_s(i, j) - c_p(i, j)));
      }
    }
    const double ts = time_of(
        [&] { sv::covariance_matrix(cpts, params, sv::Exec::serial); }, reps);
    const double tp = time_of([&] { sv::covariance_matrix(cpts, params); }, reps);
    print_row("covariance_matrix", ts, tp, diff);

    sv::Matrix l_s = sv::cholesky_lower(c_s, sv::Exec::serial);
    sv::Matrix l_p = sv::cholesky_lower(c_s);
    diff = 0.0;
    for (std::size_t i = 0; i < n_chol; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        diff = std::max(diff, std::fabs(l_s(i, j) - l_p(i, j)));
      }
    }
    const double tcs =
        time_of([&] { sv::cholesky_lower(c_s, sv::Exec::serial); }, reps);
    const double tcp = time_of([&] { sv::cholesky_lower(c_s); }, reps);
    print_row("cholesky_lower", tcs, tcp, diff);

    std::vector<double> x(n_chol);
    for (auto& v : x) {
      v = stream.normal();
    }
    std::vector<double> y_s = sv::lower_matvec(l_s, x, sv::Exec::serial);
    std::vector<double> y_p = sv::lower_matvec(l_s, x);
    diff = 0.0;
    for (std::size_t i = 0; i < n_chol; ++i) {
      diff = std::max(diff, std::fabs(y_s[i] - y_p[i]));
    }
    const double tms = time_of(
        [&] {
          for (int k = 0; k < 20; ++k) {
            sv::lower_matvec(l_s, x, sv::Exec::serial);
          }
        },
        reps);
    const double tmp = time_of(
        [&] {
          for (int k = 0; k < 20; ++k) {
            sv::lower_matvec(l_s, x);
          }
        },
        reps);
    print_row("lower_matvec (x20)", tms, tmp, diff);
  }

  {
    // Replicate engine: thread count must not change the result.
    sv::RngStream loc_stream(11);
    const std::size_t n = quick ? 150 : 300;
    std::vector<sv::Point> bpts(n);
    for (auto& p : bpts) {
      // Dense sub-square so enough pairs fall under the lag-grid range.
      p = {3750.0 + 2500.0 * loc_stream.u01(),
           3750.0 + 2500.0 * loc_stream.u01()};
    }
    std::vector<double> bvals =
        sv::simulate_gaussian_field(bpts, params, loc_stream);
    const sv::SpatialDataset bdata(bpts, bvals);
    const sv::LagGrid bgrid(900.0, 10);
    sv::BootstrapConfig cfg;
    cfg.b = quick ? 40 : 100;
    cfg.filter = sv::Filter::check(1.5);
    cfg.seed = 99;

    const int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto t0 = Clock::now();
    const sv::BootstrapRun run1 = sv::run_generalized_bootstrap(bdata, bgrid, cfg);
    const auto t1 = Clock::now();
    omp_set_num_threads(max_threads);
    const auto t2 = Clock::now();
    const sv::BootstrapRun runp = sv::run_generalized_bootstrap(bdata, bgrid, cfg);
    const auto t3 = Clock::now();

    double diff = 0.0;
    for (std::size_t i = 0; i < run1.retained_nugget.size(); ++i) {
      diff = std::max(diff, std::fabs(run1.retained_nugget[i] -
                                      runp.retained_nugget[i]));
    }
    print_row("bootstrap replicates",
              std::chrono::duration<double, std::milli>(t1 - t0).count(),
              std::chrono::duration<double, std::milli>(t3 - t2).count(), diff);
  }

  return 0;
}
