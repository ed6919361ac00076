#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "svboot/bootstrap.hpp"
#include "svboot/model.hpp"
#include "svboot/rng.hpp"
#include "svboot/spatial.hpp"

namespace sv {

/// The zero-mean Gaussian process the simulation study draws from.
inline constexpr ExpVariogramParams kGeneratingParams{60.0, 40.0, 200.0};

/// Side length of the square study region.
inline constexpr double kRegionSide = 10000.0;

enum class Density { low, middle, high };

std::string density_name(Density d);
Density density_from_name(const std::string& name);

/// One simulation cell: a sampling scheme plus bootstrap tuning.
struct Scenario {
  std::int64_t n = 500;
  Density density = Density::low;
  double maxdist_factor = 1.5;
  Filter filter = Filter::check(1.5);
  std::int64_t n_sim = 100;
  std::int64_t b = 200;
  std::uint64_t seed = 0;
  std::int64_t n_lags = 10;
  FitConfig fit_cfg{};

  void validate() const;
};

struct RunRecord {
  std::int64_t run_index = 0;
  ExpVariogramParams theta_hat;
  double loss = 0.0;
  bool passes_screen = false;
  bool boot_ok = false;
  double se_nugget = 0.0;
  double se_partial_sill = 0.0;
  double se_shape = 0.0;
  std::int64_t n_generated = 0;
  std::int64_t n_discarded_filter = 0;
  std::int64_t n_discarded_screen = 0;
};

/// Per-parameter summary over a cell's runs. eta is the standard deviation
/// of the parameter estimates across screened runs (the stand-in for the
/// true standard error); eta_hat_* summarize the bootstrap SE estimates.
struct PerformanceStats {
  double eta = 0.0;
  double eta_mc_se = 0.0;
  double eta_hat_mean = 0.0;
  double eta_hat_sd = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  double convergence_rate = 0.0;
};

inline constexpr std::array<const char*, 3> kParameterNames{
    "nugget", "partial_sill", "shape"};

struct ScenarioResult {
  Scenario scenario;
  std::vector<RunRecord> runs;
  std::array<PerformanceStats, 3> stats;
  std::int64_t n_screened = 0;
  std::int64_t n_boot_ok = 0;
};

/// Draw one realization of the zero-mean Gaussian vector whose covariance
/// follows the model at the given locations (Cholesky factor times a vector
/// of standard normal draws, in location order).
std::vector<double> simulate_gaussian_field(std::span<const Point> locations,
                                            const ExpVariogramParams& params,
                                            RngStream& stream);

/// Sampling schemes: low covers the whole region; middle and high draw from
/// centered sub-squares of side 5000 and 2500, shifting the pairwise
/// distance distribution toward small distances.
std::vector<Point> sample_locations(std::int64_t n, Density density,
                                    RngStream& stream);

/// Run one cell: n_sim independent draws, each fitted and (when the fit
/// passes the screen) bootstrapped. Runs execute in parallel with per-run
/// seeds derived from (scenario seed, sampling key, run index); the sampling
/// key excludes the filter so cells differing only in tuning share data.
ScenarioResult run_scenario(const Scenario& sc);

/// Recompute the per-parameter summary from recorded runs.
std::array<PerformanceStats, 3> compute_performance(
    std::span<const RunRecord> runs, std::int64_t n_sim);

/// Ratio of the model-implied total variance to the sample variance.
double relative_bias(const ExpVariogramParams& params, double sample_var);

enum class GroupBy { sample_size, density, maxdist_factor, tuning };

std::string group_by_name(GroupBy g);
GroupBy group_by_from_name(const std::string& name);

struct ReportRow {
  std::string group;
  std::string parameter;
  PerformanceStats stats;
};

/// Average the per-cell statistics over all cells sharing the group key,
/// one row per (group value, parameter). Group bias and MSE are recomputed
/// from the averaged components. Rows are emitted in canonical key order,
/// so the input order does not matter.
std::vector<ReportRow> grouped_report(std::span<const ScenarioResult> results,
                                      GroupBy group_by);

/// CSV emitters/readers for the two per-batch files.
void write_runs_csv(std::ostream& os, std::span<const ScenarioResult> results);
void write_performance_csv(std::ostream& os,
                           std::span<const ScenarioResult> results);
void write_report_csv(std::ostream& os, GroupBy group_by,
                      std::span<const ReportRow> rows);

/// Rebuild per-cell results from a runs.csv stream (stats recomputed), so
/// reports can be re-aggregated without rerunning the simulations.
std::vector<ScenarioResult> read_runs_csv(std::istream& is);

}  // namespace sv
