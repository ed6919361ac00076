#include "svboot/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "svboot/errors.hpp"
#include "svboot/linalg.hpp"
#include "svboot/wls.hpp"

namespace sv {

namespace {

constexpr std::uint64_t kDataDomain = 0x64617461;  // field + location draws
constexpr std::uint64_t kBootDomain = 0x73656564;  // bootstrap master seeds

double sample_sd(std::span<const double> xs) {
  return std::sqrt(sample_variance(xs));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Display labels: short form, full precision stays in the data columns.
std::string format_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string filter_label(const Filter& f) {
  switch (f.kind) {
    case Filter::Kind::check:
      return "check tau=" + format_label(f.tau);
    case Filter::Kind::quantile:
      return "quantile alpha=" + format_label(f.alpha);
    case Filter::Kind::none:
      break;
  }
  return "none";
}

}  // namespace

std::string density_name(Density d) {
  switch (d) {
    case Density::low:
      return "low";
    case Density::middle:
      return "middle";
    case Density::high:
      return "high";
  }
  return "low";
}

Density density_from_name(const std::string& name) {
  if (name == "low") {
    return Density::low;
  }
  if (name == "middle") {
    return Density::middle;
  }
  if (name == "high") {
    return Density::high;
  }
  throw domain_error("unknown density '" + name + "' (use low|middle|high)");
}

void Scenario::validate() const {
  if (n < 2) {
    throw domain_error("Scenario: need n >= 2");
  }
  if (!(maxdist_factor > 0.0)) {
    throw domain_error("Scenario: maxdist_factor must be positive");
  }
  if (n_sim < 1 || b < 2 || n_lags < 1) {
    throw domain_error("Scenario: n_sim, b and n_lags must be positive");
  }
  filter.validate();
  fit_cfg.validate();
}

std::vector<double> simulate_gaussian_field(std::span<const Point> locations,
                                            const ExpVariogramParams& params,
                                            RngStream& stream) {
  params.validate();
  const Matrix covariance = covariance_matrix(locations, params);
  const Matrix factor =
      cholesky_lower_jittered(covariance, 1e-10 * params.total_sill());
  std::vector<double> eps(locations.size());
  for (auto& e : eps) {
    e = stream.normal();
  }
  return lower_matvec(factor, eps);
}

std::vector<Point> sample_locations(std::int64_t n, Density density,
                                    RngStream& stream) {
  if (n < 2) {
    throw domain_error("sample_locations: need n >= 2");
  }
  double side = kRegionSide;
  switch (density) {
    case Density::low:
      side = kRegionSide;
      break;
    case Density::middle:
      side = kRegionSide / 2.0;
      break;
    case Density::high:
      side = kRegionSide / 4.0;
      break;
  }
  const double offset = (kRegionSide - side) / 2.0;
  std::vector<Point> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) {
    p.x = offset + side * stream.u01();
    p.y = offset + side * stream.u01();
  }
  return pts;
}

std::array<PerformanceStats, 3> compute_performance(
    std::span<const RunRecord> runs, std::int64_t n_sim) {
  std::array<std::vector<double>, 3> estimates;
  std::array<std::vector<double>, 3> se_estimates;
  std::int64_t n_screened = 0;
  for (const RunRecord& run : runs) {
    if (!run.passes_screen) {
      continue;
    }
    ++n_screened;
    estimates[0].push_back(run.theta_hat.nugget);
    estimates[1].push_back(run.theta_hat.partial_sill);
    estimates[2].push_back(run.theta_hat.shape);
    if (run.boot_ok) {
      se_estimates[0].push_back(run.se_nugget);
      se_estimates[1].push_back(run.se_partial_sill);
      se_estimates[2].push_back(run.se_shape);
    }
  }

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::array<PerformanceStats, 3> stats;
  for (std::size_t p = 0; p < 3; ++p) {
    PerformanceStats& s = stats[p];
    s.convergence_rate =
        n_sim > 0 ? static_cast<double>(n_screened) / static_cast<double>(n_sim)
                  : nan;
    if (estimates[p].size() >= 2) {
      s.eta = sample_sd(estimates[p]);
      s.eta_mc_se =
          s.eta / std::sqrt(2.0 * (static_cast<double>(estimates[p].size()) - 1.0));
    } else {
      s.eta = nan;
      s.eta_mc_se = nan;
    }
    if (se_estimates[p].size() >= 2) {
      double mean = 0.0;
      for (double v : se_estimates[p]) {
        mean += v;
      }
      mean /= static_cast<double>(se_estimates[p].size());
      s.eta_hat_mean = mean;
      s.eta_hat_sd = sample_sd(se_estimates[p]);
    } else {
      s.eta_hat_mean = nan;
      s.eta_hat_sd = nan;
    }
    s.bias = s.eta_hat_mean - s.eta;
    s.mse = s.eta_hat_sd * s.eta_hat_sd + s.bias * s.bias;
  }
  return stats;
}

ScenarioResult run_scenario(const Scenario& sc) {
  sc.validate();

  // Sampling key excludes the filter: cells that differ only in tuning see
  // identical data, matching how the study reuses its simulated samples.
  const std::uint64_t cell_seed = derive_seed(
      derive_seed(sc.seed, static_cast<std::uint64_t>(sc.n),
                  static_cast<std::uint64_t>(sc.density)),
      static_cast<std::uint64_t>(std::llround(sc.maxdist_factor * 1e6)),
      static_cast<std::uint64_t>(sc.n_lags));

  const double max_dist = sc.maxdist_factor * practical_range(kGeneratingParams);

  ScenarioResult result;
  result.scenario = sc;
  result.runs.assign(static_cast<std::size_t>(sc.n_sim), {});

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < sc.n_sim; ++r) {
    RunRecord rec;
    rec.run_index = r;

    // Exceptions must not escape the worker loop; a failed run stays at its
    // defaults (screen fail, no bootstrap) and is excluded from the stats.
    try {
      RngStream data_stream(
          derive_seed(cell_seed, kDataDomain, static_cast<std::uint64_t>(r)));
      const std::vector<Point> locations =
          sample_locations(sc.n, sc.density, data_stream);
      const std::vector<double> values =
          simulate_gaussian_field(locations, kGeneratingParams, data_stream);
      const SpatialDataset data(locations, values);
      const LagGrid grid(max_dist, static_cast<std::size_t>(sc.n_lags));

      const EmpiricalVariogram ev = empirical_variogram(data, grid);
      const FitResult fit = fit_wls(ev, sc.fit_cfg);
      rec.theta_hat = fit.params;
      rec.loss = fit.loss_value;
      rec.passes_screen = fit.passes_screen;

      if (rec.passes_screen) {
        BootstrapConfig bcfg;
        bcfg.b = sc.b;
        bcfg.filter = sc.filter;
        bcfg.seed =
            derive_seed(cell_seed, kBootDomain, static_cast<std::uint64_t>(r));
        bcfg.fit_cfg = sc.fit_cfg;
        try {
          const BootstrapRun boot = run_generalized_bootstrap(data, grid, bcfg);
          rec.boot_ok = true;
          rec.se_nugget = boot.se_nugget;
          rec.se_partial_sill = boot.se_partial_sill;
          rec.se_shape = boot.se_shape;
          rec.n_generated = boot.n_generated;
          rec.n_discarded_filter = boot.n_discarded_filter;
          rec.n_discarded_screen = boot.n_discarded_screen;
        } catch (const error&) {
          rec.boot_ok = false;
        }
      }
    } catch (const error&) {
      rec.passes_screen = false;
      rec.boot_ok = false;
    }
    result.runs[static_cast<std::size_t>(r)] = rec;
  }

  result.stats = compute_performance(result.runs, sc.n_sim);
  for (const RunRecord& rec : result.runs) {
    result.n_screened += rec.passes_screen ? 1 : 0;
    result.n_boot_ok += rec.boot_ok ? 1 : 0;
  }
  return result;
}

double relative_bias(const ExpVariogramParams& params, double sample_var) {
  if (!(sample_var > 0.0)) {
    throw domain_error("relative_bias: sample variance must be > 0");
  }
  return params.total_sill() / sample_var;
}

std::string group_by_name(GroupBy g) {
  switch (g) {
    case GroupBy::sample_size:
      return "sample_size";
    case GroupBy::density:
      return "density";
    case GroupBy::maxdist_factor:
      return "maxdist_factor";
    case GroupBy::tuning:
      return "tuning";
  }
  return "sample_size";
}

GroupBy group_by_from_name(const std::string& name) {
  if (name == "sample_size") {
    return GroupBy::sample_size;
  }
  if (name == "density") {
    return GroupBy::density;
  }
  if (name == "maxdist_factor") {
    return GroupBy::maxdist_factor;
  }
  if (name == "tuning") {
    return GroupBy::tuning;
  }
  throw domain_error("unknown grouping '" + name +
                     "' (use sample_size|density|maxdist_factor|tuning)");
}

namespace {

struct GroupKey {
  int major = 0;     // density rank or filter kind rank
  double value = 0;  // numeric key
  std::string label;

  bool operator<(const GroupKey& o) const {
    if (major != o.major) {
      return major < o.major;
    }
    return value < o.value;
  }
};

GroupKey make_key(const Scenario& sc, GroupBy g) {
  switch (g) {
    case GroupBy::sample_size:
      return {0, static_cast<double>(sc.n), std::to_string(sc.n)};
    case GroupBy::density:
      return {static_cast<int>(sc.density), 0.0, density_name(sc.density)};
    case GroupBy::maxdist_factor: {
      return {0, sc.maxdist_factor, format_label(sc.maxdist_factor)};
    }
    case GroupBy::tuning: {
      const int rank = static_cast<int>(sc.filter.kind);
      const double v = sc.filter.kind == Filter::Kind::check  ? sc.filter.tau
                       : sc.filter.kind == Filter::Kind::quantile
                           ? sc.filter.alpha
                           : 0.0;
      return {rank, v, filter_label(sc.filter)};
    }
  }
  return {};
}

}  // namespace

std::vector<ReportRow> grouped_report(std::span<const ScenarioResult> results,
                                      GroupBy group_by) {
  if (results.empty()) {
    throw empty_group("grouped_report: no results to group");
  }

  std::map<GroupKey, std::vector<const ScenarioResult*>> groups;
  for (const ScenarioResult& res : results) {
    groups[make_key(res.scenario, group_by)].push_back(&res);
  }

  std::vector<ReportRow> rows;
  for (const auto& [key, cells] : groups) {
    for (std::size_t p = 0; p < 3; ++p) {
      PerformanceStats avg;
      const double m = static_cast<double>(cells.size());
      for (const ScenarioResult* cell : cells) {
        const PerformanceStats& s = cell->stats[p];
        avg.eta += s.eta / m;
        avg.eta_mc_se += s.eta_mc_se / m;
        avg.eta_hat_mean += s.eta_hat_mean / m;
        avg.eta_hat_sd += s.eta_hat_sd / m;
        avg.convergence_rate += s.convergence_rate / m;
      }
      avg.bias = avg.eta_hat_mean - avg.eta;
      avg.mse = avg.eta_hat_sd * avg.eta_hat_sd + avg.bias * avg.bias;
      rows.push_back({key.label, kParameterNames[p], avg});
    }
  }
  return rows;
}

namespace {

std::string scenario_label(const Scenario& sc) {
  return "n=" + std::to_string(sc.n) + " density=" + density_name(sc.density) +
         " maxdist=" + format_label(sc.maxdist_factor) + " " +
         filter_label(sc.filter);
}

void write_stats_row(std::ostream& os, const std::string& group_by,
                     const std::string& group, const std::string& parameter,
                     const PerformanceStats& s) {
  os << group_by << ',' << group << ',' << parameter << ','
     << format_double(s.eta) << ',' << format_double(s.eta_mc_se) << ','
     << format_double(s.eta_hat_mean) << ',' << format_double(s.eta_hat_sd)
     << ',' << format_double(s.bias) << ',' << format_double(s.mse) << ','
     << format_double(s.convergence_rate) << '\n';
}

constexpr const char* kStatsHeader =
    "group_by,group,parameter,eta,eta_mc_se,eta_hat_mean,eta_hat_sd,bias,mse,"
    "convergence_rate";

}  // namespace

void write_runs_csv(std::ostream& os, std::span<const ScenarioResult> results) {
  os << "n,density,maxdist_factor,filter,tuning,b,run,c0_hat,sigma2_hat,"
        "phi_hat,loss,passes_screen,boot_ok,se_c0,se_sigma2,se_phi,"
        "n_generated,n_discarded_filter,n_discarded_screen\n";
  for (const ScenarioResult& res : results) {
    const Scenario& sc = res.scenario;
    std::string filter_kind = "none";
    double tuning = 0.0;
    if (sc.filter.kind == Filter::Kind::check) {
      filter_kind = "check";
      tuning = sc.filter.tau;
    } else if (sc.filter.kind == Filter::Kind::quantile) {
      filter_kind = "quantile";
      tuning = sc.filter.alpha;
    }
    for (const RunRecord& run : res.runs) {
      os << sc.n << ',' << density_name(sc.density) << ','
         << format_double(sc.maxdist_factor) << ',' << filter_kind << ','
         << format_double(tuning) << ',' << sc.b << ',' << run.run_index << ','
         << format_double(run.theta_hat.nugget) << ','
         << format_double(run.theta_hat.partial_sill) << ','
         << format_double(run.theta_hat.shape) << ','
         << format_double(run.loss) << ',' << (run.passes_screen ? 1 : 0)
         << ',' << (run.boot_ok ? 1 : 0) << ','
         << format_double(run.se_nugget) << ','
         << format_double(run.se_partial_sill) << ','
         << format_double(run.se_shape) << ',' << run.n_generated << ','
         << run.n_discarded_filter << ',' << run.n_discarded_screen << '\n';
    }
  }
}

void write_performance_csv(std::ostream& os,
                           std::span<const ScenarioResult> results) {
  os << kStatsHeader << '\n';
  for (const ScenarioResult& res : results) {
    const std::string label = scenario_label(res.scenario);
    for (std::size_t p = 0; p < 3; ++p) {
      write_stats_row(os, "scenario", label, kParameterNames[p], res.stats[p]);
    }
  }
}

void write_report_csv(std::ostream& os, GroupBy group_by,
                      std::span<const ReportRow> rows) {
  os << kStatsHeader << '\n';
  for (const ReportRow& row : rows) {
    write_stats_row(os, group_by_name(group_by), row.group, row.parameter,
                    row.stats);
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception&) {
    throw csv_parse_error("runs.csv: bad numeric field '" + s + "' on line " +
                              std::to_string(line_no),
                          line_no);
  }
}

std::int64_t parse_int(const std::string& s, std::size_t line_no) {
  return static_cast<std::int64_t>(parse_double(s, line_no));
}

}  // namespace

std::vector<ScenarioResult> read_runs_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw csv_parse_error("runs.csv: empty file", 1);
  }

  // Cells keyed by (n, density, maxdist, filter kind, tuning, b); rebuilt in
  // first-appearance order.
  std::vector<ScenarioResult> cells;
  std::map<std::string, std::size_t> index;

  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 19) {
      throw csv_parse_error("runs.csv: expected 19 fields, got " +
                                std::to_string(f.size()) + " on line " +
                                std::to_string(line_no),
                            line_no);
    }

    Scenario sc;
    sc.n = parse_int(f[0], line_no);
    sc.density = density_from_name(f[1]);
    sc.maxdist_factor = parse_double(f[2], line_no);
    const std::string& kind = f[3];
    const double tuning = parse_double(f[4], line_no);
    if (kind == "check") {
      sc.filter = Filter::check(tuning);
    } else if (kind == "quantile") {
      sc.filter = Filter::quantile(tuning);
    } else if (kind == "none") {
      sc.filter = Filter::none();
    } else {
      throw csv_parse_error("runs.csv: unknown filter '" + kind + "' on line " +
                                std::to_string(line_no),
                            line_no);
    }
    sc.b = parse_int(f[5], line_no);

    const std::string key = std::to_string(sc.n) + '|' + f[1] + '|' + f[2] +
                            '|' + kind + '|' + f[4] + '|' + f[5];
    auto [it, inserted] = index.try_emplace(key, cells.size());
    if (inserted) {
      cells.emplace_back();
      cells.back().scenario = sc;
    }
    ScenarioResult& cell = cells[it->second];

    RunRecord run;
    run.run_index = parse_int(f[6], line_no);
    run.theta_hat.nugget = parse_double(f[7], line_no);
    run.theta_hat.partial_sill = parse_double(f[8], line_no);
    run.theta_hat.shape = parse_double(f[9], line_no);
    run.loss = parse_double(f[10], line_no);
    run.passes_screen = parse_int(f[11], line_no) != 0;
    run.boot_ok = parse_int(f[12], line_no) != 0;
    run.se_nugget = parse_double(f[13], line_no);
    run.se_partial_sill = parse_double(f[14], line_no);
    run.se_shape = parse_double(f[15], line_no);
    run.n_generated = parse_int(f[16], line_no);
    run.n_discarded_filter = parse_int(f[17], line_no);
    run.n_discarded_screen = parse_int(f[18], line_no);
    cell.runs.push_back(run);
  }

  if (cells.empty()) {
    throw csv_parse_error("runs.csv: no data rows", line_no);
  }

  for (ScenarioResult& cell : cells) {
    cell.scenario.n_sim = static_cast<std::int64_t>(cell.runs.size());
    cell.stats = compute_performance(cell.runs, cell.scenario.n_sim);
    for (const RunRecord& run : cell.runs) {
      cell.n_screened += run.passes_screen ? 1 : 0;
      cell.n_boot_ok += run.boot_ok ? 1 : 0;
    }
  }
  return cells;
}

}  // namespace sv
