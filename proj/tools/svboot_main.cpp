#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "svboot/bootstrap.hpp"
#include "svboot/csv_io.hpp"
#include "svboot/errors.hpp"
#include "svboot/mc.hpp"
#include "svboot/model.hpp"
#include "svboot/spatial.hpp"
#include "svboot/wls.hpp"

namespace {

using nlohmann::json;

// Exit codes: 0 ok, 1 input/config error, 2 convergence-screen failure,
// 3 bootstrap attempt budget exhausted.
constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitScreen = 2;
constexpr int kExitBudget = 3;

struct CommonOpts {
  std::string input;
  std::string output;
  double max_dist = 0.0;
  std::int64_t n_lags = 10;
  std::string filter = "check";
  double tau = 1.5;
  double alpha = 0.8;
  std::int64_t bootstrap_b = 1000;
  std::uint64_t seed = 2024;
  std::int64_t n_sim = 100;
  int workers = 0;
};

sv::Filter make_filter(const std::string& kind, double tau, double alpha) {
  if (kind == "check") {
    return sv::Filter::check(tau);
  }
  if (kind == "quantile") {
    return sv::Filter::quantile(alpha);
  }
  if (kind == "none") {
    return sv::Filter::none();
  }
  throw sv::domain_error("unknown filter '" + kind +
                         "' (use check|quantile|none)");
}

void apply_workers(int workers) {
  if (workers > 0) {
    omp_set_num_threads(workers);
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw sv::error("cannot open output file: " + path);
  }
  f << content;
}

json variogram_json(const sv::EmpiricalVariogram& ev) {
  json lags = json::array();
  const auto& centers = ev.grid.bin_centers();
  for (std::size_t k = 0; k < ev.pair_counts.size(); ++k) {
    json lag{{"distance", centers[k]}, {"count", ev.pair_counts[k]}};
    if (ev.pair_counts[k] > 0) {
      lag["gamma"] = ev.gamma_hat[k];
    } else {
      lag["gamma"] = nullptr;
    }
    lags.push_back(std::move(lag));
  }
  return json{{"max_dist", ev.grid.max_dist()},
              {"n_lags", ev.pair_counts.size()},
              {"lags", std::move(lags)}};
}

int cmd_fit(const CommonOpts& opt) {
  apply_workers(opt.workers);
  const sv::SpatialDataset data = sv::read_points_csv_file(opt.input);
  const sv::LagGrid grid(opt.max_dist, static_cast<std::size_t>(opt.n_lags));
  const sv::EmpiricalVariogram ev = sv::empirical_variogram(data, grid);
  const sv::FitResult fit = sv::fit_wls(ev);

  json out = fit;  // params, loss, screen flag, iterations
  out["empirical_variogram"] = variogram_json(ev);
  const double var = sv::sample_variance(data.values());
  out["sample_variance"] = var;
  if (var > 0.0) {
    out["relative_bias"] = sv::relative_bias(fit.params, var);
  } else {
    out["relative_bias"] = nullptr;
  }

  write_file(opt.output, out.dump(2) + "\n");
  if (!fit.passes_screen) {
    std::cerr << "fit failed the convergence screen (some component >= 1000); "
                 "result written to "
              << opt.output << "\n";
    return kExitScreen;
  }
  std::cout << "fit written to " << opt.output << "\n";
  return kExitOk;
}

int cmd_bootstrap(const CommonOpts& opt, std::int64_t max_attempts_factor) {
  apply_workers(opt.workers);
  const sv::SpatialDataset data = sv::read_points_csv_file(opt.input);
  const sv::LagGrid grid(opt.max_dist, static_cast<std::size_t>(opt.n_lags));

  sv::BootstrapConfig cfg;
  cfg.b = opt.bootstrap_b;
  cfg.filter = make_filter(opt.filter, opt.tau, opt.alpha);
  cfg.seed = opt.seed;
  cfg.max_attempts_factor = max_attempts_factor;

  try {
    const sv::BootstrapRun run = sv::run_generalized_bootstrap(data, grid, cfg);
    write_file(opt.output, sv::bootstrap_run_json(run, cfg).dump(2) + "\n");

    const auto& p = run.theta_hat;
    auto row = [](const char* name, double est, double se) {
      std::printf("%-14s %14.4f %14.4f %10.4f\n", name, est, se,
                  est != 0.0 ? se / est : 0.0);
    };
    std::printf("%-14s %14s %14s %10s\n", "parameter", "estimate", "SE",
                "SE/est");
    row("nugget", p.nugget, run.se_nugget);
    row("partial_sill", p.partial_sill, run.se_partial_sill);
    row("shape", p.shape, run.se_shape);
    std::printf("replicates retained %zu, generated %lld (screen-discards "
                "%lld, filter-discards %lld)\n",
                run.retained_nugget.size(),
                static_cast<long long>(run.n_generated),
                static_cast<long long>(run.n_discarded_screen),
                static_cast<long long>(run.n_discarded_filter));
    std::cout << "bootstrap run written to " << opt.output << "\n";
    return kExitOk;
  } catch (const sv::base_fit_failed& e) {
    std::cerr << e.what() << "\n";
    return kExitScreen;
  } catch (const sv::attempt_budget_exhausted& e) {
    std::cerr << e.what() << " (retained " << e.n_retained << " of "
              << opt.bootstrap_b << " after " << e.n_generated
              << " attempts; screen-discards " << e.n_discarded_screen
              << ", filter-discards " << e.n_discarded_filter << ")\n";
    return kExitBudget;
  }
}

std::vector<double> parse_list(const std::vector<std::string>& items,
                               const char* flag) {
  std::vector<double> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) {
        continue;
      }
      try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) {
          throw std::invalid_argument(tok);
        }
        out.push_back(v);
      } catch (const std::exception&) {
        throw sv::domain_error(std::string(flag) + ": cannot parse '" + tok +
                               "' as a number");
      }
    }
  }
  return out;
}

struct SimulateOpts {
  std::vector<std::string> n_list{"500"};
  std::vector<std::string> density_list{"low"};
  std::vector<std::string> maxdist_list{"1.5"};
  std::string filter = "check";
  std::vector<std::string> tau_list{"1.5"};
  std::vector<std::string> alpha_list{"0.8"};
  std::int64_t b = 200;
  std::int64_t n_sim = 100;
  std::uint64_t seed = 2024;
  std::int64_t n_lags = 10;
  int workers = 0;
  std::string output = ".";
};

int cmd_simulate(const SimulateOpts& opt) {
  apply_workers(opt.workers);

  std::vector<sv::Density> densities;
  for (const auto& item : opt.density_list) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) {
        densities.push_back(sv::density_from_name(tok));
      }
    }
  }
  const std::vector<double> ns = parse_list(opt.n_list, "--n");
  const std::vector<double> factors = parse_list(opt.maxdist_list, "--maxdist-factor");
  std::vector<sv::Filter> filters;
  if (opt.filter == "check") {
    for (double tau : parse_list(opt.tau_list, "--tau")) {
      filters.push_back(sv::Filter::check(tau));
    }
  } else if (opt.filter == "quantile") {
    for (double alpha : parse_list(opt.alpha_list, "--alpha")) {
      filters.push_back(sv::Filter::quantile(alpha));
    }
  } else if (opt.filter == "none") {
    filters.push_back(sv::Filter::none());
  } else {
    throw sv::domain_error("unknown filter '" + opt.filter + "'");
  }
  if (ns.empty() || densities.empty() || factors.empty() || filters.empty()) {
    throw sv::domain_error("simulate: empty scenario grid");
  }

  std::vector<sv::ScenarioResult> results;
  const std::size_t n_cells =
      ns.size() * densities.size() * factors.size() * filters.size();
  std::size_t cell_no = 0;
  for (double n : ns) {
    for (sv::Density d : densities) {
      for (double factor : factors) {
        for (const sv::Filter& filter : filters) {
          sv::Scenario sc;
          sc.n = static_cast<std::int64_t>(n);
          sc.density = d;
          sc.maxdist_factor = factor;
          sc.filter = filter;
          sc.n_sim = opt.n_sim;
          sc.b = opt.b;
          sc.seed = opt.seed;
          sc.n_lags = opt.n_lags;
          ++cell_no;
          std::cout << "cell " << cell_no << "/" << n_cells << ": n=" << sc.n
                    << " density=" << sv::density_name(d) << " maxdist="
                    << factor << std::endl;
          results.push_back(sv::run_scenario(sc));
        }
      }
    }
  }

  std::ofstream runs(opt.output + "/runs.csv", std::ios::binary);
  if (!runs) {
    throw sv::error("cannot open " + opt.output + "/runs.csv");
  }
  sv::write_runs_csv(runs, results);

  std::ofstream perf(opt.output + "/performance.csv", std::ios::binary);
  if (!perf) {
    throw sv::error("cannot open " + opt.output + "/performance.csv");
  }
  sv::write_performance_csv(perf, results);

  std::cout << "wrote " << opt.output << "/runs.csv and " << opt.output
            << "/performance.csv\n";
  return kExitOk;
}

struct ReportOpts {
  std::string input;
  std::string output;
  std::string group_by = "tuning";
  std::string plot_fit;
  std::string plot_out;
};

int cmd_report(const ReportOpts& opt) {
  if (!opt.input.empty()) {
    std::ifstream is(opt.input);
    if (!is) {
      throw sv::error("cannot open input file: " + opt.input);
    }
    const std::vector<sv::ScenarioResult> cells = sv::read_runs_csv(is);
    const sv::GroupBy group_by = sv::group_by_from_name(opt.group_by);
    const std::vector<sv::ReportRow> rows = sv::grouped_report(cells, group_by);
    std::ofstream os(opt.output, std::ios::binary);
    if (!os) {
      throw sv::error("cannot open output file: " + opt.output);
    }
    sv::write_report_csv(os, group_by, rows);
    std::cout << "wrote " << opt.output << " (" << rows.size() << " rows)\n";
  }

  if (!opt.plot_fit.empty()) {
    std::ifstream is(opt.plot_fit);
    if (!is) {
      throw sv::error("cannot open fit file: " + opt.plot_fit);
    }
    json fit = json::parse(is);
    const sv::ExpVariogramParams params = fit.at("params");
    const json& ev = fit.at("empirical_variogram");
    const double max_dist = ev.at("max_dist");

    std::ofstream os(opt.plot_out, std::ios::binary);
    if (!os) {
      throw sv::error("cannot open output file: " + opt.plot_out);
    }
    os << "kind,distance,gamma,count\n";
    char buf[128];
    for (const json& lag : ev.at("lags")) {
      if (lag.at("gamma").is_null()) {
        continue;
      }
      std::snprintf(buf, sizeof(buf), "empirical,%.17g,%.17g,%lld\n",
                    lag.at("distance").get<double>(),
                    lag.at("gamma").get<double>(),
                    lag.at("count").get<long long>());
      os << buf;
    }
    constexpr int kSamples = 200;
    for (int s = 0; s <= kSamples; ++s) {
      const double h = max_dist * s / kSamples;
      std::snprintf(buf, sizeof(buf), "model,%.17g,%.17g,0\n", h,
                    sv::eval_model(params, h));
      os << buf;
    }
    std::cout << "wrote " << opt.plot_out << "\n";
  }

  if (opt.input.empty() && opt.plot_fit.empty()) {
    throw sv::domain_error("report: nothing to do (pass --input and/or --plot-fit)");
  }
  return kExitOk;
}

// Flat `key = value` config: each key names a long option of the
// subcommand; values fill in only where the command line left the option
// unset, so flags always win.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw sv::error("cannot open config file: " + path);
  }
  auto strip = [](const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
      return std::string();
    }
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const std::string t = strip(line);
    if (t.empty() || t[0] == '#') {
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw sv::domain_error("config line " + std::to_string(line_no) +
                             ": expected key = value");
    }
    const std::string key = strip(t.substr(0, eq));
    const std::string value = strip(t.substr(eq + 1));
    if (key.empty() || key == "config") {
      throw sv::domain_error("config line " + std::to_string(line_no) +
                             ": bad key");
    }
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw sv::domain_error("config line " + std::to_string(line_no) +
                             ": unknown key '" + key + "'");
    }
    if (opt->count() == 0) {
      opt->add_result(value);
      opt->run_callback();
    }
  }
}

void require_set(CLI::App* sub, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (sub->get_option(name)->count() == 0) {
      throw sv::domain_error(std::string(name) +
                             " is required (flag or config file)");
    }
  }
}

CLI::Option* add_config_opt(CLI::App* sub, std::string& var) {
  return sub->add_option(
      "--config", var, "flat key = value config file; flags override it");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "svboot: exponential semi-variogram fitting with bootstrap standard "
      "errors and a Monte Carlo evaluation harness"};
  app.require_subcommand(1);

  CommonOpts fit_opt;
  std::string fit_config;
  CLI::App* fit = app.add_subcommand(
      "fit", "fit an exponential semi-variogram model to x,y,z CSV data");
  add_config_opt(fit, fit_config);
  fit->add_option("--input", fit_opt.input, "input CSV with header x,y,z");
  fit->add_option("--output", fit_opt.output, "output JSON path");
  fit->add_option("--max-dist", fit_opt.max_dist,
                  "largest pairwise distance entering the estimate");
  fit->add_option("--n-lags", fit_opt.n_lags, "number of lag intervals")->capture_default_str();
  fit->add_option("--workers", fit_opt.workers, "thread cap (0 = default)");

  CommonOpts boot_opt;
  std::string boot_config;
  std::int64_t max_attempts_factor = 50;
  CLI::App* boot = app.add_subcommand(
      "bootstrap",
      "estimate parameter standard errors with the filtered generalized "
      "bootstrap");
  add_config_opt(boot, boot_config);
  boot->add_option("--input", boot_opt.input, "input CSV with header x,y,z");
  boot->add_option("--output", boot_opt.output, "output JSON path");
  boot->add_option("--max-dist", boot_opt.max_dist,
                   "largest pairwise distance entering the estimate");
  boot->add_option("--n-lags", boot_opt.n_lags, "number of lag intervals")->capture_default_str();
  boot->add_option("--filter", boot_opt.filter,
                   "replicate filter: check|quantile|none")->capture_default_str();
  boot->add_option("--tau", boot_opt.tau,
                   "check-filter threshold factor; study grid: "
                   "1.1 1.5 2.0 2.5 3.0")
      ->capture_default_str();
  boot->add_option("--alpha", boot_opt.alpha,
                   "quantile-filter level in (0,1]; study grid: "
                   "0.75 0.80 0.85 0.90 0.95 1.00 (1.0 = no filtering)")
      ->capture_default_str();
  boot->add_option("--bootstrap-b", boot_opt.bootstrap_b,
                   "number of retained replicates")->capture_default_str();
  boot->add_option("--seed", boot_opt.seed, "RNG seed")->capture_default_str();
  boot->add_option("--max-attempts-factor", max_attempts_factor,
                   "attempt budget as a multiple of B")->capture_default_str();
  boot->add_option("--workers", boot_opt.workers, "thread cap (0 = default)");

  SimulateOpts sim_opt;
  std::string sim_config;
  CLI::App* sim = app.add_subcommand(
      "simulate",
      "run Monte Carlo scenarios over simulated Gaussian fields and write "
      "runs.csv + performance.csv");
  add_config_opt(sim, sim_config);
  sim->add_option("--n", sim_opt.n_list,
                  "sample sizes (comma-separated); study grid: 500 1000 2000");
  sim->add_option("--density", sim_opt.density_list,
                  "sampling densities: low|middle|high");
  sim->add_option("--maxdist-factor", sim_opt.maxdist_list,
                  "max-distance factors; study grid: 1.1 1.5 2.0");
  sim->add_option("--filter", sim_opt.filter,
                  "replicate filter: check|quantile|none")->capture_default_str();
  sim->add_option("--tau", sim_opt.tau_list,
                  "check-filter thresholds; study grid: 1.1 1.5 2.0 2.5 3.0");
  sim->add_option("--alpha", sim_opt.alpha_list,
                  "quantile-filter levels; study grid: 0.75 0.80 0.85 0.90 "
                  "0.95 1.00");
  sim->add_option("--bootstrap-b", sim_opt.b, "retained replicates per run")->capture_default_str();
  sim->add_option("--n-sim", sim_opt.n_sim,
                  "runs per scenario (100 desk scale, 3000 study scale)")->capture_default_str();
  sim->add_option("--seed", sim_opt.seed, "master RNG seed")->capture_default_str();
  sim->add_option("--n-lags", sim_opt.n_lags, "number of lag intervals")->capture_default_str();
  sim->add_option("--workers", sim_opt.workers, "thread cap (0 = default)");
  sim->add_option("--output", sim_opt.output, "output directory")->capture_default_str();

  ReportOpts rep_opt;
  std::string rep_config;
  CLI::App* rep = app.add_subcommand(
      "report", "re-aggregate runs.csv into grouped performance tables");
  add_config_opt(rep, rep_config);
  rep->add_option("--input", rep_opt.input, "runs.csv produced by simulate");
  rep->add_option("--output", rep_opt.output, "output CSV path");
  rep->add_option("--group-by", rep_opt.group_by,
                  "sample_size|density|maxdist_factor|tuning")->capture_default_str();
  rep->add_option("--plot-fit", rep_opt.plot_fit,
                  "fit JSON to turn into per-lag plot data");
  rep->add_option("--plot-out", rep_opt.plot_out,
                  "plot data CSV path (with --plot-fit)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (fit->parsed()) {
      if (!fit_config.empty()) {
        apply_config(fit, fit_config);
      }
      require_set(fit, {"--input", "--output", "--max-dist"});
      return cmd_fit(fit_opt);
    }
    if (boot->parsed()) {
      if (!boot_config.empty()) {
        apply_config(boot, boot_config);
      }
      require_set(boot, {"--input", "--output", "--max-dist"});
      return cmd_bootstrap(boot_opt, max_attempts_factor);
    }
    if (sim->parsed()) {
      if (!sim_config.empty()) {
        apply_config(sim, sim_config);
      }
      return cmd_simulate(sim_opt);
    }
    if (rep->parsed()) {
      if (!rep_config.empty()) {
        apply_config(rep, rep_config);
      }
      if (!rep_opt.input.empty() && rep_opt.output.empty()) {
        throw sv::domain_error("report: --output is required with --input");
      }
      if (!rep_opt.plot_fit.empty() && rep_opt.plot_out.empty()) {
        throw sv::domain_error("report: --plot-out is required with --plot-fit");
      }
      return cmd_report(rep_opt);
    }
  } catch (const sv::csv_parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
