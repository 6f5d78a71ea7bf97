#include "arx/app.hpp"

#include "arx/error.hpp"
#include "arx/models.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace arx::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

void write_csv_block(std::ostream& out, const std::string& name, const Matrix& m) {
  out << "# " << name << ' ' << m.rows() << 'x' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << linalg::format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_series_csv(std::ostream& out, const SeriesTable& series, int d) {
  out << "k";
  for (const char* name : {"D", "P", "Q"}) {
    for (int i = 1; i <= d; ++i) {
      for (int j = 1; j <= d; ++j) out << ',' << name << '_' << i << '_' << j;
    }
  }
  out << '\n';
  for (int k = 0; k <= series.kmax; ++k) {
    out << k;
    for (const MatrixList* list : {&series.d, &series.p, &series.q}) {
      const Matrix& m = (*list)[static_cast<std::size_t>(k)];
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << linalg::format_double(m(i, j));
      }
    }
    out << '\n';
  }
}

std::string coordinate_name(Eigen::Index flat, Eigen::Index d) {
  return "z_" + std::to_string(flat / d + 1) + "_" + std::to_string(flat % d + 1);
}

}  // namespace

void cmd_limit_matrix(const ExperimentConfig& config, const fs::path& dir, bool series_csv,
                      std::ostream& log) {
  const ArxModel& model = config.model;
  const auto causality = is_causal(model);
  if (!causality.causal) {
    throw NonCausalError("B is not causal: det B(z) has a zero of modulus " +
                             linalg::format_double(1.0 / causality.spectral_radius) +
                             " <= 1 (companion spectral radius " +
                             linalg::format_double(causality.spectral_radius) + ")",
                         causality.spectral_radius);
  }
  const SeriesTable series = make_series(model);
  const LimitSet limit = compute_limit_set(model, series);
  const CrossCheck check = cross_check_schur(model, series, limit);
  const double det_direct = limit.lambda.determinant();

  fs::create_directories(dir);
  if (config.output.wants("csv")) {
    std::ostringstream csv;
    write_csv_block(csv, "H", limit.h);
    write_csv_block(csv, "K", limit.k);
    write_csv_block(csv, "L", limit.l);
    write_csv_block(csv, "Lambda", limit.lambda);
    write_csv_block(csv, "S", limit.s);
    write_csv_block(csv, "Lambda_inv", limit.lambda_inv);
    write_csv_block(csv, "Sigma", limit.sigma);
    csv << "# det_Lambda\n" << linalg::format_double(limit.det_lambda) << '\n';
    write_file(dir / "limit_matrix.csv", csv.str());
    if (series_csv) {
      std::ostringstream s;
      write_series_csv(s, series, model.d());
      write_file(dir / "series.csv", s.str());
    }
  }
  if (config.output.wants("json")) {
    json j;
    j["config_digest"] = config_digest(config);
    j["d"] = model.d();
    j["p"] = model.p();
    j["q"] = model.q();
    j["causal"] = causality.causal;
    j["spectral_radius"] = causality.spectral_radius;
    j["series"] = {{"kmax", series.kmax}, {"tail_bound", series.tail_bound},
                   {"capped", series.capped}};
    j["det_Lambda"] = limit.det_lambda;
    j["det_Lambda_lu"] = det_direct;
    j["cross_check"] = {{"max_discrepancy", check.max_discrepancy},
                        {"tolerance", check.tolerance},
                        {"pass", check.pass}};
    j["H"] = to_json(limit.h);
    j["K"] = to_json(limit.k);
    j["L"] = to_json(limit.l);
    j["Lambda"] = to_json(limit.lambda);
    j["S"] = to_json(limit.s);
    j["Lambda_inv"] = to_json(limit.lambda_inv);
    j["Sigma"] = to_json(limit.sigma);
    write_file(dir / "limit_matrix.json", j.dump(2) + "\n");
  }
  log << "det(Lambda) = " << linalg::format_double(limit.det_lambda) << " (kmax "
      << series.kmax << ", cross-check discrepancy "
      << linalg::format_double(check.max_discrepancy) << ")\n";
}

void cmd_simulate(const ExperimentConfig& config, const fs::path& dir, bool verbose,
                  std::ostream& log) {
  SimConfig sim = to_sim_config(config);
  sim.diagnostics = verbose;
  const SimResult result = run(sim);
  const Matrix theta = config.model.theta();

  fs::create_directories(dir);
  if (config.output.wants("csv")) {
    std::ostringstream csv;
    write_trace_csv(csv, result.trace);
    write_file(dir / "trace.csv", csv.str());
  }
  if (config.output.wants("json")) {
    json j;
    j["config_digest"] = config_digest(config);
    j["seed"] = config.seed;
    j["N"] = config.horizon;
    j["error_sq"] = result.estimator.error_norm(theta);
    j["cost_gap"] = linalg::operator_norm(result.cost - result.noise_mean);
    j["s_n"] = result.estimator.s_n();
    j["theta_hat"] = to_json(result.estimator.theta_hat());
    j["C_N"] = to_json(result.cost);
    j["Delta_N"] = to_json(result.noise_mean);
    j["Gamma_N"] = to_json(result.gamma_mean);
    write_file(dir / "simulate.json", j.dump(2) + "\n");
  }
  log << "simulated " << result.steps << " steps, ||theta_hat - theta||^2 = "
      << linalg::format_double(result.estimator.error_norm(theta)) << '\n';
}

void cmd_montecarlo(const ExperimentConfig& config, const fs::path& dir, bool ablation,
                    std::ostream& log) {
  const mc::EnsembleConfig ensemble = to_ensemble_config(config);
  const mc::EnsembleSummary summary = mc::run_ensemble(ensemble);
  const Eigen::Index d = config.model.d();

  fs::create_directories(dir);
  std::optional<mc::AblationReport> report;
  if (ablation) report = mc::excitation_ablation(ensemble);

  if (config.output.wants("csv")) {
    std::ostringstream z;
    z << "run";
    for (Eigen::Index c = 0; c < summary.z.cols(); ++c) z << ',' << coordinate_name(c, d);
    z << '\n';
    for (Eigen::Index r = 0; r < summary.z.rows(); ++r) {
      z << summary.completed[static_cast<std::size_t>(r)].index;
      for (Eigen::Index c = 0; c < summary.z.cols(); ++c) {
        z << ',' << linalg::format_double(summary.z(r, c));
      }
      z << '\n';
    }
    write_file(dir / "z_matrix.csv", z.str());
    if (report) {
      std::ostringstream a;
      a << "coordinate,fraction_below_on,fraction_below_off,median_error_on,median_error_off\n";
      for (const auto& row : report->rows) {
        a << row.coordinate << ',' << linalg::format_double(row.fraction_below_on) << ','
          << linalg::format_double(row.fraction_below_off) << ','
          << linalg::format_double(row.median_error_on) << ','
          << linalg::format_double(row.median_error_off) << '\n';
      }
      write_file(dir / "ablation.csv", a.str());
    }
  }
  if (config.output.wants("json")) {
    json j;
    j["config_digest"] = config_digest(config);
    j["M"] = summary.runs;
    j["N"] = summary.horizon;
    j["estimator"] = summary.mode == WeightMode::ls ? "ls" : "wls";
    j["completed"] = summary.completed.size();
    json failures = json::array();
    for (const auto& f : summary.failures) {
      failures.push_back({{"index", f.index}, {"seed", f.seed}, {"abort_step", f.abort_step},
                          {"reason", f.reason}});
    }
    j["failures"] = failures;
    json terminal = json::array();
    for (const auto& run : summary.completed) {
      terminal.push_back({{"index", run.index},
                          {"error_sq", run.error_sq},
                          {"cost_gap", run.cost_gap},
                          {"lil_sup", run.lil_sup}});
    }
    j["runs"] = terminal;
    json coords = json::array();
    for (std::size_t c = 0; c < summary.ks.size(); ++c) {
      coords.push_back({{"name", coordinate_name(static_cast<Eigen::Index>(c), d)},
                        {"mean", summary.z_mean[c]},
                        {"variance", summary.z_variance[c]},
                        {"ks", summary.ks[c]}});
    }
    j["clt"] = coords;
    json rates = json::array();
    for (const auto& r : summary.rates) {
      rates.push_back({{"n", r.n},
                       {"error_ratio_median", r.error_ratio_median},
                       {"error_ratio_p90", r.error_ratio_p90},
                       {"cost_ratio_median", r.cost_ratio_median},
                       {"cost_ratio_p90", r.cost_ratio_p90},
                       {"mean_s_relative_gap", r.mean_s_relative_gap},
                       {"s_gap_median", r.s_gap_median}});
    }
    j["rates"] = rates;
    if (summary.lil) {
      j["lil"] = {{"predicted", summary.lil->predicted},
                  {"ratio_max", summary.lil->ratio_max},
                  {"ratio_median", summary.lil->ratio_median},
                  {"ratio_mean", summary.lil->ratio_mean}};
    }
    if (report) {
      json rows = json::array();
      for (const auto& row : report->rows) {
        rows.push_back({{"coordinate", row.coordinate},
                        {"fraction_below_on", row.fraction_below_on},
                        {"fraction_below_off", row.fraction_below_off},
                        {"median_error_on", row.median_error_on},
                        {"median_error_off", row.median_error_off}});
      }
      j["ablation"] = {{"threshold", report->threshold},
                       {"failures_on", report->failures_on},
                       {"failures_off", report->failures_off},
                       {"rows", rows}};
    }
    write_file(dir / "ensemble.json", j.dump(2) + "\n");
  }
  log << "ensemble: " << summary.completed.size() << " completed, " << summary.failures.size()
      << " failed\n";
}

int cmd_selftest(std::ostream& log) {
  int failures = 0;
  auto check = [&](bool ok, const std::string& what) {
    log << (ok ? "PASS " : "FAIL ") << what << '\n';
    if (!ok) ++failures;
  };

  const ArxModel model = benchmark_model();
  const SeriesTable series = make_series(model);
  const LimitSet limit = compute_limit_set(model, series);
  Matrix expected(4, 4);
  expected << 42, 0, 21, 0, 0, 42, 0, 21, 21, 0, 576, 0, 0, 21, 0, 28;
  expected /= 21.0;
  check((limit.lambda - expected).cwiseAbs().maxCoeff() <= 1e-6, "benchmark Lambda");
  check(std::abs(limit.det_lambda - 1885.0 / 21.0) <= 1e-6, "benchmark det(Lambda)");
  check(cross_check_schur(model, series, limit).pass, "benchmark Schur decomposition");

  std::mt19937_64 rng(7);
  bool all_pass = true;
  for (int i = 0; i < 12; ++i) {
    const auto random = random_causal_model(rng, 1 + i % 3, 1 + i % 3, 1 + (i / 3) % 3);
    const auto s = make_series(random);
    const auto l = compute_limit_set(random, s);
    all_pass = all_pass && cross_check_schur(random, s, l).pass &&
               linalg::is_positive_definite(l.lambda);
  }
  check(all_pass, "random causal models: decomposition and positive definiteness");

  mc::EnsembleConfig ensemble{SimConfig{model}};
  ensemble.base.horizon = 200;
  ensemble.runs = 8;
  ensemble.base_seed = 11;
  ensemble.workers = 4;
  const auto parallel = mc::run_ensemble(ensemble);
  const auto serial = mc::run_ensemble_serial(ensemble);
  check(parallel.z == serial.z && parallel.ks == serial.ks,
        "parallel ensemble matches serial reference");
  return failures == 0 ? kExitOk : kExitSelftest;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Excited adaptive tracking for ARX models: limit matrices, simulation, "
               "Monte Carlo"};
  cli.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> workers;
  bool verbose = false;
  bool series_csv = false;
  bool ablation = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config file")->required();
    sub->add_option("--seed", seed, "Override run.seed");
    sub->add_option("--out", out_dir, "Output directory (overrides output.directory)");
    sub->add_option("--workers", workers, "Worker threads (overrides run.workers)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", verbose, "Extra diagnostics");
  };
  auto* limit = cli.add_subcommand("limit-matrix", "Compute H, K, L, Lambda, S, Lambda^-1");
  add_common(limit);
  limit->add_flag("--series-csv", series_csv, "Also export the D/P/Q coefficient table");
  auto* simulate = cli.add_subcommand("simulate", "Run one closed-loop trajectory");
  add_common(simulate);
  auto* montecarlo = cli.add_subcommand("montecarlo", "Run a seed ensemble");
  add_common(montecarlo);
  montecarlo->add_flag("--ablation", ablation, "Also run the excitation on/off comparison");
  auto* selftest = cli.add_subcommand("selftest", "Run internal consistency checks");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << cli.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (selftest->parsed()) return cmd_selftest(out);

    ExperimentConfig config = load_config(config_path);
    if (seed) config.seed = *seed;
    if (workers) config.workers = *workers;
    if (!out_dir.empty()) config.output.directory = out_dir;
    const fs::path dir = config.output.directory;

    if (limit->parsed()) cmd_limit_matrix(config, dir, series_csv, out);
    if (simulate->parsed()) cmd_simulate(config, dir, verbose, out);
    if (montecarlo->parsed()) cmd_montecarlo(config, dir, ablation, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NonCausalError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SimulationAborted& e) {
    err << "numerical abort at step " << e.step() << ": " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace arx::app
