// Command-line front end: config-driven simulation, estimation, Monte Carlo
// studies, limit-law quantile tables, and identification diagnostics.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "xsts/avar.hpp"
#include "xsts/errors.hpp"
#include "xsts/inference.hpp"
#include "xsts/io.hpp"
#include "xsts/limitdist.hpp"
#include "xsts/mc_harness.hpp"
#include "xsts/rng.hpp"
#include "xsts/solve.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNonConvergence = 4;
constexpr int kExitStudy = 5;
constexpr int kExitSampler = 6;
constexpr int kExitDiagnostic = 7;

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("XSTS_LOG");
  if (env == nullptr) return LogLevel::Error;
  const std::string v(env);
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  return LogLevel::Error;
}

void log(LogLevel level, const std::string& msg) {
  static const LogLevel threshold = log_level();
  if (level <= threshold) std::cerr << "[xsts] " << msg << '\n';
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config seed
  int parallel = 1;
  std::string format = "json";
};

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw xsts::config_error(std::string("config parse error: ") + e.what());
  }
  return j;
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

xsts::ModelSpec model_spec_from_json(const nlohmann::json& j) {
  xsts::StudyConfig c = xsts::study_config_from_json(j);
  return c.spec;
}

int cmd_simulate(const CommonArgs& args) {
  const nlohmann::json j = load_config(args.config_path);
  xsts::reject_unknown_keys(
      j,
      {"regime", "rho", "gamma", "nu0", "sigma_eta", "tau", "start_mode",
       "upsilon", "tau0f", "seed", "beta0", "n", "T", "sigma_eps", "loading",
       "loading_constant", "panel"},
      "simulate config");
  const std::string regime = j.value("regime", std::string("stationary"));
  const double sigma_eta = j.value("sigma_eta", 1.0);
  const int tau = j.value("tau", 100);
  std::uint64_t seed = j.value("seed", std::uint64_t{1});
  if (args.seed) seed = *args.seed;
  const int T = j.value("T", 2);

  xsts::FactorPath factors;
  double rho = 1.0;
  if (regime == "stationary") {
    rho = j.value("rho", 0.5);
    xsts::StartSpec start = xsts::StartSpec::fixed(j.value("tau0f", 0L));
    if (j.value("start_mode", std::string("fixed")) == "backwards") {
      start = xsts::StartSpec::backwards(j.value("upsilon", 1.0),
                                         j.value("tau0f", 0L), T);
    }
    factors = xsts::simulate_stationary(rho, sigma_eta, tau, start,
                                        xsts::StationaryDraw{}, seed);
  } else if (regime == "local_to_unity") {
    const double gamma = j.value("gamma", 0.0);
    rho = std::exp(gamma / tau);
    factors = xsts::simulate_local_to_unity(gamma, sigma_eta, tau,
                                            j.value("nu0", 0.0), seed);
  } else {
    throw xsts::config_error("simulate: unknown regime '" + regime + "'");
  }

  xsts::StudyConfig dgp;  // reuse the study key set for the panel block
  if (j.contains("panel")) {
    dgp = xsts::study_config_from_json(j.at("panel"));
  } else {
    dgp.beta0 = j.value("beta0", 1.0);
    dgp.n = j.value("n", 100);
    dgp.spec.sigma_eps = j.value("sigma_eps", 1.0);
  }
  dgp.T = T;
  if (regime != "stationary") dgp.spec.kind = xsts::ModelKind::UnitRootRef;

  xsts::PanelData panel;
  const std::uint64_t panel_seed = xsts::derive_seed(seed, 1);
  if (regime == "stationary") {
    panel = xsts::simulate_panel(dgp.spec, dgp.beta0, factors, rho, dgp.n, T,
                                 panel_seed);
  } else {
    panel = xsts::simulate_panel_unitroot(dgp.spec, dgp.beta0,
                                          factors.initial, rho, dgp.n, T,
                                          panel_seed);
  }

  std::filesystem::create_directories(args.out_dir);
  xsts::write_factor_csv(factors, args.out_dir + "/factors.csv");
  xsts::write_panel_csv(panel, args.out_dir + "/panel.csv");
  log(LogLevel::Info, "wrote factors.csv and panel.csv to " + args.out_dir);
  return 0;
}

int cmd_estimate(const CommonArgs& args) {
  const nlohmann::json j = load_config(args.config_path);
  xsts::reject_unknown_keys(
      j, {"model", "factor_csv", "panel_csv", "estimator"},
      "estimate config");
  const xsts::ModelSpec spec =
      j.contains("model") ? model_spec_from_json(j.at("model"))
                          : xsts::ModelSpec{};
  const std::string regime_param =
      spec.kind == xsts::ModelKind::StationaryRef ? "stationary" : "unit_root";
  log(LogLevel::Debug, "estimate: model " + regime_param);
  const xsts::FactorPath factors = xsts::read_factor_csv(
      j.at("factor_csv").get<std::string>(),
      spec.kind == xsts::ModelKind::StationaryRef
          ? xsts::Regime::Stationary
          : xsts::Regime::LocalToUnity,
      0.0, spec.sigma_eta);
  const xsts::PanelData panel =
      xsts::read_panel_csv(j.at("panel_csv").get<std::string>());

  const xsts::TimeSeriesEstimate ts = xsts::estimate_timeseries(factors, spec);
  const xsts::EstimateResult two_step = xsts::estimate_twostep(
      panel, ts.rho_tilde, spec,
      xsts::profiled_theta(panel, ts.rho_tilde, spec));
  const xsts::EstimateResult joint = xsts::estimate_joint(
      panel, factors, spec,
      xsts::profiled_theta(panel, ts.rho_tilde, spec));

  nlohmann::json report;
  report["rho_tilde"] = ts.rho_tilde;
  report["sigma_eta_hat"] = ts.sigma_eta_hat;
  auto param_json = [](const xsts::ParamVector& phi) {
    nlohmann::json p;
    p["beta"] = std::vector<double>(phi.beta.data(),
                                    phi.beta.data() + phi.beta.size());
    p["nu"] =
        std::vector<double>(phi.nu.data(), phi.nu.data() + phi.nu.size());
    p["rho"] = phi.rho;
    return p;
  };
  report["two_step"] = {{"phi", param_json(two_step.phi_hat)},
                        {"converged", two_step.converged},
                        {"iterations", two_step.iterations}};
  report["joint"] = {{"phi", param_json(joint.phi_hat)},
                     {"converged", joint.converged},
                     {"iterations", joint.iterations}};

  bool converged = two_step.converged && joint.converged;
  if (converged) {
    const xsts::ABlocks blocks =
        xsts::hessian_blocks(panel, factors, joint.phi_hat, spec);
    const xsts::ScoreBundle bundle =
        xsts::scores(panel, factors, joint.phi_hat, spec);
    const xsts::OmegaEstimates om =
        xsts::omega_estimates(bundle, spec, blocks);
    const Eigen::VectorXd theta_hat = joint.phi_hat.theta();
    const xsts::ConfidenceRegion wald =
        xsts::wald_ci(theta_hat, om.omega_theta, panel.n, 0.95);
    std::vector<double> se(static_cast<std::size_t>(theta_hat.size()));
    for (Eigen::Index c = 0; c < theta_hat.size(); ++c) {
      se[static_cast<std::size_t>(c)] =
          std::sqrt(std::max(om.omega_theta(c, c), 0.0) / panel.n);
    }
    report["joint"]["se"] = se;
    report["joint"]["wald_ci"] = xsts::confidence_region_json(wald);

    // Murphy-Topel two-step covariance with the first-stage influence
    // variance.
    const double omega_nu =
        ts.influence.squaredNorm() / static_cast<double>(factors.tau);
    const xsts::TwoStepSe tse = xsts::twostep_se(
        blocks.A_y_theta, blocks.A_y_rho, om.omega_y,
        Eigen::MatrixXd::Constant(1, 1, omega_nu), panel.n, factors.tau);
    report["two_step"]["se"] = std::vector<double>(
        tse.standard_errors.data(),
        tse.standard_errors.data() + tse.standard_errors.size());
  }

  std::filesystem::create_directories(args.out_dir);
  write_json_file(report, args.out_dir + "/estimate.json");
  if (!converged) {
    log(LogLevel::Error, "estimation did not converge; report written");
    return kExitNonConvergence;
  }
  return 0;
}

int cmd_study(const CommonArgs& args) {
  nlohmann::json j = load_config(args.config_path);
  xsts::StudyConfig config = xsts::study_config_from_json(j);
  if (args.seed) config.master_seed = *args.seed;
  if (args.parallel > 0) config.parallelism = args.parallel;

  std::optional<xsts::RhoQuantileTable> table;
  if (config.inference == xsts::InferenceKind::BonferroniUnion) {
    log(LogLevel::Info, "building rho quantile table");
    table = xsts::build_rho_quantile_table(
        xsts::default_gamma_grid(), config.alpha1, 400, 4000,
        xsts::derive_seed(config.master_seed, 0xabcdef), config.parallelism);
  }
  const xsts::StudyResult result =
      xsts::run_study(config, table ? &*table : nullptr);
  xsts::write_study_archive(result, args.out_dir);
  log(LogLevel::Info, "study archive written to " + args.out_dir);
  return 0;
}

int cmd_limitdist(const CommonArgs& args) {
  const nlohmann::json j = load_config(args.config_path);
  xsts::reject_unknown_keys(
      j, {"kind", "gamma", "v0", "sigma", "grid_m", "n_draws", "seed",
          "quantiles"},
      "limitdist config");
  const std::string kind = j.value("kind", std::string("df_ratio"));
  const int grid_m = j.value("grid_m", 5000);
  const int n_draws = j.value("n_draws", 100000);
  std::uint64_t seed = j.value("seed", std::uint64_t{1});
  if (args.seed) seed = *args.seed;
  const int k = j.value("quantiles", 999);

  xsts::LimitSample sample;
  if (kind == "df_ratio") {
    sample = xsts::sample_df_ratio(grid_m, n_draws, seed, args.parallel);
  } else if (kind == "ou") {
    sample = xsts::sample_ou_functionals(
        j.value("gamma", 0.0), j.value("v0", 0.0), j.value("sigma", 1.0),
        grid_m, n_draws, seed, args.parallel);
  } else {
    throw xsts::config_error("limitdist: unknown kind '" + kind + "'");
  }
  std::filesystem::create_directories(args.out_dir);
  for (Eigen::Index c = 0; c < sample.draws.cols(); ++c) {
    const auto table = xsts::quantile_table(sample.draws.col(c), k);
    xsts::write_quantile_csv(
        table, args.out_dir + "/quantiles_" +
                   sample.columns[static_cast<std::size_t>(c)] + ".csv");
  }
  return 0;
}

int cmd_diagnose(const CommonArgs& args) {
  const nlohmann::json j = load_config(args.config_path);
  xsts::reject_unknown_keys(
      j, {"dgp", "rho_grid_lo", "rho_grid_hi", "rho_grid_points", "seed"},
      "diagnose config");
  xsts::StudyConfig c = xsts::study_config_from_json(j.at("dgp"));
  std::uint64_t seed = c.master_seed;
  if (args.seed) seed = *args.seed;

  const xsts::FactorPath factors =
      xsts::simulate_stationary(c.rho0, c.spec.sigma_eta, c.tau, c.start,
                                xsts::StationaryDraw{}, seed);
  const xsts::PanelData panel =
      xsts::simulate_panel(c.spec, c.beta0, factors, c.rho0, c.n, c.T,
                           xsts::derive_seed(seed, 1));
  const double lo = j.value("rho_grid_lo", c.rho0 - 0.3);
  const double hi = j.value("rho_grid_hi", c.rho0 + 0.3);
  const int pts = j.value("rho_grid_points", 13);
  std::vector<double> grid;
  for (int p = 0; p < pts; ++p) {
    grid.push_back(lo + (hi - lo) * p / (pts - 1.0));
  }
  xsts::ParamVector truth = xsts::ParamVector::scalar(
      c.beta0, xsts::panel_factor_window(factors, 1, c.T), c.rho0);
  const xsts::IdentificationReport report =
      xsts::identification_diagnostic(panel, factors, c.spec, truth, grid);

  nlohmann::json out;
  out["rho_grid"] = report.rho_grid;
  out["profile_values"] = report.profile_values;
  out["profile_gap"] = report.profile_gap;
  out["min_theta_distance"] = report.min_theta_distance;
  out["g_beta_flatness"] = report.g_beta_flatness;
  out["f_profile_flat"] = report.f_profile_flat;
  out["theta_path_moves"] = report.theta_path_moves;
  out["g_flat_in_beta"] = report.g_flat_in_beta;
  out["identification_failure"] = report.f_profile_flat &&
                                  !report.theta_path_moves;
  std::filesystem::create_directories(args.out_dir);
  write_json_file(out, args.out_dir + "/diagnose.json");
  return 0;
}

int dispatch(const std::string& cmd, const CommonArgs& args) {
  try {
    if (cmd == "simulate") return cmd_simulate(args);
    if (cmd == "estimate") return cmd_estimate(args);
    if (cmd == "study") return cmd_study(args);
    if (cmd == "limitdist") return cmd_limitdist(args);
    if (cmd == "diagnose") return cmd_diagnose(args);
    std::cerr << "unknown command: " << cmd << '\n';
    return kExitConfig;
  } catch (const xsts::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (cmd == "study") return kExitStudy;
    if (cmd == "limitdist") return kExitSampler;
    if (cmd == "diagnose") return kExitDiagnostic;
    if (cmd == "estimate") return kExitNonConvergence;
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"estimation with combined cross-section and time-series data"};
  app.require_subcommand(1);

  CommonArgs args;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  std::string command;
  for (const char* name :
       {"simulate", "estimate", "study", "limitdist", "diagnose"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "config file (JSON)")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--seed", seed_flag, "master seed override")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    sub->add_option("--parallel", args.parallel, "worker threads");
    sub->add_option("--format", args.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->callback([&command, name] { command = name; });
  }

  CLI11_PARSE(app, argc, argv);
  if (seed_set) args.seed = seed_flag;
  return dispatch(command, args);
}
