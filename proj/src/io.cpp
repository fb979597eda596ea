#include "xsts/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "xsts/errors.hpp"

namespace xsts {

namespace {

std::ofstream open_out(const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  return out;
}

std::ifstream open_in(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open for reading: " + file);
  return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, const T& fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_factor_csv(const FactorPath& path, const std::string& file) {
  auto out = open_out(file);
  out << "t,nu,eta\n";
  out << path.tau0 << ',' << format_double(path.initial) << ",\n";
  for (int t = 0; t < path.tau; ++t) {
    out << (path.tau0 + 1 + t) << ',' << format_double(path.values[t]) << ','
        << format_double(path.innovations[t]) << '\n';
  }
}

void write_panel_csv(const PanelData& panel, const std::string& file) {
  auto out = open_out(file);
  out << "i,t,y,x\n";
  for (int t = 0; t < panel.T; ++t) {
    for (int i = 0; i < panel.n; ++i) {
      out << i << ',' << (panel.panel_start + t) << ','
          << format_double(panel.y(i, t)) << ','
          << format_double(panel.x(i, t)) << '\n';
    }
  }
}

void write_quantile_csv(const std::vector<std::pair<double, double>>& table,
                        const std::string& file) {
  auto out = open_out(file);
  out << "probability,quantile\n";
  for (const auto& [p, q] : table) {
    out << format_double(p) << ',' << format_double(q) << '\n';
  }
}

FactorPath read_factor_csv(const std::string& file, Regime regime,
                           double param, double sigma_eta) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,nu,eta", 0) != 0) {
    throw config_error("factor csv: missing t,nu,eta header");
  }
  long tau0 = 0;
  double initial = 0.0;
  std::vector<double> values, etas;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() < 2) throw config_error("factor csv: malformed row");
    if (first) {
      tau0 = std::stol(f[0]);
      initial = std::stod(f[1]);
      first = false;
    } else {
      if (f.size() < 3) throw config_error("factor csv: malformed row");
      values.push_back(std::stod(f[1]));
      etas.push_back(std::stod(f[2]));
    }
  }
  if (first) throw config_error("factor csv: no rows");
  Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
  Eigen::VectorXd e = Eigen::Map<Eigen::VectorXd>(
      etas.data(), static_cast<Eigen::Index>(etas.size()));
  return factor_path_from_values(regime, param, sigma_eta, tau0, initial,
                                 std::move(v), std::move(e));
}

PanelData read_panel_csv(const std::string& file) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line) || line.rfind("i,t,y,x", 0) != 0) {
    throw config_error("panel csv: missing i,t,y,x header");
  }
  struct Row {
    int i;
    long t;
    double y, x;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() < 4) throw config_error("panel csv: malformed row");
    rows.push_back(
        {std::stoi(f[0]), std::stol(f[1]), std::stod(f[2]), std::stod(f[3])});
  }
  if (rows.empty()) throw config_error("panel csv: no rows");
  int n = 0;
  long t_min = rows.front().t, t_max = rows.front().t;
  for (const auto& r : rows) {
    n = std::max(n, r.i + 1);
    t_min = std::min(t_min, r.t);
    t_max = std::max(t_max, r.t);
  }
  PanelData panel;
  panel.n = n;
  panel.T = static_cast<int>(t_max - t_min + 1);
  panel.panel_start = t_min;
  panel.y.setZero(n, panel.T);
  panel.x.setZero(n, panel.T);
  panel.eps.setZero(n, panel.T);
  for (const auto& r : rows) {
    const auto col = static_cast<Eigen::Index>(r.t - t_min);
    panel.y(r.i, col) = r.y;
    panel.x(r.i, col) = r.x;
  }
  return panel;
}

namespace {

const char* dgp_name(DgpKind k) {
  return k == DgpKind::Stationary ? "stationary" : "unit_root";
}
const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::TwoStep: return "two_step";
    case EstimatorKind::TwoStepTrueRho: return "two_step_true_rho";
    case EstimatorKind::Joint: return "joint";
  }
  return "two_step";
}
const char* inference_name(InferenceKind k) {
  switch (k) {
    case InferenceKind::None: return "none";
    case InferenceKind::Wald: return "wald";
    case InferenceKind::BonferroniUnion: return "bonferroni_union";
  }
  return "none";
}

}  // namespace

nlohmann::json study_config_json(const StudyConfig& c) {
  nlohmann::json j;
  j["dgp"] = dgp_name(c.dgp);
  j["beta0"] = c.beta0;
  j["rho0"] = c.rho0;
  j["gamma0"] = c.gamma0;
  j["nu0"] = c.nu0;
  j["n"] = c.n;
  j["tau"] = c.tau;
  j["T"] = c.T;
  j["sigma_eps"] = c.spec.sigma_eps;
  j["sigma_eta"] = c.spec.sigma_eta;
  // map the descriptive loading names back onto the config vocabulary
  if (c.spec.loading.name == "rho") {
    j["loading"] = "linear";
  } else if (c.spec.loading.name == "const") {
    j["loading"] = "constant";
    j["loading_constant"] = c.spec.loading(0.0);
  } else {
    j["loading"] = "default";
  }
  j["criterion"] =
      c.spec.criterion == CriterionKind::Likelihood ? "likelihood" : "moment";
  j["estimator"] = estimator_name(c.estimator);
  j["inference"] = inference_name(c.inference);
  j["ci_level"] = c.ci_level;
  j["alpha1"] = c.alpha1;
  j["alpha2"] = c.alpha2;
  j["rho_grid_resolution"] = c.rho_grid_resolution;
  j["n_reps"] = c.n_reps;
  j["master_seed"] = c.master_seed;
  j["parallelism"] = c.parallelism;
  return j;
}

StudyConfig study_config_from_json(const nlohmann::json& j) {
  reject_unknown_keys(
      j,
      {"dgp", "beta0", "rho0", "gamma0", "nu0", "n", "tau", "T", "sigma_eps",
       "sigma_eta", "loading", "loading_constant", "criterion", "estimator",
       "inference", "ci_level", "alpha1", "alpha2", "rho_grid_resolution",
       "n_reps", "master_seed", "parallelism"},
      "study config");
  StudyConfig c;
  const std::string dgp = get_or<std::string>(j, "dgp", "stationary");
  if (dgp == "stationary") {
    c.dgp = DgpKind::Stationary;
  } else if (dgp == "unit_root") {
    c.dgp = DgpKind::UnitRoot;
    c.spec.kind = ModelKind::UnitRootRef;
  } else {
    throw config_error("study config: unknown dgp '" + dgp + "'");
  }
  c.beta0 = get_or(j, "beta0", c.beta0);
  c.rho0 = get_or(j, "rho0", c.rho0);
  c.gamma0 = get_or(j, "gamma0", c.gamma0);
  c.nu0 = get_or(j, "nu0", c.nu0);
  c.n = get_or(j, "n", c.n);
  c.tau = get_or(j, "tau", c.tau);
  c.T = get_or(j, "T", c.T);
  c.spec.sigma_eps = get_or(j, "sigma_eps", c.spec.sigma_eps);
  c.spec.sigma_eta = get_or(j, "sigma_eta", c.spec.sigma_eta);
  const std::string loading = get_or<std::string>(j, "loading", "default");
  if (loading == "default") {
    c.spec.loading = default_loading();
  } else if (loading == "linear") {
    c.spec.loading = linear_loading();
  } else if (loading == "constant") {
    c.spec.loading = constant_loading(get_or(j, "loading_constant", 1.0));
  } else {
    throw config_error("study config: unknown loading '" + loading + "'");
  }
  const std::string crit = get_or<std::string>(j, "criterion", "likelihood");
  if (crit == "likelihood") {
    c.spec.criterion = CriterionKind::Likelihood;
  } else if (crit == "moment") {
    c.spec.criterion = CriterionKind::Moment;
  } else {
    throw config_error("study config: unknown criterion '" + crit + "'");
  }
  const std::string est = get_or<std::string>(j, "estimator", "two_step");
  if (est == "two_step") {
    c.estimator = EstimatorKind::TwoStep;
  } else if (est == "two_step_true_rho") {
    c.estimator = EstimatorKind::TwoStepTrueRho;
  } else if (est == "joint") {
    c.estimator = EstimatorKind::Joint;
  } else {
    throw config_error("study config: unknown estimator '" + est + "'");
  }
  const std::string inf = get_or<std::string>(j, "inference", "none");
  if (inf == "none") {
    c.inference = InferenceKind::None;
  } else if (inf == "wald") {
    c.inference = InferenceKind::Wald;
  } else if (inf == "bonferroni_union") {
    c.inference = InferenceKind::BonferroniUnion;
  } else {
    throw config_error("study config: unknown inference '" + inf + "'");
  }
  c.ci_level = get_or(j, "ci_level", c.ci_level);
  c.alpha1 = get_or(j, "alpha1", c.alpha1);
  c.alpha2 = get_or(j, "alpha2", c.alpha2);
  c.rho_grid_resolution =
      get_or(j, "rho_grid_resolution", c.rho_grid_resolution);
  c.n_reps = get_or(j, "n_reps", c.n_reps);
  c.master_seed = get_or(j, "master_seed", c.master_seed);
  c.parallelism = get_or(j, "parallelism", c.parallelism);
  return c;
}

nlohmann::json study_summary_json(const StudyResult& result) {
  const StudySummary& s = result.summary;
  nlohmann::json j;
  j["n_reps"] = s.n_reps;
  j["n_failed"] = s.n_failed;
  auto vec = [](const Eigen::VectorXd& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    return out;
  };
  j["bias"] = vec(s.bias);
  j["empirical_sd"] = vec(s.empirical_sd);
  j["mean_se"] = vec(s.mean_se);
  j["predicted_sd_at_truth"] = vec(s.predicted_sd_at_truth);
  j["coverage_rate"] = s.coverage_rate;
  j["coverage_mc_sd"] = s.coverage_mc_sd;
  j["ks_pivot"] = s.ks_pivot;
  j["rho_bias"] = s.rho_bias;
  j["rho_sd"] = s.rho_sd;
  return j;
}

nlohmann::json confidence_region_json(const ConfidenceRegion& region) {
  nlohmann::json j;
  j["method"] =
      region.method == CiMethod::Wald ? "wald" : "bonferroni_union";
  j["nominal_level"] = region.nominal_level;
  nlohmann::json ivs = nlohmann::json::array();
  for (const auto& iv : region.intervals) {
    ivs.push_back({{"lo", iv.lo}, {"hi", iv.hi}, {"degenerate", iv.degenerate}});
  }
  j["intervals"] = ivs;
  if (region.method == CiMethod::BonferroniUnion) {
    j["alpha1"] = region.alpha1;
    j["alpha2"] = region.alpha2;
    j["rho_lo"] = region.rho_lo;
    j["rho_hi"] = region.rho_hi;
    j["rho_fallback"] = region.rho_fallback;
    j["rho_grid"] = region.rho_grid;
    nlohmann::json audit = nlohmann::json::array();
    for (std::size_t g = 0; g < region.per_rho_intervals.size(); ++g) {
      nlohmann::json entry;
      entry["rho"] = region.rho_grid[g];
      entry["ok"] = static_cast<bool>(region.per_rho_ok[g]);
      nlohmann::json per = nlohmann::json::array();
      for (const auto& iv : region.per_rho_intervals[g]) {
        per.push_back({{"lo", iv.lo}, {"hi", iv.hi}});
      }
      entry["intervals"] = per;
      audit.push_back(entry);
    }
    j["per_rho"] = audit;
  }
  return j;
}

void write_study_archive(const StudyResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir + "/config.json");
    out << study_config_json(result.config).dump(2) << '\n';
  }
  {
    auto out = open_out(dir + "/reps.csv");
    out << "rep,ok,rho_hat,rho_err";
    Eigen::Index k = 0;
    for (const auto& r : result.reps) {
      if (r.ok) {
        k = r.theta_err.size();
        break;
      }
    }
    for (Eigen::Index j = 0; j < k; ++j) out << ",theta_err_" << j;
    for (Eigen::Index j = 0; j < k; ++j) out << ",se_" << j;
    out << '\n';
    for (std::size_t r = 0; r < result.reps.size(); ++r) {
      const RepRecord& rec = result.reps[r];
      out << r << ',' << (rec.ok ? 1 : 0) << ','
          << format_double(rec.rho_hat) << ',' << format_double(rec.rho_err);
      for (Eigen::Index j = 0; j < k; ++j) {
        out << ','
            << format_double(rec.theta_err.size() == k ? rec.theta_err[j]
                                                       : 0.0);
      }
      for (Eigen::Index j = 0; j < k; ++j) {
        out << ',' << format_double(rec.se.size() == k ? rec.se[j] : 0.0);
      }
      out << '\n';
    }
  }
  {
    auto out = open_out(dir + "/summary.json");
    out << study_summary_json(result).dump(2) << '\n';
  }
}

void reject_unknown_keys(const nlohmann::json& j,
                         const std::vector<std::string>& allowed,
                         const std::string& context) {
  if (!j.is_object()) throw config_error(context + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& key : allowed) {
      if (it.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw config_error(context + ": unknown key '" + it.key() + "'");
    }
  }
}

}  // namespace xsts
