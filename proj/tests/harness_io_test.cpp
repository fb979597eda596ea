#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "xsts/errors.hpp"
#include "xsts/io.hpp"
#include "xsts/mc_harness.hpp"
#include "xsts/stats.hpp"

using namespace xsts;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("xsts_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("normal distribution helpers") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_quantile(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK(normal_quantile(normal_cdf(1.2345)) ==
        doctest::Approx(1.2345).epsilon(1e-10));
  CHECK_THROWS_AS(normal_quantile(0.0), domain_error);
}

TEST_CASE("Kolmogorov-Smirnov distances on edge cases") {
  std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  CHECK(ks_statistic(a, a) == doctest::Approx(0.0));
  std::vector<double> b{10.0, 11.0, 12.0};
  CHECK(ks_statistic(a, b) == doctest::Approx(1.0));

  // N(0,1) draws against the true cdf
  std::mt19937_64 rng(101);
  std::normal_distribution<double> nd;
  std::vector<double> z(10000);
  for (double& v : z) v = nd(rng);
  CHECK(ks_statistic(z, [](double x) { return normal_cdf(x); }) < 0.02);
}

TEST_CASE("coverage counts interval hits with a binomial error bar") {
  const std::vector<double> lo{0.0, 0.0, 2.0, -1.0};
  const std::vector<double> hi{1.0, 0.4, 3.0, 1.0};
  const CoverageResult c = coverage(lo, hi, 0.5);
  CHECK(c.rate == doctest::Approx(0.5));
  CHECK(c.mc_sd == doctest::Approx(std::sqrt(0.25 / 4.0)));
}

TEST_CASE("two-rep study smoke: records and summary are consistent") {
  StudyConfig cfg;
  cfg.n = 50;
  cfg.tau = 60;
  cfg.T = 2;
  cfg.n_reps = 2;
  cfg.master_seed = 7;
  cfg.inference = InferenceKind::Wald;
  const StudyResult res = run_study(cfg);
  REQUIRE(res.reps.size() == 2);
  CHECK(res.summary.n_failed == 0);
  CHECK(res.summary.n_reps == 2);
  const Eigen::Index k = res.reps[0].theta_err.size();
  REQUIRE(k == 1 + cfg.T);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double m =
        0.5 * (res.reps[0].theta_err[j] + res.reps[1].theta_err[j]);
    CHECK(res.summary.bias[j] == doctest::Approx(m).epsilon(1e-12));
  }
  CHECK(res.summary.coverage_rate.size() == std::size_t(k));
}

TEST_CASE("first-stage sd matches the stationary asymptotic rate") {
  // sd(rho~) ~ sqrt((1-rho^2)/tau)
  StudyConfig cfg;
  cfg.rho0 = 0.5;
  cfg.n = 10;
  cfg.tau = 2000;
  cfg.T = 2;
  cfg.n_reps = 400;
  cfg.master_seed = 11;
  cfg.parallelism = 4;
  const StudyResult res = run_study(cfg);
  const double target = std::sqrt((1.0 - 0.25) / 2000.0);
  CHECK(res.summary.rho_sd == doctest::Approx(target).epsilon(0.10));
  // small-sample bias is O(1/tau); allow for it plus the Monte Carlo error
  CHECK(std::abs(res.summary.rho_bias) < 0.005);
}

TEST_CASE("study results do not depend on the parallelism degree") {
  StudyConfig cfg;
  cfg.n = 40;
  cfg.tau = 50;
  cfg.n_reps = 20;
  cfg.master_seed = 13;
  cfg.inference = InferenceKind::Wald;
  StudyConfig cfg8 = cfg;
  cfg8.parallelism = 8;
  cfg.parallelism = 1;
  const StudyResult a = run_study(cfg);
  const StudyResult b = run_study(cfg8);
  for (int r = 0; r < 20; ++r) {
    CHECK((a.reps[r].theta_err - b.reps[r].theta_err).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(a.reps[r].rho_hat == b.reps[r].rho_hat);
  }
  CHECK(study_summary_json(a).dump() == study_summary_json(b).dump());
}

TEST_CASE("factor and panel CSV files round trip at full precision") {
  TempDir tmp;
  const FactorPath path = simulate_stationary(
      0.6, 1.3, 25, StartSpec::fixed(-3), StationaryDraw{}, 103);
  write_factor_csv(path, tmp.file("f.csv"));
  const FactorPath back =
      read_factor_csv(tmp.file("f.csv"), Regime::Stationary, 0.6, 1.3);
  CHECK(back.tau == path.tau);
  CHECK(back.tau0 == path.tau0);
  CHECK(back.initial == path.initial);
  CHECK((back.values - path.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.innovations - path.innovations).cwiseAbs().maxCoeff() == 0.0);

  ModelSpec spec;
  const PanelData panel = simulate_panel(spec, 1.0, path, 0.6, 7, 3, 104);
  write_panel_csv(panel, tmp.file("p.csv"));
  const PanelData pback = read_panel_csv(tmp.file("p.csv"));
  CHECK(pback.n == 7);
  CHECK(pback.T == 3);
  CHECK((pback.y - panel.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((pback.x - panel.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("doubles survive the text format exactly") {
  for (double v : {1.0 / 3.0, 1e-300, -2.5e17, 0.1, M_PI}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("study config JSON round trip") {
  StudyConfig cfg;
  cfg.dgp = DgpKind::UnitRoot;
  cfg.gamma0 = -2.5;
  cfg.nu0 = 0.7;
  cfg.n = 123;
  cfg.tau = 77;
  cfg.T = 3;
  cfg.estimator = EstimatorKind::Joint;
  cfg.inference = InferenceKind::BonferroniUnion;
  cfg.alpha1 = 0.04;
  cfg.alpha2 = 0.06;
  cfg.n_reps = 9;
  cfg.master_seed = 424242;
  cfg.spec.sigma_eps = 1.5;
  cfg.spec.criterion = CriterionKind::Moment;
  const nlohmann::json j = study_config_json(cfg);
  const StudyConfig back = study_config_from_json(j);
  CHECK(study_config_json(back).dump() == j.dump());
  CHECK(back.gamma0 == cfg.gamma0);
  CHECK(back.master_seed == cfg.master_seed);
  CHECK(back.spec.criterion == CriterionKind::Moment);
}

TEST_CASE("unknown config keys are rejected") {
  nlohmann::json j = study_config_json(StudyConfig{});
  j["typo_key"] = 1;
  CHECK_THROWS_AS(study_config_from_json(j), config_error);
}

TEST_CASE("study archive layout") {
  TempDir tmp;
  StudyConfig cfg;
  cfg.n = 30;
  cfg.tau = 30;
  cfg.n_reps = 3;
  const StudyResult res = run_study(cfg);
  const std::string dir = tmp.file("study");
  write_study_archive(res, dir);
  CHECK(fs::exists(fs::path(dir) / "config.json"));
  CHECK(fs::exists(fs::path(dir) / "reps.csv"));
  CHECK(fs::exists(fs::path(dir) / "summary.json"));
  // reps.csv has a header plus one line per replication
  std::ifstream in(fs::path(dir) / "reps.csv");
  int lines = 0;
  std::string s;
  while (std::getline(in, s))
    if (!s.empty()) ++lines;
  CHECK(lines == 4);
}

TEST_CASE("invalid study configurations are rejected") {
  StudyConfig cfg;
  cfg.n_reps = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  StudyConfig cfg2;
  cfg2.ci_level = 1.5;
  CHECK_THROWS_AS(cfg2.validate(), config_error);
  StudyConfig cfg3;
  cfg3.rho0 = 1.0;  // stationary DGP needs |rho| < 1
  CHECK_THROWS_AS(cfg3.validate(), config_error);
}
