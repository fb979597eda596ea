#ifndef XSTS_MC_HARNESS_HPP_
#define XSTS_MC_HARNESS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "xsts/inference.hpp"

namespace xsts {

enum class DgpKind { Stationary, UnitRoot };
enum class EstimatorKind { TwoStep, TwoStepTrueRho, Joint };
enum class InferenceKind { None, Wald, BonferroniUnion };

struct StudyConfig {
  DgpKind dgp = DgpKind::Stationary;
  ModelSpec spec;
  double beta0 = 1.0;
  double rho0 = 0.5;    // stationary autoregression
  double gamma0 = 0.0;  // local-to-unity drift; rho0 = exp(gamma0/tau)
  double nu0 = 0.0;     // scaled initial condition, local-to-unity DGP
  int n = 100;
  int tau = 100;
  int T = 2;
  StartSpec start = StartSpec::fixed(0);

  EstimatorKind estimator = EstimatorKind::TwoStep;
  InferenceKind inference = InferenceKind::None;
  double ci_level = 0.95;
  double alpha1 = 0.05;
  double alpha2 = 0.05;
  int rho_grid_resolution = 25;

  int n_reps = 100;
  std::uint64_t master_seed = 1;
  int parallelism = 1;

  void validate() const;
};

// One replication, recorded in error coordinates: estimates and intervals
// are shifted by the rep-specific truth (the factor path realization enters
// theta0), so coverage is "interval contains 0".
struct RepRecord {
  bool ok = false;
  Eigen::VectorXd theta_err;       // theta_hat - theta0
  double rho_hat = 0.0;
  double rho_err = 0.0;            // rho_hat - rho0
  double rho_stat = 0.0;           // tau * rho_err
  Eigen::VectorXd se;              // predicted s.e. at the estimate
  Eigen::VectorXd pivot;           // sqrt(n) Omega_hat^{-1/2} (theta - theta0)
  std::vector<Interval> ci_err;    // intervals shifted by theta0
  Eigen::MatrixXd cov_at_truth;    // formula covariance evaluated at truth
};

struct StudySummary {
  Eigen::VectorXd bias;
  Eigen::VectorXd empirical_sd;
  Eigen::VectorXd mean_se;
  Eigen::VectorXd predicted_sd_at_truth;  // sqrt diag of mean cov_at_truth
  std::vector<double> coverage_rate;
  std::vector<double> coverage_mc_sd;
  std::vector<double> ks_pivot;  // per coordinate, against standard normal
  double rho_bias = 0.0;
  double rho_sd = 0.0;
  int n_failed = 0;
  int n_reps = 0;
};

struct StudyResult {
  StudyConfig config;
  std::vector<RepRecord> reps;
  StudySummary summary;
  double runtime_seconds = 0.0;
};

// Runs config.n_reps independent replications with per-rep streams derived
// from (master_seed, rep); the result is identical for any parallelism.
// Throws if more than 1% of replications fail.
StudyResult run_study(const StudyConfig& config,
                      const RhoQuantileTable* rho_table = nullptr);

// Recomputes the summary from the per-rep records (order-independent).
StudySummary summarize(const StudyConfig& config,
                       const std::vector<RepRecord>& reps);

// One replication; exposed for smoke tests and the CLI estimate path.
RepRecord run_replication(const StudyConfig& config, std::uint64_t rep,
                          const RhoQuantileTable* rho_table);

}  // namespace xsts

#endif  // XSTS_MC_HARNESS_HPP_
