#include "xsts/mc_harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "xsts/avar.hpp"
#include "xsts/errors.hpp"
#include "xsts/rng.hpp"
#include "xsts/stats.hpp"

namespace xsts {

void StudyConfig::validate() const {
  if (n_reps < 1) throw config_error("StudyConfig: n_reps must be >= 1");
  if (n < 1 || tau < 1 || T < 1) {
    throw config_error("StudyConfig: sizes must be positive");
  }
  if (dgp == DgpKind::Stationary && T > tau) {
    throw config_error("StudyConfig: panel window exceeds the factor path");
  }
  if (parallelism < 1) {
    throw config_error("StudyConfig: parallelism must be >= 1");
  }
  if (dgp == DgpKind::Stationary && std::abs(rho0) >= 1.0) {
    throw config_error("StudyConfig: stationary DGP needs |rho0| < 1");
  }
  if (ci_level <= 0.0 || ci_level >= 1.0) {
    throw config_error("StudyConfig: ci_level must lie in (0,1)");
  }
  if (alpha1 <= 0.0 || alpha2 <= 0.0 || alpha1 + alpha2 >= 1.0) {
    throw config_error("StudyConfig: alpha1, alpha2 must be positive with "
                       "alpha1 + alpha2 < 1");
  }
  if (inference == InferenceKind::BonferroniUnion && rho_grid_resolution < 10) {
    throw config_error("StudyConfig: rho_grid_resolution must be >= 10");
  }
  spec.validate();
}

namespace {

RepRecord stationary_replication(const StudyConfig& cfg, std::uint64_t rep) {
  const std::uint64_t seed_f = derive_seed(cfg.master_seed, rep * 4 + 0);
  const std::uint64_t seed_p = derive_seed(cfg.master_seed, rep * 4 + 1);
  RepRecord rec;

  const FactorPath factors =
      simulate_stationary(cfg.rho0, cfg.spec.sigma_eta, cfg.tau, cfg.start,
                          StationaryDraw{}, seed_f);
  const PanelData panel = simulate_panel(cfg.spec, cfg.beta0, factors,
                                         cfg.rho0, cfg.n, cfg.T, seed_p);
  const Eigen::VectorXd nu_true = panel_factor_window(factors, 1, cfg.T);
  Eigen::VectorXd theta0(1 + cfg.T);
  theta0[0] = cfg.beta0;
  theta0.tail(cfg.T) = nu_true;

  const TimeSeriesEstimate ts = estimate_timeseries(factors, cfg.spec);
  rec.rho_hat = ts.rho_tilde;
  rec.rho_err = ts.rho_tilde - cfg.rho0;
  rec.rho_stat = cfg.tau * rec.rho_err;

  const double rho_used = cfg.estimator == EstimatorKind::TwoStepTrueRho
                              ? cfg.rho0
                              : ts.rho_tilde;
  EstimateResult est;
  if (cfg.estimator == EstimatorKind::Joint) {
    est = estimate_joint(panel, factors, cfg.spec,
                         profiled_theta(panel, ts.rho_tilde, cfg.spec));
  } else {
    est = estimate_twostep(panel, rho_used, cfg.spec,
                           profiled_theta(panel, rho_used, cfg.spec));
  }
  if (!est.converged) return rec;

  const Eigen::VectorXd theta_hat = est.phi_hat.theta();
  rec.theta_err = theta_hat - theta0;

  const ABlocks blocks = hessian_blocks(panel, factors, est.phi_hat, cfg.spec);
  const ScoreBundle bundle = scores(panel, factors, est.phi_hat, cfg.spec);
  const OmegaEstimates om = omega_estimates(bundle, cfg.spec, blocks);
  rec.pivot = pivotal_stat(theta_hat, theta0, om.omega_theta, cfg.n);
  rec.se =
      (om.omega_theta.diagonal().cwiseMax(0.0) / cfg.n).cwiseSqrt();

  // The same formula evaluated at the true parameters (the MC oracle for the
  // empirical sd; averaged over reps because it is factor-measurable).
  {
    ParamVector truth = ParamVector::scalar(cfg.beta0, nu_true, cfg.rho0);
    const ABlocks bt = hessian_blocks(panel, factors, truth, cfg.spec);
    const ScoreBundle st = scores(panel, factors, truth, cfg.spec);
    const OmegaEstimates ot = omega_estimates(st, cfg.spec, bt);
    rec.cov_at_truth = ot.omega_theta / cfg.n;
  }

  if (cfg.inference == InferenceKind::Wald) {
    const ConfidenceRegion region =
        wald_ci(theta_hat, om.omega_theta, cfg.n, cfg.ci_level);
    rec.ci_err.reserve(region.intervals.size());
    for (std::size_t j = 0; j < region.intervals.size(); ++j) {
      const Interval& iv = region.intervals[j];
      rec.ci_err.push_back({iv.lo - theta0[static_cast<Eigen::Index>(j)],
                            iv.hi - theta0[static_cast<Eigen::Index>(j)],
                            iv.degenerate});
    }
  }
  rec.ok = true;
  return rec;
}

RepRecord unitroot_replication(const StudyConfig& cfg, std::uint64_t rep,
                               const RhoQuantileTable* rho_table) {
  const std::uint64_t seed_f = derive_seed(cfg.master_seed, rep * 4 + 0);
  const std::uint64_t seed_p = derive_seed(cfg.master_seed, rep * 4 + 1);
  RepRecord rec;

  const FactorPath factors = simulate_local_to_unity(
      cfg.gamma0, cfg.spec.sigma_eta, cfg.tau, cfg.nu0, seed_f);
  const double rho0 = std::exp(cfg.gamma0 / cfg.tau);
  const PanelData panel = simulate_panel_unitroot(
      cfg.spec, cfg.beta0, factors.initial, rho0, cfg.n, cfg.T, seed_p);
  Eigen::VectorXd theta0(2);
  theta0 << cfg.beta0, factors.initial;

  rec.rho_hat = estimate_unit_root_ols(factors);
  rec.rho_err = rec.rho_hat - rho0;
  rec.rho_stat = cfg.tau * rec.rho_err;

  const EstimateResult est =
      estimate_twostep(panel, rec.rho_hat, cfg.spec,
                       profiled_theta(panel, rec.rho_hat, cfg.spec));
  if (!est.converged) return rec;
  rec.theta_err = est.phi_hat.theta() - theta0;

  if (cfg.inference == InferenceKind::BonferroniUnion) {
    if (rho_table == nullptr) {
      throw config_error("run_study: Bonferroni inference needs a rho table");
    }
    const ConfidenceRegion region = bonferroni_union_ci(
        panel, factors, cfg.spec, cfg.alpha1, cfg.alpha2,
        cfg.rho_grid_resolution, *rho_table, rho_table->gammas);
    rec.ci_err.reserve(region.intervals.size());
    for (std::size_t j = 0; j < region.intervals.size(); ++j) {
      const Interval& iv = region.intervals[j];
      rec.ci_err.push_back({iv.lo - theta0[static_cast<Eigen::Index>(j)],
                            iv.hi - theta0[static_cast<Eigen::Index>(j)],
                            iv.degenerate});
    }
  }
  rec.ok = true;
  return rec;
}

}  // namespace

RepRecord run_replication(const StudyConfig& config, std::uint64_t rep,
                          const RhoQuantileTable* rho_table) {
  if (config.dgp == DgpKind::Stationary) {
    return stationary_replication(config, rep);
  }
  return unitroot_replication(config, rep, rho_table);
}

StudyResult run_study(const StudyConfig& config,
                      const RhoQuantileTable* rho_table) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<RepRecord> reps(static_cast<std::size_t>(config.n_reps));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next.fetch_add(1); r < config.n_reps;
         r = next.fetch_add(1)) {
      try {
        reps[static_cast<std::size_t>(r)] = run_replication(
            config, static_cast<std::uint64_t>(r), rho_table);
      } catch (const config_error&) {
        throw;  // misconfiguration is not a per-rep failure
      } catch (const std::exception&) {
        reps[static_cast<std::size_t>(r)].ok = false;
      }
    }
  };
  const int workers =
      std::max(1, std::min(config.parallelism, config.n_reps));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  StudyResult result;
  result.config = config;
  result.reps = std::move(reps);
  result.summary = summarize(config, result.reps);
  if (result.summary.n_failed > 0.01 * config.n_reps) {
    throw domain_error("run_study: more than 1% of replications failed");
  }
  result.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

StudySummary summarize(const StudyConfig& config,
                       const std::vector<RepRecord>& reps) {
  StudySummary s;
  s.n_reps = static_cast<int>(reps.size());
  Eigen::Index k = 0;
  for (const auto& r : reps) {
    if (r.ok) {
      k = r.theta_err.size();
      break;
    }
  }
  std::vector<double> rho_errs;
  std::vector<std::vector<double>> errs(static_cast<std::size_t>(k));
  std::vector<std::vector<double>> ses(static_cast<std::size_t>(k));
  std::vector<std::vector<double>> pivots(static_cast<std::size_t>(k));
  std::vector<std::vector<double>> ci_lo(static_cast<std::size_t>(k));
  std::vector<std::vector<double>> ci_hi(static_cast<std::size_t>(k));
  Eigen::MatrixXd cov_sum = Eigen::MatrixXd::Zero(k, k);
  int n_cov = 0;

  for (const auto& r : reps) {
    if (!r.ok) {
      ++s.n_failed;
      continue;
    }
    rho_errs.push_back(r.rho_err);
    for (Eigen::Index j = 0; j < k; ++j) {
      const std::size_t c = static_cast<std::size_t>(j);
      errs[c].push_back(r.theta_err[j]);
      if (r.se.size() == k) ses[c].push_back(r.se[j]);
      if (r.pivot.size() == k) pivots[c].push_back(r.pivot[j]);
      if (r.ci_err.size() == static_cast<std::size_t>(k)) {
        ci_lo[c].push_back(r.ci_err[c].lo);
        ci_hi[c].push_back(r.ci_err[c].hi);
      }
    }
    if (r.cov_at_truth.rows() == k) {
      cov_sum += r.cov_at_truth;
      ++n_cov;
    }
  }

  s.bias.resize(k);
  s.empirical_sd.resize(k);
  s.mean_se.resize(k);
  s.predicted_sd_at_truth.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const std::size_t c = static_cast<std::size_t>(j);
    s.bias[j] = errs[c].empty() ? 0.0 : mean(errs[c]);
    s.empirical_sd[j] = errs[c].size() > 1 ? sample_sd(errs[c]) : 0.0;
    s.mean_se[j] = ses[c].empty() ? 0.0 : mean(ses[c]);
    s.predicted_sd_at_truth[j] =
        n_cov > 0 ? std::sqrt(std::max(cov_sum(j, j) / n_cov, 0.0)) : 0.0;
    if (!pivots[c].empty()) {
      s.ks_pivot.push_back(ks_statistic(pivots[c], normal_cdf));
    }
    if (!ci_lo[c].empty()) {
      const CoverageResult cov = coverage(ci_lo[c], ci_hi[c], 0.0);
      s.coverage_rate.push_back(cov.rate);
      s.coverage_mc_sd.push_back(cov.mc_sd);
    }
  }
  s.rho_bias = rho_errs.empty() ? 0.0 : mean(rho_errs);
  s.rho_sd = rho_errs.size() > 1 ? sample_sd(rho_errs) : 0.0;
  (void)config;
  return s;
}

}  // namespace xsts
