#include "xsts/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xsts/avar.hpp"
#include "xsts/errors.hpp"
#include "xsts/limitdist.hpp"
#include "xsts/stats.hpp"

namespace xsts {

ConfidenceRegion wald_ci(const Eigen::VectorXd& theta_hat,
                         const Eigen::MatrixXd& omega_theta, double n,
                         double level) {
  if (level <= 0.0 || level >= 1.0) {
    throw config_error("wald_ci: level must lie in (0,1)");
  }
  if (omega_theta.rows() != theta_hat.size() ||
      omega_theta.cols() != theta_hat.size()) {
    throw dimension_error("wald_ci: nonconformable inputs");
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(omega_theta);
    if (es.eigenvalues().minCoeff() <
        -1e-10 * std::max(1.0, omega_theta.trace())) {
      throw domain_error("wald_ci: omega_theta not psd");
    }
  }
  const double z = normal_quantile(0.5 * (1.0 + level));
  ConfidenceRegion region;
  region.nominal_level = level;
  region.method = CiMethod::Wald;
  region.intervals.resize(static_cast<std::size_t>(theta_hat.size()));
  for (Eigen::Index j = 0; j < theta_hat.size(); ++j) {
    const double var = std::max(omega_theta(j, j), 0.0) / n;
    Interval& iv = region.intervals[static_cast<std::size_t>(j)];
    const double half = z * std::sqrt(var);
    iv.lo = theta_hat[j] - half;
    iv.hi = theta_hat[j] + half;
    iv.degenerate = half == 0.0;
  }
  return region;
}

RhoQuantileTable build_rho_quantile_table(const std::vector<double>& gammas,
                                          double alpha1, int grid_m,
                                          int n_draws, std::uint64_t seed,
                                          int parallelism) {
  if (gammas.empty()) {
    throw config_error("build_rho_quantile_table: empty gamma grid");
  }
  if (alpha1 <= 0.0 || alpha1 >= 1.0) {
    throw config_error("build_rho_quantile_table: alpha1 must lie in (0,1)");
  }
  RhoQuantileTable table;
  table.gammas = gammas;
  table.alpha1 = alpha1;
  table.q_lo.reserve(gammas.size());
  table.q_hi.reserve(gammas.size());
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    const LimitSample ou = sample_ou_functionals(
        gammas[g], 0.0, 1.0, grid_m, n_draws,
        seed + static_cast<std::uint64_t>(g) * 0x9e3779b97f4a7c15ULL,
        parallelism);
    std::vector<double> ratio(static_cast<std::size_t>(n_draws));
    for (int d = 0; d < n_draws; ++d) {
      ratio[static_cast<std::size_t>(d)] = ou.draws(d, 2) / ou.draws(d, 1);
    }
    table.q_lo.push_back(empirical_quantile(ratio, 0.5 * alpha1));
    table.q_hi.push_back(empirical_quantile(ratio, 1.0 - 0.5 * alpha1));
  }
  return table;
}

RhoInterval rho_grid_ci(const FactorPath& factors, double alpha1,
                        const std::vector<double>& gamma_grid,
                        const RhoQuantileTable& table) {
  (void)alpha1;  // the level is baked into the table's belts
  if (gamma_grid.empty()) {
    throw config_error("rho_grid_ci: empty gamma grid");
  }
  const double tau = factors.tau;
  const double rho_hat = estimate_unit_root_ols(factors);
  const double gmin = *std::min_element(gamma_grid.begin(), gamma_grid.end());
  const double gmax = *std::max_element(gamma_grid.begin(), gamma_grid.end());
  if (std::exp(gmin / tau) > rho_hat || std::exp(gmax / tau) < rho_hat) {
    throw config_error("rho_grid_ci: grid does not cover rho_hat");
  }

  // Belt at an off-grid gamma: linear interpolation in the table.
  auto belt = [&table](double g) -> std::pair<double, double> {
    const auto& gs = table.gammas;
    if (g <= gs.front()) return {table.q_lo.front(), table.q_hi.front()};
    if (g >= gs.back()) return {table.q_lo.back(), table.q_hi.back()};
    const auto it = std::upper_bound(gs.begin(), gs.end(), g);
    const std::size_t j = static_cast<std::size_t>(it - gs.begin());
    const double w = (g - gs[j - 1]) / (gs[j] - gs[j - 1]);
    return {(1.0 - w) * table.q_lo[j - 1] + w * table.q_lo[j],
            (1.0 - w) * table.q_hi[j - 1] + w * table.q_hi[j]};
  };

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (double g : gamma_grid) {
    const double rho_g = std::exp(g / tau);
    const double stat = tau * (rho_hat - rho_g);
    const auto [q_lo, q_hi] = belt(g);
    if (stat >= q_lo && stat <= q_hi) {
      lo = std::min(lo, rho_g);
      hi = std::max(hi, rho_g);
      any = true;
    }
  }
  RhoInterval out;
  if (any) {
    out.lo = lo;
    out.hi = hi;
  } else {
    out.lo = std::exp(gmin / tau);
    out.hi = std::exp(gmax / tau);
    out.fallback = true;
  }
  return out;
}

ConfidenceRegion bonferroni_union_ci(const PanelData& panel,
                                     const FactorPath& factors,
                                     const ModelSpec& spec, double alpha1,
                                     double alpha2, int rho_grid_resolution,
                                     const RhoQuantileTable& table,
                                     const std::vector<double>& gamma_grid) {
  if (rho_grid_resolution < 10) {
    throw config_error("bonferroni_union_ci: grid resolution must be >= 10");
  }
  const RhoInterval stage1 = rho_grid_ci(factors, alpha1, gamma_grid, table);

  ConfidenceRegion region;
  region.method = CiMethod::BonferroniUnion;
  region.nominal_level = 1.0 - alpha1 - alpha2;
  region.alpha1 = alpha1;
  region.alpha2 = alpha2;
  region.rho_lo = stage1.lo;
  region.rho_hi = stage1.hi;
  region.rho_fallback = stage1.fallback;

  const double z = normal_quantile(1.0 - 0.5 * alpha2);
  const int m = rho_grid_resolution;
  std::size_t n_ok = 0;
  for (int j = 0; j < m; ++j) {
    const double rho =
        m == 1 ? stage1.lo
               : stage1.lo + (stage1.hi - stage1.lo) * j / (m - 1.0);
    region.rho_grid.push_back(rho);
    bool ok = true;
    std::vector<Interval> cis;
    try {
      const ParamVector phi = profiled_theta(panel, rho, spec);
      const Eigen::MatrixXd a = cs_jacobian_tt(panel, phi, spec);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (!lu.isInvertible()) {
        throw singularity_error("bonferroni_union_ci: singular Hessian");
      }
      // Fixed-rho sandwich Sigma(rho) = (1/n) A^-1 Omega_y A'^-1.
      const ScoreBundle bundle = scores(panel, factors, phi, spec);
      const Eigen::MatrixXd omega_y = bundle.cs_scores.transpose() *
                                      bundle.cs_scores /
                                      static_cast<double>(panel.n);
      const Eigen::MatrixXd a_inv = lu.inverse();
      const Eigen::MatrixXd sigma =
          a_inv * omega_y * a_inv.transpose() / static_cast<double>(panel.n);
      const Eigen::VectorXd theta = phi.theta();
      cis.resize(static_cast<std::size_t>(theta.size()));
      for (Eigen::Index c = 0; c < theta.size(); ++c) {
        const double half = z * std::sqrt(std::max(sigma(c, c), 0.0));
        cis[static_cast<std::size_t>(c)] = {theta[c] - half, theta[c] + half,
                                            half == 0.0};
      }
    } catch (const std::exception&) {
      ok = false;
      cis.clear();
    }
    region.per_rho_ok.push_back(ok);
    region.per_rho_intervals.push_back(std::move(cis));
    if (ok) ++n_ok;
  }
  if (n_ok == 0) {
    throw domain_error("bonferroni_union_ci: no grid point converged");
  }

  // Union per coordinate over the successful grid points.
  std::size_t k = 0;
  for (std::size_t j = 0; j < region.per_rho_intervals.size(); ++j) {
    if (region.per_rho_ok[j]) {
      k = region.per_rho_intervals[j].size();
      break;
    }
  }
  region.intervals.assign(
      k, Interval{std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(), false});
  for (std::size_t j = 0; j < region.per_rho_intervals.size(); ++j) {
    if (!region.per_rho_ok[j]) continue;
    for (std::size_t c = 0; c < k; ++c) {
      region.intervals[c].lo =
          std::min(region.intervals[c].lo, region.per_rho_intervals[j][c].lo);
      region.intervals[c].hi =
          std::max(region.intervals[c].hi, region.per_rho_intervals[j][c].hi);
    }
  }
  for (auto& iv : region.intervals) iv.degenerate = iv.lo == iv.hi;
  return region;
}

std::vector<double> default_gamma_grid(double gamma_min, double gamma_max,
                                       int n_points) {
  if (n_points < 2 || gamma_max <= gamma_min) {
    throw config_error("default_gamma_grid: bad grid parameters");
  }
  std::vector<double> grid(static_cast<std::size_t>(n_points));
  for (int j = 0; j < n_points; ++j) {
    grid[static_cast<std::size_t>(j)] =
        gamma_min + (gamma_max - gamma_min) * j / (n_points - 1.0);
  }
  return grid;
}

}  // namespace xsts
