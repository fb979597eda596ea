#ifndef XSTS_INFERENCE_HPP_
#define XSTS_INFERENCE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "xsts/criteria.hpp"
#include "xsts/solve.hpp"

namespace xsts {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate = false;

  bool covers(double v) const { return lo <= v && v <= hi; }
  double width() const { return hi - lo; }
};

enum class CiMethod { Wald, BonferroniUnion };

// Per-coordinate confidence intervals plus, for the Bonferroni union, the
// full audit trail of the per-rho pieces.
struct ConfidenceRegion {
  std::vector<Interval> intervals;
  double nominal_level = 0.0;
  CiMethod method = CiMethod::Wald;

  // BonferroniUnion bookkeeping.
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double rho_lo = 0.0;
  double rho_hi = 0.0;
  bool rho_fallback = false;  // first stage accepted nothing; hull used
  std::vector<double> rho_grid;
  std::vector<std::vector<Interval>> per_rho_intervals;
  std::vector<bool> per_rho_ok;
};

// theta_hat_j +- z_{(1+level)/2} sqrt(omega_theta_jj / n); a zero (floored)
// variance yields a degenerate single-point interval, flagged.
ConfidenceRegion wald_ci(const Eigen::VectorXd& theta_hat,
                         const Eigen::MatrixXd& omega_theta, double n,
                         double level);

// Per-gamma acceptance belt for tau(rho_hat - rho(gamma)): the alpha1/2 and
// 1-alpha1/2 quantiles of its local-to-unity limit law
// (sigma int V dW) / (int V^2) with V0 = 0 (scale-free in sigma).
struct RhoQuantileTable {
  std::vector<double> gammas;  // strictly increasing
  std::vector<double> q_lo;
  std::vector<double> q_hi;
  double alpha1 = 0.0;
};

RhoQuantileTable build_rho_quantile_table(const std::vector<double>& gammas,
                                          double alpha1, int grid_m,
                                          int n_draws, std::uint64_t seed,
                                          int parallelism = 1);

struct RhoInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool fallback = false;  // empty acceptance: widest-grid hull returned
};

// Grid inversion: accept gamma iff tau(rho_hat - exp(gamma/tau)) lies inside
// the belt; return the hull of accepted rho(gamma).
RhoInterval rho_grid_ci(const FactorPath& factors, double alpha1,
                        const std::vector<double>& gamma_grid,
                        const RhoQuantileTable& table);

// Two-stage union procedure for the near-unit-root design:
//  1. [rho_L, rho_U] at level 1-alpha1 from rho_grid_ci;
//  2. for each rho on an evenly spaced grid of [rho_L, rho_U] (endpoints
//     included), theta_hat(rho) = argmax_theta F(theta, rho) and the fixed-rho
//     sandwich Sigma(rho) = (1/n) A(rho)^-1 Omega_y(rho) A(rho)^-1;
//  3. per-coordinate union of the level 1-alpha2 Wald intervals.
// Coverage target >= 1 - alpha1 - alpha2.
ConfidenceRegion bonferroni_union_ci(const PanelData& panel,
                                     const FactorPath& factors,
                                     const ModelSpec& spec, double alpha1,
                                     double alpha2, int rho_grid_resolution,
                                     const RhoQuantileTable& table,
                                     const std::vector<double>& gamma_grid);

// Default gamma grid for the first stage: n_points evenly spaced on
// [gamma_min, gamma_max].
std::vector<double> default_gamma_grid(double gamma_min = -25.0,
                                       double gamma_max = 5.0,
                                       int n_points = 121);

}  // namespace xsts

#endif  // XSTS_INFERENCE_HPP_
