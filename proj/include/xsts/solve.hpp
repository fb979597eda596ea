#ifndef XSTS_SOLVE_HPP_
#define XSTS_SOLVE_HPP_

#include <Eigen/Dense>

#include "xsts/criteria.hpp"

namespace xsts {

struct EstimateResult {
  ParamVector phi_hat;
  bool converged = false;
  int iterations = 0;
  double final_score_norm = 0.0;
  Eigen::VectorXd scaling;  // D_{n tau} diagonal applied to the Newton step
};

struct TimeSeriesEstimate {
  double rho_tilde = 0.0;
  Eigen::VectorXd influence;  // phi_s: scaled per-period scores, mean zero
  double sigma_eta_hat = 0.0; // profiled innovation s.d.
};

// AR(1) Gaussian MLE of rho (OLS of nu_t on nu_{t-1} through the origin),
// with the influence function entries such that
// sqrt(tau)(rho_tilde - rho) = tau^{-1/2} sum_s phi_s.
TimeSeriesEstimate estimate_timeseries(const FactorPath& factors,
                                       const ModelSpec& spec);

// Newton on the theta block only, holding rho = rho_tilde fixed.
EstimateResult estimate_twostep(const PanelData& panel, double rho_tilde,
                                const ModelSpec& spec, const ParamVector& init,
                                double tol = 1e-10, int max_iter = 100);

// Stacked Newton on s(phi) = (dF/dtheta, dG/drho), with the D_{n tau} diagonal
// used to precondition the step.
EstimateResult estimate_joint(const PanelData& panel,
                              const FactorPath& factors, const ModelSpec& spec,
                              const ParamVector& init, double tol = 1e-10,
                              int max_iter = 100);

// rho_hat = sum nu_{t-1} nu_t / sum nu_{t-1}^2 on a local-to-unity path.
double estimate_unit_root_ols(const FactorPath& factors);

}  // namespace xsts

#endif  // XSTS_SOLVE_HPP_
