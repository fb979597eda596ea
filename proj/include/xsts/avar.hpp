#ifndef XSTS_AVAR_HPP_
#define XSTS_AVAR_HPP_

#include <Eigen/Dense>
#include <optional>

#include "xsts/criteria.hpp"

namespace xsts {

// Hessian blocks of the stacked estimating equations, in the per-unit
// normalization A_{y,.} = n^-1 sum d(score)/d(param) and
// A_{nu,.} = tau^-1 sum d(score)/d(param).
struct ABlocks {
  Eigen::MatrixXd A_y_theta;   // k_theta x k_theta
  Eigen::MatrixXd A_y_rho;     // k_theta x k_rho
  Eigen::MatrixXd A_nu_theta;  // k_rho x k_theta
  Eigen::MatrixXd A_nu_rho;    // k_rho x k_rho
  double kappa = 1.0;          // n / tau
  double condition_number_y_theta = 0.0;

  // Full scaled matrix [[A_yt, sqrt(k) A_yr], [A_nt / sqrt(k), A_nr]].
  Eigen::MatrixXd assemble() const;
};

// Blocks of the inverse of the unscaled [[A_yt, A_yr], [A_nt, A_nr]], via the
// Schur complement of A_y_theta.
struct InverseBlocks {
  Eigen::MatrixXd A_yt;  // A^{y,theta}
  Eigen::MatrixXd A_yr;  // A^{y,rho}
  Eigen::MatrixXd A_nt;  // A^{nu,theta}
  Eigen::MatrixXd A_nr;  // A^{nu,rho}
};

struct OmegaEstimates {
  Eigen::MatrixXd omega_y;      // k_theta x k_theta
  Eigen::MatrixXd omega_nu1;    // k_rho x k_rho
  std::optional<Eigen::MatrixXd> omega_f;   // GMM moment variance
  std::optional<Eigen::MatrixXd> omega_g1;  // GMM ts moment variance
  Eigen::MatrixXd omega_theta;  // filled by asymptotic_variance_theta
};

ABlocks hessian_blocks(const PanelData& panel, const FactorPath& factors,
                       const ParamVector& phi_hat, const ModelSpec& spec);

OmegaEstimates omega_estimates(const ScoreBundle& bundle,
                               const ModelSpec& spec, const ABlocks& blocks);

InverseBlocks partitioned_inverse(const ABlocks& blocks);

// Omega_theta = A^{y,theta} Omega_y A^{y,theta}' +
//               kappa A^{y,rho} Omega_nu(1) A^{y,rho}'
Eigen::MatrixXd asymptotic_variance_theta(const InverseBlocks& inv,
                                          const OmegaEstimates& omegas,
                                          double kappa);

// Two-step covariance (1/n) A^-1 Omega_y A^-1 + (1/tau) A^-1 B Omega_nu B' A^-1
// where Omega_nu is the variance of the first-stage influence function.
struct TwoStepSe {
  Eigen::MatrixXd covariance;
  Eigen::VectorXd standard_errors;
};
TwoStepSe twostep_se(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& omega_y,
                     const Eigen::MatrixXd& omega_nu, double n, double tau);

// sqrt(n) Omega_theta^{-1/2} (theta_hat - theta0); standard normal per
// coordinate under the null in the stationary model.
Eigen::VectorXd pivotal_stat(const Eigen::VectorXd& theta_hat,
                             const Eigen::VectorXd& theta0,
                             const Eigen::MatrixXd& omega_theta, double n);

// Restriction variant sqrt(n) Omega^{-1/2}(R theta_hat - r) with
// Omega = R Omega_theta R'.
Eigen::VectorXd pivotal_stat(const Eigen::VectorXd& theta_hat,
                             const Eigen::MatrixXd& R, const Eigen::VectorXd& r,
                             const Eigen::MatrixXd& omega_theta, double n);

// Symmetric inverse square root with eigenvalue floor 1e-12 * max eigenvalue.
Eigen::MatrixXd inverse_sqrt_psd(const Eigen::MatrixXd& m);

}  // namespace xsts

#endif  // XSTS_AVAR_HPP_
