#ifndef XSTS_CRITERIA_HPP_
#define XSTS_CRITERIA_HPP_

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "xsts/cross_section.hpp"
#include "xsts/factor_process.hpp"

namespace xsts {

// phi = (theta', rho')' with theta = (beta', nu')'.  In the unit-root variant
// nu holds the single scaled initial condition nu0.
struct ParamVector {
  Eigen::VectorXd beta;
  Eigen::VectorXd nu;
  double rho = 0.0;

  Eigen::Index k_theta() const { return beta.size() + nu.size(); }
  Eigen::VectorXd theta() const;
  static ParamVector from_theta(const Eigen::VectorXd& theta,
                                Eigen::Index k_beta, double rho);
  static ParamVector scalar(double beta, Eigen::VectorXd nu, double rho);
};

// Per-observation scores of the two criteria, evaluated at one phi.
// cs_scores row (i + t*n) holds f_theta,it'; ts_scores[t] holds g_rho,t.
// When the criterion is moment based, the raw moment functions f_it and g_t
// are filled in as well.
struct ScoreBundle {
  Eigen::MatrixXd cs_scores;
  Eigen::VectorXd ts_scores;
  std::optional<Eigen::MatrixXd> cs_moments;
  std::optional<Eigen::VectorXd> ts_moments;
  Eigen::Index n = 0;  // cross-section size; cs_scores has n*T rows
};

// F_n(phi) = n^-1 sum_t sum_i f(y_it | beta, nu_t, rho) for Likelihood, or
// -h_n' W h_n for Moment, where h_n = n^-1 sum_t sum_i m_it.
double criterion_F(const PanelData& panel, const ParamVector& phi,
                   const ModelSpec& spec);

// G_tau(rho) = tau^-1 sum_t g(nu_t | nu_{t-1}, rho): the AR(1) conditional
// Gaussian log-density (or -k'Wk for Moment).  Free of beta by construction.
double criterion_G(const FactorPath& factors, const ParamVector& phi,
                   const ModelSpec& spec);

ScoreBundle scores(const PanelData& panel, const FactorPath& factors,
                   const ParamVector& phi, const ModelSpec& spec);

// --- Estimating-equation assembly (analytic, criterion-aware) -------------
//
// cs_score_mean     = dF_n/dtheta                    (k_theta)
// cs_jacobian_tt    = d^2F_n/dtheta dtheta'          (k_theta x k_theta)
// cs_jacobian_tr    = d^2F_n/dtheta drho             (k_theta)
// ts_score_mean     = dG_tau/drho                     (scalar)
// ts_jacobian_rr    = d^2G_tau/drho^2                 (scalar)
Eigen::VectorXd cs_score_mean(const PanelData& panel, const ParamVector& phi,
                              const ModelSpec& spec);
Eigen::MatrixXd cs_jacobian_tt(const PanelData& panel, const ParamVector& phi,
                               const ModelSpec& spec);
Eigen::VectorXd cs_jacobian_tr(const PanelData& panel, const ParamVector& phi,
                               const ModelSpec& spec);
double ts_score_mean(const FactorPath& factors, const ParamVector& phi,
                     const ModelSpec& spec);
double ts_jacobian_rr(const FactorPath& factors, const ParamVector& phi,
                      const ModelSpec& spec);

// Closed-form maximizer of F_n over theta at fixed rho (period-wise OLS for
// the Gaussian reference models); the default Newton initializer and the
// inner step of the identification diagnostic.
ParamVector profiled_theta(const PanelData& panel, double rho,
                           const ModelSpec& spec);

// Numeric identification diagnostics, operationalizing the conditions that F
// alone must not identify rho while the argmax path theta(rho) must move.
struct IdentificationReport {
  std::vector<double> rho_grid;
  std::vector<Eigen::VectorXd> theta_path;   // argmax_theta F(.,rho)
  std::vector<double> profile_values;        // max_theta F(.,rho)
  std::vector<bool> converged;
  double profile_gap = 0.0;          // max |max F(.,rho) - max F(.,rho0)|
  double min_theta_distance = 0.0;   // min_{rho != rho0} ||theta(rho)-theta0||
  double g_beta_flatness = 0.0;      // max_beta |max_rho G(beta,.) - ref|
  bool f_profile_flat = false;       // condition: rho not identified by F
  bool theta_path_moves = false;     // condition: rho needed for theta
  bool g_flat_in_beta = false;
};

IdentificationReport identification_diagnostic(const PanelData& panel,
                                               const FactorPath& factors,
                                               const ModelSpec& spec,
                                               const ParamVector& truth,
                                               const std::vector<double>& rho_grid);

}  // namespace xsts

#endif  // XSTS_CRITERIA_HPP_
