#ifndef XSTS_CROSS_SECTION_HPP_
#define XSTS_CROSS_SECTION_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "xsts/factor_process.hpp"

namespace xsts {

// Factor loading lambda(rho) with analytic derivative.  The default
// lambda(rho) = 1/(1-rho) couples the cross-sectional score to rho (B != 0);
// a constant loading decouples the two samples (B = 0).
struct LoadingFn {
  std::function<double(double)> lambda;
  std::function<double(double)> dlambda;
  std::string name;

  double operator()(double rho) const { return lambda(rho); }
  double deriv(double rho) const { return dlambda(rho); }
};

LoadingFn default_loading();            // 1/(1-rho), derivative 1/(1-rho)^2
LoadingFn linear_loading();             // rho, derivative 1
LoadingFn constant_loading(double c);   // c, derivative 0

enum class ModelKind { StationaryRef, UnitRootRef };
enum class CriterionKind { Likelihood, Moment };

// Reference model: Gaussian linear outcome equation
//   StationaryRef: y_it = beta x_it + lambda(rho) nu_t  + eps_it
//   UnitRootRef:   y_it = beta x_it + lambda(rho) nu0   + eps_it
// with x_it ~ N(1,1), eps_it ~ N(0, sigma_eps^2) independent across i given
// the factors.
struct ModelSpec {
  ModelKind kind = ModelKind::StationaryRef;
  LoadingFn loading = default_loading();
  double sigma_eps = 1.0;
  double sigma_eta = 1.0;  // time-series innovation s.d., treated as known
  CriterionKind criterion = CriterionKind::Likelihood;
  Eigen::MatrixXd weight_cs;  // GMM weights; empty means identity
  Eigen::MatrixXd weight_ts;

  void validate() const;
};

struct PanelData {
  Eigen::MatrixXd y;    // n x T
  Eigen::MatrixXd x;    // n x T
  Eigen::MatrixXd eps;  // n x T, retained generation errors (optional)
  int n = 0;
  int T = 0;
  long panel_start = 1;  // calendar time of the first panel period
};

// Stationary reference DGP; the factor window must cover calendar times
// panel_start .. panel_start+T-1.
PanelData simulate_panel(const ModelSpec& spec, double beta,
                         const FactorPath& factors, double rho, int n, int T,
                         std::uint64_t seed);

// Unit-root reference DGP: the common shock is the scaled initial condition
// nu0, constant across panel periods.
PanelData simulate_panel_unitroot(const ModelSpec& spec, double beta,
                                  double nu0, double rho, int n, int T,
                                  std::uint64_t seed);

// Factor values over the panel window, as a length-T vector.
Eigen::VectorXd panel_factor_window(const FactorPath& factors,
                                    long panel_start, int T);

}  // namespace xsts

#endif  // XSTS_CROSS_SECTION_HPP_
