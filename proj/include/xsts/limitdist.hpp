#ifndef XSTS_LIMITDIST_HPP_
#define XSTS_LIMITDIST_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace xsts {

enum class LimitKind { MixedNormal, DFRatio, UnitRootTheta, OUFunctionals };

struct LimitMeta {
  double gamma = 0.0;
  double v0 = 0.0;
  double sigma = 1.0;
  double kappa = 0.0;
  double xi = 0.0;
};

// Monte Carlo sample from one of the limiting laws.  Rows are draws; the
// column layout is documented per sampler in `columns`.
struct LimitSample {
  Eigen::MatrixXd draws;
  LimitKind kind = LimitKind::MixedNormal;
  int grid_m = 0;
  LimitMeta meta;
  std::vector<std::string> columns;
};

// Functionals of V(r) = e^{gamma r} V(0) + int_0^r sigma e^{gamma(r-s)} dW(s)
// on an Euler grid with exact exponential propagation and left-endpoint
// stochastic integrals.  Columns: V(1), int_0^1 V^2 dr, sigma int_0^1 V dW,
// W(1).  The third column carries the sigma factor so it is identically zero
// for sigma = 0.
LimitSample sample_ou_functionals(double gamma, double v0, double sigma,
                                  int grid_m, int n_draws, std::uint64_t seed,
                                  int parallelism = 1);

// (W(1)^2 - 1) / (2 int_0^1 W^2 dr): the limit of tau(rho_hat - 1) under a
// unit root with iid errors.  Single column "ratio".
LimitSample sample_df_ratio(int grid_m, int n_draws, std::uint64_t seed,
                            int parallelism = 1);

// Limit of sqrt(n)(theta_hat - theta0) in the near-unit-root design:
//   -A_yt^-1 Omega_y^{1/2} W_y(1)
//   - sqrt(kappa) A_yt^-1 A_yr (int V^2)^-1 (sigma int V dW)
// with kappa = n / tau^2 and W_y independent of the factor Brownian motion.
LimitSample sample_unitroot_theta_limit(const Eigen::MatrixXd& A_y_theta,
                                        const Eigen::MatrixXd& A_y_rho,
                                        const Eigen::MatrixXd& omega_y,
                                        double kappa, double gamma, double v0,
                                        double sigma, int grid_m, int n_draws,
                                        std::uint64_t seed,
                                        int parallelism = 1);

// Per-draw redraw of (A, Omega); realizes mixed-normal (random covariance)
// limits when the conditioning variables are themselves random.
using CovariancePairSampler =
    std::function<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>(
        std::mt19937_64&)>;

// Draws of -A^-1 Omega^{1/2} Z with Z standard normal; covariance
// A^-1 Omega A'^-1 per draw.
LimitSample sample_mixed_normal(
    const Eigen::MatrixXd& A, const Eigen::MatrixXd& omega, int n_draws,
    std::uint64_t seed,
    const std::optional<CovariancePairSampler>& resampler = std::nullopt,
    int parallelism = 1);

// Itô-identity residual 0.5(V(1)^2 - V(0)^2) - gamma int V^2 - sigma^2/2
// - sigma int V dW for each row of an OUFunctionals sample.
Eigen::VectorXd ito_identity_residuals(const LimitSample& sample);

// (p, q) pairs at p = j/(k+1), j = 1..k, from one column of draws.
std::vector<std::pair<double, double>> quantile_table(
    const Eigen::VectorXd& draws, int k = 999);

// Symmetric psd square root (eigendecomposition, negative part clipped at
// -1e-10 * trace tolerance).
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m);

}  // namespace xsts

#endif  // XSTS_LIMITDIST_HPP_
