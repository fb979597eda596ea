#ifndef XSTS_FACTOR_PROCESS_HPP_
#define XSTS_FACTOR_PROCESS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <variant>

namespace xsts {

enum class Regime { Stationary, LocalToUnity };

// A simulated aggregate shock path nu_t for t = tau0+1 ... tau0+tau, together
// with the pre-sample value nu_{tau0} ("initial") and the innovations that
// generated it.  Innovations are retained so the generating recursion can be
// re-checked exactly.
struct FactorPath {
  Regime regime = Regime::Stationary;
  double param = 0.0;      // rho (stationary) or gamma (local-to-unity)
  double sigma_eta = 1.0;  // innovation s.d.
  double nu0 = 0.0;        // scaled initial condition, local-to-unity only
  int tau = 0;             // number of stored values
  long tau0 = 0;           // start offset: values cover t = tau0+1 .. tau0+tau
  double initial = 0.0;    // nu_{tau0}
  Eigen::VectorXd values;       // nu_{tau0+1} .. nu_{tau0+tau}
  Eigen::VectorXd innovations;  // eta_{tau0+1} .. eta_{tau0+tau}

  // Value at calendar time t, with nu_{tau0} = initial.
  double at_time(long t) const;
  // nu_{t+1} = multiplier * nu_t + eta_{t+1}; rho or exp(gamma/tau).
  double recursion_multiplier() const;
};

// How the start offset tau0 is chosen.  Backwards mode places the path so
// the asymptotics run backwards in time: tau0 = round(-upsilon*tau)+tau0f+T.
struct StartSpec {
  struct Fixed {
    long tau0f = 0;
  };
  struct Backwards {
    double upsilon = 1.0;  // in [0,1]
    long tau0f = 0;
    int T = 1;
  };
  std::variant<Fixed, Backwards> mode = Fixed{};

  long resolve(int tau) const;

  static StartSpec fixed(long tau0f) { return {Fixed{tau0f}}; }
  static StartSpec backwards(double upsilon, long tau0f, int T) {
    return {Backwards{upsilon, tau0f, T}};
  }
};

// Initialization of the stationary recursion.
struct StationaryDraw {};  // nu_{tau0} ~ N(0, sigma^2/(1-rho^2))
struct FixedValue {
  double value = 0.0;
};
using StationaryInit = std::variant<StationaryDraw, FixedValue>;

// Innovation sampler: must have mean 0 and a finite 2+delta moment; the
// default is N(0, sigma_eta^2).
using InnovationSampler = std::function<double(std::mt19937_64&)>;

FactorPath simulate_stationary(double rho, double sigma_eta, int tau,
                               const StartSpec& start,
                               const StationaryInit& init, std::uint64_t seed,
                               const InnovationSampler& sampler = nullptr);

// nu_{tau,t+1} = exp(gamma/tau) nu_{tau,t} + eta_{t+1}, nu_{tau,0} =
// sqrt(tau)*nu0, with tau0 = 0.
FactorPath simulate_local_to_unity(double gamma, double sigma_eta, int tau,
                                   double nu0, std::uint64_t seed,
                                   const InnovationSampler& sampler = nullptr);

// Builds a path from raw values (initial = nu_{tau0}, then tau more values)
// and innovations; used by estimators fed with externally supplied data.
FactorPath factor_path_from_values(Regime regime, double param,
                                   double sigma_eta, long tau0, double initial,
                                   Eigen::VectorXd values,
                                   Eigen::VectorXd innovations);

// Omega_nu(r) = sigma^2 (1 - exp(-2 r gamma)) / (2 gamma), with the series
// limit sigma^2 r (1 - r gamma + (2/3) (r gamma)^2) near gamma = 0.
double variance_kernel(double gamma, double sigma, double r);

// Squared L2 mixingale bound for the AR(1) Gaussian score z_s u_{s+1}:
//   |rho|^|s| (rho^{2+2|s|} + 1)/(1-rho^2) + |rho|^|s| rho^{2+2|s|}/(1-rho^2).
double mixingale_bound(double rho, long s);

// Max abs residual of the squared-and-summed recursion identity
//   tau^-1 sum nu_{s-1} eta_s
//     = (e^{-g/tau}/2) tau^-1 (nu_tau^2 - nu_tau0^2)
//       + (tau e^{-g/tau}/2)(1 - e^{2g/tau}) tau^-2 sum nu_{s-1}^2
//       - (e^{-g/tau}/2) tau^-1 sum eta_s^2,
// exact for any finite local-to-unity path.
double check_summation_identity(const FactorPath& path);

// Reconstructs the path from (initial, innovations) and returns the max abs
// deviation from the stored values; zero up to floating point for any path
// produced by the simulators.
double recursion_residual(const FactorPath& path);

}  // namespace xsts

#endif  // XSTS_FACTOR_PROCESS_HPP_
