#include "xsts/factor_process.hpp"

#include <cmath>
#include <utility>

#include "xsts/errors.hpp"
#include "xsts/rng.hpp"

namespace xsts {

double FactorPath::at_time(long t) const {
  if (t == tau0) return initial;
  if (t < tau0 + 1 || t > tau0 + tau) {
    throw domain_error("FactorPath::at_time: t outside stored window");
  }
  return values[static_cast<Eigen::Index>(t - tau0 - 1)];
}

double FactorPath::recursion_multiplier() const {
  return regime == Regime::Stationary
             ? param
             : std::exp(param / static_cast<double>(tau));
}

long StartSpec::resolve(int tau) const {
  if (std::holds_alternative<Fixed>(mode)) {
    return std::get<Fixed>(mode).tau0f;
  }
  const auto& b = std::get<Backwards>(mode);
  if (b.upsilon < 0.0 || b.upsilon > 1.0) {
    throw domain_error("StartSpec: upsilon must lie in [0,1]");
  }
  return static_cast<long>(std::llround(-b.upsilon * tau)) + b.tau0f + b.T;
}

namespace {

FactorPath run_recursion(Regime regime, double param, double sigma_eta,
                         int tau, long tau0, double initial,
                         std::mt19937_64& gen,
                         const InnovationSampler& sampler) {
  FactorPath path;
  path.regime = regime;
  path.param = param;
  path.sigma_eta = sigma_eta;
  path.tau = tau;
  path.tau0 = tau0;
  path.initial = initial;
  path.values.resize(tau);
  path.innovations.resize(tau);
  const double mult = regime == Regime::Stationary
                          ? param
                          : std::exp(param / static_cast<double>(tau));
  std::normal_distribution<double> eta(0.0, sigma_eta);
  double prev = initial;
  for (int k = 0; k < tau; ++k) {
    const double e = sampler ? sampler(gen) : eta(gen);
    path.innovations[k] = e;
    prev = mult * prev + e;
    path.values[k] = prev;
  }
  return path;
}

}  // namespace

FactorPath simulate_stationary(double rho, double sigma_eta, int tau,
                               const StartSpec& start,
                               const StationaryInit& init, std::uint64_t seed,
                               const InnovationSampler& sampler) {
  if (std::abs(rho) >= 1.0) {
    throw regime_error(
        "simulate_stationary: |rho| >= 1; use simulate_local_to_unity for "
        "(near-)unit roots");
  }
  if (sigma_eta <= 0.0) {
    throw domain_error("simulate_stationary: sigma_eta must be positive");
  }
  if (tau < 2) throw domain_error("simulate_stationary: tau must be >= 2");
  const long tau0 = start.resolve(tau);
  auto gen = derive_stream(seed, 0);
  double initial;
  if (std::holds_alternative<StationaryDraw>(init)) {
    std::normal_distribution<double> d(
        0.0, sigma_eta / std::sqrt(1.0 - rho * rho));
    initial = d(gen);
  } else {
    initial = std::get<FixedValue>(init).value;
  }
  return run_recursion(Regime::Stationary, rho, sigma_eta, tau, tau0, initial,
                       gen, sampler);
}

FactorPath simulate_local_to_unity(double gamma, double sigma_eta, int tau,
                                   double nu0, std::uint64_t seed,
                                   const InnovationSampler& sampler) {
  if (sigma_eta <= 0.0) {
    throw domain_error("simulate_local_to_unity: sigma_eta must be positive");
  }
  if (tau < 2) {
    throw domain_error("simulate_local_to_unity: tau must be >= 2");
  }
  auto gen = derive_stream(seed, 0);
  const double initial = std::sqrt(static_cast<double>(tau)) * nu0;
  FactorPath path = run_recursion(Regime::LocalToUnity, gamma, sigma_eta, tau,
                                  /*tau0=*/0, initial, gen, sampler);
  path.nu0 = nu0;
  return path;
}

FactorPath factor_path_from_values(Regime regime, double param,
                                   double sigma_eta, long tau0, double initial,
                                   Eigen::VectorXd values,
                                   Eigen::VectorXd innovations) {
  if (values.size() != innovations.size()) {
    throw dimension_error("factor_path_from_values: length mismatch");
  }
  FactorPath path;
  path.regime = regime;
  path.param = param;
  path.sigma_eta = sigma_eta;
  path.tau = static_cast<int>(values.size());
  path.tau0 = tau0;
  path.initial = initial;
  path.values = std::move(values);
  path.innovations = std::move(innovations);
  if (regime == Regime::LocalToUnity) {
    path.nu0 = initial / std::sqrt(static_cast<double>(path.tau));
  }
  return path;
}

double variance_kernel(double gamma, double sigma, double r) {
  if (r < 0.0 || r > 1.0) {
    throw domain_error("variance_kernel: r must lie in [0,1]");
  }
  if (sigma <= 0.0) {
    throw domain_error("variance_kernel: sigma must be positive");
  }
  const double s2 = sigma * sigma;
  if (std::abs(gamma) < 1e-8) {
    const double u = r * gamma;
    return s2 * r * (1.0 - u + (2.0 / 3.0) * u * u);
  }
  return s2 * (1.0 - std::exp(-2.0 * r * gamma)) / (2.0 * gamma);
}

double mixingale_bound(double rho, long s) {
  if (std::abs(rho) >= 1.0) {
    throw domain_error("mixingale_bound: |rho| must be < 1");
  }
  if (s >= 0) throw domain_error("mixingale_bound: s must be negative");
  const double as = static_cast<double>(-s);
  const double r_abs_s = std::pow(std::abs(rho), as);
  const double r_pow = std::pow(rho, 2.0 + 2.0 * as);
  const double denom = 1.0 - rho * rho;
  return r_abs_s * (r_pow + 1.0) / denom + r_abs_s * r_pow / denom;
}

double check_summation_identity(const FactorPath& path) {
  if (path.regime != Regime::LocalToUnity) {
    throw regime_error(
        "check_summation_identity: requires a local-to-unity path");
  }
  const double tau = static_cast<double>(path.tau);
  const double g = path.param;
  const double em = std::exp(-g / tau);
  double lhs = 0.0;          // tau^-1 sum nu_{s-1} eta_s
  double sum_nu_sq = 0.0;    // sum nu_{s-1}^2
  double sum_eta_sq = 0.0;   // sum eta_s^2
  double prev = path.initial;
  for (int k = 0; k < path.tau; ++k) {
    lhs += prev * path.innovations[k];
    sum_nu_sq += prev * prev;
    sum_eta_sq += path.innovations[k] * path.innovations[k];
    prev = path.values[k];
  }
  lhs /= tau;
  const double last = path.values[path.tau - 1];
  const double rhs =
      (em / 2.0) * (last * last - path.initial * path.initial) / tau +
      (tau * em / 2.0) * (1.0 - std::exp(2.0 * g / tau)) * sum_nu_sq /
          (tau * tau) -
      (em / 2.0) * sum_eta_sq / tau;
  return std::abs(lhs - rhs);
}

double recursion_residual(const FactorPath& path) {
  const double mult = path.recursion_multiplier();
  double prev = path.initial;
  double worst = 0.0;
  for (int k = 0; k < path.tau; ++k) {
    prev = mult * prev + path.innovations[k];
    worst = std::max(worst, std::abs(prev - path.values[k]));
    prev = path.values[k];
  }
  return worst;
}

}  // namespace xsts
