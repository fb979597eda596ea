#include "xsts/cross_section.hpp"

#include <cmath>

#include "xsts/errors.hpp"
#include "xsts/rng.hpp"

namespace xsts {

LoadingFn default_loading() {
  return {
      [](double rho) {
        if (rho == 1.0) {
          throw domain_error("default_loading: pole at rho = 1");
        }
        return 1.0 / (1.0 - rho);
      },
      [](double rho) {
        if (rho == 1.0) {
          throw domain_error("default_loading: pole at rho = 1");
        }
        return 1.0 / ((1.0 - rho) * (1.0 - rho));
      },
      "1/(1-rho)"};
}

LoadingFn linear_loading() {
  return {[](double rho) { return rho; }, [](double) { return 1.0; }, "rho"};
}

LoadingFn constant_loading(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }, "const"};
}

void ModelSpec::validate() const {
  if (sigma_eps < 0.0) throw config_error("ModelSpec: sigma_eps must be >= 0");
  if (sigma_eta <= 0.0) throw config_error("ModelSpec: sigma_eta must be > 0");
  if (!loading.lambda || !loading.dlambda) {
    throw config_error("ModelSpec: loading functions not set");
  }
  if (criterion == CriterionKind::Moment) {
    auto check_weight = [](const Eigen::MatrixXd& w, const char* which) {
      if (w.size() == 0) return;  // identity
      if (w.rows() != w.cols()) throw config_error("ModelSpec: weight matrix not square");
      if (!w.isApprox(w.transpose(), 1e-12)) {
        throw config_error(std::string("ModelSpec: ") + which +
                           " weight matrix not symmetric");
      }
      Eigen::LLT<Eigen::MatrixXd> llt(w);
      if (llt.info() != Eigen::Success) {
        throw config_error(std::string("ModelSpec: ") + which +
                           " weight matrix not positive definite");
      }
    };
    check_weight(weight_cs, "cross-section");
    check_weight(weight_ts, "time-series");
  }
}

namespace {

PanelData fill_panel(const ModelSpec& spec, double beta,
                     const Eigen::VectorXd& factor_levels, int n, int T,
                     long panel_start, std::uint64_t seed) {
  if (n < 2) throw domain_error("simulate_panel: n must be >= 2");
  if (T < 1) throw domain_error("simulate_panel: T must be >= 1");
  PanelData panel;
  panel.n = n;
  panel.T = T;
  panel.panel_start = panel_start;
  panel.y.resize(n, T);
  panel.x.resize(n, T);
  panel.eps.resize(n, T);
  auto gen = derive_stream(seed, 0);
  std::normal_distribution<double> x_dist(1.0, 1.0);
  std::normal_distribution<double> e_dist(0.0, 1.0);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      const double x = x_dist(gen);
      const double e = spec.sigma_eps * e_dist(gen);
      panel.x(i, t) = x;
      panel.eps(i, t) = e;
      panel.y(i, t) = beta * x + factor_levels[t] + e;
    }
  }
  return panel;
}

}  // namespace

Eigen::VectorXd panel_factor_window(const FactorPath& factors,
                                    long panel_start, int T) {
  if (panel_start < factors.tau0 + 1 ||
      panel_start + T - 1 > factors.tau0 + factors.tau) {
    throw config_error(
        "panel_factor_window: factor window does not cover the panel");
  }
  Eigen::VectorXd nu(T);
  for (int t = 0; t < T; ++t) nu[t] = factors.at_time(panel_start + t);
  return nu;
}

PanelData simulate_panel(const ModelSpec& spec, double beta,
                         const FactorPath& factors, double rho, int n, int T,
                         std::uint64_t seed) {
  spec.validate();
  const Eigen::VectorXd nu = panel_factor_window(factors, 1, T);
  const double lam = spec.loading(rho);
  return fill_panel(spec, beta, lam * nu, n, T, 1, seed);
}

PanelData simulate_panel_unitroot(const ModelSpec& spec, double beta,
                                  double nu0, double rho, int n, int T,
                                  std::uint64_t seed) {
  spec.validate();
  const double level = spec.loading(rho) * nu0;
  return fill_panel(spec, beta, Eigen::VectorXd::Constant(T, level), n, T, 1,
                    seed);
}

}  // namespace xsts
