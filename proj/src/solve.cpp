#include "xsts/solve.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "xsts/errors.hpp"

namespace xsts {

TimeSeriesEstimate estimate_timeseries(const FactorPath& factors,
                                       const ModelSpec& spec) {
  (void)spec;
  if (factors.regime != Regime::Stationary) {
    throw regime_error("estimate_timeseries: requires a stationary path");
  }
  double sxy = 0.0, sxx = 0.0;
  double prev = factors.initial;
  for (int t = 0; t < factors.tau; ++t) {
    sxy += prev * factors.values[t];
    sxx += prev * prev;
    prev = factors.values[t];
  }
  if (sxx <= 0.0) {
    throw singularity_error("estimate_timeseries: degenerate path");
  }
  TimeSeriesEstimate est;
  est.rho_tilde = sxy / sxx;
  const double denom = sxx / factors.tau;
  est.influence.resize(factors.tau);
  double ssq = 0.0;
  prev = factors.initial;
  for (int t = 0; t < factors.tau; ++t) {
    const double u = factors.values[t] - est.rho_tilde * prev;
    est.influence[t] = prev * u / denom;
    ssq += u * u;
    prev = factors.values[t];
  }
  est.sigma_eta_hat = std::sqrt(ssq / factors.tau);
  return est;
}

namespace {

void check_invertible(const Eigen::MatrixXd& m, const char* where) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > 1e14) {
    throw singularity_error(std::string(where) + ": singular Jacobian",
                            smin > 0.0 ? smax / smin
                                       : std::numeric_limits<double>::infinity());
  }
}

}  // namespace

EstimateResult estimate_twostep(const PanelData& panel, double rho_tilde,
                                const ModelSpec& spec, const ParamVector& init,
                                double tol, int max_iter) {
  ParamVector phi = init;
  phi.rho = rho_tilde;
  EstimateResult result;
  result.scaling = Eigen::VectorXd::Constant(
      phi.k_theta(), 1.0 / std::sqrt(static_cast<double>(panel.n)));
  double f_cur = criterion_F(panel, phi, spec);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd s = cs_score_mean(panel, phi, spec);
    result.final_score_norm = s.norm();
    result.iterations = it;
    if (result.final_score_norm < tol) {
      result.converged = true;
      break;
    }
    const Eigen::MatrixXd j = cs_jacobian_tt(panel, phi, spec);
    check_invertible(j, "estimate_twostep");
    Eigen::VectorXd step = -j.ldlt().solve(s);
    // Step halving: accept the first candidate that does not decrease F.
    double scale = 1.0;
    ParamVector cand = phi;
    for (int h = 0; h < 40; ++h) {
      const Eigen::VectorXd th = phi.theta() + scale * step;
      cand = ParamVector::from_theta(th, phi.beta.size(), phi.rho);
      const double f_new = criterion_F(panel, cand, spec);
      if (f_new >= f_cur - 1e-14 * std::abs(f_cur)) {
        f_cur = f_new;
        break;
      }
      scale *= 0.5;
    }
    phi = cand;
  }
  if (!result.converged) {
    const Eigen::VectorXd s = cs_score_mean(panel, phi, spec);
    result.final_score_norm = s.norm();
    result.converged = result.final_score_norm < tol;
    result.iterations = max_iter;
  }
  result.phi_hat = phi;
  return result;
}

EstimateResult estimate_joint(const PanelData& panel,
                              const FactorPath& factors, const ModelSpec& spec,
                              const ParamVector& init, double tol,
                              int max_iter) {
  if (factors.regime != Regime::Stationary) {
    throw regime_error("estimate_joint: requires a stationary path");
  }
  ParamVector phi = init;
  const Eigen::Index k_theta = phi.k_theta();
  const Eigen::Index k_phi = k_theta + 1;
  EstimateResult result;
  result.scaling.resize(k_phi);
  result.scaling.head(k_theta).setConstant(
      1.0 / std::sqrt(static_cast<double>(panel.n)));
  result.scaling[k_theta] = 1.0 / std::sqrt(static_cast<double>(factors.tau));

  auto stacked_score = [&](const ParamVector& p) {
    Eigen::VectorXd s(k_phi);
    s.head(k_theta) = cs_score_mean(panel, p, spec);
    s[k_theta] = ts_score_mean(factors, p, spec);
    return s;
  };

  Eigen::VectorXd s = stacked_score(phi);
  for (int it = 0; it < max_iter; ++it) {
    result.final_score_norm = s.norm();
    result.iterations = it;
    if (result.final_score_norm < tol) {
      result.converged = true;
      break;
    }
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(k_phi, k_phi);
    j.topLeftCorner(k_theta, k_theta) = cs_jacobian_tt(panel, phi, spec);
    j.topRightCorner(k_theta, 1) = cs_jacobian_tr(panel, phi, spec);
    // dG/drho does not depend on theta in the reference models.
    j(k_theta, k_theta) = ts_jacobian_rr(factors, phi, spec);
    // Precondition with D_{n tau}: solve (J D) z = -s, step = D z.
    const Eigen::MatrixXd jd = j * result.scaling.asDiagonal();
    check_invertible(jd, "estimate_joint");
    const Eigen::VectorXd z = jd.fullPivLu().solve(-s);
    const Eigen::VectorXd step = result.scaling.asDiagonal() * z;
    double scale = 1.0;
    ParamVector cand = phi;
    Eigen::VectorXd s_new = s;
    for (int h = 0; h < 40; ++h) {
      Eigen::VectorXd th = phi.theta() + scale * step.head(k_theta);
      cand = ParamVector::from_theta(th, phi.beta.size(),
                                     phi.rho + scale * step[k_theta]);
      s_new = stacked_score(cand);
      if (s_new.norm() <= s.norm() * (1.0 - 1e-4 * scale) || s_new.norm() < tol) {
        break;
      }
      scale *= 0.5;
    }
    phi = cand;
    s = s_new;
  }
  if (!result.converged) {
    result.final_score_norm = s.norm();
    result.converged = result.final_score_norm < tol;
    result.iterations = max_iter;
  }
  result.phi_hat = phi;
  return result;
}

double estimate_unit_root_ols(const FactorPath& factors) {
  if (factors.regime != Regime::LocalToUnity) {
    throw regime_error("estimate_unit_root_ols: requires a local-to-unity path");
  }
  double sxy = 0.0, sxx = 0.0;
  double prev = factors.initial;
  for (int t = 0; t < factors.tau; ++t) {
    sxy += prev * factors.values[t];
    sxx += prev * prev;
    prev = factors.values[t];
  }
  if (sxx <= 0.0) {
    throw singularity_error("estimate_unit_root_ols: zero denominator");
  }
  return sxy / sxx;
}

}  // namespace xsts
