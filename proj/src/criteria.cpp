#include "xsts/criteria.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "xsts/errors.hpp"

namespace xsts {

Eigen::VectorXd ParamVector::theta() const {
  Eigen::VectorXd th(k_theta());
  th.head(beta.size()) = beta;
  th.tail(nu.size()) = nu;
  return th;
}

ParamVector ParamVector::from_theta(const Eigen::VectorXd& theta,
                                    Eigen::Index k_beta, double rho) {
  if (theta.size() <= k_beta) {
    throw dimension_error("ParamVector::from_theta: theta too short");
  }
  ParamVector phi;
  phi.beta = theta.head(k_beta);
  phi.nu = theta.tail(theta.size() - k_beta);
  phi.rho = rho;
  return phi;
}

ParamVector ParamVector::scalar(double beta, Eigen::VectorXd nu, double rho) {
  ParamVector phi;
  phi.beta = Eigen::VectorXd::Constant(1, beta);
  phi.nu = std::move(nu);
  phi.rho = rho;
  return phi;
}

namespace {

void check_dims(const PanelData& panel, const ParamVector& phi,
                const ModelSpec& spec) {
  if (phi.beta.size() != 1) {
    throw dimension_error("reference models use a scalar beta");
  }
  const Eigen::Index want_nu =
      spec.kind == ModelKind::StationaryRef ? panel.T : 1;
  if (phi.nu.size() != want_nu) {
    throw dimension_error("nu dimension does not match the model");
  }
  if (spec.sigma_eps <= 0.0) {
    throw config_error("criterion evaluation requires sigma_eps > 0");
  }
}

// Mean-gradient d_it = d mu_it / d theta and residual for one cell.
struct Cell {
  double eps;
  double x;
  int nu_index;  // position of the period effect inside theta
};

inline double cell_eps(const PanelData& panel, const ParamVector& phi,
                       double lam, int i, int t, int nu_index) {
  return panel.y(i, t) - phi.beta[0] * panel.x(i, t) - lam * phi.nu[nu_index];
}

inline int nu_index_of(const ModelSpec& spec, int t) {
  return spec.kind == ModelKind::StationaryRef ? t : 0;
}

Eigen::MatrixXd weight_or_identity(const Eigen::MatrixXd& w,
                                   Eigen::Index dim) {
  if (w.size() == 0) return Eigen::MatrixXd::Identity(dim, dim);
  if (w.rows() != dim) throw dimension_error("weight matrix dimension");
  return w;
}

// Per-observation ML scores f_theta,it stacked as rows (i + t*n).
Eigen::MatrixXd ml_cs_scores(const PanelData& panel, const ParamVector& phi,
                             const ModelSpec& spec) {
  const double lam = spec.loading(phi.rho);
  const double inv_s2 = 1.0 / (spec.sigma_eps * spec.sigma_eps);
  const Eigen::Index k = phi.k_theta();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(panel.n) * panel.T, k);
  for (int t = 0; t < panel.T; ++t) {
    const int j = nu_index_of(spec, t);
    for (int i = 0; i < panel.n; ++i) {
      const double e = cell_eps(panel, phi, lam, i, t, j);
      const Eigen::Index row = i + static_cast<Eigen::Index>(t) * panel.n;
      out(row, 0) = panel.x(i, t) * e * inv_s2;
      out(row, 1 + j) = lam * e * inv_s2;
    }
  }
  return out;
}

Eigen::VectorXd ml_ts_scores(const FactorPath& factors,
                             const ParamVector& phi, const ModelSpec& spec) {
  const double inv_s2 = 1.0 / (spec.sigma_eta * spec.sigma_eta);
  Eigen::VectorXd out(factors.tau);
  double prev = factors.initial;
  for (int t = 0; t < factors.tau; ++t) {
    const double u = factors.values[t] - phi.rho * prev;
    out[t] = prev * u * inv_s2;
    prev = factors.values[t];
  }
  return out;
}

// J = dh/dtheta of the per-unit ML score mean; constant in theta.
Eigen::MatrixXd ml_cs_jacobian(const PanelData& panel, const ParamVector& phi,
                               const ModelSpec& spec) {
  const double lam = spec.loading(phi.rho);
  const double inv_s2 = 1.0 / (spec.sigma_eps * spec.sigma_eps);
  const Eigen::Index k = phi.k_theta();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, k);
  for (int t = 0; t < panel.T; ++t) {
    const int j = nu_index_of(spec, t);
    double sxx = 0.0, sx = 0.0;
    for (int i = 0; i < panel.n; ++i) {
      sxx += panel.x(i, t) * panel.x(i, t);
      sx += panel.x(i, t);
    }
    acc(0, 0) -= sxx * inv_s2;
    acc(0, 1 + j) -= lam * sx * inv_s2;
    acc(1 + j, 0) -= lam * sx * inv_s2;
    acc(1 + j, 1 + j) -= lam * lam * panel.n * inv_s2;
  }
  return acc / panel.n;
}

// dk/drho of the time-series ML score mean; constant in rho.
double ml_ts_jacobian(const FactorPath& factors, const ModelSpec& spec) {
  const double inv_s2 = 1.0 / (spec.sigma_eta * spec.sigma_eta);
  double acc = 0.0;
  double prev = factors.initial;
  for (int t = 0; t < factors.tau; ++t) {
    acc -= prev * prev * inv_s2;
    prev = factors.values[t];
  }
  return acc / factors.tau;
}

}  // namespace

double criterion_F(const PanelData& panel, const ParamVector& phi,
                   const ModelSpec& spec) {
  check_dims(panel, phi, spec);
  const double lam = spec.loading(phi.rho);
  const double s2 = spec.sigma_eps * spec.sigma_eps;
  if (spec.criterion == CriterionKind::Likelihood) {
    const double c = -0.5 * std::log(2.0 * M_PI * s2);
    double acc = 0.0;
    for (int t = 0; t < panel.T; ++t) {
      const int j = nu_index_of(spec, t);
      for (int i = 0; i < panel.n; ++i) {
        const double e = cell_eps(panel, phi, lam, i, t, j);
        acc += c - 0.5 * e * e / s2;
      }
    }
    return acc / panel.n;
  }
  // Moment criterion: h_n is the sample mean of the per-observation moment
  // functions (the ML scores in the exactly identified reference model).
  const Eigen::MatrixXd m = ml_cs_scores(panel, phi, spec);
  const Eigen::VectorXd h = m.colwise().mean() * panel.T;
  const Eigen::MatrixXd w = weight_or_identity(spec.weight_cs, h.size());
  return -h.dot(w * h);
}

double criterion_G(const FactorPath& factors, const ParamVector& phi,
                   const ModelSpec& spec) {
  const double s2 = spec.sigma_eta * spec.sigma_eta;
  if (spec.criterion == CriterionKind::Likelihood) {
    const double c = -0.5 * std::log(2.0 * M_PI * s2);
    double acc = 0.0;
    double prev = factors.initial;
    for (int t = 0; t < factors.tau; ++t) {
      const double u = factors.values[t] - phi.rho * prev;
      acc += c - 0.5 * u * u / s2;
      prev = factors.values[t];
    }
    return acc / factors.tau;
  }
  const Eigen::VectorXd g = ml_ts_scores(factors, phi, spec);
  const double k = g.mean();
  const Eigen::MatrixXd w = weight_or_identity(spec.weight_ts, 1);
  return -k * w(0, 0) * k;
}

ScoreBundle scores(const PanelData& panel, const FactorPath& factors,
                   const ParamVector& phi, const ModelSpec& spec) {
  check_dims(panel, phi, spec);
  ScoreBundle bundle;
  bundle.n = panel.n;
  const Eigen::MatrixXd m = ml_cs_scores(panel, phi, spec);
  const Eigen::VectorXd g = ml_ts_scores(factors, phi, spec);
  if (spec.criterion == CriterionKind::Likelihood) {
    bundle.cs_scores = m;
    bundle.ts_scores = g;
    return bundle;
  }
  // Moment case: the estimating-equation contribution of observation it is
  // -2 (dh/dtheta)' W m_it, matching the gradient of -h'Wh.
  const Eigen::MatrixXd dh = ml_cs_jacobian(panel, phi, spec);
  const Eigen::MatrixXd w_cs = weight_or_identity(spec.weight_cs, dh.rows());
  bundle.cs_scores = -2.0 * (m * (w_cs * dh).transpose());
  bundle.cs_moments = m;
  const double dk = ml_ts_jacobian(factors, spec);
  const Eigen::MatrixXd w_ts = weight_or_identity(spec.weight_ts, 1);
  bundle.ts_scores = -2.0 * dk * w_ts(0, 0) * g;
  bundle.ts_moments = g;
  return bundle;
}

Eigen::VectorXd cs_score_mean(const PanelData& panel, const ParamVector& phi,
                              const ModelSpec& spec) {
  check_dims(panel, phi, spec);
  const Eigen::MatrixXd m = ml_cs_scores(panel, phi, spec);
  const Eigen::VectorXd h = m.colwise().sum() / panel.n;
  if (spec.criterion == CriterionKind::Likelihood) return h;
  const Eigen::MatrixXd dh = ml_cs_jacobian(panel, phi, spec);
  const Eigen::MatrixXd w = weight_or_identity(spec.weight_cs, h.size());
  return -2.0 * dh.transpose() * (w * h);
}

Eigen::MatrixXd cs_jacobian_tt(const PanelData& panel, const ParamVector& phi,
                               const ModelSpec& spec) {
  check_dims(panel, phi, spec);
  const Eigen::MatrixXd acc = ml_cs_jacobian(panel, phi, spec);
  if (spec.criterion == CriterionKind::Likelihood) return acc;
  // d/dtheta of -2 dh'W h; dh is constant in theta, so the Hessian is exact.
  const Eigen::MatrixXd w = weight_or_identity(spec.weight_cs, acc.rows());
  return -2.0 * acc.transpose() * w * acc;
}

namespace {

// ML building blocks shared by the Likelihood and Moment cross terms:
// h = n^-1 sum f_theta,it, J = dh/dtheta, dh_drho = dh/drho, dJ_drho.
struct MlCrossParts {
  Eigen::VectorXd h;
  Eigen::MatrixXd J;
  Eigen::VectorXd dh_drho;
  Eigen::MatrixXd dJ_drho;
};

MlCrossParts ml_cross_parts(const PanelData& panel, const ParamVector& phi,
                            const ModelSpec& spec) {
  const double lam = spec.loading(phi.rho);
  const double dlam = spec.loading.deriv(phi.rho);
  const double inv_s2 = 1.0 / (spec.sigma_eps * spec.sigma_eps);
  const Eigen::Index k = phi.k_theta();
  MlCrossParts p;
  p.h = Eigen::VectorXd::Zero(k);
  p.J = Eigen::MatrixXd::Zero(k, k);
  p.dh_drho = Eigen::VectorXd::Zero(k);
  p.dJ_drho = Eigen::MatrixXd::Zero(k, k);
  for (int t = 0; t < panel.T; ++t) {
    const int j = nu_index_of(spec, t);
    const double nu_t = phi.nu[j];
    double se = 0.0, sx = 0.0, sxx = 0.0, sxe = 0.0;
    for (int i = 0; i < panel.n; ++i) {
      const double e = cell_eps(panel, phi, lam, i, t, j);
      se += e;
      sx += panel.x(i, t);
      sxx += panel.x(i, t) * panel.x(i, t);
      sxe += panel.x(i, t) * e;
    }
    p.h[0] += sxe * inv_s2;
    p.h[1 + j] += lam * se * inv_s2;
    p.J(0, 0) -= sxx * inv_s2;
    p.J(0, 1 + j) -= lam * sx * inv_s2;
    p.J(1 + j, 0) -= lam * sx * inv_s2;
    p.J(1 + j, 1 + j) -= lam * lam * panel.n * inv_s2;
    // d f_theta / d rho = [(0, dlam e_t) eps - d dlam nu_t] / sigma^2
    p.dh_drho[0] -= dlam * nu_t * sx * inv_s2;
    p.dh_drho[1 + j] += (dlam * se - lam * dlam * nu_t * panel.n) * inv_s2;
    p.dJ_drho(0, 1 + j) -= dlam * sx * inv_s2;
    p.dJ_drho(1 + j, 0) -= dlam * sx * inv_s2;
    p.dJ_drho(1 + j, 1 + j) -= 2.0 * lam * dlam * panel.n * inv_s2;
  }
  p.h /= panel.n;
  p.J /= panel.n;
  p.dh_drho /= panel.n;
  p.dJ_drho /= panel.n;
  return p;
}

}  // namespace

Eigen::VectorXd cs_jacobian_tr(const PanelData& panel, const ParamVector& phi,
                               const ModelSpec& spec) {
  check_dims(panel, phi, spec);
  const MlCrossParts p = ml_cross_parts(panel, phi, spec);
  if (spec.criterion == CriterionKind::Likelihood) return p.dh_drho;
  const Eigen::MatrixXd w = weight_or_identity(spec.weight_cs, p.h.size());
  // d/drho of -2 J'W h by the product rule.
  return -2.0 * (p.dJ_drho.transpose() * (w * p.h) +
                 p.J.transpose() * (w * p.dh_drho));
}

double ts_score_mean(const FactorPath& factors, const ParamVector& phi,
                     const ModelSpec& spec) {
  const Eigen::VectorXd g = ml_ts_scores(factors, phi, spec);
  if (spec.criterion == CriterionKind::Likelihood) return g.mean();
  const double dk = ml_ts_jacobian(factors, spec);
  const Eigen::MatrixXd w = weight_or_identity(spec.weight_ts, 1);
  return -2.0 * dk * w(0, 0) * g.mean();
}

double ts_jacobian_rr(const FactorPath& factors, const ParamVector& phi,
                      const ModelSpec& spec) {
  (void)phi;  // the ts score is linear in rho
  const double acc = ml_ts_jacobian(factors, spec);
  if (spec.criterion == CriterionKind::Likelihood) return acc;
  const Eigen::MatrixXd w = weight_or_identity(spec.weight_ts, 1);
  return -2.0 * acc * w(0, 0) * acc;
}

ParamVector profiled_theta(const PanelData& panel, double rho,
                           const ModelSpec& spec) {
  const double lam = spec.loading(rho);
  if (lam == 0.0) {
    throw singularity_error("profiled_theta: loading evaluates to zero");
  }
  double sxy = 0.0, sxx = 0.0;
  std::vector<double> mx, my;
  if (spec.kind == ModelKind::StationaryRef) {
    mx.resize(panel.T);
    my.resize(panel.T);
    for (int t = 0; t < panel.T; ++t) {
      mx[t] = panel.x.col(t).mean();
      my[t] = panel.y.col(t).mean();
      for (int i = 0; i < panel.n; ++i) {
        sxy += (panel.x(i, t) - mx[t]) * (panel.y(i, t) - my[t]);
        sxx += (panel.x(i, t) - mx[t]) * (panel.x(i, t) - mx[t]);
      }
    }
  } else {
    const double mxa = panel.x.mean();
    const double mya = panel.y.mean();
    mx.assign(1, mxa);
    my.assign(1, mya);
    for (int t = 0; t < panel.T; ++t) {
      for (int i = 0; i < panel.n; ++i) {
        sxy += (panel.x(i, t) - mxa) * (panel.y(i, t) - mya);
        sxx += (panel.x(i, t) - mxa) * (panel.x(i, t) - mxa);
      }
    }
  }
  if (sxx <= 0.0) {
    throw singularity_error("profiled_theta: degenerate regressor");
  }
  const double beta = sxy / sxx;
  Eigen::VectorXd nu(static_cast<Eigen::Index>(mx.size()));
  for (std::size_t t = 0; t < mx.size(); ++t) {
    nu[static_cast<Eigen::Index>(t)] = (my[t] - beta * mx[t]) / lam;
  }
  return ParamVector::scalar(beta, nu, rho);
}

IdentificationReport identification_diagnostic(
    const PanelData& panel, const FactorPath& factors, const ModelSpec& spec,
    const ParamVector& truth, const std::vector<double>& rho_grid) {
  if (rho_grid.empty()) {
    throw config_error("identification_diagnostic: empty rho grid");
  }
  IdentificationReport report;
  report.rho_grid = rho_grid;

  ParamVector at_truth_rho = profiled_theta(panel, truth.rho, spec);
  const double f0 = criterion_F(panel, at_truth_rho, spec);
  const Eigen::VectorXd theta0 = truth.theta();
  const double baseline = (at_truth_rho.theta() - theta0).norm();

  double gap = 0.0;
  double min_dist = std::numeric_limits<double>::infinity();
  double grid_step = rho_grid.size() > 1
                         ? std::abs(rho_grid[1] - rho_grid[0])
                         : 0.0;
  for (double rho : rho_grid) {
    bool ok = true;
    ParamVector th;
    double fv = 0.0;
    try {
      th = profiled_theta(panel, rho, spec);
      fv = criterion_F(panel, th, spec);
    } catch (const std::exception&) {
      ok = false;
    }
    report.converged.push_back(ok);
    report.theta_path.push_back(ok ? th.theta() : Eigen::VectorXd());
    report.profile_values.push_back(ok ? fv : std::nan(""));
    if (!ok) continue;
    gap = std::max(gap, std::abs(fv - f0));
    if (std::abs(rho - truth.rho) > 0.5 * grid_step) {
      min_dist = std::min(min_dist, (th.theta() - theta0).norm());
    }
  }
  report.profile_gap = gap;
  report.min_theta_distance = std::isfinite(min_dist) ? min_dist : 0.0;
  report.f_profile_flat = gap < 1e-8 * std::max(1.0, std::abs(f0));
  report.theta_path_moves =
      report.min_theta_distance > std::max(1e-3, 2.0 * baseline);

  // Flatness of max_rho G(beta, rho) in beta: evaluated on a small beta grid.
  double g_ref = -std::numeric_limits<double>::infinity();
  double flat = 0.0;
  for (int bi = 0; bi < 3; ++bi) {
    const double beta = truth.beta[0] + (bi - 1) * 0.5;
    double best = -std::numeric_limits<double>::infinity();
    for (double rho : rho_grid) {
      ParamVector phi = truth;
      phi.beta[0] = beta;
      phi.rho = rho;
      best = std::max(best, criterion_G(factors, phi, spec));
    }
    if (bi == 0) {
      g_ref = best;
    } else {
      flat = std::max(flat, std::abs(best - g_ref));
    }
  }
  report.g_beta_flatness = flat;
  report.g_flat_in_beta = flat < 1e-8 * std::max(1.0, std::abs(g_ref));
  return report;
}

}  // namespace xsts
