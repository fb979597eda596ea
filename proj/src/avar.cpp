#include "xsts/avar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xsts/errors.hpp"

namespace xsts {

namespace {

void require_psd(const Eigen::MatrixXd& m, const char* name) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double floor = -1e-10 * std::max(1.0, m.trace());
  if (es.eigenvalues().minCoeff() < floor) {
    throw domain_error(std::string(name) + ": not positive semidefinite");
  }
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

Eigen::MatrixXd ABlocks::assemble() const {
  const Eigen::Index kt = A_y_theta.rows();
  const Eigen::Index kr = A_nu_rho.rows();
  Eigen::MatrixXd full(kt + kr, kt + kr);
  const double sk = std::sqrt(kappa);
  full.topLeftCorner(kt, kt) = A_y_theta;
  full.topRightCorner(kt, kr) = sk * A_y_rho;
  full.bottomLeftCorner(kr, kt) = A_nu_theta / sk;
  full.bottomRightCorner(kr, kr) = A_nu_rho;
  return full;
}

ABlocks hessian_blocks(const PanelData& panel, const FactorPath& factors,
                       const ParamVector& phi_hat, const ModelSpec& spec) {
  ABlocks blocks;
  blocks.A_y_theta = cs_jacobian_tt(panel, phi_hat, spec);
  blocks.A_y_rho = cs_jacobian_tr(panel, phi_hat, spec);
  blocks.A_nu_theta =
      Eigen::MatrixXd::Zero(1, phi_hat.k_theta());  // G is free of theta
  blocks.A_nu_rho =
      Eigen::MatrixXd::Constant(1, 1, ts_jacobian_rr(factors, phi_hat, spec));
  blocks.kappa = static_cast<double>(panel.n) / factors.tau;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(blocks.A_y_theta);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  blocks.condition_number_y_theta =
      smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (smin <= 0.0 || blocks.condition_number_y_theta > 1e14) {
    throw singularity_error("hessian_blocks: A_y_theta singular",
                            blocks.condition_number_y_theta);
  }
  return blocks;
}

OmegaEstimates omega_estimates(const ScoreBundle& bundle,
                               const ModelSpec& spec, const ABlocks& blocks) {
  OmegaEstimates om;
  if (bundle.n <= 0) {
    throw dimension_error("omega_estimates: bundle lacks cross-section size");
  }
  (void)spec;  // the Moment stack already carries the sandwich weights
  const Eigen::Index tau = bundle.ts_scores.size();
  const double n = static_cast<double>(bundle.n);
  // Omega_y = sum_t n^-1 sum_i f f', i.e. the full stacked outer product
  // divided by n.
  om.omega_y = symmetrize(bundle.cs_scores.transpose() * bundle.cs_scores / n);
  om.omega_nu1 = Eigen::MatrixXd::Constant(
      1, 1, bundle.ts_scores.squaredNorm() / static_cast<double>(tau));
  if (bundle.cs_moments.has_value()) {
    om.omega_f =
        symmetrize(bundle.cs_moments->transpose() * *bundle.cs_moments / n);
  }
  if (bundle.ts_moments.has_value()) {
    om.omega_g1 = Eigen::MatrixXd::Constant(
        1, 1,
        bundle.ts_moments->squaredNorm() / static_cast<double>(tau));
  }
  require_psd(om.omega_y, "omega_y");
  require_psd(om.omega_nu1, "omega_nu1");
  om.omega_theta = asymptotic_variance_theta(partitioned_inverse(blocks), om,
                                             blocks.kappa);
  return om;
}

InverseBlocks partitioned_inverse(const ABlocks& blocks) {
  const Eigen::MatrixXd& a = blocks.A_y_theta;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_a(a);
  if (!lu_a.isInvertible()) {
    throw singularity_error("partitioned_inverse: A_y_theta singular");
  }
  const Eigen::MatrixXd a_inv = lu_a.inverse();
  const Eigen::MatrixXd schur =
      blocks.A_nu_rho - blocks.A_nu_theta * a_inv * blocks.A_y_rho;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_s(schur);
  if (!lu_s.isInvertible()) {
    throw singularity_error("partitioned_inverse: Schur complement singular");
  }
  const Eigen::MatrixXd s_inv = lu_s.inverse();
  InverseBlocks inv;
  inv.A_yt = a_inv + a_inv * blocks.A_y_rho * s_inv * blocks.A_nu_theta * a_inv;
  inv.A_yr = -a_inv * blocks.A_y_rho * s_inv;
  inv.A_nt = -s_inv * blocks.A_nu_theta * a_inv;
  inv.A_nr = s_inv;
  return inv;
}

Eigen::MatrixXd asymptotic_variance_theta(const InverseBlocks& inv,
                                          const OmegaEstimates& omegas,
                                          double kappa) {
  if (inv.A_yt.cols() != omegas.omega_y.rows() ||
      inv.A_yr.cols() != omegas.omega_nu1.rows()) {
    throw dimension_error("asymptotic_variance_theta: nonconformable inputs");
  }
  Eigen::MatrixXd omega_theta =
      inv.A_yt * omegas.omega_y * inv.A_yt.transpose() +
      kappa * inv.A_yr * omegas.omega_nu1 * inv.A_yr.transpose();
  omega_theta = symmetrize(omega_theta);
  require_psd(omega_theta, "omega_theta");
  return omega_theta;
}

TwoStepSe twostep_se(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& omega_y,
                     const Eigen::MatrixXd& omega_nu, double n, double tau) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) {
    throw singularity_error("twostep_se: A singular");
  }
  const Eigen::MatrixXd a_inv = lu.inverse();
  Eigen::MatrixXd cov =
      a_inv * omega_y * a_inv.transpose() / n +
      a_inv * B * omega_nu * B.transpose() * a_inv.transpose() / tau;
  cov = symmetrize(cov);
  require_psd(cov, "twostep covariance");
  TwoStepSe out;
  out.covariance = cov;
  out.standard_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

Eigen::MatrixXd inverse_sqrt_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m));
  Eigen::VectorXd ev = es.eigenvalues();
  const double floor = 1e-12 * std::max(ev.maxCoeff(), 0.0);
  if (ev.minCoeff() < -1e-10 * std::max(1.0, m.trace())) {
    throw domain_error("inverse_sqrt_psd: matrix not psd");
  }
  if (floor <= 0.0) {
    throw singularity_error("inverse_sqrt_psd: zero matrix");
  }
  Eigen::VectorXd inv_sqrt(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(std::max(ev[i], floor));
  }
  return es.eigenvectors() * inv_sqrt.asDiagonal() *
         es.eigenvectors().transpose();
}

Eigen::VectorXd pivotal_stat(const Eigen::VectorXd& theta_hat,
                             const Eigen::VectorXd& theta0,
                             const Eigen::MatrixXd& omega_theta, double n) {
  if (theta_hat.size() != theta0.size() ||
      omega_theta.rows() != theta_hat.size()) {
    throw dimension_error("pivotal_stat: nonconformable inputs");
  }
  return std::sqrt(n) * inverse_sqrt_psd(omega_theta) * (theta_hat - theta0);
}

Eigen::VectorXd pivotal_stat(const Eigen::VectorXd& theta_hat,
                             const Eigen::MatrixXd& R, const Eigen::VectorXd& r,
                             const Eigen::MatrixXd& omega_theta, double n) {
  if (R.cols() != theta_hat.size() || R.rows() != r.size()) {
    throw dimension_error("pivotal_stat: R/r nonconformable");
  }
  const Eigen::MatrixXd omega_r = R * omega_theta * R.transpose();
  return std::sqrt(n) * inverse_sqrt_psd(omega_r) * (R * theta_hat - r);
}

}  // namespace xsts
