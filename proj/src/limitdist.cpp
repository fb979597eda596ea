#include "xsts/limitdist.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "xsts/errors.hpp"
#include "xsts/rng.hpp"

namespace xsts {

namespace {

void check_grid(int grid_m) {
  if (grid_m < 100) {
    throw config_error("functional sampler requires grid_m >= 100");
  }
}

// Runs fn(draw) for draw = 0..n_draws-1, split across threads.  Each draw
// derives its own stream from (seed, draw), so the result is independent of
// the thread schedule.
template <typename Fn>
void for_each_draw(int n_draws, int parallelism, Fn fn) {
  const int workers = std::max(1, std::min(parallelism, n_draws));
  if (workers == 1) {
    for (int d = 0; d < n_draws; ++d) fn(d);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int d = next.fetch_add(1); d < n_draws; d = next.fetch_add(1)) {
        fn(d);
      }
    });
  }
  for (auto& t : pool) t.join();
}

struct OuDraw {
  double v1;
  double int_v2;
  double sigma_int_v_dw;
  double w1;
};

// One path of dV = gamma V dr + sigma dW on m steps: exact exponential
// propagation of the drift, left-endpoint integrals.
OuDraw ou_path(double gamma, double v0, double sigma, int m,
               std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double dt = 1.0 / m;
  const double mult = std::exp(gamma * dt);
  const double sdt = std::sqrt(dt);
  double v = v0, w = 0.0, int_v2 = 0.0, int_vdw = 0.0;
  for (int j = 0; j < m; ++j) {
    const double dw = sdt * gauss(rng);
    int_v2 += v * v * dt;
    int_vdw += v * dw;
    v = mult * v + sigma * dw;
    w += dw;
  }
  return {v, int_v2, sigma * int_vdw, w};
}

}  // namespace

LimitSample sample_ou_functionals(double gamma, double v0, double sigma,
                                  int grid_m, int n_draws, std::uint64_t seed,
                                  int parallelism) {
  check_grid(grid_m);
  if (n_draws < 1) throw config_error("n_draws must be >= 1");
  LimitSample out;
  out.kind = LimitKind::OUFunctionals;
  out.grid_m = grid_m;
  out.meta.gamma = gamma;
  out.meta.v0 = v0;
  out.meta.sigma = sigma;
  out.columns = {"V1", "int_V2", "sigma_int_V_dW", "W1"};
  out.draws.resize(n_draws, 4);
  for_each_draw(n_draws, parallelism, [&](int d) {
    auto rng = derive_stream(seed, static_cast<std::uint64_t>(d));
    const OuDraw p = ou_path(gamma, v0, sigma, grid_m, rng);
    out.draws(d, 0) = p.v1;
    out.draws(d, 1) = p.int_v2;
    out.draws(d, 2) = p.sigma_int_v_dw;
    out.draws(d, 3) = p.w1;
  });
  return out;
}

LimitSample sample_df_ratio(int grid_m, int n_draws, std::uint64_t seed,
                            int parallelism) {
  check_grid(grid_m);
  if (n_draws < 1) throw config_error("n_draws must be >= 1");
  LimitSample out;
  out.kind = LimitKind::DFRatio;
  out.grid_m = grid_m;
  out.columns = {"ratio"};
  out.draws.resize(n_draws, 1);
  for_each_draw(n_draws, parallelism, [&](int d) {
    auto rng = derive_stream(seed, static_cast<std::uint64_t>(d));
    const OuDraw p = ou_path(0.0, 0.0, 1.0, grid_m, rng);
    out.draws(d, 0) = (p.w1 * p.w1 - 1.0) / (2.0 * p.int_v2);
  });
  return out;
}

LimitSample sample_unitroot_theta_limit(const Eigen::MatrixXd& A_y_theta,
                                        const Eigen::MatrixXd& A_y_rho,
                                        const Eigen::MatrixXd& omega_y,
                                        double kappa, double gamma, double v0,
                                        double sigma, int grid_m, int n_draws,
                                        std::uint64_t seed, int parallelism) {
  check_grid(grid_m);
  if (n_draws < 1) throw config_error("n_draws must be >= 1");
  const Eigen::Index k = A_y_theta.rows();
  if (A_y_theta.cols() != k || omega_y.rows() != k || omega_y.cols() != k ||
      A_y_rho.rows() != k || A_y_rho.cols() != 1) {
    throw dimension_error("sample_unitroot_theta_limit: nonconformable");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A_y_theta);
  if (!lu.isInvertible()) {
    throw singularity_error("sample_unitroot_theta_limit: A_y_theta singular");
  }
  const Eigen::MatrixXd a_inv = lu.inverse();
  const Eigen::MatrixXd gauss_load = -a_inv * sqrt_psd(omega_y);
  const Eigen::VectorXd rho_load = -std::sqrt(kappa) * (a_inv * A_y_rho);

  LimitSample out;
  out.kind = LimitKind::UnitRootTheta;
  out.grid_m = grid_m;
  out.meta.gamma = gamma;
  out.meta.v0 = v0;
  out.meta.sigma = sigma;
  out.meta.kappa = kappa;
  out.columns.resize(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    out.columns[static_cast<std::size_t>(j)] =
        "theta_" + std::to_string(j);
  }
  out.draws.resize(n_draws, k);
  for_each_draw(n_draws, parallelism, [&](int d) {
    auto rng = derive_stream(seed, static_cast<std::uint64_t>(d));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(k);
    for (Eigen::Index j = 0; j < k; ++j) z[j] = gauss(rng);
    Eigen::VectorXd row = gauss_load * z;
    if (kappa > 0.0 && rho_load.norm() > 0.0) {
      const OuDraw p = ou_path(gamma, v0, sigma, grid_m, rng);
      if (p.int_v2 > 0.0) {
        row += rho_load * (p.sigma_int_v_dw / p.int_v2);
      }
    }
    out.draws.row(d) = row.transpose();
  });
  return out;
}

LimitSample sample_mixed_normal(
    const Eigen::MatrixXd& A, const Eigen::MatrixXd& omega, int n_draws,
    std::uint64_t seed, const std::optional<CovariancePairSampler>& resampler,
    int parallelism) {
  if (n_draws < 1) throw config_error("n_draws must be >= 1");
  const Eigen::Index k = A.rows();
  if (A.cols() != k || omega.rows() != k || omega.cols() != k) {
    throw dimension_error("sample_mixed_normal: nonconformable");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) {
    throw singularity_error("sample_mixed_normal: A singular");
  }
  const Eigen::MatrixXd fixed_load = -lu.inverse() * sqrt_psd(omega);

  LimitSample out;
  out.kind = LimitKind::MixedNormal;
  out.columns.resize(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    out.columns[static_cast<std::size_t>(j)] = "phi_" + std::to_string(j);
  }
  out.draws.resize(n_draws, k);
  for_each_draw(n_draws, parallelism, [&](int d) {
    auto rng = derive_stream(seed, static_cast<std::uint64_t>(d));
    Eigen::MatrixXd load = fixed_load;
    if (resampler) {
      auto [a_d, om_d] = (*resampler)(rng);
      Eigen::FullPivLU<Eigen::MatrixXd> lu_d(a_d);
      if (!lu_d.isInvertible()) {
        throw singularity_error("sample_mixed_normal: resampled A singular");
      }
      load = -lu_d.inverse() * sqrt_psd(om_d);
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(k);
    for (Eigen::Index j = 0; j < k; ++j) z[j] = gauss(rng);
    out.draws.row(d) = (load * z).transpose();
  });
  return out;
}

Eigen::VectorXd ito_identity_residuals(const LimitSample& sample) {
  if (sample.kind != LimitKind::OUFunctionals || sample.draws.cols() != 4) {
    throw dimension_error("ito_identity_residuals: needs an OU sample");
  }
  const double gamma = sample.meta.gamma;
  const double v0 = sample.meta.v0;
  const double s2 = sample.meta.sigma * sample.meta.sigma;
  Eigen::VectorXd res(sample.draws.rows());
  for (Eigen::Index d = 0; d < sample.draws.rows(); ++d) {
    const double v1 = sample.draws(d, 0);
    res[d] = 0.5 * (v1 * v1 - v0 * v0) - gamma * sample.draws(d, 1) -
             0.5 * s2 - sample.draws(d, 2);
  }
  return res;
}

std::vector<std::pair<double, double>> quantile_table(
    const Eigen::VectorXd& draws, int k) {
  if (draws.size() == 0) throw config_error("quantile_table: empty sample");
  if (k < 1) throw config_error("quantile_table: k must be >= 1");
  std::vector<double> sorted(draws.data(), draws.data() + draws.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> table;
  table.reserve(static_cast<std::size_t>(k));
  const std::size_t n = sorted.size();
  for (int j = 1; j <= k; ++j) {
    const double p = static_cast<double>(j) / (k + 1);
    std::size_t idx = static_cast<std::size_t>(std::ceil(p * n));
    idx = std::min(std::max<std::size_t>(idx, 1), n);
    table.emplace_back(p, sorted[idx - 1]);
  }
  return table;
}

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (m + m.transpose()));
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10 * std::max(1.0, m.trace())) {
    throw domain_error("sqrt_psd: matrix not psd");
  }
  return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace xsts
