#include <doctest.h>

#include <cmath>

#include "xsts/avar.hpp"
#include "xsts/criteria.hpp"
#include "xsts/cross_section.hpp"
#include "xsts/factor_process.hpp"
#include "xsts/solve.hpp"

using namespace xsts;

namespace {

struct Fixture {
  ModelSpec spec;
  FactorPath factors;
  PanelData panel;
  ParamVector truth;

  Fixture(double rho, int n, int tau, int T, std::uint64_t seed) {
    factors = simulate_stationary(rho, 1.0, tau, StartSpec::fixed(0),
                                  StationaryDraw{}, seed);
    panel = simulate_panel(spec, 1.0, factors, rho, n, T, seed + 1);
    truth = ParamVector::scalar(1.0, panel_factor_window(factors, 1, T), rho);
  }
};

ABlocks scalar_blocks(double ayt, double ayr, double ant, double anr,
                      double kappa) {
  ABlocks b;
  b.A_y_theta = Eigen::MatrixXd::Constant(1, 1, ayt);
  b.A_y_rho = Eigen::MatrixXd::Constant(1, 1, ayr);
  b.A_nu_theta = Eigen::MatrixXd::Constant(1, 1, ant);
  b.A_nu_rho = Eigen::MatrixXd::Constant(1, 1, anr);
  b.kappa = kappa;
  return b;
}

}  // namespace

TEST_CASE("hessian blocks match finite differences of the mean scores") {
  Fixture fx(0.4, 30, 40, 2, 51);
  const ABlocks blocks = hessian_blocks(fx.panel, fx.factors, fx.truth, fx.spec);
  const double h = 1e-6;
  const Eigen::Index k = fx.truth.k_theta();

  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::VectorXd tu = fx.truth.theta(), td = fx.truth.theta();
    tu[j] += h;
    td[j] -= h;
    const Eigen::VectorXd col =
        (cs_score_mean(fx.panel, ParamVector::from_theta(tu, 1, fx.truth.rho),
                       fx.spec) -
         cs_score_mean(fx.panel, ParamVector::from_theta(td, 1, fx.truth.rho),
                       fx.spec)) /
        (2.0 * h);
    CHECK((blocks.A_y_theta.col(j) - col).cwiseAbs().maxCoeff() < 1e-5);
  }

  ParamVector ru = fx.truth, rd = fx.truth;
  ru.rho += h;
  rd.rho -= h;
  const Eigen::VectorXd ayr_fd = (cs_score_mean(fx.panel, ru, fx.spec) -
                                  cs_score_mean(fx.panel, rd, fx.spec)) /
                                 (2.0 * h);
  CHECK((blocks.A_y_rho.col(0) - ayr_fd).cwiseAbs().maxCoeff() < 1e-5);

  const double anr_fd = (ts_score_mean(fx.factors, ru, fx.spec) -
                         ts_score_mean(fx.factors, rd, fx.spec)) /
                        (2.0 * h);
  CHECK(blocks.A_nu_rho(0, 0) == doctest::Approx(anr_fd).epsilon(1e-5));

  // the ts criterion never touches theta
  CHECK(blocks.A_nu_theta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(blocks.kappa == doctest::Approx(30.0 / 40.0));
}

TEST_CASE("constant loading kills the cross-derivative block") {
  ModelSpec spec;
  spec.loading = constant_loading(1.0);
  const FactorPath factors = simulate_stationary(
      0.4, 1.0, 40, StartSpec::fixed(0), StationaryDraw{}, 52);
  const PanelData panel = simulate_panel(spec, 1.0, factors, 0.4, 30, 2, 53);
  const ParamVector truth =
      ParamVector::scalar(1.0, panel_factor_window(factors, 1, 2), 0.4);
  const ABlocks blocks = hessian_blocks(panel, factors, truth, spec);
  CHECK(blocks.A_y_rho.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("long-run score variance matches the stationary AR(1) second moment") {
  // Omega_nu(1) estimated from g_rho,t = nu_{t-1} eta_t / sigma^2 has variance
  // E[nu^2] = 1/(1-rho^2) = 4/3 at rho = 0.5.
  Fixture fx(0.5, 5, 40000, 2, 54);
  const ABlocks blocks = hessian_blocks(fx.panel, fx.factors, fx.truth, fx.spec);
  const ScoreBundle sb = scores(fx.panel, fx.factors, fx.truth, fx.spec);
  const OmegaEstimates om = omega_estimates(sb, fx.spec, blocks);
  CHECK(om.omega_nu1(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(0.03));
}

TEST_CASE("zero scores give a zero variance estimate") {
  ModelSpec gen;
  gen.sigma_eps = 0.0;
  ModelSpec spec;
  const FactorPath factors = simulate_stationary(
      0.5, 1.0, 40, StartSpec::fixed(0), StationaryDraw{}, 55);
  const PanelData panel = simulate_panel(gen, 1.0, factors, 0.5, 30, 2, 56);
  const ParamVector truth =
      ParamVector::scalar(1.0, panel_factor_window(factors, 1, 2), 0.5);
  const ABlocks blocks = hessian_blocks(panel, factors, truth, spec);
  const ScoreBundle sb = scores(panel, factors, truth, spec);
  const OmegaEstimates om = omega_estimates(sb, spec, blocks);
  CHECK(om.omega_y.cwiseAbs().maxCoeff() < 1e-18);
}

TEST_CASE("partitioned inverse: scalar case") {
  // [[2, 1], [0, 3]]^-1 = [[0.5, -1/6], [0, 1/3]]
  const ABlocks b = scalar_blocks(2.0, 1.0, 0.0, 3.0, 1.0);
  const InverseBlocks inv = partitioned_inverse(b);
  CHECK(inv.A_yt(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(inv.A_yr(0, 0) == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
  CHECK(inv.A_nt(0, 0) == doctest::Approx(0.0));
  CHECK(inv.A_nr(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("partitioned inverse: block-diagonal case keeps blocks independent") {
  ABlocks b;
  b.A_y_theta = (Eigen::MatrixXd(2, 2) << 4.0, 1.0, 1.0, 3.0).finished();
  b.A_y_rho = Eigen::MatrixXd::Zero(2, 1);
  b.A_nu_theta = Eigen::MatrixXd::Zero(1, 2);
  b.A_nu_rho = Eigen::MatrixXd::Constant(1, 1, 5.0);
  const InverseBlocks inv = partitioned_inverse(b);
  CHECK((inv.A_yt - b.A_y_theta.inverse()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(inv.A_yr.cwiseAbs().maxCoeff() == 0.0);
  CHECK(inv.A_nr(0, 0) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("partitioned inverse reassembles to the identity") {
  Fixture fx(0.5, 40, 60, 3, 57);
  const ABlocks blocks = hessian_blocks(fx.panel, fx.factors, fx.truth, fx.spec);
  const InverseBlocks inv = partitioned_inverse(blocks);
  const Eigen::Index k = blocks.A_y_theta.rows();
  Eigen::MatrixXd full(k + 1, k + 1), ifull(k + 1, k + 1);
  full << blocks.A_y_theta, blocks.A_y_rho, blocks.A_nu_theta, blocks.A_nu_rho;
  ifull << inv.A_yt, inv.A_yr, inv.A_nt, inv.A_nr;
  CHECK((full * ifull - Eigen::MatrixXd::Identity(k + 1, k + 1))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("asymptotic variance: scalar hand case") {
  // A_yt = -2, A_yr = -1, A_nt = 0, A_nr = -1, Omega_y = 4, Omega_nu1 = 4,
  // kappa = 1; A^{yt} = -1/2, A^{yr} = -1/2:
  //   Omega_theta = 0.25*4 + 1*0.25*4 = 2.
  const ABlocks b = scalar_blocks(-2.0, -1.0, 0.0, -1.0, 1.0);
  const InverseBlocks inv = partitioned_inverse(b);
  OmegaEstimates om;
  om.omega_y = Eigen::MatrixXd::Constant(1, 1, 4.0);
  om.omega_nu1 = Eigen::MatrixXd::Constant(1, 1, 4.0);
  const Eigen::MatrixXd ot = asymptotic_variance_theta(inv, om, 1.0);
  CHECK(ot(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  // kappa -> 0 removes the generated-regressor term
  const Eigen::MatrixXd ot0 = asymptotic_variance_theta(inv, om, 0.0);
  CHECK(ot0(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("two-step covariance: scalar hand case and tau scaling") {
  // A = -2, B = -1, Omega_y = 4, Omega_nu = 4, n = 100, tau = 100:
  //   cov = (1/100)(1/4)4 + (1/100)(1/4)*1*4 = 0.02, se = sqrt(0.02).
  const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, -2.0);
  const Eigen::MatrixXd B = Eigen::MatrixXd::Constant(1, 1, -1.0);
  const Eigen::MatrixXd oy = Eigen::MatrixXd::Constant(1, 1, 4.0);
  const Eigen::MatrixXd on = Eigen::MatrixXd::Constant(1, 1, 4.0);
  const TwoStepSe se = twostep_se(A, B, oy, on, 100.0, 100.0);
  CHECK(se.covariance(0, 0) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(se.standard_errors[0] == doctest::Approx(std::sqrt(0.02)).epsilon(1e-14));

  // doubling tau halves only the second term
  const TwoStepSe se2 = twostep_se(A, B, oy, on, 100.0, 200.0);
  CHECK(se2.covariance(0, 0) == doctest::Approx(0.015).epsilon(1e-14));

  // B = 0 removes the first-stage contribution entirely
  const TwoStepSe se3 =
      twostep_se(A, Eigen::MatrixXd::Zero(1, 1), oy, on, 100.0, 100.0);
  CHECK(se3.covariance(0, 0) == doctest::Approx(0.01).epsilon(1e-14));
}

TEST_CASE("two-step covariance equals the theta variance when blocks decouple") {
  // With A_nu_theta = 0, n * twostep covariance == Omega_theta because the
  // generated-regressor influence is -g / A_nu_rho.
  Fixture fx(0.5, 50, 80, 2, 58);
  const ABlocks blocks = hessian_blocks(fx.panel, fx.factors, fx.truth, fx.spec);
  const ScoreBundle sb = scores(fx.panel, fx.factors, fx.truth, fx.spec);
  const OmegaEstimates om = omega_estimates(sb, fx.spec, blocks);
  // influence variance = Omega_nu1 / A_nu_rho^2, so the two assemblies agree
  // identically
  const double anr = blocks.A_nu_rho(0, 0);
  const Eigen::MatrixXd omega_nu_influence = om.omega_nu1 / (anr * anr);
  const TwoStepSe se = twostep_se(blocks.A_y_theta, blocks.A_y_rho, om.omega_y,
                                  omega_nu_influence, 50.0, 80.0);
  const Eigen::MatrixXd direct = om.omega_theta / 50.0;
  CHECK((se.covariance - direct).cwiseAbs().maxCoeff() <
        1e-10 * direct.cwiseAbs().maxCoeff());
}

TEST_CASE("pivotal statistic: scalar hand case and restriction variant") {
  const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, 1.2);
  const Eigen::VectorXd th0 = Eigen::VectorXd::Constant(1, 1.0);
  const Eigen::MatrixXd om = Eigen::MatrixXd::Constant(1, 1, 4.0);
  // sqrt(100) * (0.2) / 2 = 1
  const Eigen::VectorXd z = pivotal_stat(th, th0, om, 100.0);
  CHECK(z[0] == doctest::Approx(1.0).epsilon(1e-12));

  const Eigen::MatrixXd R = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const Eigen::VectorXd r = Eigen::VectorXd::Constant(1, 2.0);
  // R theta - r = 0.4, var = 16, z = 10 * 0.4 / 4 = 1
  const Eigen::VectorXd zr = pivotal_stat(th, R, r, om, 100.0);
  CHECK(zr[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inverse square root of a psd matrix") {
  Eigen::MatrixXd m(2, 2);
  m << 4.0, 0.0, 0.0, 9.0;
  const Eigen::MatrixXd is = inverse_sqrt_psd(m);
  CHECK(is(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(is(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK((is * m * is - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("variance assembly is invariant to rescaling the criterion") {
  // Multiplying both criteria by c rescales A and Omega blocks coherently;
  // Omega_theta is unchanged.  Emulate by scaling the GMM weights.
  Fixture fx(0.5, 40, 60, 2, 59);
  ModelSpec base = fx.spec;
  base.criterion = CriterionKind::Moment;
  ModelSpec scaled = base;
  scaled.weight_cs = 3.0 * Eigen::MatrixXd::Identity(fx.truth.k_theta(),
                                                     fx.truth.k_theta());
  scaled.weight_ts = 3.0 * Eigen::MatrixXd::Identity(1, 1);

  auto omega_for = [&](const ModelSpec& spec) {
    const ABlocks blocks =
        hessian_blocks(fx.panel, fx.factors, fx.truth, spec);
    const ScoreBundle sb = scores(fx.panel, fx.factors, fx.truth, spec);
    return omega_estimates(sb, spec, blocks).omega_theta;
  };
  const Eigen::MatrixXd a = omega_for(base);
  const Eigen::MatrixXd b = omega_for(scaled);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8 * a.cwiseAbs().maxCoeff());
}
