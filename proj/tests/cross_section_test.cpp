#include <doctest.h>

#include <cmath>

#include "xsts/cross_section.hpp"
#include "xsts/errors.hpp"

using namespace xsts;

namespace {

FactorPath constant_factors(double value, int tau) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(tau, value);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(tau);
  return factor_path_from_values(Regime::Stationary, 0.0, 1.0, 0, value, v, e);
}

}  // namespace

TEST_CASE("loading functions: values, derivatives, pole") {
  const LoadingFn def = default_loading();
  CHECK(def(0.0) == doctest::Approx(1.0));
  CHECK(def(0.5) == doctest::Approx(2.0));
  CHECK(def.deriv(0.5) == doctest::Approx(4.0));
  CHECK_THROWS_AS(def(1.0), domain_error);

  const LoadingFn con = constant_loading(3.0);
  CHECK(con(0.9) == doctest::Approx(3.0));
  CHECK(con.deriv(0.9) == 0.0);

  const LoadingFn lin = linear_loading();
  CHECK(lin(0.7) == doctest::Approx(0.7));
  CHECK(lin.deriv(0.7) == doctest::Approx(1.0));
}

TEST_CASE("noiseless stationary panel evaluates the outcome equation") {
  ModelSpec spec;
  spec.sigma_eps = 0.0;
  const FactorPath factors = constant_factors(1.0, 5);
  const PanelData panel = simulate_panel(spec, 0.0, factors, 0.5, 4, 3, 1);
  for (int t = 0; t < 3; ++t) {
    for (int i = 0; i < 4; ++i) {
      CHECK(panel.y(i, t) == doctest::Approx(2.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("OLS recovers beta when the loading is switched off") {
  ModelSpec spec;
  spec.loading = constant_loading(0.0);
  const FactorPath factors = constant_factors(5.0, 2);
  const PanelData panel = simulate_panel(spec, 1.0, factors, 0.3, 100000, 1, 2);
  double sxy = 0.0, sxx = 0.0;
  const double mx = panel.x.mean(), my = panel.y.mean();
  for (int i = 0; i < panel.n; ++i) {
    sxy += (panel.x(i, 0) - mx) * (panel.y(i, 0) - my);
    sxx += (panel.x(i, 0) - mx) * (panel.x(i, 0) - mx);
  }
  CHECK(sxy / sxx == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("noiseless unit-root panel is flat at lambda(rho)*nu0") {
  ModelSpec spec;
  spec.kind = ModelKind::UnitRootRef;
  spec.loading = linear_loading();
  spec.sigma_eps = 0.0;
  const PanelData panel = simulate_panel_unitroot(spec, 0.0, 3.0, 1.0, 3, 2, 4);
  for (int t = 0; t < 2; ++t) {
    for (int i = 0; i < 3; ++i) {
      CHECK(panel.y(i, t) == doctest::Approx(3.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("panel regeneration with the same seed is identical") {
  ModelSpec spec;
  const FactorPath factors = constant_factors(0.5, 4);
  const PanelData a = simulate_panel(spec, 1.0, factors, 0.2, 50, 3, 9);
  const PanelData b = simulate_panel(spec, 1.0, factors, 0.2, 50, 3, 9);
  CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("factor window too short raises an alignment error") {
  ModelSpec spec;
  const FactorPath factors = constant_factors(0.5, 2);
  CHECK_THROWS_AS(simulate_panel(spec, 1.0, factors, 0.2, 10, 5, 1),
                  config_error);
}

TEST_CASE("moment weight matrices must be symmetric positive definite") {
  ModelSpec spec;
  spec.criterion = CriterionKind::Moment;
  spec.weight_cs = Eigen::MatrixXd::Identity(3, 3);
  CHECK_NOTHROW(spec.validate());
  spec.weight_cs(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(spec.validate(), config_error);
  spec.weight_cs(1, 0) = 0.5;
  spec.weight_cs(2, 2) = -1.0;  // not pd
  CHECK_THROWS_AS(spec.validate(), config_error);
}
