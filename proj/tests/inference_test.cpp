#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "xsts/cross_section.hpp"
#include "xsts/errors.hpp"
#include "xsts/inference.hpp"
#include "xsts/stats.hpp"

using namespace xsts;

TEST_CASE("Wald interval: scalar hand case") {
  const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, 1.0);
  const Eigen::MatrixXd om = Eigen::MatrixXd::Constant(1, 1, 4.0);
  const ConfidenceRegion cr = wald_ci(th, om, 100.0, 0.95);
  REQUIRE(cr.intervals.size() == 1);
  const double half = normal_quantile(0.975) * 0.2;
  CHECK(cr.intervals[0].lo == doctest::Approx(1.0 - half).epsilon(1e-12));
  CHECK(cr.intervals[0].hi == doctest::Approx(1.0 + half).epsilon(1e-12));
  CHECK_FALSE(cr.intervals[0].degenerate);
}

TEST_CASE("Wald intervals widen monotonically in the level") {
  const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, 0.0);
  const Eigen::MatrixXd om = Eigen::MatrixXd::Constant(1, 1, 1.0);
  double prev = 0.0;
  for (double level : {0.5, 0.8, 0.9, 0.95, 0.99}) {
    const double w = wald_ci(th, om, 50.0, level).intervals[0].width();
    CHECK(w > prev);
    prev = w;
  }
}

TEST_CASE("zero variance produces a flagged point interval") {
  const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, 2.0);
  const Eigen::MatrixXd om = Eigen::MatrixXd::Zero(1, 1);
  const ConfidenceRegion cr = wald_ci(th, om, 100.0, 0.95);
  CHECK(cr.intervals[0].degenerate);
  CHECK(cr.intervals[0].lo == 2.0);
  CHECK(cr.intervals[0].hi == 2.0);
}

TEST_CASE("quantile belt acceptance contains the truth on a deterministic path") {
  // sigma -> 0 makes tau(rho_hat - rho(gamma0)) = 0 at gamma = gamma0, which
  // lies inside any belt containing zero.
  const double gamma0 = -2.0;
  const FactorPath path = simulate_local_to_unity(gamma0, 1e-12, 400, 1.0, 81);
  const std::vector<double> grid = default_gamma_grid(-10.0, 2.0, 61);
  const RhoQuantileTable table =
      build_rho_quantile_table(grid, 0.05, 400, 4000, 82);
  const RhoInterval ri = rho_grid_ci(path, 0.05, grid, table);
  CHECK_FALSE(ri.fallback);
  const double rho0 = std::exp(gamma0 / 400.0);
  CHECK(ri.lo <= rho0);
  CHECK(rho0 <= ri.hi);
}

TEST_CASE("quantile-belt interval covers the truth at the nominal rate") {
  const std::vector<double> grid = default_gamma_grid(-20.0, 4.0, 81);
  const RhoQuantileTable table =
      build_rho_quantile_table(grid, 0.10, 300, 8000, 83);
  const double gamma0 = -1.0;
  const int tau = 300;
  const double rho0 = std::exp(gamma0 / tau);
  int hits = 0;
  const int reps = 300;
  for (int r = 0; r < reps; ++r) {
    const FactorPath path =
        simulate_local_to_unity(gamma0, 1.0, tau, 0.0, 900 + r);
    const RhoInterval ri = rho_grid_ci(path, 0.10, grid, table);
    if (ri.lo <= rho0 && rho0 <= ri.hi) ++hits;
  }
  const double rate = double(hits) / reps;
  CHECK(rate > 0.84);  // nominal 0.90, binomial sd ~ 0.017
}

TEST_CASE("shrinking alpha1 grows the first-stage interval") {
  const FactorPath path = simulate_local_to_unity(0.0, 1.0, 300, 0.0, 84);
  const std::vector<double> grid = default_gamma_grid(-20.0, 4.0, 81);
  const RhoQuantileTable loose =
      build_rho_quantile_table(grid, 0.20, 300, 8000, 85);
  const RhoQuantileTable tight =
      build_rho_quantile_table(grid, 0.02, 300, 8000, 85);
  const RhoInterval a = rho_grid_ci(path, 0.20, grid, loose);
  const RhoInterval b = rho_grid_ci(path, 0.02, grid, tight);
  CHECK(b.hi - b.lo >= a.hi - a.lo);
}

TEST_CASE("union interval contains the Wald interval at the point estimate") {
  ModelSpec spec;
  spec.kind = ModelKind::UnitRootRef;
  spec.loading = linear_loading();
  const int tau = 100;
  const FactorPath factors = simulate_local_to_unity(0.0, 1.0, tau, 1.0, 86);
  const PanelData panel =
      simulate_panel_unitroot(spec, 1.0, factors.initial, 1.0, 400, 2, 87);
  const std::vector<double> grid = default_gamma_grid(-15.0, 3.0, 61);
  const RhoQuantileTable table =
      build_rho_quantile_table(grid, 0.05, 300, 4000, 88);
  const ConfidenceRegion cr =
      bonferroni_union_ci(panel, factors, spec, 0.05, 0.05, 15, table, grid);
  REQUIRE(cr.method == CiMethod::BonferroniUnion);
  REQUIRE(!cr.per_rho_intervals.empty());
  // every per-rho interval is inside the union
  for (std::size_t g = 0; g < cr.per_rho_intervals.size(); ++g) {
    if (!cr.per_rho_ok[g]) continue;
    for (std::size_t j = 0; j < cr.intervals.size(); ++j) {
      CHECK(cr.intervals[j].lo <= cr.per_rho_intervals[g][j].lo + 1e-12);
      CHECK(cr.intervals[j].hi >= cr.per_rho_intervals[g][j].hi - 1e-12);
    }
  }
  CHECK(cr.rho_lo <= cr.rho_hi);
  CHECK(cr.rho_grid.size() == 15);
}

TEST_CASE("union interval is monotone in the grid resolution") {
  ModelSpec spec;
  spec.kind = ModelKind::UnitRootRef;
  spec.loading = linear_loading();
  const int tau = 100;
  const FactorPath factors = simulate_local_to_unity(-1.0, 1.0, tau, 1.0, 89);
  const PanelData panel =
      simulate_panel_unitroot(spec, 1.0, factors.initial,
                              std::exp(-1.0 / tau), 400, 2, 90);
  const std::vector<double> grid = default_gamma_grid(-15.0, 3.0, 61);
  const RhoQuantileTable table =
      build_rho_quantile_table(grid, 0.05, 300, 4000, 91);
  const ConfidenceRegion coarse =
      bonferroni_union_ci(panel, factors, spec, 0.05, 0.05, 10, table, grid);
  const ConfidenceRegion fine =
      bonferroni_union_ci(panel, factors, spec, 0.05, 0.05, 40, table, grid);
  // refining the grid can only add pieces to the union over the same range
  for (std::size_t j = 0; j < coarse.intervals.size(); ++j) {
    CHECK(fine.intervals[j].lo <= coarse.intervals[j].lo + 1e-9);
    CHECK(fine.intervals[j].hi >= coarse.intervals[j].hi - 1e-9);
  }
}

TEST_CASE("decoupled design: the union adds nothing beyond a single Wald piece") {
  // With a constant loading the profiled theta and its sandwich do not depend
  // on rho, so every per-rho interval coincides and the union equals each.
  ModelSpec spec;
  spec.kind = ModelKind::UnitRootRef;
  spec.loading = constant_loading(1.0);
  const int tau = 100;
  const FactorPath factors = simulate_local_to_unity(0.0, 1.0, tau, 1.0, 92);
  const PanelData panel =
      simulate_panel_unitroot(spec, 1.0, factors.initial, 1.0, 400, 2, 93);
  const std::vector<double> grid = default_gamma_grid(-15.0, 3.0, 61);
  const RhoQuantileTable table =
      build_rho_quantile_table(grid, 0.05, 300, 4000, 94);
  const ConfidenceRegion cr =
      bonferroni_union_ci(panel, factors, spec, 0.05, 0.05, 12, table, grid);
  for (std::size_t g = 0; g < cr.per_rho_intervals.size(); ++g) {
    REQUIRE(cr.per_rho_ok[g]);
    for (std::size_t j = 0; j < cr.intervals.size(); ++j) {
      CHECK(cr.per_rho_intervals[g][j].lo ==
            doctest::Approx(cr.intervals[j].lo).epsilon(1e-10));
      CHECK(cr.per_rho_intervals[g][j].hi ==
            doctest::Approx(cr.intervals[j].hi).epsilon(1e-10));
    }
  }
}

TEST_CASE("a grid that misses the point estimate is rejected") {
  const FactorPath path = simulate_local_to_unity(0.0, 1.0, 300, 0.0, 95);
  const std::vector<double> far_grid = default_gamma_grid(-500.0, -400.0, 11);
  const RhoQuantileTable table =
      build_rho_quantile_table(far_grid, 0.05, 300, 2000, 96);
  CHECK_THROWS_AS(rho_grid_ci(path, 0.05, far_grid, table), config_error);
}
