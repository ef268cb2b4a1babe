#include "nullctl/hum.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nullctl;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double sq(const VectorXd& v, const VectorXd& w) { return (w.array() * v.array().square()).sum(); }

IntervalSet periodic_pattern(double T) {
  std::vector<Interval> pieces;
  for (int j = 0; j < 16; ++j) pieces.push_back({T * (j / 16.0 + 1.0 / 32.0), T * (j + 1) / 16.0});
  return IntervalSet(pieces);
}

/// Single decoupled y-mode observed everywhere: the scalar HUM problem.
struct ScalarCase {
  int n = 64;
  Grid<double> grid = make_grid<double>(n);
  Operators ops = make_operators(grid, 0.5);
  CoupledModel model{grid, ops,
                     SwitchingSetup::shared(1.0, IntervalSet::single(0.0, 1.0), IntervalSet(),
                                            IntervalSet::single(0.0, 1.0)),
                     CouplingCoefficients::constant(0, 0, 0, 0)};
  EigenBasis<double> lap = eigendecompose(ops.laplacian, 2);
  EigenBasis<double> deg = eigendecompose(ops.degenerate, 2);
};

struct CoupledCase {
  int n = 32;
  Grid<double> grid = make_grid<double>(n);
  Operators ops = make_operators(grid, 0.5);
  CoupledModel model{grid, ops,
                     SwitchingSetup::alternating(1.0, IntervalSet::single(0.1, 0.4), IntervalSet::single(0.6, 0.9),
                                                 periodic_pattern(1.0)),
                     CouplingCoefficients::constant(0, 0.5, 0.5, 0)};
  EigenBasis<double> lap = eigendecompose(ops.laplacian, 4);
  EigenBasis<double> deg = eigendecompose(ops.degenerate, 4);
};

}  // namespace

TEST_SUITE("hum") {

TEST_CASE("scalar Gramian closed form") {
  const ScalarCase c;
  const VectorXd zero = VectorXd::Zero(c.n);
  const HumProblem pb{c.model, c.lap, c.deg, 0.0, 1.0, 1, zero, zero, -1.0, 0.0, 0, 1};
  const HumGramian g = build_hum_gramian(pb);
  REQUIRE(g.size() == 1);
  const double lam = c.lap.values[0];
  CHECK(std::abs(g.matrix(0, 0) / ((1.0 - std::exp(-2.0 * lam)) / (2.0 * lam)) - 1.0) <= 1e-4);
}

TEST_CASE("empty time sets give a zero Gramian") {
  const int n = 24;
  const auto grid = make_grid<double>(n);
  const auto ops = make_operators(grid, 0.5);
  const CoupledModel m(grid, ops,
                       SwitchingSetup::shared(1.0, IntervalSet::single(0.1, 0.4), IntervalSet::single(0.6, 0.9),
                                              IntervalSet()),
                       CouplingCoefficients::constant(0.2, 0.5, 0.5, 0.1));
  const auto lap = eigendecompose(ops.laplacian, 2), deg = eigendecompose(ops.degenerate, 2);
  const VectorXd zero = VectorXd::Zero(n);
  const HumGramian g = build_hum_gramian(HumProblem{m, lap, deg, 0.0, 1.0, 2, zero, zero});
  CHECK(g.matrix.cwiseAbs().maxCoeff() == 0.0);
  const ControlBasedObservability est =
      estimate_observability_from_control(HumProblem{m, lap, deg, 0.0, 1.0, 2, zero, zero}, 4, 1);
  CHECK(std::isinf(est.estimate));
}

TEST_CASE("Gramian is symmetric and equals the discrete observation pairing") {
  const int n = 24;
  const auto grid = make_grid<double>(n);
  const auto ops = make_operators(grid, 0.5);
  const CoupledModel m(grid, ops,
                       SwitchingSetup::alternating(1.0, IntervalSet::single(0.1, 0.4), IntervalSet::single(0.6, 0.9),
                                                   IntervalSet({{0.1, 0.3}, {0.5, 0.8}})),
                       CouplingCoefficients::constant(0.3, 0.7, -0.4, 0.1));
  const auto lap = eigendecompose(ops.laplacian, 3), deg = eigendecompose(ops.degenerate, 3);
  const VectorXd zero = VectorXd::Zero(n);
  const HumGramian g = build_hum_gramian(HumProblem{m, lap, deg, 0.0, 1.0, 3, zero, zero});
  REQUIRE(g.size() == 6);
  CHECK((g.matrix - g.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  double pairing = 0.0;
  for (int s = 0; s < g.tg.steps; ++s) {
    pairing += g.tg.dt * (grid.weights.array() * g.observations[1].col(s).array() *
                          g.observations[4].col(s).array()).sum();
  }
  CHECK(g.matrix(1, 4) == doctest::Approx(pairing).epsilon(1e-12));
}

TEST_CASE("scalar HUM control matches the closed form") {
  const ScalarCase c;
  const VectorXd y0 = 2.0 * c.lap.vectors.col(0);
  const VectorXd zero = VectorXd::Zero(c.n);
  const HumProblem pb{c.model, c.lap, c.deg, 0.0, 1.0, 1, y0, zero, -1.0, 0.0, 0, 1};
  const PartialControlResult r = synthesize_partial_control(pb);
  CHECK(r.projected_residual <= 1e-8);
  const double lam = c.lap.values[0], T = 1.0;
  const double amp = -2.0 * std::exp(-lam * T) * 2.0 * lam / (1.0 - std::exp(-2.0 * lam * T));
  double worst = 0.0;
  for (int s = 0; s < r.control.steps(); ++s) {
    const double mid = 0.5 * (r.control.times[s] + r.control.times[s + 1]);
    const VectorXd expected = amp * std::exp(-lam * (T - mid)) * c.lap.vectors.col(0);
    worst = std::max(worst, (r.control.values.col(s) - expected).cwiseAbs().maxCoeff() /
                                expected.cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("zero data gives the zero control") {
  const CoupledCase c;
  const VectorXd zero = VectorXd::Zero(c.n);
  const PartialControlResult r = synthesize_partial_control(HumProblem{c.model, c.lap, c.deg, 0.0, 1.0, 2, zero, zero});
  CHECK(r.control.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.projected_residual == 0.0);
}

TEST_CASE("coupled partial control matches a dense least-squares oracle") {
  const CoupledCase c;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  const VectorXd y0 = VectorXd::NullaryExpr(c.n, [&] { return normal(rng); });
  const VectorXd z0 = VectorXd::NullaryExpr(c.n, [&] { return normal(rng); });
  const double initial = sq(y0, c.grid.weights) + sq(z0, c.grid.weights);

  const PartialControlResult r = synthesize_partial_control(HumProblem{c.model, c.lap, c.deg, 0.0, 1.0, 2, y0, z0});
  CHECK(r.projected_residual <= 1e-6 * initial);

  // The oracle assembles n * steps columns, so both runs use a coarser aligned grid.
  const double dt = 1.0 / 320.0;
  const PartialControlResult coarse =
      synthesize_partial_control(HumProblem{c.model, c.lap, c.deg, 0.0, 1.0, 2, y0, z0, -1.0, dt});
  const double oracle = testing::dense_least_squares_energy(c.model, c.lap, c.deg, 2, y0, z0, make_time_grid(0.0, 1.0, dt));
  CHECK(coarse.projected_residual <= 1e-6 * initial);
  CHECK(std::abs(coarse.control_energy / oracle - 1.0) <= 1e-2);
}

TEST_CASE("duality residual") {
  const int n = 24;
  const auto grid = make_grid<double>(n);
  const auto ops = make_operators(grid, 0.5);
  const CoupledModel m(grid, ops,
                       SwitchingSetup::alternating(1.0, IntervalSet::single(0.1, 0.4), IntervalSet::single(0.6, 0.9),
                                                   IntervalSet({{0.1, 0.3}, {0.5, 0.8}})),
                       CouplingCoefficients::constant(0.3, 0.7, -0.4, 0.1));
  const TimeGrid tg = default_time_grid(m.setup, 0.0, 1.0);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  auto rv = [&] { return VectorXd(VectorXd::NullaryExpr(n, [&] { return normal(rng); })); };
  const VectorXd zero = VectorXd::Zero(n);
  const ControlSignal none = ControlSignal::zero(tg, n);
  CHECK(duality_residual(m, tg, none, rv(), rv(), zero, zero) == 0.0);
  CHECK(duality_residual(m, tg, none, rv(), rv(), rv(), rv()) <= 1e-10);
  ControlSignal u = ControlSignal::zero(tg, n);
  for (int s = 0; s < tg.steps; ++s) u.values.col(s) = rv();
  CHECK(duality_residual(m, tg, u, rv(), rv(), rv(), rv()) <= 1e-9);
  CHECK_THROWS_AS(duality_residual(m, make_time_grid(0.0, 1.0, 0.01), u, rv(), rv(), rv(), rv()),
                  ValidationError);
}

TEST_CASE("control-based observability estimate") {
  const ScalarCase c;
  const VectorXd zero = VectorXd::Zero(c.n);
  const ControlBasedObservability est =
      estimate_observability_from_control(HumProblem{c.model, c.lap, c.deg, 0.0, 1.0, 1, zero, zero, -1.0, 0.0, 0, 1},
                                          5, 2);
  const double lam = c.lap.values[0];
  const double exact = 2.0 * lam * std::exp(-2.0 * lam) / (1.0 - std::exp(-2.0 * lam));
  CHECK(std::abs(est.estimate / exact - 1.0) <= 0.05);
  // HUM attains the observability bound: cost ratio equals the estimate.
  for (std::size_t i = 0; i < est.cost_ratios.size(); ++i) {
    CHECK(est.cost_ratios[i] == doctest::Approx(est.ratios[i]).epsilon(1e-6));
  }

  // Long horizon, both equations observed on complementary halves.
  const int n = 32;
  const auto grid = make_grid<double>(n);
  const auto ops = make_operators(grid, 0.5);
  const CoupledModel m(grid, ops,
                       SwitchingSetup::shared(5.0, IntervalSet::single(0.0, 0.5), IntervalSet::single(0.5, 1.0),
                                              IntervalSet::single(0.0, 5.0)),
                       CouplingCoefficients::constant(0, 0, 0, 0));
  const auto lap = eigendecompose(ops.laplacian, 2), deg = eigendecompose(ops.degenerate, 2);
  const VectorXd z = VectorXd::Zero(n);
  CHECK(estimate_observability_from_control(HumProblem{m, lap, deg, 0.0, 5.0, 2, z, z}, 8, 3).estimate <= 1.0);
}

TEST_CASE("unregularized solve rejects unobservable requirements") {
  const int n = 32;
  const auto grid = make_grid<double>(n);
  const auto ops = make_operators(grid, 0.5);
  // chi_E = 1 and c = 0: nothing steers z.
  const CoupledModel m(grid, ops,
                       SwitchingSetup::alternating(1.0, IntervalSet::single(0.1, 0.4), IntervalSet::single(0.6, 0.9),
                                                   IntervalSet::single(0.0, 1.0)),
                       CouplingCoefficients::constant(0, 0.5, 0, 0));
  const auto lap = eigendecompose(ops.laplacian, 2), deg = eigendecompose(ops.degenerate, 2);
  const VectorXd y0 = lap.vectors.col(0), z0 = deg.vectors.col(0);
  try {
    synthesize_partial_control(HumProblem{m, lap, deg, 0.0, 1.0, 2, y0, z0, 0.0});
    FAIL("expected UnachievableError");
  } catch (const UnachievableError& e) {
    CHECK(e.null_mode().size() == 4);
    CHECK(e.null_mode().head(2).norm() > 0.99);  // a p-family direction
  }
  // z0 = 0 needs no unobservable direction.
  const PartialControlResult ok =
      synthesize_partial_control(HumProblem{m, lap, deg, 0.0, 1.0, 2, y0, VectorXd::Zero(n), 0.0});
  CHECK(ok.projected_residual <= 1e-12);
}

TEST_CASE("problem validation") {
  const CoupledCase c;
  const VectorXd zero = VectorXd::Zero(c.n);
  CHECK_THROWS_AS(build_hum_gramian(HumProblem{c.model, c.lap, c.deg, 0.5, 0.25, 2, zero, zero}), ValidationError);
  CHECK_THROWS_AS(build_hum_gramian(HumProblem{c.model, c.lap, c.deg, 0.0, 1.0, 5, zero, zero}), ValidationError);
  CHECK_THROWS_AS(build_hum_gramian(HumProblem{c.model, c.lap, c.deg, 0.0, 1.0, 2, VectorXd::Zero(3), zero}),
                  ValidationError);
}

}
