#include "nullctl/grid.hpp"
#include "nullctl/multiprecision.hpp"
#include "nullctl/operator.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nullctl;

TEST_SUITE("operator") {

TEST_CASE("uniform Laplacian stencil") {
  const auto g = make_grid<double>(4);
  const auto m = assemble_operator(g, OperatorSpec::laplacian());
  CHECK(m.operator_entry(1, 1) == doctest::Approx(32.0));
  CHECK(m.operator_entry(1, 2) == doctest::Approx(-16.0));
  CHECK(m.operator_entry(2, 1) == doctest::Approx(-16.0));
  CHECK(m.operator_entry(0, 2) == 0.0);
}

TEST_CASE("degenerate stencil uses x^alpha at faces") {
  const auto g = make_grid<double>(4);
  const auto m = assemble_operator(g, OperatorSpec::degenerate(1.0));
  CHECK(m.conductance[1] / g.weights[0] == doctest::Approx(4.0));
  CHECK(m.operator_entry(0, 1) == doctest::Approx(-4.0));
  const auto strong = assemble_operator(g, OperatorSpec::degenerate(1.5));
  CHECK(strong.conductance[0] == 0.0);
  CHECK(strong.operator_entry(0, 0) == doctest::Approx(strong.conductance[1] / g.weights[0]));
}

TEST_CASE("boundary conditions follow alpha") {
  CHECK(OperatorSpec::degenerate(0.5).bc_left == LeftBoundary::DirichletWeak);
  CHECK(OperatorSpec::degenerate(1.0).bc_left == LeftBoundary::FluxStrong);
  OperatorSpec bad = OperatorSpec::degenerate(0.5);
  bad.bc_left = LeftBoundary::FluxStrong;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(OperatorSpec::degenerate(2.0).validate(), ValidationError);
  CHECK_THROWS_AS(OperatorSpec::degenerate(0.0).validate(), ValidationError);
}

TEST_CASE("stiffness matrix is symmetric positive definite and energy matches") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (double alpha : {0.3, 0.5, 1.0, 1.5}) {
    const auto g = make_grid<double>(37, 1.7);
    const auto m = assemble_operator(g, OperatorSpec::degenerate(alpha));
    const Eigen::MatrixXd d = m.dense();
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::VectorXd v(37);
    for (int i = 0; i < 37; ++i) v[i] = normal(rng);
    CHECK(m.energy(v) == doctest::Approx(v.dot(d * v)).epsilon(1e-12));
    CHECK((m.apply(v) - d * v).norm() <= 1e-12 * (d * v).norm());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(d).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("multiprecision assembly agrees with double") {
  const auto gd = make_grid<double>(50, 2.0);
  const auto gm = make_grid<Mp>(50, 2.0);
  const auto md = assemble_operator(gd, OperatorSpec::degenerate(0.5));
  const auto mm = assemble_operator(gm, OperatorSpec::degenerate(0.5));
  for (int j = 0; j < 50; ++j) {
    CHECK(static_cast<double>(mm.diag[j]) == doctest::Approx(md.diag[j]).epsilon(1e-14));
  }
}

TEST_CASE("weighted inner products") {
  const auto g = make_grid<double>(13, 1.5);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(13);
  CHECK(weighted_inner_product(one, one, g) == doctest::Approx(1.0).epsilon(1e-14));

  const auto u = make_grid<double>(1000);
  Eigen::VectorXd s(1000);
  for (int j = 0; j < 1000; ++j) s[j] = std::sqrt(2.0) * std::sin(M_PI * u.centers[j]);
  CHECK(std::abs(weighted_inner_product(s, s, u) - 1.0) <= 1e-3);
  CHECK(weighted_norm(s, u) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK_THROWS_AS(weighted_inner_product(one, s, u), ValidationError);
}

TEST_CASE("region masks use cell centres") {
  const auto g = make_grid<double>(10);
  const Eigen::VectorXd m = region_mask(g, IntervalSet::single(0.2, 0.5));
  CHECK(m.sum() == 3.0);
  CHECK(m[2] == 1.0);
  CHECK(m[5] == 0.0);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(make_grid<double>(0), ValidationError);
  CHECK_THROWS_AS(make_grid<double>(10, 0.5), ValidationError);
  const auto g = make_grid<double>(8, 2.0);
  CHECK(g.faces[1] == doctest::Approx(1.0 / 64.0));
  CHECK(g.weights.sum() == doctest::Approx(1.0));
}

}
