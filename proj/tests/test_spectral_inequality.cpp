#include "nullctl/multiprecision.hpp"
#include "nullctl/spectral_inequality.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nullctl;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct LaplacianSetup {
  Grid<double> grid = make_grid<double>(1000);
  EigenBasis<double> basis = eigendecompose(assemble_operator(grid, OperatorSpec::laplacian()), 20);
};

const LaplacianSetup& laplacian() {
  static const LaplacianSetup s;
  return s;
}

}  // namespace

TEST_SUITE("spectral_inequality") {

TEST_CASE("the whole interval gives the identity") {
  const auto& s = laplacian();
  const RestrictedGram<double> g = restricted_gram(s.basis, s.grid, 8, IntervalSet::single(0.0, 1.0));
  CHECK(g.cells_inside == 1000);
  CHECK((g.matrix - MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(static_cast<double>(best_spectral_constant(MatrixXd(MatrixXd::Identity(4, 4))).value) ==
        doctest::Approx(1.0));
}

TEST_CASE("half interval closed forms") {
  const auto& s = laplacian();
  const RestrictedGram<double> g = restricted_gram(s.basis, s.grid, 2, IntervalSet::single(0.0, 0.5));
  CHECK(std::abs(g.matrix(0, 0) - 0.5) <= 1e-3);
  CHECK(std::abs(g.matrix(1, 1) - 0.5) <= 1e-3);
  CHECK(std::abs(g.matrix(0, 1) - 4.0 / (3.0 * M_PI)) <= 1e-3);
  const auto c1 = best_spectral_constant(restricted_gram(s.basis, s.grid, 1, IntervalSet::single(0.0, 0.5)));
  CHECK(c1.finite);
  CHECK(std::abs(c1.value - 2.0) <= 1e-2);
  const auto c2 = best_spectral_constant(g);
  CHECK(c2.value == doctest::Approx(1.0 / (0.5 - 4.0 / (3.0 * M_PI))).epsilon(1e-2));
}

TEST_CASE("Monte Carlo Rayleigh quotients never beat the constant") {
  const auto& s = laplacian();
  const IntervalSet region = IntervalSet::single(0.0, 0.5);
  const RestrictedGram<double> g = restricted_gram(s.basis, s.grid, 3, region);
  const auto c = best_spectral_constant(g);
  const VectorXd w = s.grid.weights.cwiseProduct(region_mask(s.grid, region));
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  double best = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const VectorXd a = VectorXd::NullaryExpr(3, [&] { return normal(rng); });
    const VectorXd f = s.basis.vectors.leftCols(3) * a;
    // Restricted integral from grid values, independent of the Gram matrix.
    const double restricted = (w.array() * f.array().square()).sum();
    best = std::max(best, a.squaredNorm() / restricted);
  }
  CHECK(best <= c.value * (1.0 + 1e-8));
  CHECK(best >= 0.99 * c.value);
}

TEST_CASE("singular Grams return the infinite sentinel") {
  MatrixXd m = MatrixXd::Identity(3, 3);
  m(2, 2) = 1e-16;
  const auto c = best_spectral_constant(m);
  CHECK_FALSE(c.finite);
  CHECK(std::isinf(c.value));
  CHECK(!c.diagnostic.empty());
  CHECK(std::isinf(c.log_value()));
}

TEST_CASE("double precision saturates where multiprecision does not") {
  const auto& s = laplacian();
  const IntervalSet region = IntervalSet::single(0.2, 0.3);
  const ConstantSeries d = constant_series(s.basis, s.grid, region, 18, 20);
  CHECK(std::isinf(d.log_constants.back()));

  const auto gm = make_grid<Mp>(400);
  const auto bm = eigendecompose(assemble_operator(gm, OperatorSpec::laplacian()), 20);
  const ConstantSeries m = constant_series(bm, gm, region, 2, 20);
  for (double l : m.log_constants) CHECK(std::isfinite(l));
  for (std::size_t i = 1; i < m.log_constants.size(); ++i) {
    // Nested spans: the sharp constant cannot decrease with k.
    CHECK(m.log_constants[i] >= m.log_constants[i - 1] - 1e-12);
  }
}

TEST_CASE("restricted Gram needs enough cells") {
  const auto g = make_grid<double>(50);
  const auto b = eigendecompose(assemble_operator(g, OperatorSpec::laplacian()), 3);
  CHECK_THROWS_AS(restricted_gram(b, g, 3, IntervalSet::single(0.2, 0.3)), ValidationError);
}

TEST_CASE("growth check on a synthetic series") {
  ConstantSeries s;
  for (int k = 1; k <= 10; ++k) {
    const double lambda = std::pow(k * M_PI, 2);
    s.ks.push_back(k);
    s.lambdas.push_back(lambda);
    s.log_constants.push_back(2.0 * std::sqrt(lambda));
  }
  const ExponentCheck e = growth_exponent_check(s, Predictor::sqrt_lambda());
  CHECK(e.fit.slope == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::abs(e.fit.r_squared - 1.0) <= 1e-10);
  CHECK(e.ratio_spread == doctest::Approx(1.0));
  CHECK(e.positive_slope);
  CHECK(e.all_finite);

  const ExponentCheck f = growth_exponent_check(s, Predictor::lambda_sigma(0.75));
  CHECK(f.ratio_spread > 1.0);
  CHECK(sigma_for_alpha(0.5) == 0.75);
  CHECK(sigma_for_alpha(1.0, 1.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sigma_for_alpha(2.0), ValidationError);
}

TEST_CASE("singular threshold scales with precision") {
  CHECK(default_singular_threshold<double>() == 1e-14);
  CHECK(static_cast<double>(default_singular_threshold<Mp>()) < 1e-70);
}

}
