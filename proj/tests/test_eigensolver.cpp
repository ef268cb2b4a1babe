#include "nullctl/eigensolver.hpp"
#include "nullctl/multiprecision.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <doctest.h>

#include <cmath>

using namespace nullctl;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

/// ((2 - alpha)/2)^2 j_{nu,m}^2 with nu = |1 - alpha| / (2 - alpha).
double bessel_eigenvalue(double alpha, int m) {
  const double nu = std::abs(1.0 - alpha) / (2.0 - alpha);
  const double j = boost::math::cyl_bessel_j_zero(nu, m);
  return std::pow((2.0 - alpha) / 2.0, 2) * j * j;
}

/// Eigenvalues of W^{-1/2} M W^{-1/2} by Eigen's tridiagonal QL, independent
/// of the bisection solver.
VectorXd tridiagonal_ql(const StiffnessMatrix<double>& m) {
  const int n = m.size();
  const VectorXd s = m.weights.cwiseSqrt().cwiseInverse();
  VectorXd diag = m.diag.cwiseProduct(s).cwiseProduct(s);
  VectorXd sub = m.offdiag.cwiseProduct(s.head(n - 1)).cwiseProduct(s.tail(n - 1));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

TEST_SUITE("eigensolver") {

TEST_CASE("agrees with a dense generalized eigensolver") {
  for (double alpha : {0.0, 0.5, 1.5}) {
    const auto g = make_grid<double>(40, 1.5);
    const auto m = assemble_operator(g, alpha == 0.0 ? OperatorSpec::laplacian()
                                                      : OperatorSpec::degenerate(alpha));
    const EigenBasis<double> b = eigendecompose(m, 12);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> dense(m.dense(), MatrixXd(g.weights.asDiagonal()));
    for (int i = 0; i < 12; ++i) {
      CHECK(b.values[i] == doctest::Approx(dense.eigenvalues()[i]).epsilon(1e-10));
      // Eigen normalizes to v^T W v = 1 as well; compare up to sign.
      const VectorXd v = dense.eigenvectors().col(i);
      const double s = v.dot(g.weights.asDiagonal() * b.vectors.col(i)) > 0 ? 1.0 : -1.0;
      CHECK((b.vectors.col(i) - s * v).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("uniform Laplacian matches the discrete sine spectrum") {
  const int n = 300;
  const double h = 1.0 / n;
  const auto m = assemble_operator(make_grid<double>(n), OperatorSpec::laplacian());
  const EigenBasis<double> b = eigendecompose(m, 30);
  for (int i = 1; i <= 30; ++i) {
    const double exact = 4.0 / (h * h) * std::pow(std::sin(i * M_PI * h / 2.0), 2);
    CHECK(b.values[i - 1] == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("Laplacian first eigenvalue approaches pi^2") {
  const auto m = assemble_operator(make_grid<double>(1000), OperatorSpec::laplacian());
  const EigenBasis<double> b = eigendecompose(m, 1);
  CHECK(std::abs(b.values[0] / (M_PI * M_PI) - 1.0) <= 1e-4);
}

TEST_CASE("weakly degenerate spectrum matches the Bessel oracle") {
  // Cross-check the oracle against an independent QL solve on a 4x finer mesh first.
  const auto fine = assemble_operator(make_grid<double>(8000, 2.0), OperatorSpec::degenerate(0.5));
  const VectorXd ql = tridiagonal_ql(fine);
  const auto m = assemble_operator(make_grid<double>(2000, 2.0), OperatorSpec::degenerate(0.5));
  const EigenBasis<double> b = eigendecompose(m, 10);
  for (int i = 1; i <= 5; ++i) {
    const double coarse_err = std::abs(b.values[i - 1] / bessel_eigenvalue(0.5, i) - 1.0);
    const double fine_err = std::abs(ql[i - 1] / bessel_eigenvalue(0.5, i) - 1.0);
    CHECK(fine_err <= 1e-4);
    CHECK(fine_err < 0.5 * coarse_err);
  }
  for (int i = 1; i <= 10; ++i) {
    CHECK(std::abs(b.values[i - 1] / bessel_eigenvalue(0.5, i) - 1.0) <= 1e-3);
  }
}

TEST_CASE("strongly degenerate spectrum matches the Bessel oracle") {
  const auto m = assemble_operator(make_grid<double>(2000, 2.0), OperatorSpec::degenerate(1.5));
  const EigenBasis<double> b = eigendecompose(m, 5);
  for (int i = 1; i <= 5; ++i) {
    CHECK(std::abs(b.values[i - 1] / bessel_eigenvalue(1.5, i) - 1.0) <= 1e-3);
  }
}

TEST_CASE("eigenvectors are W-orthonormal with a fixed sign") {
  const auto g = make_grid<double>(500, 2.0);
  const auto m = assemble_operator(g, OperatorSpec::degenerate(0.5));
  const EigenBasis<double> b = eigendecompose(m, 20);
  const MatrixXd gram = b.vectors.transpose() * g.weights.asDiagonal() * b.vectors;
  CHECK((gram - MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() <= 1e-10);
  for (int i = 0; i < 20; ++i) {
    const VectorXd v = b.vectors.col(i);
    int first = 0;
    while (std::abs(v[first]) <= 1e-10 * v.cwiseAbs().maxCoeff()) ++first;
    CHECK(v[first] > 0.0);
    CHECK((m.apply(v) - b.values[i] * g.weights.cwiseProduct(v)).norm() <=
          1e-8 * b.values[i] * g.weights.cwiseProduct(v).norm());
  }
}

TEST_CASE("multiprecision and double bases agree") {
  const auto md = assemble_operator(make_grid<double>(200, 2.0), OperatorSpec::degenerate(0.5));
  const auto mm = assemble_operator(make_grid<Mp>(200, 2.0), OperatorSpec::degenerate(0.5));
  const EigenBasis<double> bd = eigendecompose(md, 5);
  const EigenBasis<double> bm = eigendecompose(mm, 5).to_double();
  for (int i = 0; i < 5; ++i) {
    CHECK(bd.values[i] == doctest::Approx(bm.values[i]).epsilon(1e-12));
    CHECK((bd.vectors.col(i) - bm.vectors.col(i)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("growth fit") {
  VectorXd synthetic(40);
  for (int k = 1; k <= 40; ++k) synthetic[k - 1] = 7.0 * std::pow(k, 3);
  const GrowthReport r = eigenvalue_growth_fit(synthetic, 1, 40);
  CHECK(r.exponent == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.prefactor == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(r.residual < 1e-12);
  CHECK_THROWS_AS(eigenvalue_growth_fit(synthetic, 1, 5), ValidationError);

  const auto m = assemble_operator(make_grid<double>(2000), OperatorSpec::laplacian());
  const GrowthReport lap = eigenvalue_growth_fit(eigendecompose(m, 100).values, 10, 100);
  CHECK(std::abs(lap.exponent - 2.0) <= 0.05);
}

TEST_CASE("input validation") {
  const auto m = assemble_operator(make_grid<double>(10), OperatorSpec::laplacian());
  CHECK_THROWS_AS(eigendecompose(m, 0), ValidationError);
  CHECK_THROWS_AS(eigendecompose(m, 11), ValidationError);
  CHECK(eigendecompose(m, 10).size() == 10);
}

}
