#ifndef NULLCTL_SPECTRAL_INEQUALITY_HPP
#define NULLCTL_SPECTRAL_INEQUALITY_HPP

#include "nullctl/core.hpp"
#include "nullctl/eigensolver.hpp"
#include "nullctl/grid.hpp"
#include "nullctl/intervals.hpp"
#include "nullctl/regression.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace nullctl {

/// M_ij = sum over cells with centre in the region of w e_i e_j, i, j < k.
template <typename Scalar>
struct RestrictedGram {
  int k = 0;
  IntervalSet region;
  int cells_inside = 0;
  Matrix<Scalar> matrix;
};

template <typename Scalar>
RestrictedGram<Scalar> restricted_gram(const EigenBasis<Scalar>& basis, const Grid<Scalar>& grid,
                                       int k, const IntervalSet& region) {
  require(!region.empty(), "restricted_gram: region is empty");
  require(region.within(0.0, 1.0), "restricted_gram: region must lie inside (0,1)");
  require(k >= 1 && k <= basis.size(), "restricted_gram: k outside the basis size");
  require(grid.n == basis.dimension(), "restricted_gram: grid does not match the basis");
  const VectorXd mask = region_mask(grid, region);
  const int inside = static_cast<int>(mask.sum());
  require(inside >= 10, "restricted_gram: fewer than 10 cells inside the region");

  Vector<Scalar> w = grid.weights;
  for (int j = 0; j < grid.n; ++j) {
    if (mask[j] == 0.0) w[j] = Scalar(0);
  }
  const auto e = basis.vectors.leftCols(k);
  RestrictedGram<Scalar> gram{k, region, inside, Matrix<Scalar>()};
  gram.matrix = e.transpose() * w.asDiagonal() * e;
  gram.matrix = (gram.matrix + gram.matrix.transpose()) / Scalar(2);
  return gram;
}

/// Gram eigenvalues at or below this are treated as zero.
template <typename Scalar>
Scalar default_singular_threshold() {
  using std::pow;
  if (std::numeric_limits<Scalar>::digits <= 64) return Scalar(1e-14);
  return Scalar(pow(Scalar(10), -Scalar((std::numeric_limits<Scalar>::digits10 * 4) / 5)));
}

/// Sharp c in sum |a_i|^2 <= c * int_region |sum a_i e_i|^2 over the k-mode span.
template <typename Scalar>
struct SpectralConstant {
  bool finite = true;
  Scalar value;           // 1 / mu_min, or +inf when not finite
  Scalar mu_min;
  Scalar mu_max;
  Vector<Scalar> extremal;  // unit coefficient vector attaining the constant
  std::string diagnostic;

  double log_value() const {
    using std::log;
    return finite ? static_cast<double>(log(value)) : std::numeric_limits<double>::infinity();
  }
};

template <typename Scalar>
SpectralConstant<Scalar> best_spectral_constant(
    const Matrix<Scalar>& gram, Scalar threshold = default_singular_threshold<Scalar>()) {
  require(gram.rows() == gram.cols() && gram.rows() > 0,
          "best_spectral_constant: gram must be square and nonempty");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(gram);
  require(solver.info() == Eigen::Success, "best_spectral_constant: eigensolver failed");
  SpectralConstant<Scalar> out;
  out.mu_min = solver.eigenvalues()[0];
  out.mu_max = solver.eigenvalues()[gram.rows() - 1];
  out.extremal = solver.eigenvectors().col(0);
  if (out.mu_min <= threshold) {
    out.finite = false;
    out.value = std::numeric_limits<Scalar>::infinity();
    std::ostringstream msg;
    msg << "minimal restricted-Gram eigenvalue " << static_cast<double>(out.mu_min)
        << " is at or below " << static_cast<double>(threshold)
        << "; the region is too small or k too large for the mesh and precision";
    out.diagnostic = msg.str();
  } else {
    out.value = Scalar(1) / out.mu_min;
  }
  return out;
}

template <typename Scalar>
SpectralConstant<Scalar> best_spectral_constant(const RestrictedGram<Scalar>& gram) {
  return best_spectral_constant<Scalar>(gram.matrix);
}

struct ConstantSeries {
  std::vector<int> ks;
  std::vector<double> lambdas;
  std::vector<double> log_constants;  // log c_k; +inf where the constant is not finite
  std::vector<double> constants() const {
    std::vector<double> c;
    for (double l : log_constants) c.push_back(std::exp(l));
    return c;
  }
};

/// c_k for k = k_first..k_last from the leading blocks of one restricted Gram.
template <typename Scalar>
ConstantSeries constant_series(const EigenBasis<Scalar>& basis, const Grid<Scalar>& grid,
                               const IntervalSet& region, int k_first, int k_last) {
  require(k_first >= 1 && k_first <= k_last, "constant_series: invalid k range");
  const RestrictedGram<Scalar> gram = restricted_gram(basis, grid, k_last, region);
  ConstantSeries series;
  for (int k = k_first; k <= k_last; ++k) {
    const auto c = best_spectral_constant<Scalar>(gram.matrix.topLeftCorner(k, k).eval());
    series.ks.push_back(k);
    series.lambdas.push_back(static_cast<double>(basis.values[k - 1]));
    series.log_constants.push_back(c.log_value());
  }
  return series;
}

/// sigma of the degenerate spectral inequality; gamma matters only at alpha = 1.
inline double sigma_for_alpha(double alpha, double gamma = 1.9) {
  require(alpha > 0.0 && alpha < 2.0, "sigma_for_alpha: alpha must lie in (0,2)");
  if (alpha != 1.0) return 0.75;
  require(gamma > 0.0 && gamma < 2.0, "sigma_for_alpha: gamma must lie in (0,2)");
  return 3.0 / (2.0 * gamma);
}

struct Predictor {
  enum class Kind { SqrtLambda, LambdaSigma } kind = Kind::SqrtLambda;
  double sigma = 0.5;

  static Predictor sqrt_lambda() { return {Kind::SqrtLambda, 0.5}; }
  static Predictor lambda_sigma(double sigma) { return {Kind::LambdaSigma, sigma}; }
  double operator()(double lambda) const {
    return kind == Kind::SqrtLambda ? std::sqrt(lambda) : std::pow(lambda, sigma);
  }
};

struct ExponentCheck {
  LinearFit fit;          // log c_k against the predictor
  double ratio_min = 0;   // min over k of log c_k / predictor
  double ratio_max = 0;
  double ratio_spread = 0;  // ratio_max / ratio_min
  bool all_finite = true;
  bool positive_slope = false;
};

/// Regresses log c_k on predictor(lambda_k) and reports how far log c_k /
/// predictor(lambda_k) moves across the series.
inline ExponentCheck growth_exponent_check(const ConstantSeries& series, const Predictor& predictor) {
  require(series.ks.size() >= 6, "growth_exponent_check: need at least 6 data points");
  ExponentCheck out;
  std::vector<double> x, y;
  out.ratio_min = std::numeric_limits<double>::infinity();
  out.ratio_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < series.ks.size(); ++i) {
    if (!std::isfinite(series.log_constants[i])) {
      out.all_finite = false;
      continue;
    }
    const double p = predictor(series.lambdas[i]);
    require(p > 0.0, "growth_exponent_check: predictor must be positive");
    x.push_back(p);
    y.push_back(series.log_constants[i]);
    const double r = series.log_constants[i] / p;
    out.ratio_min = std::min(out.ratio_min, r);
    out.ratio_max = std::max(out.ratio_max, r);
  }
  require(x.size() >= 6, "growth_exponent_check: fewer than 6 finite constants");
  out.fit = fit_line(x, y);
  out.ratio_spread = out.ratio_min > 0.0 ? out.ratio_max / out.ratio_min
                                         : std::numeric_limits<double>::infinity();
  out.positive_slope = out.fit.slope > 0.0;
  return out;
}

}  // namespace nullctl

#endif  // NULLCTL_SPECTRAL_INEQUALITY_HPP
