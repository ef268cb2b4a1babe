#ifndef NULLCTL_GRID_HPP
#define NULLCTL_GRID_HPP

#include "nullctl/core.hpp"
#include "nullctl/intervals.hpp"

#include <cmath>

namespace nullctl {

/// Cell-centred mesh on I = (0,1). faces[j] = (j/n)^grading.
template <typename Scalar>
struct Grid {
  int n = 0;
  double grading = 1.0;
  Vector<Scalar> faces;    // n + 1
  Vector<Scalar> centers;  // n
  Vector<Scalar> weights;  // n, cell widths; the discrete L2 weights

  Grid<double> to_double() const {
    Grid<double> g;
    g.n = n;
    g.grading = grading;
    g.faces = faces.template cast<double>();
    g.centers = centers.template cast<double>();
    g.weights = weights.template cast<double>();
    return g;
  }
};

template <typename Scalar = double>
Grid<Scalar> make_grid(int n, double grading = 1.0) {
  using std::pow;
  require(n >= 1, "grid needs at least one cell");
  require(grading >= 1.0, "grading exponent must be >= 1");
  Grid<Scalar> g;
  g.n = n;
  g.grading = grading;
  g.faces.resize(n + 1);
  for (int j = 0; j <= n; ++j) {
    const Scalar s = Scalar(j) / Scalar(n);
    g.faces[j] = grading == 1.0 ? s : Scalar(pow(s, Scalar(grading)));
  }
  g.faces[0] = Scalar(0);
  g.faces[n] = Scalar(1);
  g.centers = (g.faces.head(n) + g.faces.tail(n)) / Scalar(2);
  g.weights = g.faces.tail(n) - g.faces.head(n);
  for (int j = 0; j < n; ++j) {
    require(g.weights[j] > Scalar(0), "grid faces must be strictly increasing");
  }
  return g;
}

/// Discrete L2(I) inner product sum_j w_j u_j v_j.
template <typename Scalar, typename DerivedU, typename DerivedV>
Scalar weighted_inner_product(const Eigen::MatrixBase<DerivedU>& u,
                              const Eigen::MatrixBase<DerivedV>& v, const Grid<Scalar>& grid) {
  require(u.size() == grid.n && v.size() == grid.n,
          "weighted_inner_product: vector length must equal the cell count");
  return (grid.weights.array() * u.array() * v.array()).sum();
}

template <typename Scalar, typename Derived>
Scalar weighted_norm(const Eigen::MatrixBase<Derived>& u, const Grid<Scalar>& grid) {
  using std::sqrt;
  return sqrt(weighted_inner_product(u, u, grid));
}

/// 1 on cells whose centre lies in the region, 0 elsewhere.
template <typename Scalar>
VectorXd region_mask(const Grid<Scalar>& grid, const IntervalSet& region) {
  VectorXd mask(grid.n);
  for (int j = 0; j < grid.n; ++j) {
    mask[j] = region.contains(static_cast<double>(grid.centers[j])) ? 1.0 : 0.0;
  }
  return mask;
}

}  // namespace nullctl

#endif  // NULLCTL_GRID_HPP
