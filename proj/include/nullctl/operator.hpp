#ifndef NULLCTL_OPERATOR_HPP
#define NULLCTL_OPERATOR_HPP

#include "nullctl/core.hpp"
#include "nullctl/grid.hpp"

#include <cmath>
#include <string>

namespace nullctl {

enum class OperatorKind { Laplacian, Degenerate };
enum class LeftBoundary { DirichletWeak, FluxStrong };

struct OperatorSpec {
  OperatorKind kind = OperatorKind::Laplacian;
  double alpha = 0.0;
  LeftBoundary bc_left = LeftBoundary::DirichletWeak;

  static OperatorSpec laplacian() { return {}; }

  /// Degenerate operator with the boundary condition its alpha requires.
  static OperatorSpec degenerate(double alpha) {
    return {OperatorKind::Degenerate, alpha,
            alpha < 1.0 ? LeftBoundary::DirichletWeak : LeftBoundary::FluxStrong};
  }

  void validate() const {
    if (kind == OperatorKind::Laplacian) {
      require(bc_left == LeftBoundary::DirichletWeak,
              "the Laplacian carries homogeneous Dirichlet conditions at both ends");
      return;
    }
    require(alpha > 0.0 && alpha < 2.0, "degeneracy exponent alpha must lie in (0,2)");
    if (alpha < 1.0) {
      require(bc_left == LeftBoundary::DirichletWeak,
              "alpha in (0,1) requires the Dirichlet condition at x = 0");
    } else {
      require(bc_left == LeftBoundary::FluxStrong,
              "alpha in [1,2) requires the zero-flux condition at x = 0");
    }
  }

  double exponent() const { return kind == OperatorKind::Laplacian ? 0.0 : alpha; }
};

/// Symmetric tridiagonal M of the generalized pair (M, W) with W = diag(weights).
/// W^{-1} M is the finite-volume discretization of -A or -Abar. M is stored both
/// as diag/offdiag and through its face conductances g_f (f = 0..n), with
/// M_jj = g_j + g_{j+1} and M_{j,j+1} = -g_{j+1}.
template <typename Scalar>
struct StiffnessMatrix {
  Vector<Scalar> diag;
  Vector<Scalar> offdiag;
  Vector<Scalar> conductance;
  Vector<Scalar> weights;

  int size() const { return static_cast<int>(diag.size()); }

  /// Entry (i, j) of the discrete operator W^{-1} M.
  Scalar operator_entry(int i, int j) const {
    if (i == j) return diag[i] / weights[i];
    if (j == i + 1) return offdiag[i] / weights[i];
    if (i == j + 1) return offdiag[j] / weights[i];
    return Scalar(0);
  }

  template <typename Derived>
  Vector<Scalar> apply(const Eigen::MatrixBase<Derived>& v) const {
    const int n = size();
    Vector<Scalar> out = diag.cwiseProduct(v);
    if (n > 1) {
      out.head(n - 1) += offdiag.cwiseProduct(v.tail(n - 1));
      out.tail(n - 1) += offdiag.cwiseProduct(v.head(n - 1));
    }
    return out;
  }

  /// v^T M v evaluated as a sum of non-negative face contributions.
  template <typename Derived>
  Scalar energy(const Eigen::MatrixBase<Derived>& v) const {
    const int n = size();
    Scalar e = conductance[0] * v[0] * v[0] + conductance[n] * v[n - 1] * v[n - 1];
    for (int f = 1; f < n; ++f) {
      const Scalar d = v[f] - v[f - 1];
      e += conductance[f] * d * d;
    }
    return e;
  }

  Matrix<Scalar> dense() const {
    const int n = size();
    Matrix<Scalar> m = Matrix<Scalar>::Zero(n, n);
    for (int j = 0; j < n; ++j) m(j, j) = diag[j];
    for (int j = 0; j + 1 < n; ++j) m(j, j + 1) = m(j + 1, j) = offdiag[j];
    return m;
  }
};

template <typename Scalar>
StiffnessMatrix<Scalar> assemble_operator(const Grid<Scalar>& grid, const OperatorSpec& spec) {
  using std::pow;
  spec.validate();
  const int n = grid.n;
  require(n >= 2, "assemble_operator needs at least two cells");
  const Scalar alpha(spec.exponent());
  const bool degenerate = spec.kind == OperatorKind::Degenerate;

  StiffnessMatrix<Scalar> m;
  m.weights = grid.weights;
  m.conductance.resize(n + 1);

  // Interior faces: face-evaluated x^alpha over the centre spacing.
  for (int f = 1; f < n; ++f) {
    const Scalar kappa = degenerate ? Scalar(pow(grid.faces[f], alpha)) : Scalar(1);
    m.conductance[f] = kappa / (grid.centers[f] - grid.centers[f - 1]);
  }
  // x = 1: Dirichlet, kappa(1) = 1.
  m.conductance[n] = Scalar(1) / (Scalar(1) - grid.centers[n - 1]);
  // x = 0: the half cell (0, c_0) carries the exact conductance of the profile
  // solving (x^alpha v')' = 0 with v(0) = 0, namely 1 / int_0^{c_0} x^{-alpha} dx.
  // Zero flux when the strong condition applies.
  if (spec.bc_left == LeftBoundary::FluxStrong) {
    m.conductance[0] = Scalar(0);
  } else {
    const Scalar one_minus = Scalar(1) - alpha;
    m.conductance[0] = one_minus / Scalar(pow(grid.centers[0], one_minus));
  }

  m.diag = m.conductance.head(n) + m.conductance.tail(n);
  m.offdiag = -m.conductance.segment(1, n - 1);
  return m;
}

}  // namespace nullctl

#endif  // NULLCTL_OPERATOR_HPP
