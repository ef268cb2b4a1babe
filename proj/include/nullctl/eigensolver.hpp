#ifndef NULLCTL_EIGENSOLVER_HPP
#define NULLCTL_EIGENSOLVER_HPP

#include "nullctl/core.hpp"
#include "nullctl/grid.hpp"
#include "nullctl/operator.hpp"
#include "nullctl/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace nullctl {

/// The k smallest eigenpairs of (M, W): ascending values, W-orthonormal columns.
template <typename Scalar>
struct EigenBasis {
  Vector<Scalar> values;
  Matrix<Scalar> vectors;  // n x k
  Vector<Scalar> weights;

  int size() const { return static_cast<int>(values.size()); }
  int dimension() const { return static_cast<int>(vectors.rows()); }

  /// Coefficients <v, e_i>_W for i < k.
  template <typename Derived>
  Vector<Scalar> coefficients(const Eigen::MatrixBase<Derived>& v, int k) const {
    require(v.size() == dimension(), "coefficients: vector length mismatch");
    require(k >= 0 && k <= size(), "coefficients: k exceeds the basis size");
    return vectors.leftCols(k).transpose() * weights.cwiseProduct(v);
  }

  EigenBasis<double> to_double() const {
    return {values.template cast<double>(), vectors.template cast<double>(),
            weights.template cast<double>()};
  }
};

namespace detail {

/// Symmetric tridiagonal S = W^{-1/2} M W^{-1/2}.
template <typename Scalar>
struct SymmetricTridiagonal {
  Vector<Scalar> diag;
  Vector<Scalar> off;

  int size() const { return static_cast<int>(diag.size()); }

  /// Number of eigenvalues strictly below x (Sturm count via LDL^T pivots).
  int count_below(const Scalar& x, const Scalar& pivot_floor) const {
    using std::abs;
    int count = 0;
    Scalar q = diag[0] - x;
    for (int i = 0;; ++i) {
      if (abs(q) < pivot_floor) q = -pivot_floor;
      if (q < Scalar(0)) ++count;
      if (i + 1 == size()) break;
      q = diag[i + 1] - x - off[i] * off[i] / q;
    }
    return count;
  }
};

/// Gaussian elimination with partial pivoting for S - shift * I.
template <typename Scalar>
class ShiftedTridiagonalLU {
 public:
  ShiftedTridiagonalLU(const SymmetricTridiagonal<Scalar>& t, const Scalar& shift,
                       const Scalar& pivot_floor) {
    using std::abs;
    const int n = t.size();
    d_ = t.diag.array() - shift;
    dl_ = t.off;
    du_ = t.off;
    du2_ = Vector<Scalar>::Zero(std::max(n - 2, 0));
    swap_.assign(std::max(n - 1, 0), false);
    for (int i = 0; i + 1 < n; ++i) {
      if (abs(d_[i]) >= abs(dl_[i])) {
        if (abs(d_[i]) < pivot_floor) d_[i] = pivot_floor;
        const Scalar fact = dl_[i] / d_[i];
        dl_[i] = fact;
        d_[i + 1] -= fact * du_[i];
      } else {
        const Scalar fact = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = fact;
        const Scalar temp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = temp - fact * d_[i + 1];
        if (i + 2 < n) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        swap_[i] = true;
      }
    }
    if (abs(d_[n - 1]) < pivot_floor) d_[n - 1] = pivot_floor;
  }

  void solve_in_place(Vector<Scalar>& b) const {
    const int n = static_cast<int>(d_.size());
    for (int i = 0; i + 1 < n; ++i) {
      if (!swap_[i]) {
        b[i + 1] -= dl_[i] * b[i];
      } else {
        const Scalar temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl_[i] * b[i];
      }
    }
    b[n - 1] /= d_[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
    for (int i = n - 3; i >= 0; --i) {
      b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
    }
  }

 private:
  Vector<Scalar> d_, dl_, du_, du2_;
  std::vector<bool> swap_;
};

}  // namespace detail

/// k smallest eigenpairs of the generalized problem M v = lambda W v.
///
/// Eigenvalues are isolated by Sturm-sequence bisection on W^{-1/2} M W^{-1/2}
/// to full working precision, eigenvectors come from inverse iteration with the
/// converged shift, and the reported eigenvalue is the Rayleigh quotient in
/// face-flux form (a sum of non-negative terms, accurate on graded meshes).
/// Each vector is W-normalized and signed so its first significant component
/// is positive.
template <typename Scalar>
EigenBasis<Scalar> eigendecompose(const StiffnessMatrix<Scalar>& mat, int k) {
  using std::abs;
  using std::max;
  using std::sqrt;
  const int n = mat.size();
  require(k >= 1 && k <= n, "eigendecompose: need 1 <= k <= n");

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Vector<Scalar> inv_sqrt_w = mat.weights.cwiseSqrt().cwiseInverse();
  detail::SymmetricTridiagonal<Scalar> t;
  t.diag = mat.diag.cwiseProduct(inv_sqrt_w).cwiseProduct(inv_sqrt_w);
  t.off = mat.offdiag.cwiseProduct(inv_sqrt_w.head(n - 1))
              .cwiseProduct(inv_sqrt_w.tail(n - 1));

  Scalar lower(0), upper(0);
  {
    Scalar lo = t.diag[0], hi = t.diag[0];
    for (int i = 0; i < n; ++i) {
      Scalar r(0);
      if (i > 0) r += abs(t.off[i - 1]);
      if (i + 1 < n) r += abs(t.off[i]);
      lo = std::min<Scalar>(lo, t.diag[i] - r);
      hi = max<Scalar>(hi, t.diag[i] + r);
    }
    lower = lo;
    upper = hi;
  }
  const Scalar scale = max<Scalar>(abs(lower), abs(upper));
  const Scalar pivot_floor = eps * eps * scale;

  const int max_bisection = 4 * std::numeric_limits<Scalar>::digits + 64;
  EigenBasis<Scalar> basis;
  basis.values.resize(k);
  basis.vectors.resize(n, k);
  basis.weights = mat.weights;

  Scalar left = lower;
  for (int i = 0; i < k; ++i) {
    Scalar lo = left, hi = upper;
    int iterations = 0;
    while (hi - lo > Scalar(2) * eps * max<Scalar>(abs(lo), abs(hi)) + pivot_floor) {
      if (++iterations > max_bisection) {
        std::ostringstream msg;
        msg << "eigendecompose: bisection for eigenvalue " << i + 1 << " did not converge";
        throw ConvergenceError(msg.str(), iterations, static_cast<double>(hi - lo));
      }
      const Scalar mid = (lo + hi) / Scalar(2);
      if (mid <= lo || mid >= hi) break;
      if (t.count_below(mid, pivot_floor) > i) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    left = lo;
    const Scalar shift = (lo + hi) / Scalar(2);

    // Inverse iteration from a fixed start, orthogonalized against earlier
    // vectors of nearby eigenvalues.
    detail::ShiftedTridiagonalLU<Scalar> lu(t, shift, pivot_floor * Scalar(n));
    Vector<Scalar> q(n);
    for (int j = 0; j < n; ++j) q[j] = Scalar(1) + Scalar(j % 7) / Scalar(13);
    q /= q.norm();
    std::vector<int> cluster;
    for (int p = 0; p < i; ++p) {
      if (abs(basis.values[p] - shift) <= Scalar(1e-3) * abs(shift)) cluster.push_back(p);
    }
    for (int it = 0; it < 4; ++it) {
      lu.solve_in_place(q);
      for (int p : cluster) {
        const Vector<Scalar> qp = basis.vectors.col(p).cwiseQuotient(inv_sqrt_w);
        q -= qp.dot(q) * qp;
      }
      const Scalar norm = q.norm();
      if (!(norm > Scalar(0))) {
        throw ConvergenceError("eigendecompose: inverse iteration collapsed", it, 0.0);
      }
      q /= norm;
    }

    Vector<Scalar> v = q.cwiseProduct(inv_sqrt_w);
    const Scalar vmax = v.cwiseAbs().maxCoeff();
    for (int j = 0; j < n; ++j) {
      if (abs(v[j]) > Scalar(1e-10) * vmax) {
        if (v[j] < Scalar(0)) v = -v;
        break;
      }
    }
    const Scalar norm_w = sqrt((mat.weights.array() * v.array().square()).sum());
    v /= norm_w;
    const Scalar rayleigh = mat.energy(v);

    const Scalar residual = (mat.apply(v) - rayleigh * mat.weights.cwiseProduct(v)).norm();
    if (!(residual <= Scalar(1e-8) * abs(rayleigh))) {
      std::ostringstream msg;
      msg << "eigendecompose: residual " << static_cast<double>(residual) << " for eigenvalue "
          << i + 1 << " exceeds 1e-8 relative";
      throw ConvergenceError(msg.str(), 4, static_cast<double>(residual));
    }
    basis.values[i] = rayleigh;
    basis.vectors.col(i) = v;
  }
  return basis;
}

struct GrowthReport {
  double exponent = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;  // RMS residual of the log-log fit
  int first = 0;          // 1-based mode range used
  int last = 0;
};

/// Least-squares fit log(lambda_k) = log(prefactor) + exponent * log(k) over
/// modes first..last (1-based, inclusive).
template <typename Scalar>
GrowthReport eigenvalue_growth_fit(const Vector<Scalar>& values, int first, int last) {
  require(first >= 1 && last <= values.size() && first <= last,
          "eigenvalue_growth_fit: mode range outside the available eigenvalues");
  require(last - first + 1 >= 10, "eigenvalue_growth_fit: need at least 10 eigenvalues");
  std::vector<double> x, y;
  for (int kk = first; kk <= last; ++kk) {
    const double lam = static_cast<double>(values[kk - 1]);
    require(lam > 0.0, "eigenvalue_growth_fit: eigenvalues must be positive");
    x.push_back(std::log(static_cast<double>(kk)));
    y.push_back(std::log(lam));
  }
  const LinearFit fit = fit_line(x, y);
  return {fit.slope, std::exp(fit.intercept), fit.rms_residual, first, last};
}

template <typename Scalar>
GrowthReport eigenvalue_growth_fit(const EigenBasis<Scalar>& basis) {
  return eigenvalue_growth_fit(basis.values, 1, basis.size());
}

}  // namespace nullctl

#endif  // NULLCTL_EIGENSOLVER_HPP
