#ifndef NULLCTL_COEFFICIENTS_HPP
#define NULLCTL_COEFFICIENTS_HPP

#include <utility>
#include <vector>

namespace nullctl {

/// Right-continuous step function of t: values[i] on [breaks[i-1], breaks[i]),
/// with breaks[-1] = -inf and breaks[size] = +inf.
class PiecewiseConstant {
 public:
  PiecewiseConstant() : values_{0.0} {}
  PiecewiseConstant(std::vector<double> breaks, std::vector<double> values);

  static PiecewiseConstant constant(double v) { return PiecewiseConstant({}, {v}); }

  double operator()(double t) const;
  double sup_norm() const;
  /// (min, max) of the function over the open interval (lo, hi).
  std::pair<double, double> range_over(double lo, double hi) const;

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
};

/// The coupling matrix (a b; c d) of the forward system.
struct CouplingCoefficients {
  PiecewiseConstant a, b, c, d;

  static CouplingCoefficients constant(double a, double b, double c, double d) {
    return {PiecewiseConstant::constant(a), PiecewiseConstant::constant(b),
            PiecewiseConstant::constant(c), PiecewiseConstant::constant(d)};
  }

  /// 2 max(|a|, |d|) + |b| + |c| + 1 in sup norms.
  double tau() const;
};

}  // namespace nullctl

#endif  // NULLCTL_COEFFICIENTS_HPP
