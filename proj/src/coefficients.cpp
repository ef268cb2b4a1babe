#include "nullctl/coefficients.hpp"

#include "nullctl/core.hpp"

#include <algorithm>
#include <cmath>

namespace nullctl {

PiecewiseConstant::PiecewiseConstant(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  require(values_.size() == breaks_.size() + 1,
          "piecewise constant needs one more value than breakpoints");
  for (double v : values_) require(std::isfinite(v), "coefficient values must be finite");
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    require(std::isfinite(breaks_[i]), "breakpoints must be finite");
    if (i > 0) require(breaks_[i] > breaks_[i - 1], "breakpoints must be strictly increasing");
  }
}

double PiecewiseConstant::operator()(double t) const {
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

double PiecewiseConstant::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::pair<double, double> PiecewiseConstant::range_over(double lo, double hi) const {
  require(lo < hi, "range_over needs lo < hi");
  double mn = (*this)(lo), mx = mn;
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    if (breaks_[i] > lo && breaks_[i] < hi) {
      mn = std::min(mn, values_[i + 1]);
      mx = std::max(mx, values_[i + 1]);
    }
  }
  return {mn, mx};
}

double CouplingCoefficients::tau() const {
  return 2.0 * std::max(a.sup_norm(), d.sup_norm()) + b.sup_norm() + c.sup_norm() + 1.0;
}

}  // namespace nullctl
