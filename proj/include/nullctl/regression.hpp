#ifndef NULLCTL_REGRESSION_HPP
#define NULLCTL_REGRESSION_HPP

#include "nullctl/core.hpp"

#include <cmath>
#include <vector>

namespace nullctl {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
};

/// Ordinary least squares y ~ intercept + slope * x.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "fit_line: x and y lengths differ");
  require(x.size() >= 2, "fit_line: need at least two points");
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0 && std::isfinite(sxx), "fit_line: regressor has no spread");

  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.rms_residual = std::sqrt(ss_res / m);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace nullctl

#endif  // NULLCTL_REGRESSION_HPP
