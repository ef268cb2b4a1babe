#ifndef NULLCTL_MULTIPRECISION_HPP
#define NULLCTL_MULTIPRECISION_HPP

// 100-digit MPFR scalar usable inside Eigen dense types. Needed wherever the
// quantities of interest fall below double precision (sharp spectral
// constants reach 1e50 and beyond within twenty modes).

#include <boost/multiprecision/mpfr.hpp>
#include <Eigen/Core>

#include <limits>

namespace nullctl {

using Mp = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<100>,
                                         boost::multiprecision::et_off>;

}  // namespace nullctl

namespace Eigen {

template <>
struct NumTraits<nullctl::Mp> : GenericNumTraits<nullctl::Mp> {
  using Mp = nullctl::Mp;
  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 10,
    MulCost = 40
  };
  using Real = Mp;
  using NonInteger = Mp;
  using Literal = Mp;
  using Nested = Mp;

  static Mp epsilon() { return std::numeric_limits<Mp>::epsilon(); }
  static Mp dummy_precision() { return Mp(1000) * epsilon(); }
  static Mp highest() { return std::numeric_limits<Mp>::max(); }
  static Mp lowest() { return std::numeric_limits<Mp>::lowest(); }
  static Mp infinity() { return std::numeric_limits<Mp>::infinity(); }
  static Mp quiet_NaN() { return std::numeric_limits<Mp>::quiet_NaN(); }
  static int digits10() { return std::numeric_limits<Mp>::digits10; }
  static int digits() { return std::numeric_limits<Mp>::digits; }
};

}  // namespace Eigen

#endif  // NULLCTL_MULTIPRECISION_HPP
