#include "nullctl/setup.hpp"

#include "nullctl/core.hpp"

#include <cmath>
#include <utility>

namespace nullctl {

SwitchingSetup SwitchingSetup::alternating(double T, IntervalSet G1, IntervalSet G2, IntervalSet E) {
  SwitchingSetup s;
  s.T = T;
  s.G1 = std::move(G1);
  s.G2 = std::move(G2);
  s.F = E.complement(0.0, T);
  s.E = std::move(E);
  s.mode = SwitchingMode::AlternatingIntervals;
  return s;
}

SwitchingSetup SwitchingSetup::shared(double T, IntervalSet G1, IntervalSet G2, IntervalSet E) {
  SwitchingSetup s;
  s.T = T;
  s.G1 = std::move(G1);
  s.G2 = std::move(G2);
  s.E = std::move(E);
  s.mode = SwitchingMode::SharedTimeSet;
  return s;
}

void SwitchingSetup::validate_geometry() const {
  require(std::isfinite(T) && T > 0.0, "horizon T must be positive");
  require(G1.within(0.0, 1.0) && G2.within(0.0, 1.0), "G1 and G2 must lie inside (0,1)");
  require(G1.disjoint_from(G2), "G1 and G2 must be disjoint");
  require(E.within(0.0, T) && F.within(0.0, T), "E and F must lie inside (0,T)");
  require(E.disjoint_from(F), "E and F must be disjoint");
}

void SwitchingSetup::validate() const {
  validate_geometry();
  if (mode == SwitchingMode::SharedTimeSet) {
    require(E.measure() > 0.0, "the shared time set E must have positive measure");
  } else {
    require(std::abs(E.measure() + F.measure() - T) <= 1e-12 * T,
            "E and F must cover (0,T) up to measure zero");
  }
}

}  // namespace nullctl
