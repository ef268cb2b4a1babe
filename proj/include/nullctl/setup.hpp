#ifndef NULLCTL_SETUP_HPP
#define NULLCTL_SETUP_HPP

#include "nullctl/intervals.hpp"

namespace nullctl {

enum class SwitchingMode {
  SharedTimeSet,         // both controls gated by E
  AlternatingIntervals,  // y-control on E, z-control on F
};

/// Space regions G1, G2 inside (0,1) and time sets E, F inside (0,T).
struct SwitchingSetup {
  double T = 1.0;
  IntervalSet G1, G2;
  IntervalSet E, F;
  SwitchingMode mode = SwitchingMode::AlternatingIntervals;

  /// Alternating setup with F the complement of E in (0,T).
  static SwitchingSetup alternating(double T, IntervalSet G1, IntervalSet G2, IntervalSet E);
  static SwitchingSetup shared(double T, IntervalSet G1, IntervalSet G2, IntervalSet E);

  /// Region containment and disjointness only.
  void validate_geometry() const;
  /// Geometry plus the mode conditions: E and F partition (0,T) in the
  /// alternating mode, |E| > 0 in the shared mode.
  void validate() const;

  /// Time set gating the y-control (E) and the z-control (F, or E when shared).
  const IntervalSet& y_times() const { return E; }
  const IntervalSet& z_times() const { return mode == SwitchingMode::SharedTimeSet ? E : F; }
};

}  // namespace nullctl

#endif  // NULLCTL_SETUP_HPP
