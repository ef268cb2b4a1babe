#include "nullctl/coefficients.hpp"
#include "nullctl/core.hpp"
#include "nullctl/intervals.hpp"
#include "nullctl/setup.hpp"

#include <doctest.h>

#include <cmath>

using namespace nullctl;

TEST_SUITE("intervals") {

TEST_CASE("interval sets merge touching pieces and reject overlaps") {
  const IntervalSet s({{0.5, 0.7}, {0.1, 0.2}, {0.2, 0.3}});
  REQUIRE(s.size() == 2);
  CHECK(s.pieces()[0].lo == 0.1);
  CHECK(s.pieces()[0].hi == 0.3);
  CHECK(s.measure() == doctest::Approx(0.4).epsilon(1e-15));
  CHECK_THROWS_AS(IntervalSet({{0.1, 0.3}, {0.2, 0.4}}), ValidationError);
  CHECK_THROWS_AS(IntervalSet({{0.3, 0.1}}), ValidationError);
}

TEST_CASE("membership is open and overlap clips") {
  const IntervalSet s({{0.1, 0.3}, {0.5, 0.7}});
  CHECK(s.contains(0.2));
  CHECK_FALSE(s.contains(0.1));
  CHECK_FALSE(s.contains(0.4));
  CHECK(s.overlap(0.0, 1.0) == doctest::Approx(0.4));
  CHECK(s.overlap(0.25, 0.6) == doctest::Approx(0.15));
  CHECK(s.overlap(0.3, 0.5) == 0.0);
  const IntervalSet c = s.complement(0.0, 1.0);
  REQUIRE(c.size() == 3);
  CHECK(c.measure() == doctest::Approx(0.6));
  CHECK(c.disjoint_from(s));
  CHECK(s.intersect(0.2, 0.6).measure() == doctest::Approx(0.2));
  CHECK(s.within(0.0, 1.0));
  CHECK_FALSE(s.within(0.2, 1.0));
  CHECK(s.min_piece_length() == doctest::Approx(0.2));
}

TEST_CASE("fat Cantor approximants have 2^m pieces and the expected measure") {
  for (int m = 0; m <= 8; ++m) {
    const IntervalSet s = IntervalSet::fat_cantor(0.0, 2.0, m);
    CHECK(s.size() == (std::size_t{1} << m));
    // Removed length after m steps: (L/2)(1 - 2^-m).
    CHECK(s.measure() == doctest::Approx(1.0 + std::ldexp(1.0, -m)).epsilon(1e-12));
    CHECK(s.within(0.0, 2.0));
  }
  CHECK(IntervalSet::fat_cantor(0.0, 1.0, 3).contains(0.01));
  CHECK_FALSE(IntervalSet::fat_cantor(0.0, 1.0, 3).contains(0.5));
}

TEST_CASE("piecewise constant coefficients are right-continuous") {
  const PiecewiseConstant f({0.25, 0.6}, {0.5, 1.0, -1.5});
  CHECK(f(0.0) == 0.5);
  CHECK(f(0.25) == 1.0);
  CHECK(f(0.5999) == 1.0);
  CHECK(f(0.6) == -1.5);
  CHECK(f.sup_norm() == 1.5);
  const auto [lo, hi] = f.range_over(0.1, 0.5);
  CHECK(lo == 0.5);
  CHECK(hi == 1.0);
  const auto [lo2, hi2] = f.range_over(0.25, 0.6);
  CHECK(lo2 == 1.0);
  CHECK(hi2 == 1.0);
  CHECK_THROWS_AS(PiecewiseConstant({0.5, 0.2}, {1.0, 2.0, 3.0}), ValidationError);
  CHECK_THROWS_AS(PiecewiseConstant({0.5}, {1.0}), ValidationError);
}

TEST_CASE("coupling tau") {
  const CouplingCoefficients c = CouplingCoefficients::constant(0.5, -0.25, 0.25, -0.75);
  CHECK(c.tau() == doctest::Approx(2 * 0.75 + 0.25 + 0.25 + 1.0));
}

TEST_CASE("switching setups") {
  const IntervalSet g1 = IntervalSet::single(0.1, 0.4), g2 = IntervalSet::single(0.6, 0.9);
  const SwitchingSetup alt = SwitchingSetup::alternating(2.0, g1, g2, IntervalSet({{0.0, 0.5}, {1.0, 1.5}}));
  alt.validate();
  CHECK(alt.F.measure() == doctest::Approx(1.0));
  CHECK(alt.E.disjoint_from(alt.F));
  CHECK(&alt.z_times() == &alt.F);

  const SwitchingSetup shared = SwitchingSetup::shared(1.0, g1, g2, IntervalSet::single(0.2, 0.5));
  shared.validate();
  CHECK(&shared.z_times() == &shared.E);

  CHECK_THROWS_AS(SwitchingSetup::alternating(1.0, g1, IntervalSet::single(0.3, 0.5),
                                              IntervalSet::single(0, 1)).validate(),
                  ValidationError);
  CHECK_THROWS_AS(SwitchingSetup::alternating(1.0, IntervalSet::single(0.5, 1.2), g2,
                                              IntervalSet::single(0, 1)).validate(),
                  ValidationError);
  CHECK_THROWS_AS(SwitchingSetup::shared(1.0, g1, g2, IntervalSet()).validate(), ValidationError);
  CHECK_THROWS_AS(SwitchingSetup::shared(1.0, g1, g2, IntervalSet::single(0.5, 1.5)).validate(),
                  ValidationError);
}

}
