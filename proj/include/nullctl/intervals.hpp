#ifndef NULLCTL_INTERVALS_HPP
#define NULLCTL_INTERVALS_HPP

#include <vector>

namespace nullctl {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return lo < x && x < hi; }
};

/// Finite union of disjoint open intervals, kept sorted. Used both for space
/// regions inside (0,1) and for time sets inside (0,T).
class IntervalSet {
 public:
  IntervalSet() = default;
  /// Throws ValidationError on empty/inverted or overlapping pieces. Touching
  /// pieces are merged.
  explicit IntervalSet(std::vector<Interval> pieces);

  static IntervalSet single(double lo, double hi) { return IntervalSet({{lo, hi}}); }

  /// Level-m Smith-Volterra-Cantor approximant of [lo, hi]: 2^m intervals.
  /// At step i the middle gap removed from each piece has length
  /// gap_scale * (hi - lo) / 4^i; gap_scale = 1 gives limiting measure (hi-lo)/2.
  static IntervalSet fat_cantor(double lo, double hi, int level, double gap_scale = 1.0);

  const std::vector<Interval>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  std::size_t size() const { return pieces_.size(); }

  double measure() const;
  bool contains(double x) const;
  /// |this ∩ (lo, hi)|
  double overlap(double lo, double hi) const;
  IntervalSet intersect(double lo, double hi) const;
  /// Complement within (lo, hi).
  IntervalSet complement(double lo, double hi) const;
  bool disjoint_from(const IntervalSet& other) const;
  bool within(double lo, double hi) const;
  double min_piece_length() const;

 private:
  std::vector<Interval> pieces_;
};

}  // namespace nullctl

#endif  // NULLCTL_INTERVALS_HPP
