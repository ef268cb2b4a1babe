#include "nullctl/intervals.hpp"

#include "nullctl/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nullctl {

IntervalSet::IntervalSet(std::vector<Interval> pieces) {
  for (const auto& p : pieces) {
    require(std::isfinite(p.lo) && std::isfinite(p.hi), "interval endpoints must be finite");
    require(p.lo < p.hi, "interval must have lo < hi");
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& p : pieces) {
    if (!pieces_.empty()) {
      require(p.lo >= pieces_.back().hi, "intervals must be disjoint");
      if (p.lo == pieces_.back().hi) {
        pieces_.back().hi = p.hi;
        continue;
      }
    }
    pieces_.push_back(p);
  }
}

IntervalSet IntervalSet::fat_cantor(double lo, double hi, int level, double gap_scale) {
  require(lo < hi, "fat Cantor base interval must be nonempty");
  require(level >= 0 && level <= 24, "fat Cantor level must lie in [0, 24]");
  require(gap_scale > 0.0 && gap_scale <= 1.0, "fat Cantor gap scale must lie in (0, 1]");
  std::vector<Interval> current{{lo, hi}};
  double gap = gap_scale * (hi - lo);
  for (int i = 1; i <= level; ++i) {
    gap /= 4.0;
    std::vector<Interval> next;
    next.reserve(current.size() * 2);
    for (const auto& piece : current) {
      const double mid = 0.5 * (piece.lo + piece.hi);
      next.push_back({piece.lo, mid - 0.5 * gap});
      next.push_back({mid + 0.5 * gap, piece.hi});
    }
    current = std::move(next);
  }
  return IntervalSet(std::move(current));
}

double IntervalSet::measure() const {
  double total = 0.0;
  for (const auto& p : pieces_) total += p.length();
  return total;
}

bool IntervalSet::contains(double x) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](double v, const Interval& p) { return v < p.lo; });
  if (it == pieces_.begin()) return false;
  return std::prev(it)->contains(x);
}

double IntervalSet::overlap(double lo, double hi) const {
  double total = 0.0;
  for (const auto& p : pieces_) total += std::max(0.0, std::min(hi, p.hi) - std::max(lo, p.lo));
  return total;
}

IntervalSet IntervalSet::intersect(double lo, double hi) const {
  std::vector<Interval> out;
  for (const auto& p : pieces_) {
    const double a = std::max(lo, p.lo);
    const double b = std::min(hi, p.hi);
    if (a < b) out.push_back({a, b});
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::complement(double lo, double hi) const {
  std::vector<Interval> out;
  double cursor = lo;
  for (const auto& p : pieces_) {
    if (p.hi <= lo || p.lo >= hi) continue;
    if (p.lo > cursor) out.push_back({cursor, p.lo});
    cursor = std::max(cursor, p.hi);
  }
  if (cursor < hi) out.push_back({cursor, hi});
  return IntervalSet(std::move(out));
}

bool IntervalSet::disjoint_from(const IntervalSet& other) const {
  for (const auto& p : pieces_) {
    if (other.overlap(p.lo, p.hi) > 0.0) return false;
  }
  return true;
}

bool IntervalSet::within(double lo, double hi) const {
  return pieces_.empty() || (pieces_.front().lo >= lo && pieces_.back().hi <= hi);
}

double IntervalSet::min_piece_length() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : pieces_) m = std::min(m, p.length());
  return m;
}

}  // namespace nullctl
