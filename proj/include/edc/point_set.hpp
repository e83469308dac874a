#pragma once

#include "edc/rational.hpp"

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

namespace edc {

struct Interval {
  Rational lo;
  Rational hi;

  Rational length() const { return hi - lo; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Strictly increasing finite sequence of rationals in [0,1].
class FinitePointSet {
 public:
  FinitePointSet() = default;

  /// Sorts and deduplicates; rejects points outside [0,1].
  static FinitePointSet from(std::vector<Rational> pts) {
    for (const auto& p : pts) {
      if (p < 0 || p > 1) throw validation_error("point " + to_text(p) + " outside [0,1]");
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    FinitePointSet s;
    s.points_ = std::move(pts);
    return s;
  }

  /// Caller guarantees the invariant (used on hot paths that already produce sorted output).
  static FinitePointSet from_sorted_unchecked(std::vector<Rational> pts) {
    FinitePointSet s;
    s.points_ = std::move(pts);
    return s;
  }

  std::span<const Rational> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Rational& operator[](std::size_t i) const { return points_[i]; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  friend bool operator==(const FinitePointSet&, const FinitePointSet&) = default;

 private:
  std::vector<Rational> points_;
};

/// Outer interval [a,b] with a hole [c,d] strictly inside it.
struct HoleConfig {
  Interval outer;
  Interval hole;

  static HoleConfig make(Rational a, Rational b, Rational c, Rational d) {
    if (!(a < c && c <= d && d < b)) {
      throw validation_error("hole [" + to_text(c) + "," + to_text(d) + "] not inside the interior of [" + to_text(a) +
                             "," + to_text(b) + "]");
    }
    return {{std::move(a), std::move(b)}, {std::move(c), std::move(d)}};
  }
};

}  // namespace edc
