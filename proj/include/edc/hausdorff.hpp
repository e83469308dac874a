#pragma once
// Hausdorff distances between finite sets and interval unions on the line, and
// the hole-based separation certificate.

#include "edc/point_set.hpp"

#include <algorithm>
#include <span>

namespace edc {

namespace detail {

/// sup_{a in A} d(a, B) for sorted, non-empty A and B, by a forward sweep.
inline Rational directed_hausdorff(std::span<const Rational> a, std::span<const Rational> b) {
  Rational worst(0);
  Rational gap;
  std::size_t j = 0;
  for (const auto& x : a) {
    while (j + 1 < b.size() && b[j + 1] <= x) ++j;
    // b[j] is the last point <= x (or the first point when all exceed x).
    if (b[j] >= x) {
      gap = b[j] - x;
    } else if (j + 1 < b.size()) {
      Rational left = x - b[j];
      Rational right = b[j + 1] - x;
      gap = left < right ? left : right;
    } else {
      gap = x - b[j];
    }
    if (gap > worst) worst = gap;
  }
  return worst;
}

}  // namespace detail

/// Exact Hausdorff distance between two finite sets.
inline Rational hausdorff_finite(const FinitePointSet& a, const FinitePointSet& b) {
  if (a.empty() || b.empty()) throw validation_error("empty set has no Hausdorff distance");
  Rational ab = detail::directed_hausdorff(a.points(), b.points());
  Rational ba = detail::directed_hausdorff(b.points(), a.points());
  return ab > ba ? ab : ba;
}

/// Checks that intervals are well formed, sorted and pairwise disjoint.
inline void require_disjoint_sorted(std::span<const Interval> js) {
  for (std::size_t i = 0; i < js.size(); ++i) {
    if (js[i].lo > js[i].hi) throw validation_error("interval with lo > hi");
    if (i > 0 && !(js[i - 1].hi < js[i].lo)) throw validation_error("intervals not disjoint and sorted");
  }
}

/// Exact Hausdorff distance between a finite set and a finite union of disjoint closed intervals.
inline Rational hausdorff_vs_intervals(const FinitePointSet& a, std::span<const Interval> js) {
  if (a.empty() || js.empty()) throw validation_error("empty set has no Hausdorff distance");
  require_disjoint_sorted(js);
  const auto pts = a.points();

  // Points to the union.
  Rational worst(0);
  std::size_t k = 0;
  Rational d;
  for (const auto& x : pts) {
    while (k + 1 < js.size() && js[k + 1].lo <= x) ++k;
    if (js[k].contains(x)) continue;
    if (x < js[k].lo) {
      d = js[k].lo - x;
    } else {
      d = x - js[k].hi;
      if (k + 1 < js.size()) {
        Rational r = js[k + 1].lo - x;
        if (r < d) d = r;
      }
    }
    if (d > worst) worst = d;
  }

  // Union to the points: inside each gap (u,v) of A the distance min(y-u, v-y) peaks at the
  // midpoint, clamped to the part of the interval that lies in the gap.
  for (const auto& J : js) {
    auto first = std::lower_bound(pts.begin(), pts.end(), J.lo);
    auto last = std::upper_bound(first, pts.end(), J.hi);
    // Gaps touching J run from the point before `first` up to the point at `last`.
    auto it = first;
    bool has_left = it != pts.begin();
    const Rational* u = has_left ? &*(it - 1) : nullptr;
    while (true) {
      const Rational* v = it != pts.end() ? &*it : nullptr;
      Rational lo = J.lo;
      Rational hi = J.hi;
      if (u && *u > lo) lo = *u;
      if (v && *v < hi) hi = *v;
      if (lo <= hi) {
        Rational here;
        if (!u) {
          here = *v - lo;
        } else if (!v) {
          here = hi - *u;
        } else {
          Rational mid = (*u + *v) / 2;
          if (mid < lo) mid = lo;
          if (mid > hi) mid = hi;
          Rational l = mid - *u;
          Rational r = *v - mid;
          here = l < r ? l : r;
        }
        if (here > worst) worst = here;
      }
      if (it == last || it == pts.end()) break;
      u = &*it;
      ++it;
    }
  }
  return worst;
}

/// Separation certificate for two "interval with a hole" configurations.
///
/// Returns true only when the five inequalities hold (outer endpoints eps-close, both holes
/// longer than 2 eps, some hole endpoint moved by more than eps) AND one boundary point of a
/// hole sits more than eps deep inside the other hole. The inequalities alone do not bound the
/// distance: with holes [0.3,0.7] and [0.65,0.9] at eps = 0.1, the sets {0.3,0.7,0.85} and
/// {0.3,0.65,0.9} respect both hole structures yet are only 0.05 apart. With the depth condition
/// any closed F, F' that contain the hole boundaries and avoid the hole interiors satisfy
/// d_H(F, F') > eps.
inline bool separation_test(const HoleConfig& f, const HoleConfig& g, const Rational& eps) {
  if (eps <= 0) throw validation_error("separation_test needs eps > 0");
  const auto& [a, b] = f.outer;
  const auto& [c, d] = f.hole;
  const auto& [a2, b2] = g.outer;
  const auto& [c2, d2] = g.hole;
  if (abs(a - a2) > eps || abs(b - b2) > eps) return false;
  if (!(d - c > 2 * eps) || !(d2 - c2 > 2 * eps)) return false;
  if (!(abs(c - c2) > eps || abs(d - d2) > eps)) return false;
  auto deep_inside = [&eps](const Rational& x, const Interval& h) { return h.lo + eps < x && x < h.hi - eps; };
  return deep_inside(c, g.hole) || deep_inside(d, g.hole) || deep_inside(c2, f.hole) || deep_inside(d2, f.hole);
}

}  // namespace edc
