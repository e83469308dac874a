#pragma once
// Randomized central Cantor sets driven by a scaling function.
//
// Tree layout: the node for the word w_1..w_m sits at level m with index x = sum_j w_j 2^{j-1}.
// Index order is left-to-right position order, the children of x are 2x (left) and 2x+1
// (right), and the generating map phi_i sends node x at level m to node x + i 2^m at level m+1.
//
// The child/parent length ratio at node w_1..w_m is
//   rho + zeta * sum_{q=0}^{m} theta^q lambda_{w_1..w_q},
// i.e. every prefix of the word, the empty one included, contributes one i.i.d. factor.

#include "edc/budget.hpp"
#include "edc/hausdorff.hpp"
#include "edc/ifs.hpp"
#include "edc/rng.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace edc {

struct ScalingParams {
  Rational rho{1, 4};
  Rational theta{1, 2};
  Rational zeta{1, 20};
  std::uint64_t seed = 1;
  Distribution dist = Distribution::uniform(Rational(0), Rational(1));

  /// rho + zeta / (1 - theta), the largest possible ratio.
  Rational rate_upper() const { return rho + zeta / (1 - theta); }

  void check() const {
    if (!(rho > 0 && rho < 1)) throw validation_error("rho must lie in (0,1)");
    if (!(theta > rho && theta < 1)) throw validation_error("theta must lie in (rho,1)");
    if (!(zeta >= 0 && zeta < 1)) throw validation_error("zeta must lie in [0,1)");
    if (!(rate_upper() < Rational(1, 2))) {
      throw validation_error("rho + zeta/(1-theta) must stay below 1/2 so that children leave a hole");
    }
  }

  bool same_geometry(const ScalingParams& o) const { return rho == o.rho && theta == o.theta && zeta == o.zeta; }
};

/// k = 1 + log(theta) / log(rho).
inline double smoothness_k(const Rational& rho, const Rational& theta) {
  if (!(rho > 0 && rho < 1)) throw validation_error("rho must lie in (0,1)");
  if (!(theta > rho)) throw validation_error("theta must exceed rho (k would leave the covered range)");
  if (!(theta < 1)) throw validation_error("theta must be below 1");
  return 1 + std::log(to_double(theta)) / std::log(to_double(rho));
}

inline std::uint64_t prefix_bits(std::uint64_t x, unsigned q) {
  return q >= 64 ? x : (x & ((std::uint64_t{1} << q) - 1));
}

inline std::uint64_t word_bits(const Word& w) {
  if (w.size() > 63) throw validation_error("words longer than 63 symbols are not supported");
  std::uint64_t x = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w.symbols[j] > 1) throw validation_error("scaling sets use the alphabet {0,1}");
    x |= static_cast<std::uint64_t>(w.symbols[j]) << j;
  }
  return x;
}

inline Word word_of(std::uint64_t x, unsigned m) {
  Word w;
  for (unsigned j = 0; j < m; ++j) w.symbols.push_back(static_cast<unsigned>((x >> j) & 1U));
  return w;
}

class CkCantor {
 public:
  explicit CkCantor(ScalingParams p) : p_(std::move(p)) { p_.check(); }

  const ScalingParams& params() const { return p_; }
  double k() const { return smoothness_k(p_.rho, p_.theta); }

  /// lambda keyed by the word (bits, length); pure in (seed, word).
  Rational lambda(std::uint64_t bits, unsigned len) const {
    if (!overrides_.empty()) {
      if (auto it = overrides_.find({bits, len}); it != overrides_.end()) return it->second;
    }
    return p_.dist.sample(uniform_open_unit(p_.seed, StreamTag::Scaling, bits, len));
  }

  /// Copy with lambda at one word replaced; the value must stay inside (0,1).
  CkCantor with_override(const Word& w, Rational v) const {
    if (!(v > 0 && v < 1)) throw validation_error("lambda override outside (0,1)");
    CkCantor c = *this;
    c.overrides_[{word_bits(w), static_cast<unsigned>(w.size())}] = std::move(v);
    return c;
  }

  /// Truncated scaling value rho + zeta sum_{q=1}^{m} theta^{q-1} lambda_{w_1..w_{q-1}}.
  /// For m >= 1 this is the child ratio at the node w_1..w_{m-1}.
  Rational scaling_value(const Word& w) const {
    std::uint64_t x = word_bits(w);
    Rational s(0);
    Rational t(1);
    for (unsigned q = 1; q <= w.size(); ++q) {
      s += t * lambda(prefix_bits(x, q - 1), q - 1);
      t *= p_.theta;
    }
    return p_.rho + p_.zeta * s;
  }

  /// Child/parent ratio at the node (x, m).
  Rational node_ratio(std::uint64_t x, unsigned m) const {
    Rational s(0);
    Rational t(1);
    for (unsigned q = 0; q <= m; ++q) {
      s += t * lambda(prefix_bits(x, q), q);
      t *= p_.theta;
    }
    return p_.rho + p_.zeta * s;
  }

 private:
  ScalingParams p_;
  std::map<std::pair<std::uint64_t, unsigned>, Rational> overrides_;
};

/// Every level of the construction down to `depth`.
struct CkLevels {
  std::vector<std::vector<Interval>> levels;  // levels[m] has 2^m intervals in position order
  std::vector<std::vector<Rational>> ratios;  // ratios[m][x] for m < depth

  unsigned depth() const { return static_cast<unsigned>(levels.size() - 1); }

  FinitePointSet endpoints(unsigned m) const {
    std::vector<Rational> pts;
    pts.reserve(2 * levels[m].size());
    for (const auto& iv : levels[m]) {
      pts.push_back(iv.lo);
      pts.push_back(iv.hi);
    }
    return FinitePointSet::from_sorted_unchecked(std::move(pts));
  }

  /// Level m as a LevelSet with word labels.
  LevelSet level_set(unsigned m) const {
    LevelSet ls;
    ls.depth = m;
    ls.intervals = levels[m];
    for (std::uint64_t x = 0; x < levels[m].size(); ++x) ls.words.push_back(word_of(x, m));
    ls.endpoints = endpoints(m);
    return ls;
  }
};

inline CkLevels build_ck(const CkCantor& c, unsigned n, const Budget& budget = Budget::from_env()) {
  if (n > 40) throw budget_error("scaling set depth above 40 is not supported");
  budget.require_depth(n, 2, "scaling Cantor set at depth " + std::to_string(n));
  const auto& p = c.params();
  CkLevels out;
  out.levels.push_back({{Rational(0), Rational(1)}});
  // sums[x] = sum_{q<=m} theta^q lambda_{x|q}. The words x and x + 2^m of length m+1 extend the
  // word x of length m, so their sums add one term to sums[x].
  std::vector<Rational> sums{c.lambda(0, 0)};
  Rational tpow(1);
  for (unsigned m = 0; m < n; ++m) {
    const auto& cur = out.levels[m];
    const std::size_t count = cur.size();
    std::vector<Rational> ratio(count);
    std::vector<Interval> next;
    next.reserve(2 * cur.size());
    Rational len, child;
    for (std::uint64_t x = 0; x < cur.size(); ++x) {
      ratio[x] = p.rho + p.zeta * sums[x];
      len = cur[x].hi - cur[x].lo;
      child = ratio[x] * len;
      next.push_back({cur[x].lo, cur[x].lo + child});
      next.push_back({cur[x].hi - child, cur[x].hi});
    }
    out.ratios.push_back(std::move(ratio));
    out.levels.push_back(std::move(next));
    if (m + 1 < n) {
      tpow *= p.theta;
      std::vector<Rational> child_sums(2 * count);
      const std::uint64_t mask = (std::uint64_t{1} << m) - 1;
      for (std::uint64_t y = 0; y < child_sums.size(); ++y) child_sums[y] = sums[y & mask] + tpow * c.lambda(y, m + 1);
      sums = std::move(child_sums);
    }
  }
  return out;
}

/// log 2 / (-mean log ratio) over the constructed nodes.
inline double predicted_dimension(const CkLevels& t) {
  double sum = 0;
  std::size_t count = 0;
  for (const auto& level : t.ratios) {
    for (const auto& r : level) {
      sum += std::log(to_double(r));
      ++count;
    }
  }
  if (count == 0) throw validation_error("predicted dimension needs depth >= 1");
  return std::log(2.0) / (-sum / static_cast<double>(count));
}

struct DsMetric {
  unsigned n = 0;  // common prefix length
  Rational lower;  // rho^n
  Rational upper;  // (rho + zeta/(1-theta))^n
};

/// Bracket [rho^n, rate_upper^n] on d_S for two distinct words with common prefix length n.
inline DsMetric ds_bracket(const CkCantor& c, const Word& a, const Word& b) {
  if (a == b) throw validation_error("identical words have distance zero and no bracket");
  unsigned n = 0;
  while (n < a.size() && n < b.size() && a.symbols[n] == b.symbols[n]) ++n;
  const auto& p = c.params();
  return {n, powq(p.rho, n), powq(p.rate_upper(), n)};
}

/// Hole structure at node x of level m: I = J_x, H = gap between its two children.
inline HoleConfig node_hole(const CkLevels& t, unsigned m, std::uint64_t x) {
  const auto& I = t.levels[m][x];
  const auto& L = t.levels[m + 1][2 * x];
  const auto& R = t.levels[m + 1][2 * x + 1];
  return HoleConfig::make(I.lo, I.hi, L.hi, R.lo);
}

/// (4 + 2 rho^2) sup f.
inline double separation_constant(const ScalingParams& p) {
  double r = to_double(p.rho);
  return (4 + 2 * r * r) * p.dist.sup_density();
}

/// floor(log(C eps / zeta) / log(rho theta)).
inline int separation_depth(const ScalingParams& p, const Rational& eps) {
  if (!(p.zeta > 0)) throw validation_error("separation needs zeta > 0");
  double arg = separation_constant(p) * to_double(eps) / to_double(p.zeta);
  double v = std::floor(std::log(arg) / std::log(to_double(p.rho * p.theta)));
  if (v < 0) throw validation_error("eps too large: separation depth would be negative");
  return static_cast<int>(v);
}

struct SeparationEvent {
  bool separated = false;
  bool threshold_hit = false;
  unsigned word_length = 0;  // length of the first word over the threshold
  unsigned hole_level = 0;   // level of the node whose hole certified the distance
  std::uint64_t hole_index = 0;
};

/// Threshold scan |lambda_w - lambda'_w| > (rho theta)^{-p} (4 + 2 rho^2) eps / zeta over words of
/// length p <= p_bar. A hit is reported as separated only once a node hole at level <= p+1
/// certifies d_H > eps through separation_test.
inline SeparationEvent separation_event_detail(const CkCantor& a, const CkCantor& b, const Rational& eps) {
  if (!a.params().same_geometry(b.params())) throw validation_error("separation_event needs shared (rho, theta, zeta)");
  if (!(eps > 0)) throw validation_error("separation_event needs eps > 0");
  const auto& p = a.params();
  int pbar = separation_depth(p, eps);
  double r = to_double(p.rho);
  double base = (4 + 2 * r * r) * to_double(eps) / to_double(p.zeta);
  double rt = to_double(p.rho * p.theta);
  SeparationEvent ev;
  for (int len = 0; len <= pbar && !ev.threshold_hit; ++len) {
    double thr = base / std::pow(rt, len);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << len); ++x) {
      double d = std::fabs(to_double(a.lambda(x, static_cast<unsigned>(len)) - b.lambda(x, static_cast<unsigned>(len))));
      if (d > thr) {
        ev.threshold_hit = true;
        ev.word_length = static_cast<unsigned>(len);
        break;
      }
    }
  }
  if (!ev.threshold_hit) return ev;
  unsigned top = ev.word_length + 1;
  Budget unlimited{std::size_t{1} << 30};
  auto ta = build_ck(a, top + 1, unlimited);
  auto tb = build_ck(b, top + 1, unlimited);
  for (unsigned m = 0; m <= top; ++m) {
    for (std::uint64_t x = 0; x < ta.levels[m].size(); ++x) {
      if (separation_test(node_hole(ta, m, x), node_hole(tb, m, x), eps)) {
        ev.separated = true;
        ev.hole_level = m;
        ev.hole_index = x;
        return ev;
      }
    }
  }
  return ev;
}

inline bool separation_event(const CkCantor& a, const CkCantor& b, const Rational& eps) {
  return separation_event_detail(a, b, eps).separated;
}

}  // namespace edc
