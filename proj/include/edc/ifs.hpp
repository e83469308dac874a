#pragma once
// Iterated function systems on [0,1]: maps, words, level sets and validation.

#include "edc/budget.hpp"
#include "edc/fixed_point.hpp"
#include "edc/hausdorff.hpp"
#include "edc/point_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

namespace edc {

struct Affine {
  Rational a;  // slope
  Rational b;  // offset
};

/// sum_{k=0}^{N} c[k] x^k
struct Polynomial {
  std::vector<Rational> c;
};

/// First N terms of a power series with |c[h]| R^h <= r.
struct TruncatedSeries {
  std::vector<Rational> c;
  Rational R{2};
  Rational r{1};
};

using MapSpec = std::variant<Affine, Polynomial, TruncatedSeries>;

/// Ascending coefficient list of any map variant.
inline std::vector<Rational> coefficients(const MapSpec& m) {
  return std::visit(
      [](const auto& v) -> std::vector<Rational> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return {v.b, v.a};
        } else {
          return v.c;
        }
      },
      m);
}

inline Rational evaluate(const MapSpec& m, const Rational& x) {
  auto c = coefficients(m);
  Rational y(0);
  for (std::size_t k = c.size(); k-- > 0;) y = y * x + c[k];
  return y;
}

struct IfsSpec {
  std::vector<MapSpec> maps;
  Rational rho;  // declared uniform contraction rate

  std::size_t size() const { return maps.size(); }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& m : maps) {
      auto c = coefficients(m);
      std::size_t deg = c.empty() ? 0 : c.size() - 1;
      d = std::max(d, deg);
    }
    return d;
  }
};

/// A finite word over the map indices; symbols[0] is applied first.
struct Word {
  std::vector<unsigned> symbols;

  std::size_t size() const { return symbols.size(); }
  Word operator+(const Word& o) const {
    Word w = *this;
    w.symbols.insert(w.symbols.end(), o.symbols.begin(), o.symbols.end());
    return w;
  }
  friend bool operator==(const Word&, const Word&) = default;
};

/// phi_{w_n} o ... o phi_{w_1}(x).
inline Rational compose_apply(const IfsSpec& ifs, const Word& w, const Rational& x) {
  if (x < 0 || x > 1) throw validation_error("compose_apply needs x in [0,1]");
  Rational y = x;
  for (unsigned s : w.symbols) {
    if (s >= ifs.size()) throw validation_error("symbol " + std::to_string(s) + " outside the index set");
    y = evaluate(ifs.maps[s], y);
  }
  return y;
}

inline Interval hull(Rational u, Rational v) {
  if (u <= v) return {std::move(u), std::move(v)};
  return {std::move(v), std::move(u)};
}

struct LevelSet {
  unsigned depth = 0;
  std::vector<Word> words;          // words[i] labels intervals[i]
  std::vector<Interval> intervals;  // sorted by position, pairwise disjoint
  FinitePointSet endpoints;
};

/// Exact depth-n level set. Maps must be monotone (validate checks this), so
/// J_w = hull(phi_w(0), phi_w(1)) and J_{u i} = phi_i(J_u).
inline LevelSet level_set(const IfsSpec& ifs, unsigned n, const Budget& budget = Budget::from_env()) {
  long double count = std::pow(static_cast<long double>(ifs.size()), n);
  budget.require(2 * count, "level_set at depth " + std::to_string(n));
  std::vector<Word> words{Word{}};
  std::vector<Interval> ivs{{Rational(0), Rational(1)}};
  for (unsigned level = 0; level < n; ++level) {
    std::vector<Word> nw;
    std::vector<Interval> ni;
    nw.reserve(words.size() * ifs.size());
    ni.reserve(words.size() * ifs.size());
    for (std::size_t k = 0; k < words.size(); ++k) {
      for (unsigned i = 0; i < ifs.size(); ++i) {
        Word w = words[k];
        w.symbols.push_back(i);
        nw.push_back(std::move(w));
        ni.push_back(hull(evaluate(ifs.maps[i], ivs[k].lo), evaluate(ifs.maps[i], ivs[k].hi)));
      }
    }
    words = std::move(nw);
    ivs = std::move(ni);
  }
  std::vector<std::size_t> order(ivs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ivs[a].lo < ivs[b].lo; });
  LevelSet out;
  out.depth = n;
  std::vector<Rational> pts;
  pts.reserve(2 * ivs.size());
  for (std::size_t k : order) {
    out.words.push_back(std::move(words[k]));
    pts.push_back(ivs[k].lo);
    pts.push_back(ivs[k].hi);
    out.intervals.push_back(std::move(ivs[k]));
  }
  out.endpoints = FinitePointSet::from(std::move(pts));
  return out;
}

/// Sorts and merges overlapping closed intervals.
inline std::vector<Interval> merge_intervals(std::vector<Interval> ivs) {
  std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (auto& iv : ivs) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      if (iv.hi > out.back().hi) out.back().hi = iv.hi;
    } else {
      out.push_back(std::move(iv));
    }
  }
  return out;
}

/// Intervals whose union contains every depth-n interval J_w, merged where they touch.
/// Affine systems are computed exactly. Other maps run in fixed point at `bits` and each
/// interval is widened by the propagated rounding bound (deg+1) 2^-bits / (1 - rho).
inline std::vector<Interval> reference_cover(const IfsSpec& ifs, unsigned n, unsigned bits,
                                             const Budget& budget = Budget::from_env()) {
  long double count = std::pow(static_cast<long double>(ifs.size()), n);
  budget.require(count, "reference cover at depth " + std::to_string(n));
  bool affine = std::all_of(ifs.maps.begin(), ifs.maps.end(),
                            [](const MapSpec& m) { return std::holds_alternative<Affine>(m); });
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(count));
  if (affine) {
    std::vector<Interval> ivs{{Rational(0), Rational(1)}};
    for (unsigned level = 0; level < n; ++level) {
      std::vector<Interval> next;
      next.reserve(ivs.size() * ifs.size());
      for (const auto& iv : ivs) {
        for (const auto& m : ifs.maps) {
          const auto& [a, b] = std::get<Affine>(m);
          next.push_back(hull(a * iv.lo + b, a * iv.hi + b));
        }
      }
      ivs = std::move(next);
    }
    return merge_intervals(std::move(ivs));
  }

  FixedScale fx{bits};
  std::vector<std::vector<Integer>> coeffs;
  for (const auto& m : ifs.maps) coeffs.push_back(fx.convert(coefficients(m)));
  Rational step = pow2q(-static_cast<long>(bits));
  Rational widen = Rational(static_cast<long>(ifs.max_degree() + 1)) * step / (1 - ifs.rho) + step;

  struct Frame {
    Integer lo, hi;
    unsigned level;
  };
  std::vector<Frame> stack{{Integer(0), fx.one(), 0}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.level == n) {
      Rational a = fx.to_rational(f.lo) - widen;
      Rational b = fx.to_rational(f.hi) + widen;
      out.push_back(hull(std::move(a), std::move(b)));
      continue;
    }
    for (std::size_t i = coeffs.size(); i-- > 0;) {
      Integer u = fx.clamp_unit(fx.horner(coeffs[i], f.lo));
      Integer v = fx.clamp_unit(fx.horner(coeffs[i], f.hi));
      stack.push_back({std::move(u), std::move(v), f.level + 1});
    }
  }
  for (auto& iv : out) {
    if (iv.lo < 0) iv.lo = 0;
    if (iv.hi > 1) iv.hi = 1;
  }
  return merge_intervals(std::move(out));
}

/// Minimal n >= 0 with rho^n < eps, exactly.
inline unsigned depth_for(const Rational& rho, const Rational& eps) {
  if (!(rho > 0 && rho < 1)) throw validation_error("depth_for needs rho in (0,1)");
  if (eps <= 0) throw validation_error("depth_for needs eps > 0");
  unsigned n = 0;
  Rational p(1);
  while (!(p < eps)) {
    p *= rho;
    ++n;
  }
  return n;
}

struct ValidationReport {
  bool ok = true;
  std::string clause;      // first violated clause, empty on success
  double rate_bound = 0;   // certified (affine) or grid-based bound on max |phi_i'|
  bool grid_based = false; // true when some map needed the grid semi-decision

  explicit operator bool() const { return ok; }
};

namespace detail {

/// Upper bound on sup_{[0,1]} |phi'| from 2^12+1 grid samples plus the second-derivative slack,
/// and whether phi' keeps a strict sign (monotone) under the same slack.
struct DerivativeBound {
  double sup_abs;
  bool monotone;
};

inline DerivativeBound derivative_bound(const std::vector<Rational>& c) {
  std::vector<double> d(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) d[k] = to_double(c[k]);
  double m2 = 0;  // bound on |phi''| over [0,1]
  double m1 = 0;
  for (std::size_t k = 1; k < d.size(); ++k) {
    m1 += static_cast<double>(k) * std::fabs(d[k]);
    if (k >= 2) m2 += static_cast<double>(k * (k - 1)) * std::fabs(d[k]);
  }
  constexpr int grid = 1 << 12;
  const double h = 1.0 / grid;
  const double slack = m2 * h / 2 + 1e-12 * (1 + m1);
  double lo = INFINITY, hi = -INFINITY;
  for (int j = 0; j <= grid; ++j) {
    double x = j * h;
    double y = 0;
    for (std::size_t k = d.size(); k-- > 1;) y = y * x + static_cast<double>(k) * d[k];
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  double sup_abs = std::max(std::fabs(lo), std::fabs(hi)) + slack;
  bool monotone = (lo - slack > 0) || (hi + slack < 0);
  return {sup_abs, monotone};
}

enum class Certified { Yes, No, Unknown };

/// Power-basis coefficients of p to Bernstein coefficients on [0,1].
inline std::vector<Rational> to_bernstein(const std::vector<Rational>& a) {
  const std::size_t n = a.empty() ? 0 : a.size() - 1;
  std::vector<Rational> b(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    for (std::size_t j = 0; j <= k; ++j) {
      Integer ckj, cnj;
      mpz_bin_uiui(ckj.get_mpz_t(), k, j);
      mpz_bin_uiui(cnj.get_mpz_t(), n, j);
      Rational t(ckj, cnj);
      t.canonicalize();
      b[k] += t * a[j];
    }
  }
  return b;
}

/// Decides whether `pred` holds on p([0,1]) by de Casteljau subdivision. End coefficients are
/// values of p, so a failing end coefficient refutes; all coefficients passing certifies.
template <class Pred>
Certified certify_bernstein(const std::vector<Rational>& b, const Pred& pred, int depth = 24) {
  if (!pred(b.front()) || !pred(b.back())) return Certified::No;
  if (std::all_of(b.begin(), b.end(), pred)) return Certified::Yes;
  if (depth == 0) return Certified::Unknown;
  std::vector<Rational> left(b.size()), right(b.size()), work = b;
  const std::size_t n = b.size() - 1;
  for (std::size_t r = 0; r <= n; ++r) {
    left[r] = work[0];
    right[n - r] = work[n - r];
    for (std::size_t i = 0; i + r < n; ++i) work[i] = (work[i] + work[i + 1]) / 2;
  }
  auto l = certify_bernstein(left, pred, depth - 1);
  if (l == Certified::No) return l;
  auto r = certify_bernstein(right, pred, depth - 1);
  if (r == Certified::No) return r;
  return (l == Certified::Yes && r == Certified::Yes) ? Certified::Yes : Certified::Unknown;
}

}  // namespace detail

/// Checks image containment, monotonicity, the contraction bound and disjointness of images.
/// Affine and low-degree polynomial maps are checked exactly; series maps (and polynomials the
/// subdivision cannot settle) use a grid semi-decision.
inline ValidationReport validate(const IfsSpec& ifs) {
  ValidationReport rep;
  auto fail = [&rep](std::string clause) {
    rep.ok = false;
    rep.clause = std::move(clause);
    return rep;
  };
  if (ifs.size() < 2) return fail("fewer than two maps");
  if (!(ifs.rho > 0 && ifs.rho < 1)) return fail("contraction rate outside (0,1)");

  std::vector<Interval> images;
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    const auto& m = ifs.maps[i];
    std::string tag = "map " + std::to_string(i) + ": ";
    if (const auto* s = std::get_if<TruncatedSeries>(&m)) {
      if (!(s->R > 1)) return fail(tag + "series radius R must exceed 1");
      Rational Rh(1);
      for (const auto& ch : s->c) {
        if (abs(ch) * Rh > s->r) return fail(tag + "coefficient bound |c_h| R^h <= r violated");
        Rh *= s->R;
      }
    }
    if (const auto* a = std::get_if<Affine>(&m)) {
      if (a->a == 0) return fail(tag + "constant map is not injective");
      if (abs(a->a) > ifs.rho) return fail(tag + "not a contraction with the declared rate");
      rep.rate_bound = std::max(rep.rate_bound, to_double(abs(a->a)));
    } else if (const auto* poly = std::get_if<Polynomial>(&m); poly && poly->c.size() <= 17) {
      // Exact: Bernstein enclosure of phi' with subdivision.
      std::vector<Rational> dc;
      for (std::size_t k = 1; k < poly->c.size(); ++k) dc.push_back(poly->c[k] * static_cast<long>(k));
      if (dc.empty()) return fail(tag + "constant map is not injective");
      auto b = detail::to_bernstein(dc);
      const Rational& rho = ifs.rho;
      auto contr = detail::certify_bernstein(b, [&rho](const Rational& v) { return abs(v) <= rho; });
      if (contr == detail::Certified::No) return fail(tag + "not a contraction with the declared rate");
      auto up = detail::certify_bernstein(b, [](const Rational& v) { return v > 0; });
      auto down = up == detail::Certified::Yes ? up : detail::certify_bernstein(b, [](const Rational& v) { return v < 0; });
      if (up == detail::Certified::No && down == detail::Certified::No) return fail(tag + "not monotone on [0,1]");
      auto db = detail::derivative_bound(poly->c);
      rep.rate_bound = std::max(rep.rate_bound, std::min(db.sup_abs, to_double(rho)));
      if (contr == detail::Certified::Unknown || (up != detail::Certified::Yes && down != detail::Certified::Yes)) {
        rep.grid_based = true;
        if (db.sup_abs > to_double(rho)) return fail(tag + "contraction bound not certified on the grid");
        if (!db.monotone) return fail(tag + "not monotone on [0,1]");
      }
    } else {
      auto c = coefficients(m);
      auto db = detail::derivative_bound(c);
      rep.grid_based = true;
      rep.rate_bound = std::max(rep.rate_bound, db.sup_abs);
      if (db.sup_abs >= 1 || db.sup_abs > to_double(ifs.rho)) {
        return fail(tag + "not a contraction with the declared rate (grid bound " + std::to_string(db.sup_abs) + ")");
      }
      if (!db.monotone) return fail(tag + "not monotone on [0,1]");
    }
    Interval img = hull(evaluate(m, Rational(0)), evaluate(m, Rational(1)));
    if (img.lo < 0 || img.hi > 1) return fail(tag + "image leaves [0,1]");
    images.push_back(img);
  }
  std::sort(images.begin(), images.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < images.size(); ++i) {
    if (!(images[i - 1].hi < images[i].lo)) return fail("images overlap");
  }
  return rep;
}

/// Middle-third system, used as a fixture throughout.
inline IfsSpec middle_third() {
  return {{Affine{Rational(1, 3), Rational(0)}, Affine{Rational(1, 3), Rational(2, 3)}}, Rational(1, 3)};
}

}  // namespace edc
