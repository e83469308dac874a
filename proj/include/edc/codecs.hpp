#pragma once
// Encoders for the four description families and the decoder shared by all of them.
//
// Every decoder returns the endpoint set at depth nbar of the quantized system. Polynomial and
// jet evaluation runs in fixed point with 16 guard bits beyond the coefficient grid, so the
// output points are dyadic rationals and the rounding drift stays far below the coefficient error.

#include "edc/ck_scaling.hpp"
#include "edc/description.hpp"
#include "edc/ifs.hpp"
#include "edc/quantized.hpp"
#include "edc/random_cantor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace edc {

inline constexpr unsigned kGuardBits = 16;
inline constexpr unsigned kMaxHalvings = 8;

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// ceil(x * 2^16) for a rate in (0,1); 65536 or more means "not a contraction".
inline std::uint32_t rate_u16(const Rational& x) {
  Integer v = ceil_q(x * 65536);
  if (v < 0) return 0;
  return v > 65536 ? 65536U : static_cast<std::uint32_t>(v.get_ui());
}

inline Rational from_u16(std::uint32_t v) {
  Rational r(v, 65536);
  r.canonicalize();
  return r;
}

/// Fixed-point u32 with 8 fractional bits, rounded up and saturated.
inline std::uint32_t ufix8(double v) {
  double s = std::ceil(v * 256);
  if (!(s >= 0)) return 0;
  return s > 4294967295.0 ? 0xFFFFFFFFU : static_cast<std::uint32_t>(s);
}

/// Smallest b with |c| <= 2^b for every coefficient, kept inside the s8 header field.
inline long coefficient_exponent(const std::vector<std::vector<Rational>>& cs) {
  bool any = false;
  long b = -127;
  for (const auto& row : cs) {
    for (const auto& c : row) {
      if (c == 0) continue;
      any = true;
      b = std::max(b, ceil_log2(abs(c)));
    }
  }
  if (!any) return 0;
  if (b > 127) throw validation_error("coefficients too large for the description header");
  return b;
}

/// Upper bound on sup_{[0,1]} |p'|: the largest Bernstein coefficient of p' for moderate
/// degree (exact), the grid bound otherwise.
inline Rational derivative_sup_bound(const std::vector<Rational>& c) {
  if (c.size() <= 1) return Rational(0);
  if (c.size() <= 17) {
    std::vector<Rational> dc;
    for (std::size_t k = 1; k < c.size(); ++k) dc.push_back(c[k] * static_cast<long>(k));
    Rational m(0);
    for (const auto& v : to_bernstein(dc)) m = std::max(m, abs(v));
    return m;
  }
  return from_double(derivative_bound(c).sup_abs);
}

struct QuantizedSystem {
  IfsSpec ifs;  // Polynomial maps carrying the quantized values
  std::vector<std::vector<QuantizedReal>> q;
  std::uint32_t rate16 = 0;
};

/// Quantizes every coefficient on the 2^-p grid in [-2^b, 2^b] and checks that the result is
/// still a valid system. Returns nothing when the quantized system fails validation.
inline std::optional<QuantizedSystem> quantize_system(const std::vector<std::vector<Rational>>& coeffs, long p,
                                                      long b) {
  QuantizedSystem s;
  Range range = Range::symmetric_pow2(b);
  Rational rate(0);
  for (const auto& row : coeffs) {
    std::vector<QuantizedReal> qrow;
    std::vector<Rational> vals;
    for (const auto& c : row) {
      qrow.push_back(QuantizedReal::make(c, p, range));
      vals.push_back(qrow.back().value());
    }
    rate = std::max(rate, derivative_sup_bound(vals));
    s.ifs.maps.push_back(Polynomial{std::move(vals)});
    s.q.push_back(std::move(qrow));
  }
  s.rate16 = rate_u16(rate);
  if (s.rate16 == 0 || s.rate16 >= 65536) return std::nullopt;
  s.ifs.rho = from_u16(s.rate16);
  if (!validate(s.ifs).ok) return std::nullopt;
  return s;
}

/// Endpoint images phi_w(0), phi_w(1) for every word of length nbar, in fixed point.
inline FinitePointSet decode_polynomials(const std::vector<std::vector<Rational>>& coeffs, long p, unsigned nbar,
                                         const Budget& budget) {
  long double count = 2 * std::pow(static_cast<long double>(coeffs.size()), nbar);
  budget.require(count, "decoding at depth " + std::to_string(nbar));
  FixedScale fx{static_cast<unsigned>(std::max(p, 0L)) + kGuardBits};
  std::vector<std::vector<Integer>> c;
  for (const auto& row : coeffs) c.push_back(fx.convert(row));
  std::vector<Integer> cur{Integer(0), fx.one()};
  for (unsigned level = 0; level < nbar; ++level) {
    std::vector<Integer> next;
    next.reserve(cur.size() * c.size());
    for (const auto& y : cur) {
      for (const auto& row : c) next.push_back(fx.clamp_unit(fx.horner(row, y)));
    }
    cur = std::move(next);
  }
  std::sort(cur.begin(), cur.end());
  cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
  std::vector<Rational> pts;
  pts.reserve(cur.size());
  for (const auto& v : cur) pts.push_back(fx.to_rational(v));
  return FinitePointSet::from_sorted_unchecked(std::move(pts));
}

inline void put_fraction_u16(BitWriter& w, const Rational& x, const std::string& what) {
  if (x.get_num() < 0 || x.get_num() > 65535 || x.get_den() > 65535) {
    throw validation_error(what + " = " + to_text(x) + " does not fit the u16/u16 header field");
  }
  w.put(x.get_num().get_ui(), 16);
  w.put(x.get_den().get_ui(), 16);
}

inline Rational get_fraction_u16(BitReader& r) {
  auto num = r.get(16);
  auto den = r.get(16);
  if (den == 0) throw format_error("zero denominator in header");
  Rational x(static_cast<unsigned long>(num), static_cast<unsigned long>(den));
  x.canonicalize();
  return x;
}

inline std::vector<std::vector<Rational>> read_coefficients(BitReader& r, const std::vector<std::size_t>& counts,
                                                            long p, long b) {
  Range range = Range::symmetric_pow2(b);
  unsigned cost = grid_bit_cost(range.width(), p);
  std::vector<std::vector<Rational>> out;
  for (auto n : counts) {
    std::vector<Rational> row;
    for (std::size_t k = 0; k < n; ++k) row.push_back(QuantizedReal::from_offset(r.get_big(cost), p, range).value());
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Polynomial systems: eps' = eps / K with K = 1 + (N+1)/(1-rho), N the largest degree.

inline Description encode_poly(const IfsSpec& ifs, unsigned ell, const Budget& budget = Budget::from_env()) {
  if (ifs.size() < 2 || ifs.size() > 255) throw validation_error("poly codec needs between 2 and 255 maps");
  for (const auto& m : ifs.maps) {
    if (std::holds_alternative<TruncatedSeries>(m)) throw validation_error("poly codec needs affine or polynomial maps");
  }
  auto rep = validate(ifs);
  if (!rep.ok) throw validation_error("IFS rejected: " + rep.clause);
  std::vector<std::vector<Rational>> coeffs;
  for (const auto& m : ifs.maps) coeffs.push_back(coefficients(m));
  for (const auto& row : coeffs) {
    if (row.size() > 256) throw validation_error("poly codec supports degree at most 255");
  }
  const Rational eps = pow2q(-static_cast<long>(ell));
  const auto N = static_cast<long>(ifs.max_degree());
  const Rational K = 1 + Rational(N + 1) / (1 - ifs.rho);
  const long b = detail::coefficient_exponent(coeffs);
  const long p0 = precision_for(eps / K);

  for (unsigned h = 0; h <= kMaxHalvings; ++h) {
    const long p = p0 + h;
    if (p > 255 - kGuardBits) break;
    auto qs = detail::quantize_system(coeffs, p, b);
    if (!qs) continue;
    const Rational eps1 = eps / K / pow2q(h);
    const unsigned nbar = depth_for(std::max(ifs.rho, qs->ifs.rho), eps1);
    if (nbar > 255) throw budget_error("poly codec depth above 255");
    budget.require(2 * std::pow(static_cast<long double>(ifs.size()), nbar), "poly description at depth " + std::to_string(nbar));

    BitWriter w = detail::begin_frame(CodecId::Poly, ell);
    w.put(ifs.size(), 8);
    for (const auto& row : coeffs) w.put(row.size() - 1, 8);
    w.put_signed(b, 8);
    w.put(static_cast<unsigned>(p), 8);
    w.put(nbar, 8);
    w.put(qs->rate16, 16);
    w.put(std::min<std::uint32_t>(detail::ufix8(to_double(K)), 0xFFFF), 16);
    std::size_t header_end = w.bit_count();
    for (const auto& row : qs->q) {
      for (const auto& q : row) w.put_big(q.offset(), q.bit_cost());
    }
    Description d = detail::finish_frame(w, CodecId::Poly, ell, header_end);
    d.nbar = nbar;
    d.params = {{"K", to_text(K)},
                {"eps_prime", to_text(eps1)},
                {"N", std::to_string(N)},
                {"p", std::to_string(p)},
                {"halvings", std::to_string(h)},
                {"rho_tilde", to_text(qs->ifs.rho)}};
    return d;
  }
  throw contract_error("IFS too fragile at this eps: quantized maps fail validation after " +
                       std::to_string(kMaxHalvings) + " halvings");
}

// ---------------------------------------------------------------------------------------------
// Analytic systems: truncation at N terms and coefficients at eps', both from the series radius.

inline Description encode_analytic(const IfsSpec& ifs, unsigned ell, const Budget& budget = Budget::from_env()) {
  if (ifs.size() < 2 || ifs.size() > 255) throw validation_error("analytic codec needs between 2 and 255 maps");
  Rational R, r;
  bool first = true;
  for (const auto& m : ifs.maps) {
    const auto* s = std::get_if<TruncatedSeries>(&m);
    if (!s) throw validation_error("analytic codec needs series maps");
    if (!(s->R > 1)) throw validation_error("analytic codec needs R > 1");
    R = first ? s->R : std::min(R, s->R);
    r = first ? s->r : std::max(r, s->r);
    first = false;
  }
  auto rep = validate(ifs);
  if (!rep.ok) throw validation_error("IFS rejected: " + rep.clause);

  const Rational eps = pow2q(-static_cast<long>(ell));
  const Rational delta = (1 + 1 / R) / 2;  // midpoint of (1/R, 1)
  // N minimal with delta^N / (1 - delta) < (1 - rho) eps / (4 r).
  const Rational target = (1 - ifs.rho) * eps / (4 * r);
  unsigned N = 0;
  for (Rational dn(1); !(dn / (1 - delta) < target); dn *= delta) ++N;
  if (N > 65535) throw budget_error("analytic truncation degree above 65535");
  // eps' = r (delta R - 1) / (R (1 - delta)) * ((1 - delta) eps)^{log R / log(1/delta)}.
  const double dR = to_double(R), dd = to_double(delta);
  const double log2_eps1 = std::log2(to_double(r * (delta * R - 1) / (R * (1 - delta)))) +
                           std::log(dR) / std::log(1 / dd) * std::log2(to_double((1 - delta) * eps));
  const long p0 = std::max(1L, static_cast<long>(std::ceil(-log2_eps1 - 1e-9)));
  const unsigned nbar = depth_for(ifs.rho, eps / (4 * R));
  if (nbar > 255) throw budget_error("analytic codec depth above 255");

  std::vector<std::vector<Rational>> coeffs;
  Rational tail(0);  // largest sum_{h >= N} |c_h| over the maps
  for (const auto& m : ifs.maps) {
    const auto& c = std::get<TruncatedSeries>(m).c;
    std::vector<Rational> row(N);
    Rational t(0);
    for (std::size_t h = 0; h < c.size(); ++h) {
      if (h < N) {
        row[h] = c[h];
      } else {
        t += abs(c[h]);
      }
    }
    tail = std::max(tail, t);
    coeffs.push_back(std::move(row));
  }
  const long b = detail::coefficient_exponent(coeffs);

  for (unsigned h = 0; h <= kMaxHalvings; ++h) {
    const long p = p0 + h;
    if (p > 255 - kGuardBits) break;
    // Sup error of a map: truncated tail plus N half-steps; the set error sums a geometric series.
    const Rational map_err = tail + Rational(static_cast<long>(N)) * pow2q(-p - 1);
    if (!(map_err / (1 - ifs.rho) + powq(ifs.rho, nbar) < 3 * eps / 4)) continue;
    auto qs = detail::quantize_system(coeffs, p, b);
    if (!qs) continue;
    budget.require(2 * std::pow(static_cast<long double>(ifs.size()), nbar), "analytic description at depth " + std::to_string(nbar));

    BitWriter w = detail::begin_frame(CodecId::Analytic, ell);
    w.put(ifs.size(), 8);
    detail::put_fraction_u16(w, R, "R");
    detail::put_fraction_u16(w, r, "r");
    detail::put_fraction_u16(w, delta, "delta");
    w.put(N, 16);
    w.put(nbar, 8);
    w.put(static_cast<unsigned>(p), 8);
    w.put_signed(b, 8);
    w.put(qs->rate16, 16);
    std::size_t header_end = w.bit_count();
    for (const auto& row : qs->q) {
      for (const auto& q : row) w.put_big(q.offset(), q.bit_cost());
    }
    Description d = detail::finish_frame(w, CodecId::Analytic, ell, header_end);
    d.nbar = nbar;
    d.params = {{"delta", to_text(delta)},
                {"N", std::to_string(N)},
                {"eps_prime_log2", detail::fmt(log2_eps1)},
                {"p", std::to_string(p)},
                {"halvings", std::to_string(h)},
                {"rho_tilde", to_text(qs->ifs.rho)}};
    return d;
  }
  throw contract_error("IFS too fragile at this eps: quantized maps fail validation after " +
                       std::to_string(kMaxHalvings) + " halvings");
}

// ---------------------------------------------------------------------------------------------
// Random central sets: lambda_1 on the eps grid, lambda_k on the 2^{k-2} eps grid.

namespace detail {

/// Grid exponent for lambda_k with t extra bits.
inline long rand_precision(unsigned ell, std::size_t k, unsigned t) {
  long base = k == 1 ? static_cast<long>(ell) : static_cast<long>(ell) - static_cast<long>(k) + 2;
  return base + static_cast<long>(t);
}

inline Description encode_rand_impl(const std::function<Rational(std::size_t)>& lambda, std::size_t available,
                                    unsigned ell, const Budget& budget) {
  const Rational eps = pow2q(-static_cast<long>(ell));
  const Range range = Range::open_unit();
  bool ran_out = false;
  for (unsigned t = 0; t < 8; ++t) {
    std::vector<Rational> lam, lt;
    std::vector<QuantizedReal> q;
    Rational L(1), Lt(1);
    // nbar: first depth at which both the true and the quantized lengths drop below eps/2.
    while (!(L < eps / 2 && Lt < eps / 2)) {
      std::size_t k = lam.size() + 1;
      if (k > 255) throw budget_error("random central codec depth above 255");
      if (k > available) break;
      Rational v = lambda(k);
      if (!(v > 0 && v < 1)) throw validation_error("lambda_" + std::to_string(k) + " outside (0,1)");
      q.push_back(QuantizedReal::make(v, rand_precision(ell, k, t), range));
      lt.push_back(q.back().value());
      lam.push_back(std::move(v));
      L *= lam.back() / 2;
      Lt *= lt.back() / 2;
    }
    if (!(L < eps / 2 && Lt < eps / 2)) {
      ran_out = true;  // extra precision may still shorten the quantized depth
      continue;
    }
    const auto nbar = static_cast<unsigned>(lam.size());
    // Endpoints sit at sums of shifts s_k = L_{k-1} - L_k; address-wise drift bounds d_H.
    Rational drift(0), a(1), at(1);
    for (unsigned k = 0; k < nbar; ++k) {
      Rational na = a * lam[k] / 2, nat = at * lt[k] / 2;
      drift += abs((at - nat) - (a - na));
      a = na;
      at = nat;
    }
    drift += abs(at - a);
    if (!(drift + a < 3 * eps / 4)) continue;
    budget.require_depth(nbar, 2, "random central description at depth " + std::to_string(nbar));

    BitWriter w = begin_frame(CodecId::Rand, ell);
    w.put(nbar, 8);
    w.put(t, 3);
    std::size_t header_end = w.bit_count();
    for (const auto& v : q) w.put_big(v.offset(), v.bit_cost());
    Description d = finish_frame(w, CodecId::Rand, ell, header_end);
    d.nbar = nbar;
    d.params = {{"extra_bits", std::to_string(t)},
                {"error_bound", fmt(to_double((drift + a) / eps)) + " eps"},
                {"worst_case_depth", std::to_string(worst_case_depth(eps))}};
    return d;
  }
  if (ran_out) throw validation_error("lambda sequence shorter than the depth needed at this eps");
  throw contract_error("random central codec could not meet the error bound");
}

}  // namespace detail

inline Description encode_rand(const LambdaStream& s, unsigned ell, const Budget& budget = Budget::from_env()) {
  return detail::encode_rand_impl([&s](std::size_t k) { return s.at(k); }, std::size_t(-1), ell, budget);
}

inline Description encode_rand(const std::vector<Rational>& lambda, unsigned ell, const Budget& budget = Budget::from_env()) {
  return detail::encode_rand_impl([&lambda](std::size_t k) { return lambda[k - 1]; }, lambda.size(), ell, budget);
}

// ---------------------------------------------------------------------------------------------
// C^k sets: local jets of the generating maps on a dyadic grid of width about eps'^{1/k}.

/// A two-level view of a self-similar-by-maps set: levels[m][x] is J_w for the word w with
/// x = sum_j w_j n^{j-1}, so phi_i sends the interval x at level m to x + i n^m at level m+1.
struct CkModel {
  double k = 2;
  double rho_u = 0.5;  // upper bound on every child/parent ratio
  unsigned n_maps = 2;
  std::vector<bool> reversing;  // per map; empty means every map preserves orientation
  std::function<std::vector<std::vector<Interval>>(unsigned)> levels;
};

inline CkModel ck_model(const CkCantor& c, const Budget& budget = Budget::from_env()) {
  CkModel m;
  m.k = c.k();
  m.rho_u = to_double(c.params().rate_upper());
  m.n_maps = 2;
  m.levels = [c, budget](unsigned depth) { return build_ck(c, depth, budget).levels; };
  return m;
}

/// Affine systems viewed through the same lens; k only sets the cell width.
inline CkModel ck_model(const IfsSpec& ifs, double k = 2, const Budget& budget = Budget::from_env()) {
  for (const auto& m : ifs.maps) {
    if (!std::holds_alternative<Affine>(m)) throw validation_error("ck codec accepts affine systems or scaling sets");
  }
  auto rep = validate(ifs);
  if (!rep.ok) throw validation_error("IFS rejected: " + rep.clause);
  if (!(k > 1)) throw validation_error("ck codec needs k > 1");
  CkModel m;
  m.k = k;
  m.rho_u = to_double(ifs.rho);
  m.n_maps = static_cast<unsigned>(ifs.size());
  for (const auto& map : ifs.maps) m.reversing.push_back(std::get<Affine>(map).a < 0);
  m.levels = [ifs, budget](unsigned depth) {
    budget.require(std::pow(static_cast<long double>(ifs.size()), depth), "affine levels at depth " + std::to_string(depth));
    std::vector<std::vector<Interval>> out{{{Rational(0), Rational(1)}}};
    for (unsigned lvl = 0; lvl < depth; ++lvl) {
      const auto& cur = out.back();
      std::vector<Interval> next(cur.size() * ifs.size());
      for (std::size_t i = 0; i < ifs.size(); ++i) {
        const auto& [a, b] = std::get<Affine>(ifs.maps[i]);
        for (std::size_t x = 0; x < cur.size(); ++x) next[x + i * cur.size()] = hull(a * cur[x].lo + b, a * cur[x].hi + b);
      }
      out.push_back(std::move(next));
    }
    return out;
  };
  return m;
}

namespace detail {

struct CkTable {
  unsigned n_maps = 2;
  unsigned deg = 1;
  unsigned b = 0;   // cell width 2^-b
  long p = 0;       // coefficient grid 2^-p
  unsigned nbar = 0;
  std::vector<long> exps;                     // coefficient range 2^exps[j] for Taylor order j
  std::vector<std::uint64_t> cells;           // retained cell indices, increasing
  std::vector<std::vector<Rational>> coeffs;  // coeffs[cell * n_maps + i][j]
};

/// Runs the itinerary decoder; returns nothing when a point lands outside the retained cells.
inline std::optional<FinitePointSet> run_ck_decoder(const CkTable& t, const Budget& budget) {
  budget.require(2 * std::pow(static_cast<long double>(t.n_maps), t.nbar), "ck decoding at depth " + std::to_string(t.nbar));
  const unsigned W = static_cast<unsigned>(std::max(t.p, static_cast<long>(t.b) + 1)) + kGuardBits;
  FixedScale fx{W};
  std::vector<std::vector<Integer>> c;
  c.reserve(t.coeffs.size());
  for (const auto& row : t.coeffs) c.push_back(fx.convert(row));
  std::vector<Integer> mid;
  for (auto s : t.cells) mid.push_back((Integer(2 * s + 1)) << (W - t.b - 1));
  const std::uint64_t last = (std::uint64_t{1} << t.b) - 1;

  std::vector<Integer> cur{Integer(0), fx.one()};
  Integer cell, dx;
  for (unsigned level = 0; level < t.nbar; ++level) {
    std::vector<Integer> next;
    next.reserve(cur.size() * t.n_maps);
    for (const auto& y : cur) {
      mpz_fdiv_q_2exp(cell.get_mpz_t(), y.get_mpz_t(), W - t.b);
      std::uint64_t s = std::min<std::uint64_t>(cell.get_ui(), last);
      auto it = std::lower_bound(t.cells.begin(), t.cells.end(), s);
      if (it == t.cells.end() || *it != s) return std::nullopt;
      auto slot = static_cast<std::size_t>(it - t.cells.begin());
      dx = y - mid[slot];
      for (unsigned i = 0; i < t.n_maps; ++i) next.push_back(fx.clamp_unit(fx.horner(c[slot * t.n_maps + i], dx)));
    }
    cur = std::move(next);
  }
  std::sort(cur.begin(), cur.end());
  cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
  std::vector<Rational> pts;
  pts.reserve(cur.size());
  for (const auto& v : cur) pts.push_back(fx.to_rational(v));
  return FinitePointSet::from_sorted_unchecked(std::move(pts));
}

struct JetFit {
  std::vector<double> c;  // Taylor coefficients about the cell midpoint
  double residual = 0;
};

/// Least-squares polynomial of degree `deg` in u = (y - mid) / w over the samples.
inline JetFit fit_jet(std::span<const std::pair<double, double>> samples, double mid, double w, unsigned deg) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd a(n, deg + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double u = (samples[static_cast<std::size_t>(r)].first - mid) / w, pw = 1;
    for (unsigned j = 0; j <= deg; ++j, pw *= u) a(r, j) = pw;
    y(r) = samples[static_cast<std::size_t>(r)].second;
  }
  Eigen::VectorXd beta = a.colPivHouseholderQr().solve(y);
  JetFit f;
  double scale = 1;
  for (unsigned j = 0; j <= deg; ++j, scale *= w) f.c.push_back(beta(j) / scale);
  f.residual = (a * beta - y).cwiseAbs().maxCoeff();
  return f;
}

}  // namespace detail

struct CkOptions {
  double delta = 0.05;  // slack in the predicted cell-count exponent, reported only
  double m_scale = 1;   // multiplier on M, raised once when an itinerary escapes the cover
};

inline Description encode_ck(const CkModel& model, unsigned ell, CkOptions opt = {}, const Budget& budget = Budget::from_env()) {
  if (!(model.k > 1)) throw validation_error("ck codec needs k > 1");
  if (!(model.rho_u > 0 && model.rho_u < 1)) throw validation_error("ck codec needs a ratio bound in (0,1)");
  const double eps = std::ldexp(1.0, -static_cast<int>(ell));
  const Rational eps_q = pow2q(-static_cast<long>(ell));
  const double k = model.k;
  const auto deg = static_cast<unsigned>(std::max(1.0, std::ceil(k) - 1));
  const double log_rho = std::log(model.rho_u);

  std::vector<std::vector<Interval>> levels;
  auto ensure_depth = [&](unsigned d) {
    if (levels.size() < d + 1) levels = model.levels(d);
  };

  for (int attempt = 0; attempt < 2; ++attempt) {
    double M = 2 * (k + 1) * opt.m_scale;
    double rho_c = model.rho_u;
    double K_rem = 0, B = 0;
    detail::CkTable t;
    t.n_maps = model.n_maps;
    t.deg = deg;
    std::vector<std::vector<double>> jets;
    double eps1 = 0;
    unsigned n_cover = 0;
    for (int iter = 0; iter < 12; ++iter) {
      eps1 = eps * (1 - rho_c) / M;
      t.p = std::max(1L, static_cast<long>(std::ceil(-std::log2(eps1) - 1e-12)));
      t.b = static_cast<unsigned>(std::ceil(static_cast<double>(t.p) / k - 1e-12));
      if (t.b > 60 || t.p > 200) throw budget_error("ck codec precision out of range");
      const double w = std::ldexp(1.0, -static_cast<int>(t.b));
      // The cover depends on b alone, so the retained set cannot shrink while eps decreases at a
      // fixed cell width. Every eps giving this b has eps' < 2^{1-k(b-1)}; the cover depth uses
      // w^k <= eps', one level set at least as fine as the eps' one.
      const double reach = std::ldexp(1.0, 1) * std::pow(2.0, -k * (t.b - 1.0)) * M / (1 - rho_c);
      n_cover = static_cast<unsigned>(std::ceil(k * t.b * std::log(2.0) / -log_rho - 1e-12));
      const auto n_fit = std::max(n_cover, static_cast<unsigned>(std::ceil((t.b + 4) * std::log(2.0) / -log_rho)));
      ensure_depth(n_fit);

      // Retained cells meet some level-n_cover interval widened by the largest eps with this b.
      const std::uint64_t last = (std::uint64_t{1} << t.b) - 1;
      std::vector<std::uint64_t> cells;
      for (const auto& iv : levels[n_cover]) {
        double lo = std::max(0.0, to_double(iv.lo) - reach), hi = std::min(1.0, to_double(iv.hi) + reach);
        auto s0 = std::min<std::uint64_t>(static_cast<std::uint64_t>(std::floor(std::ldexp(lo, static_cast<int>(t.b)))), last);
        auto s1 = std::min<std::uint64_t>(static_cast<std::uint64_t>(std::floor(std::ldexp(hi, static_cast<int>(t.b)))), last);
        for (auto s = s0; s <= s1; ++s) cells.push_back(s);
      }
      std::sort(cells.begin(), cells.end());
      cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

      // Samples (y, phi_i(y)) from the level-(n_fit-1) endpoints, sorted by y.
      const auto& src = levels[n_fit - 1];
      const auto& dst = levels[n_fit];
      std::vector<std::vector<std::pair<double, double>>> samples(t.n_maps);
      for (unsigned i = 0; i < t.n_maps; ++i) {
        const bool flip = i < model.reversing.size() && model.reversing[i];
        samples[i].reserve(2 * src.size());
        for (std::size_t x = 0; x < src.size(); ++x) {
          const auto& img = dst[x + i * src.size()];
          samples[i].emplace_back(to_double(src[x].lo), to_double(flip ? img.hi : img.lo));
          samples[i].emplace_back(to_double(src[x].hi), to_double(flip ? img.lo : img.hi));
        }
        std::sort(samples[i].begin(), samples[i].end());
      }

      double resid = 0, bsum = 0, slope = 0;
      jets.assign(cells.size() * t.n_maps, {});
      for (std::size_t slot = 0; slot < cells.size(); ++slot) {
        const double mid = (static_cast<double>(cells[slot]) + 0.5) * w;
        for (unsigned i = 0; i < t.n_maps; ++i) {
          const auto& sm = samples[i];
          double margin = eps + w / 2;
          std::span<const std::pair<double, double>> window;
          for (int grow = 0; grow < 40; ++grow, margin *= 2) {
            auto lo = std::lower_bound(sm.begin(), sm.end(), std::pair{mid - w / 2 - margin, -1e300});
            auto hi = std::upper_bound(sm.begin(), sm.end(), std::pair{mid + w / 2 + margin, 1e300});
            window = {lo, hi};
            if (window.size() >= deg + 1 && window.front().first < window.back().first) break;
          }
          auto f = detail::fit_jet(window, mid, w, deg);
          resid = std::max(resid, f.residual);
          double s = 0;
          for (double v : f.c) s += std::fabs(v);
          bsum = std::max(bsum, s);
          slope = std::max(slope, std::fabs(f.c[1]));
          jets[slot * t.n_maps + i] = std::move(f.c);
        }
      }
      t.cells = std::move(cells);
      K_rem = resid / std::pow(w, k);
      B = bsum;
      double M_new = 2 * (k + 1 + K_rem + B) * opt.m_scale;
      double rho_new = std::max(model.rho_u, slope);
      if (rho_new >= 1) throw contract_error("fitted maps are not contractions at this eps");
      if (M_new <= M && rho_new <= rho_c) break;
      M = std::max(M, M_new);
      rho_c = std::max(rho_c, rho_new);
    }

    // Coefficient ranges per Taylor order.
    t.exps.assign(deg + 1, -60);
    for (const auto& jet : jets) {
      for (unsigned j = 0; j <= deg; ++j) {
        if (jet[j] != 0) t.exps[j] = std::max(t.exps[j], static_cast<long>(std::ceil(std::log2(std::fabs(jet[j])))));
      }
    }
    for (auto& e : t.exps) {
      e = std::clamp(e, -60L, 8L);
    }
    std::vector<std::vector<QuantizedReal>> q;
    t.coeffs.clear();
    for (const auto& jet : jets) {
      std::vector<QuantizedReal> row;
      std::vector<Rational> vals;
      for (unsigned j = 0; j <= deg; ++j) {
        row.push_back(QuantizedReal::make(from_double(jet[j]), t.p, Range::symmetric_pow2(t.exps[j])));
        vals.push_back(row.back().value());
      }
      q.push_back(std::move(row));
      t.coeffs.push_back(std::move(vals));
    }
    const std::uint32_t rate16 = detail::rate_u16(from_double(rho_c));
    if (rate16 >= 65536) throw contract_error("fitted maps are not contractions at this eps");
    t.nbar = depth_for(detail::from_u16(rate16), eps_q / 2);
    if (t.nbar > 255) throw budget_error("ck codec depth above 255");

    if (!detail::run_ck_decoder(t, budget)) {
      opt.m_scale *= 2;  // one retry with M doubled
      continue;
    }

    BitWriter w = detail::begin_frame(CodecId::Ck, ell);
    w.put(t.n_maps, 8);
    w.put(deg, 4);
    w.put(t.b, 8);
    w.put(static_cast<unsigned>(t.p), 8);
    w.put(t.nbar, 8);
    w.put(detail::ufix8(M), 32);
    w.put(detail::ufix8(K_rem), 32);
    w.put(rate16, 16);
    for (auto e : t.exps) w.put_signed(e, 8);
    w.put_gamma(t.cells.size());
    std::uint64_t prev = 0;
    for (std::size_t j = 0; j < t.cells.size(); ++j) {
      w.put_gamma(j == 0 ? t.cells[0] + 1 : t.cells[j] - prev);
      prev = t.cells[j];
    }
    std::size_t header_end = w.bit_count();
    for (const auto& row : q) {
      for (const auto& v : row) w.put_big(v.offset(), v.bit_cost());
    }
    Description d = detail::finish_frame(w, CodecId::Ck, ell, header_end);
    d.nbar = t.nbar;
    const double D_hint = std::log(static_cast<double>(t.cells.size())) / (t.b * std::log(2.0));
    d.params = {{"k", detail::fmt(k)},
                {"M", detail::fmt(M)},
                {"K_rem", detail::fmt(K_rem)},
                {"B", detail::fmt(B)},
                {"rho_c", detail::fmt(rho_c)},
                {"eps_prime", detail::fmt(eps1)},
                {"cell_bits", std::to_string(t.b)},
                {"cells", std::to_string(t.cells.size())},
                {"cover_depth", std::to_string(n_cover)},
                {"cell_count_exponent", detail::fmt(D_hint)},
                {"delta", detail::fmt(opt.delta)},
                {"retries", std::to_string(attempt)}};
    return d;
  }
  throw contract_error("itinerary escaped cover: a decoded point left the retained cells even with M doubled");
}

inline Description encode_ck(const CkCantor& c, unsigned ell, CkOptions opt = {}, const Budget& budget = Budget::from_env()) {
  return encode_ck(ck_model(c, budget), ell, opt, budget);
}

// ---------------------------------------------------------------------------------------------

/// Deterministic reconstruction of the endpoint set a description encodes.
inline FinitePointSet decode(std::span<const std::uint8_t> bytes, const Budget& budget = Budget::from_env()) {
  BitReader r(bytes);
  auto frame = detail::read_frame(r);
  switch (frame.codec) {
    case CodecId::Poly: {
      auto n = static_cast<std::size_t>(r.get(8));
      if (n < 2) throw format_error("poly description with fewer than two maps");
      std::vector<std::size_t> counts;
      for (std::size_t i = 0; i < n; ++i) counts.push_back(static_cast<std::size_t>(r.get(8)) + 1);
      long b = r.get_signed(8);
      long p = static_cast<long>(r.get(8));
      auto nbar = static_cast<unsigned>(r.get(8));
      r.get(16);  // rate bound of the quantized maps
      r.get(16);  // K
      auto coeffs = detail::read_coefficients(r, counts, p, b);
      r.check_crc();
      return detail::decode_polynomials(coeffs, p, nbar, budget);
    }
    case CodecId::Analytic: {
      auto n = static_cast<std::size_t>(r.get(8));
      if (n < 2) throw format_error("analytic description with fewer than two maps");
      detail::get_fraction_u16(r);  // R
      detail::get_fraction_u16(r);  // r
      detail::get_fraction_u16(r);  // delta
      auto N = static_cast<std::size_t>(r.get(16));
      auto nbar = static_cast<unsigned>(r.get(8));
      long p = static_cast<long>(r.get(8));
      long b = r.get_signed(8);
      r.get(16);
      auto coeffs = detail::read_coefficients(r, std::vector<std::size_t>(n, N), p, b);
      r.check_crc();
      return detail::decode_polynomials(coeffs, p, nbar, budget);
    }
    case CodecId::Rand: {
      auto nbar = static_cast<unsigned>(r.get(8));
      auto t = static_cast<unsigned>(r.get(3));
      if (nbar == 0) throw format_error("random central description with depth 0");
      std::vector<Rational> lam;
      const Range range = Range::open_unit();
      for (std::size_t k = 1; k <= nbar; ++k) {
        long p = detail::rand_precision(frame.ell, k, t);
        unsigned cost = grid_bit_cost(range.width(), p);
        lam.push_back(QuantizedReal::from_offset(r.get_big(cost), p, range).value());
      }
      r.check_crc();
      auto c = build_central(lam, nbar, budget);
      return c.endpoints(nbar);
    }
    case CodecId::Ck: {
      detail::CkTable t;
      t.n_maps = static_cast<unsigned>(r.get(8));
      t.deg = static_cast<unsigned>(r.get(4));
      t.b = static_cast<unsigned>(r.get(8));
      t.p = static_cast<long>(r.get(8));
      t.nbar = static_cast<unsigned>(r.get(8));
      if (t.n_maps < 2 || t.b == 0 || t.b > 60) throw format_error("malformed ck header");
      r.get(32);  // M
      r.get(32);  // K_rem
      r.get(16);  // rho_c
      for (unsigned j = 0; j <= t.deg; ++j) t.exps.push_back(r.get_signed(8));
      auto count = r.get_gamma();
      if (count > (std::uint64_t{1} << t.b)) throw format_error("more retained cells than the grid holds");
      std::uint64_t s = 0;
      for (std::uint64_t j = 0; j < count; ++j) {
        auto gap = r.get_gamma();
        s = j == 0 ? gap - 1 : s + gap;
        if (s >> t.b) throw format_error("retained cell outside the grid");
        t.cells.push_back(s);
      }
      for (std::uint64_t j = 0; j < count * t.n_maps; ++j) {
        std::vector<Rational> row;
        for (unsigned d = 0; d <= t.deg; ++d) {
          Range range = Range::symmetric_pow2(t.exps[d]);
          row.push_back(QuantizedReal::from_offset(r.get_big(grid_bit_cost(range.width(), t.p)), t.p, range).value());
        }
        t.coeffs.push_back(std::move(row));
      }
      r.check_crc();
      auto pts = detail::run_ck_decoder(t, budget);
      if (!pts) throw contract_error("itinerary escaped cover while decoding");
      return *pts;
    }
  }
  throw format_error("unknown codec id");
}

inline FinitePointSet decode(const Description& d, const Budget& budget = Budget::from_env()) { return decode(d.bytes, budget); }

}  // namespace edc
