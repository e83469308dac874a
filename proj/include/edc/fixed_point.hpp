#pragma once
// Deterministic fixed-point evaluation: an Integer X stands for X / 2^W.

#include "edc/rational.hpp"

#include <span>
#include <vector>

namespace edc {

struct FixedScale {
  unsigned bits;

  Integer one() const { return pow2z(bits); }

  /// Nearest grid value, ties up. Exact when x is a dyadic with denominator dividing 2^bits.
  Integer from(const Rational& x) const { return round_half_up(x * pow2q(static_cast<long>(bits))); }

  Rational to_rational(const Integer& v) const {
    Rational r(v, one());
    r.canonicalize();
    return r;
  }

  /// a*b rescaled to the grid; error at most half a grid step.
  Integer mul(const Integer& a, const Integer& b) const { return shift_round(a * b, bits); }

  Integer clamp_unit(Integer v) const {
    if (v < 0) return Integer(0);
    Integer o = one();
    if (v > o) return o;
    return v;
  }

  /// Horner evaluation of sum c[k] * x^k. Each step rounds once, so the error is at most
  /// c.size() half-steps beyond the error already in the coefficients.
  Integer horner(std::span<const Integer> c, const Integer& x) const {
    if (c.empty()) return Integer(0);
    Integer y = c.back();
    for (std::size_t k = c.size() - 1; k-- > 0;) y = mul(y, x) + c[k];
    return y;
  }

  std::vector<Integer> convert(std::span<const Rational> c) const {
    std::vector<Integer> out;
    out.reserve(c.size());
    for (const auto& v : c) out.push_back(from(v));
    return out;
  }
};

}  // namespace edc
