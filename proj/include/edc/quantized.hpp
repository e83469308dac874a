#pragma once
// Reals stored on an explicit dyadic grid together with their serialized size.

#include "edc/rational.hpp"

namespace edc {

/// A declared value range. `open` excludes the endpoints from the grid (used for
/// contraction factors that must stay strictly inside (0,1)).
struct Range {
  Rational lo{0};
  Rational hi{1};
  bool open = false;

  Rational width() const { return hi - lo; }
  bool contains(const Rational& x) const { return open ? (lo < x && x < hi) : (lo <= x && x <= hi); }

  static Range unit() { return {Rational(0), Rational(1), false}; }
  static Range open_unit() { return {Rational(0), Rational(1), true}; }
  /// [-2^e, 2^e]
  static Range symmetric_pow2(long e) { return {Rational(-pow2q(e)), pow2q(e), false}; }
};

/// Smallest p with 2^-p <= eps.
inline long precision_for(const Rational& eps) {
  if (eps <= 0) throw validation_error("precision must be positive");
  return ceil_log2(Rational(1) / eps);
}

/// Bits charged for a value known to lie in a range of width `width` stored on the 2^-p grid.
/// Zero when the grid step already covers the whole range.
inline unsigned grid_bit_cost(const Rational& width, long p) {
  Rational cells = width * pow2q(p);
  if (cells <= 1) return 0;
  return static_cast<unsigned>(ceil_log2(cells) + 1);
}

class QuantizedReal {
 public:
  QuantizedReal() = default;

  const Integer& mantissa() const { return mantissa_; }
  long precision_exp() const { return precision_exp_; }
  unsigned bit_cost() const { return bit_cost_; }
  const Range& range() const { return range_; }
  const Rational& value() const { return value_; }

  /// Unsigned offset written to the bitstream.
  Integer offset() const { return bit_cost_ == 0 ? Integer(0) : mantissa_ - min_mantissa(range_, precision_exp_); }

  static QuantizedReal from_offset(const Integer& offset, long p, const Range& range) {
    QuantizedReal q;
    q.range_ = range;
    q.precision_exp_ = p;
    q.bit_cost_ = grid_bit_cost(range.width(), p);
    if (q.bit_cost_ == 0) {
      q.set_midpoint();
      return q;
    }
    q.mantissa_ = offset + min_mantissa(range, p);
    if (q.mantissa_ > max_mantissa(range, p)) throw format_error("quantized offset outside declared range");
    q.value_ = Rational(q.mantissa_) * pow2q(-p);
    return q;
  }

  static QuantizedReal make(const Rational& x, long p, const Range& range) {
    if (!range.contains(x)) throw validation_error("value " + to_text(x) + " outside declared range");
    QuantizedReal q;
    q.range_ = range;
    q.precision_exp_ = p;
    q.bit_cost_ = grid_bit_cost(range.width(), p);
    if (q.bit_cost_ == 0) {
      q.set_midpoint();
      return q;
    }
    Integer lo = min_mantissa(range, p);
    Integer hi = max_mantissa(range, p);
    Integer m = round_half_up(x * pow2q(p));
    if (m < lo) m = lo;
    if (m > hi) m = hi;
    if (lo > hi) {  // open range narrower than one grid step
      q.bit_cost_ = 0;
      q.set_midpoint();
      return q;
    }
    q.mantissa_ = m;
    q.value_ = Rational(m) * pow2q(-p);
    return q;
  }

 private:
  static Integer min_mantissa(const Range& r, long p) {
    Rational s = r.lo * pow2q(p);
    return r.open ? Integer(floor_q(s) + 1) : ceil_q(s);
  }
  static Integer max_mantissa(const Range& r, long p) {
    Rational s = r.hi * pow2q(p);
    return r.open ? Integer(ceil_q(s) - 1) : floor_q(s);
  }
  void set_midpoint() {
    value_ = (range_.lo + range_.hi) / 2;
    mantissa_ = 0;
  }

  Integer mantissa_{0};
  long precision_exp_ = 0;
  unsigned bit_cost_ = 0;
  Range range_{};
  Rational value_{0};
};

/// Rounds x (half up) onto the coarsest dyadic grid with step <= eps; |value - x| < eps.
inline QuantizedReal quantize(const Rational& x, const Rational& eps, const Range& range = Range::unit()) {
  return QuantizedReal::make(x, precision_for(eps), range);
}

}  // namespace edc
