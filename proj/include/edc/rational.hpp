#pragma once
// Exact arithmetic helpers on top of GMP.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace edc {

using Integer = mpz_class;
using Rational = mpq_class;

/// Base class for every error the library raises. The category maps onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  enum class Kind { Validation, Contract, Budget, Format, Io };
  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline Error validation_error(const std::string& what) { return {Error::Kind::Validation, what}; }
inline Error contract_error(const std::string& what) { return {Error::Kind::Contract, what}; }
inline Error budget_error(const std::string& what) { return {Error::Kind::Budget, what}; }
inline Error format_error(const std::string& what) { return {Error::Kind::Format, what}; }

inline Integer pow2z(unsigned long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
  return r;
}

/// 2^e as an exact rational, e may be negative.
inline Rational pow2q(long e) {
  Rational r;
  if (e >= 0) {
    r = Rational(pow2z(static_cast<unsigned long>(e)));
  } else {
    r = Rational(Integer(1), pow2z(static_cast<unsigned long>(-e)));
  }
  return r;
}

inline Rational powq(const Rational& base, unsigned n) {
  Rational r(1);
  Rational b = base;
  while (n) {
    if (n & 1U) r *= b;
    b *= b;
    n >>= 1U;
  }
  return r;
}

inline Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }

inline Integer floor_q(const Rational& x) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

inline Integer ceil_q(const Rational& x) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

/// Nearest integer, ties toward +infinity.
inline Integer round_half_up(const Rational& x) { return floor_q(x + Rational(1, 2)); }

/// floor(num / 2^shift) with ties toward +infinity on the dropped bits.
inline Integer shift_round(const Integer& num, unsigned long shift) {
  if (shift == 0) return num;
  Integer half = pow2z(shift - 1);
  Integer t = num + half;
  Integer r;
  mpz_fdiv_q_2exp(r.get_mpz_t(), t.get_mpz_t(), shift);
  return r;
}

/// Smallest integer c with 2^c >= x, for x > 0.
inline long ceil_log2(const Rational& x) {
  if (x <= 0) throw validation_error("ceil_log2 of non-positive value");
  // Start from bit lengths and correct by at most a couple of steps.
  long guess = static_cast<long>(mpz_sizeinbase(x.get_num_mpz_t(), 2)) -
               static_cast<long>(mpz_sizeinbase(x.get_den_mpz_t(), 2));
  while (pow2q(guess) < x) ++guess;
  while (pow2q(guess - 1) >= x) --guess;
  return guess;
}

/// Largest integer f with 2^f <= x, for x > 0.
inline long floor_log2(const Rational& x) {
  long c = ceil_log2(x);
  return pow2q(c) == x ? c : c - 1;
}

inline double to_double(const Rational& x) { return x.get_d(); }

/// Exact conversion of a finite double.
inline Rational from_double(double x) {
  Rational r(x);
  r.canonicalize();
  return r;
}

/// "p/q" (or "p" for integers), the exact text form used in JSON and CSV.
inline std::string to_text(const Rational& x) {
  if (x.get_den() == 1) return x.get_num().get_str();
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

/// Parses "p/q", "p" or a finite decimal such as "0.25" exactly.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto trim = [](std::string& t) {
    while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.erase(t.begin());
    while (!t.empty() && (t.back() == ' ' || t.back() == '\t')) t.pop_back();
  };
  trim(s);
  if (s.empty()) throw format_error("empty rational literal");
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      Integer den(s.substr(slash + 1), 10);
      if (den == 0) throw format_error("zero denominator in '" + s + "'");
      Rational r(Integer(s.substr(0, slash), 10), den);
      r.canonicalize();
      return r;
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
      bool neg = s[0] == '-';
      std::string intpart = s.substr(neg ? 1 : 0, dot - (neg ? 1 : 0));
      std::string frac = s.substr(dot + 1);
      if (intpart.empty()) intpart = "0";
      Integer den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
      Integer num(intpart + frac, 10);
      Rational r(num, den);
      r.canonicalize();
      return neg ? Rational(-r) : r;
    }
    return Rational(Integer(s, 10));
  } catch (const std::invalid_argument&) {
    throw format_error("malformed rational literal '" + s + "'");
  }
}

}  // namespace edc
