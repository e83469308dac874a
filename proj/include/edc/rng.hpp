#pragma once
// Counter-based randomness (Philox4x32-10) and the bounded-density distributions used for
// contraction factors. Every draw is a pure function of (seed, counter).

#include "edc/rational.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>
#include <string_view>

namespace edc {

using Philox4x32Ctr = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds, bit-compatible with Random123.
inline Philox4x32Ctr philox4x32_10(Philox4x32Ctr ctr, Philox4x32Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53U, kM1 = 0xCD9E8D57U;
  constexpr std::uint32_t kW0 = 0x9E3779B9U, kW1 = 0xBB67AE85U;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Domain tags keep the λ families of different constructions on disjoint counters.
enum class StreamTag : std::uint32_t { Central = 1, Scaling = 2, Gamma = 3 };

/// Uniform value strictly inside (0,1) on the 2^-54 grid, from the block at `counter`.
inline Rational uniform_open_unit(std::uint64_t seed, StreamTag tag, std::uint64_t index, std::uint32_t extra = 0) {
  Philox4x32Ctr ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), extra,
                    static_cast<std::uint32_t>(tag)};
  Philox4x32Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  auto out = philox4x32_10(ctr, key);
  std::uint64_t u53 = (static_cast<std::uint64_t>(out[0]) << 21) | (out[1] >> 11);
  Rational u(Integer(2) * Integer(static_cast<unsigned long>(u53)) + 1, pow2z(54));
  u.canonicalize();
  return u;
}

/// Rounds x onto the 2^-53 grid (ties up), kept inside [lo, hi] and strictly inside (0,1).
inline Rational snap53(const Rational& x, const Rational& lo, const Rational& hi) {
  Integer scale = pow2z(53);
  Integer m = round_half_up(x * Rational(scale));
  Integer mlo = ceil_q(lo * Rational(scale));
  Integer mhi = floor_q(hi * Rational(scale));
  if (mlo < 1) mlo = 1;
  if (mhi > scale - 1) mhi = scale - 1;
  if (m < mlo) m = mlo;
  if (m > mhi) m = mhi;
  Rational r(m, scale);
  r.canonicalize();
  return r;
}

/// Densities on (0,1) bounded above and below on their support, plus a point mass for
/// deterministic fixtures (rejected wherever a density is required).
struct Distribution {
  enum class Kind { Uniform, TruncatedBeta, Constant };
  Kind kind = Kind::Uniform;
  Rational lo{0}, hi{1};     // support; for Constant lo == hi is the value
  double alpha = 1, beta = 1;  // TruncatedBeta shape

  static Distribution uniform(Rational a, Rational b) {
    if (!(a >= 0 && a < b && b <= 1)) throw validation_error("uniform(a,b) needs 0 <= a < b <= 1");
    return {Kind::Uniform, std::move(a), std::move(b), 1, 1};
  }
  static Distribution truncated_beta(double alpha, double beta, Rational lo, Rational hi) {
    if (!(alpha > 0 && beta > 0)) throw validation_error("beta shape parameters must be positive");
    if (!(lo > 0 && lo < hi && hi < 1)) throw validation_error("truncated beta needs 0 < lo < hi < 1");
    return {Kind::TruncatedBeta, std::move(lo), std::move(hi), alpha, beta};
  }
  static Distribution constant(Rational v) {
    if (!(v > 0 && v < 1)) throw validation_error("constant value must lie in (0,1)");
    return {Kind::Constant, v, v, 1, 1};
  }

  bool is_point_mass() const { return kind == Kind::Constant; }

  /// Maps a uniform u in (0,1) to a draw on the 2^-53 grid.
  Rational sample(const Rational& u) const {
    switch (kind) {
      case Kind::Constant:
        return lo;
      case Kind::Uniform:
        return snap53(lo + (hi - lo) * u, lo, hi);
      case Kind::TruncatedBeta: {
        boost::math::beta_distribution<double> d(alpha, beta);
        double flo = boost::math::cdf(d, to_double(lo));
        double fhi = boost::math::cdf(d, to_double(hi));
        double x = boost::math::quantile(d, flo + to_double(u) * (fhi - flo));
        return snap53(from_double(x), lo, hi);
      }
    }
    return lo;
  }

  double sup_density() const {
    switch (kind) {
      case Kind::Constant:
        throw validation_error("point mass has no bounded density");
      case Kind::Uniform:
        return 1.0 / to_double(hi - lo);
      case Kind::TruncatedBeta: {
        boost::math::beta_distribution<double> d(alpha, beta);
        double a = to_double(lo), b = to_double(hi);
        double mass = boost::math::cdf(d, b) - boost::math::cdf(d, a);
        double best = std::max(boost::math::pdf(d, a), boost::math::pdf(d, b));
        if (alpha > 1 && beta > 1) {
          double mode = (alpha - 1) / (alpha + beta - 2);
          if (mode > a && mode < b) best = std::max(best, boost::math::pdf(d, mode));
        }
        return best / mass;
      }
    }
    return 0;
  }

  std::string text() const {
    switch (kind) {
      case Kind::Constant:
        return "const:" + to_text(lo);
      case Kind::Uniform:
        return "uniform:" + to_text(lo) + "," + to_text(hi);
      case Kind::TruncatedBeta:
        return "beta:" + std::to_string(alpha) + "," + std::to_string(beta) + "," + to_text(lo) + "," + to_text(hi);
    }
    return {};
  }

  /// "uniform:a,b", "beta:alpha,beta,lo,hi" or "const:v".
  static Distribution parse(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos) throw format_error("distribution needs the form name:args");
    std::string name(text.substr(0, colon));
    std::vector<std::string> args;
    std::string cur;
    for (char ch : text.substr(colon + 1)) {
      if (ch == ',') {
        args.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    args.push_back(cur);
    if (name == "uniform" && args.size() == 2) return uniform(parse_rational(args[0]), parse_rational(args[1]));
    if (name == "const" && args.size() == 1) return constant(parse_rational(args[0]));
    if (name == "beta" && args.size() == 4) {
      return truncated_beta(to_double(parse_rational(args[0])), to_double(parse_rational(args[1])),
                            parse_rational(args[2]), parse_rational(args[3]));
    }
    throw format_error("unknown distribution '" + std::string(text) + "'");
  }
};

struct GammaEstimate {
  double value = 0;
  double ci_halfwidth = 0;  // 95% interval; zero for closed forms
  bool closed_form = true;
};

/// gamma = integral of log(x) f(x) dx.
inline GammaEstimate gamma_of(const Distribution& d, std::size_t mc_samples = 1 << 16, std::uint64_t seed = 0x5eed) {
  if (d.is_point_mass()) throw validation_error("point mass has no density bounded away from zero");
  if (d.kind == Distribution::Kind::Uniform) {
    double a = to_double(d.lo), b = to_double(d.hi);
    auto xlogx = [](double x) { return x > 0 ? x * (std::log(x) - 1) : 0.0; };
    return {(xlogx(b) - xlogx(a)) / (b - a), 0, true};
  }
  double sum = 0, sum2 = 0;
  for (std::size_t i = 0; i < mc_samples; ++i) {
    double v = std::log(to_double(d.sample(uniform_open_unit(seed, StreamTag::Gamma, i))));
    sum += v;
    sum2 += v * v;
  }
  double n = static_cast<double>(mc_samples);
  double mean = sum / n;
  double var = std::max(0.0, sum2 / n - mean * mean);
  return {mean, 1.96 * std::sqrt(var / n), false};
}

}  // namespace edc
