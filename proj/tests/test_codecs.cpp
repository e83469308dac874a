#include "edc/codecs.hpp"
#include "edc/hausdorff.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace edc;

namespace {

Rational frac(long a, long b) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

Rational eps_of(unsigned ell) { return pow2q(-static_cast<long>(ell)); }

IfsSpec quadratic_pair() {
  return {{Polynomial{{0, frac(1, 4), frac(1, 20)}}, Polynomial{{frac(7, 10), frac(1, 5), frac(1, 10)}}}, frac(2, 5)};
}

/// phi_0 = sum_{h=1}^{127} (9/50) 4^{-(h-1)} x^h and phi_1 = 1 - phi_0; sup |phi'| < 0.32.
IfsSpec analytic_pair() {
  std::vector<Rational> c(128), d(128);
  for (long h = 1; h < 128; ++h) c[h] = frac(9, 50) / powq(Rational(4), static_cast<unsigned>(h - 1));
  for (std::size_t h = 0; h < 128; ++h) d[h] = -c[h];
  d[0] += 1;
  return {{TruncatedSeries{c, 2, 1}, TruncatedSeries{d, 2, 1}}, frac(33, 100)};
}

std::string param(const Description& d, const std::string& key) {
  for (const auto& [k, v] : d.params) {
    if (k == key) return v;
  }
  return "";
}

/// Disjoint intervals whose union lies within eps/4 of the attractor.
std::vector<Interval> ifs_reference(const IfsSpec& ifs, unsigned ell) {
  unsigned n = depth_for(ifs.rho, eps_of(ell + 3));
  return reference_cover(ifs, n, ell + 24);
}

std::vector<Interval> central_reference(const std::vector<Rational>& lam, unsigned depth) {
  return build_central(lam, depth).intervals(depth);
}

}  // namespace

TEST(PolyCodec, MiddleThirdConstants) {
  auto d = encode_poly(middle_third(), 6);
  EXPECT_EQ(param(d, "K"), "4");
  EXPECT_EQ(param(d, "eps_prime"), "1/256");
  EXPECT_EQ(d.codec, CodecId::Poly);
  auto pts = decode(d);
  EXPECT_EQ(pts.size(), std::size_t{2} << d.nbar);
  EXPECT_LT(hausdorff_vs_intervals(pts, ifs_reference(middle_third(), 6)), eps_of(6));
}

TEST(PolyCodec, RoundTripAgainstReference) {
  for (const auto& ifs : {middle_third(), quadratic_pair()}) {
    for (unsigned ell = 4; ell <= 12; ++ell) {
      auto d = encode_poly(ifs, ell);
      auto pts = decode(d);
      EXPECT_LT(hausdorff_vs_intervals(pts, ifs_reference(ifs, ell)), eps_of(ell)) << ell;
    }
  }
  auto deep = decode(encode_poly(middle_third(), 8));
  auto exact = reference_cover(middle_third(), 20, 0, Budget{1 << 22});
  EXPECT_LT(hausdorff_vs_intervals(deep, exact), eps_of(8));
}

TEST(PolyCodec, BitsGrowByAConstantStep) {
  std::map<unsigned, std::size_t> bits;
  for (unsigned ell = 8; ell <= 20; ++ell) {
    auto d = encode_poly(middle_third(), ell);
    bits[ell] = d.total_bits;
    if (ell > 8) {
      EXPECT_GE(bits[ell], bits[ell - 1]);
      // Four coefficients gain one bit each; the header is fixed width.
      EXPECT_EQ(bits[ell] - bits[ell - 1], 4u) << ell;
    }
  }
  for (unsigned ell = 8; ell < 14; ++ell) {
    EXPECT_LE(encode_poly(quadratic_pair(), ell).total_bits, encode_poly(quadratic_pair(), ell + 1).total_bits);
  }
}

TEST(PolyCodec, RejectsFragileAndInvalidInput) {
  IfsSpec bad{{Affine{frac(1, 2), 0}, Affine{frac(1, 2), frac(1, 4)}}, frac(1, 2)};
  EXPECT_THROW(encode_poly(bad, 10), Error);
  EXPECT_THROW(encode_poly(middle_third(), 0), Error);
  EXPECT_THROW(encode_poly(analytic_pair(), 8), Error);
}

TEST(AnalyticCodec, TruncationDegree) {
  auto ifs = analytic_pair();
  auto d = encode_analytic(ifs, 10);
  EXPECT_EQ(param(d, "delta"), "3/4");
  EXPECT_EQ(param(d, "N"), "36");
  // Independent check: (3/4)^N * 4 < (1 - 33/100) 2^-10 / 4 first holds at N = 36.
  auto holds = [](unsigned n) { return powq(frac(3, 4), n) * 4 < frac(67, 100) * eps_of(10) / 4; };
  EXPECT_TRUE(holds(36));
  EXPECT_FALSE(holds(35));
  // With rho = 1/3 the same evaluation also gives 36.
  auto holds3 = [](unsigned n) { return powq(frac(3, 4), n) * 4 < frac(2, 3) * eps_of(10) / 4; };
  EXPECT_TRUE(holds3(36));
  EXPECT_FALSE(holds3(35));
  EXPECT_EQ(d.nbar, depth_for(frac(33, 100), eps_of(10) / 8));
}

TEST(AnalyticCodec, RoundTripAndGrowth) {
  auto ifs = analytic_pair();
  std::size_t prev = 0;
  for (unsigned ell = 6; ell <= 12; ++ell) {
    auto d = encode_analytic(ifs, ell);
    EXPECT_GE(d.total_bits, prev);
    prev = d.total_bits;
    EXPECT_LT(hausdorff_vs_intervals(decode(d), ifs_reference(ifs, ell)), eps_of(ell)) << ell;
  }
  IfsSpec slow = ifs;
  std::get<TruncatedSeries>(slow.maps[0]).R = 1;
  EXPECT_THROW(encode_analytic(slow, 8), Error);
  EXPECT_THROW(encode_analytic(middle_third(), 8), Error);
}

TEST(RandCodec, WorstCaseDepthAndOneLevel) {
  EXPECT_EQ(worst_case_depth(eps_of(4)), 6u);
  // On the 1/2 grid 3/10 would round to 1/2 and miss L_1 < 1/4; one extra bit gives 1/4.
  auto d = encode_rand(std::vector<Rational>{frac(3, 10)}, 1);
  EXPECT_EQ(d.nbar, 1u);
  auto pts = decode(d);
  EXPECT_LE(pts.size(), 4u);
  EXPECT_LT(hausdorff_vs_intervals(pts, central_reference({frac(3, 10)}, 1)), eps_of(1));
}

TEST(RandCodec, HalvesRoundTrip) {
  std::vector<Rational> half(64, frac(1, 2));
  auto d = encode_rand(half, 8);
  // L_n = 4^-n first drops below 2^-9 at n = 5.
  EXPECT_EQ(d.nbar, 5u);
  EXPECT_LT(hausdorff_vs_intervals(decode(d), central_reference(half, 16)), eps_of(8));
  // 2^{k-2} eps >= 1 leaves zero bits for the deep levels and the decoder uses 1/2.
  auto shallow = encode_rand(std::vector<Rational>(8, frac(1, 3)), 2);
  EXPECT_LT(hausdorff_vs_intervals(decode(shallow), central_reference(std::vector<Rational>(18, frac(1, 3)), 18)), eps_of(2));
}

TEST(RandCodec, SeededStreamsRoundTrip) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    LambdaStream s(seed, Distribution::uniform(frac(1, 10), frac(9, 10)));
    for (unsigned ell : {6u, 10u, 14u}) {
      auto d = encode_rand(s, ell);
      auto lam = s.take(d.nbar + 6);
      EXPECT_LT(hausdorff_vs_intervals(decode(d), central_reference(lam, d.nbar + 6)), eps_of(ell)) << seed << " " << ell;
    }
  }
}

TEST(RandCodec, Errors) {
  EXPECT_THROW(encode_rand(std::vector<Rational>{frac(1, 2)}, 10), Error);
  EXPECT_THROW(encode_rand(std::vector<Rational>(20, Rational(1)), 4), Error);
  EXPECT_THROW(encode_rand(std::vector<Rational>(20, Rational(0)), 4), Error);
}

TEST(CkCodec, AffineCaseMatchesPolyCodec) {
  for (unsigned ell : {6u, 8u, 10u}) {
    auto ck = encode_ck(ck_model(middle_third()), ell);
    auto poly = encode_poly(middle_third(), ell);
    auto a = decode(ck), b = decode(poly);
    EXPECT_LE(hausdorff_finite(a, b), 2 * eps_of(ell)) << ell;
    EXPECT_LT(hausdorff_vs_intervals(a, ifs_reference(middle_third(), ell)), eps_of(ell)) << ell;
  }
  IfsSpec flipped{{Affine{frac(1, 3), 0}, Affine{frac(-1, 3), 1}}, frac(1, 3)};
  auto d = encode_ck(ck_model(flipped), 8);
  EXPECT_LT(hausdorff_vs_intervals(decode(d), ifs_reference(flipped, 8)), eps_of(8));
}

TEST(CkCodec, ScalingSetRoundTrip) {
  for (std::uint64_t seed : {1u, 2u}) {
    ScalingParams p;
    p.zeta = frac(1, 20);
    p.seed = seed;
    CkCantor c(p);
    for (unsigned ell : {6u, 9u}) {
      auto d = encode_ck(c, ell);
      unsigned n = depth_for(p.rate_upper(), eps_of(ell + 3));
      auto ref = build_ck(c, n).levels[n];
      EXPECT_LT(hausdorff_vs_intervals(decode(d), ref), eps_of(ell)) << seed << " " << ell;
    }
  }
}

TEST(CkCodec, BitsNeverDecreaseAsEpsShrinks) {
  for (std::uint64_t seed : {3u, 4u}) {
    ScalingParams p;
    p.zeta = frac(1, 20);
    p.seed = seed;
    CkCantor c(p);
    std::size_t prev = 0;
    for (unsigned ell = 6; ell <= 16; ++ell) {
      auto bits = encode_ck(c, ell).total_bits;
      EXPECT_GE(bits, prev) << seed << " " << ell;
      prev = bits;
    }
  }
}

TEST(Descriptions, DeterministicAndSelfChecking) {
  auto a = encode_poly(quadratic_pair(), 9);
  auto b = encode_poly(quadratic_pair(), 9);
  EXPECT_EQ(a.bytes, b.bytes);
  EXPECT_EQ(decode(a).points().size(), decode(b).points().size());
  EXPECT_EQ(hausdorff_finite(decode(a), decode(b)), 0);
  auto c1 = encode_ck(ck_model(middle_third()), 7);
  auto c2 = encode_ck(ck_model(middle_third()), 7);
  EXPECT_EQ(c1.bytes, c2.bytes);

  auto bytes = a.bytes;
  EXPECT_EQ(peek_frame(bytes).ell, 9u);
  EXPECT_EQ(a.total_bits, kFrameBits + a.header_bits + a.payload_bits + 24);

  auto bad_magic = bytes;
  bad_magic[0] ^= 0x01;
  EXPECT_THROW(decode(bad_magic), Error);
  auto bad_version = bytes;
  bad_version[4] = 7;
  EXPECT_THROW(decode(bad_version), Error);
  std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + static_cast<long>(bytes.size() / 2));
  EXPECT_THROW(decode(truncated), Error);
  for (std::size_t i = 6; i < a.total_bits / 8; ++i) {
    auto flipped = bytes;
    flipped[i] ^= 0x10;
    EXPECT_THROW(decode(flipped), Error) << i;
  }
}
