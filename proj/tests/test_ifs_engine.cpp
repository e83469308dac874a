#include "edc/ifs.hpp"

#include <gtest/gtest.h>

using namespace edc;

namespace {

Rational frac(long a, long b) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

IfsSpec quadratic_pair() {
  // phi_0 = x/4 + x^2/20, phi_1 = 7/10 + x/5 + x^2/10; sup |phi'| = 2/5 at x = 1.
  return {{Polynomial{{0, frac(1, 4), frac(1, 20)}}, Polynomial{{frac(7, 10), frac(1, 5), frac(1, 10)}}}, frac(2, 5)};
}

}  // namespace

TEST(ComposeApply, AppliesTheFirstSymbolFirst) {
  auto ifs = middle_third();
  EXPECT_EQ(compose_apply(ifs, Word{{0, 1}}, 0), frac(2, 3));
  EXPECT_EQ(compose_apply(ifs, Word{{1, 0}}, 0), frac(2, 9));
  EXPECT_EQ(compose_apply(ifs, Word{}, frac(3, 7)), frac(3, 7));
  EXPECT_EQ(compose_apply(ifs, Word{{0}}, 1), frac(1, 3));
  EXPECT_THROW(compose_apply(ifs, Word{{2}}, 0), Error);
  EXPECT_THROW(compose_apply(ifs, Word{{0}}, 2), Error);
}

TEST(ComposeApply, ConcatenationLaw) {
  auto ifs = quadratic_pair();
  Word w{{0, 1, 1}}, v{{1, 0}};
  for (const Rational& x : {Rational(0), frac(1, 3), Rational(1)}) {
    EXPECT_EQ(compose_apply(ifs, w + v, x), compose_apply(ifs, v, compose_apply(ifs, w, x)));
  }
}

TEST(LevelSet, MiddleThirdByHand) {
  auto ifs = middle_third();
  auto l0 = level_set(ifs, 0);
  ASSERT_EQ(l0.intervals.size(), 1u);
  EXPECT_EQ(l0.endpoints, FinitePointSet::from({0, 1}));
  auto l1 = level_set(ifs, 1);
  ASSERT_EQ(l1.intervals.size(), 2u);
  EXPECT_EQ(l1.intervals[0], (Interval{0, frac(1, 3)}));
  EXPECT_EQ(l1.intervals[1], (Interval{frac(2, 3), 1}));
  EXPECT_EQ(l1.endpoints, FinitePointSet::from({0, frac(1, 3), frac(2, 3), 1}));
  auto l2 = level_set(ifs, 2);
  ASSERT_EQ(l2.intervals.size(), 4u);
  for (const auto& iv : l2.intervals) EXPECT_EQ(iv.length(), frac(1, 9));
}

TEST(LevelSet, LineageDisjointnessAndShrinkage) {
  for (const auto& ifs : {middle_third(), quadratic_pair()}) {
    for (unsigned n = 1; n <= 6; ++n) {
      auto cur = level_set(ifs, n);
      auto prev = level_set(ifs, n - 1);
      for (std::size_t k = 0; k < cur.intervals.size(); ++k) {
        const auto& iv = cur.intervals[k];
        EXPECT_LE(iv.length(), powq(ifs.rho, n));
        if (k > 0) {
          EXPECT_LT(cur.intervals[k - 1].hi, iv.lo);
        }
        // J_{i u} lies inside J_u: drop the first (innermost) symbol to get the parent.
        Word parent{std::vector<unsigned>(cur.words[k].symbols.begin() + 1, cur.words[k].symbols.end())};
        auto it = std::find(prev.words.begin(), prev.words.end(), parent);
        ASSERT_NE(it, prev.words.end());
        const auto& p = prev.intervals[static_cast<std::size_t>(it - prev.words.begin())];
        EXPECT_TRUE(p.lo <= iv.lo && iv.hi <= p.hi);
        // J_w = phi_w([0,1]).
        EXPECT_EQ(hull(compose_apply(ifs, cur.words[k], 0), compose_apply(ifs, cur.words[k], 1)), iv);
      }
    }
  }
}

TEST(LevelSet, EndpointsConvergeGeometrically) {
  auto ifs = quadratic_pair();
  std::vector<LevelSet> ls;
  for (unsigned n = 0; n <= 7; ++n) ls.push_back(level_set(ifs, n));
  for (unsigned n = 0; n <= 7; ++n) {
    for (unsigned m = n; m <= 7; ++m) EXPECT_LE(hausdorff_finite(ls[n].endpoints, ls[m].endpoints), powq(ifs.rho, n));
  }
}

TEST(LevelSet, BudgetIsEnforced) {
  Budget tiny{100};
  try {
    level_set(middle_third(), 10, tiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error::Kind::Budget);
    EXPECT_NE(std::string(e.what()).find("100"), std::string::npos);
  }
}

TEST(ReferenceCover, EnclosesTheExactLevelSet) {
  auto ifs = quadratic_pair();
  for (unsigned n : {3u, 6u}) {
    auto exact = level_set(ifs, n);
    auto cover = reference_cover(ifs, n, 40);
    for (const auto& iv : exact.intervals) {
      bool inside = std::any_of(cover.begin(), cover.end(),
                                [&](const Interval& c) { return c.lo <= iv.lo && iv.hi <= c.hi; });
      EXPECT_TRUE(inside);
    }
    std::vector<Rational> ends;
    for (const auto& c : cover) {
      ends.push_back(c.lo);
      ends.push_back(c.hi);
    }
    EXPECT_LT(hausdorff_finite(exact.endpoints, FinitePointSet::from(ends)), pow2q(-30));
  }
  auto mt = reference_cover(middle_third(), 2, 0);
  ASSERT_EQ(mt.size(), 4u);
  EXPECT_EQ(mt[1], (Interval{frac(2, 9), frac(1, 3)}));
}

TEST(DepthFor, DocumentedValues) {
  EXPECT_EQ(depth_for(frac(1, 3), frac(1, 100)), 5u);
  EXPECT_EQ(depth_for(frac(1, 2), frac(1, 2)), 2u);
  EXPECT_EQ(depth_for(frac(1, 10), 1), 1u);
  EXPECT_THROW(depth_for(1, frac(1, 2)), Error);
}

TEST(DepthFor, IsMinimal) {
  for (long den : {2, 3, 5, 7}) {
    Rational rho = frac(1, den);
    for (long e = 2; e < 2000; e = e * 3 + 1) {
      Rational eps = frac(1, e);
      unsigned n = depth_for(rho, eps);
      EXPECT_LT(powq(rho, n), eps);
      if (n > 0) {
        EXPECT_GE(powq(rho, n - 1), eps);
      }
    }
  }
}

TEST(Validate, AcceptsAndRejects) {
  EXPECT_TRUE(validate(middle_third()).ok);
  auto q = validate(quadratic_pair());
  EXPECT_TRUE(q.ok) << q.clause;
  EXPECT_FALSE(q.grid_based);

  IfsSpec overlap{{Affine{frac(3, 5), 0}, Affine{frac(3, 5), frac(2, 5)}}, frac(3, 5)};
  auto r = validate(overlap);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.clause, "images overlap");

  IfsSpec identity{{Affine{1, 0}, Affine{frac(1, 3), frac(2, 3)}}, frac(1, 3)};
  auto s = validate(identity);
  EXPECT_FALSE(s.ok);
  EXPECT_NE(s.clause.find("contraction"), std::string::npos);

  IfsSpec escaping{{Affine{frac(1, 3), 0}, Affine{frac(1, 3), frac(5, 6)}}, frac(1, 3)};
  EXPECT_FALSE(validate(escaping).ok);

  IfsSpec folded{{Polynomial{{frac(1, 10), frac(-1, 5), frac(1, 5)}}, Affine{frac(1, 3), frac(2, 3)}}, frac(1, 2)};
  auto f = validate(folded);
  EXPECT_FALSE(f.ok);
  EXPECT_NE(f.clause.find("monotone"), std::string::npos);

  IfsSpec steep = quadratic_pair();
  steep.rho = frac(39, 100);
  EXPECT_FALSE(validate(steep).ok);
}

TEST(Validate, SeriesCoefficientBound) {
  TruncatedSeries s0{{0, frac(1, 4)}, 2, frac(1, 4)};
  TruncatedSeries s1{{frac(3, 4), frac(1, 4)}, 2, 1};
  IfsSpec bad{{s0, s1}, frac(1, 3)};
  auto r = validate(bad);
  EXPECT_FALSE(r.ok);
  EXPECT_NE(r.clause.find("R^h"), std::string::npos);
  s0.r = frac(1, 2);
  EXPECT_TRUE(validate(IfsSpec{{s0, s1}, frac(1, 3)}).ok);
  s0.R = 1;
  EXPECT_FALSE(validate(IfsSpec{{s0, s1}, frac(1, 3)}).ok);
}
