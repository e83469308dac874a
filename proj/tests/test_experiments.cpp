#include "edc/json_io.hpp"
#include "edc/packing.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace edc;

namespace {

std::vector<SweepRecord> synthetic(unsigned lo, unsigned hi, const std::function<double(double)>& bits) {
  std::vector<SweepRecord> out;
  for (unsigned ell = lo; ell <= hi; ++ell) {
    SweepRecord r;
    r.ell = ell;
    r.bits = static_cast<std::size_t>(std::llround(bits(ell)));
    r.dh = Rational(1, 1000);
    out.push_back(r);
  }
  return out;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "edc_test_experiments";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Fit, LinearRecoversSlopeExactly) {
  auto f = fit(synthetic(8, 20, [](double l) { return 7 * l + 3; }), FitModel::Linear);
  EXPECT_NEAR(f.coeffs[1], 7, 1e-9);
  EXPECT_NEAR(f.coeffs[0], 3, 1e-9);
  EXPECT_NEAR(f.r2, 1, 1e-12);
  for (double r : f.residuals) EXPECT_NEAR(r, 0, 1e-9);
  EXPECT_NEAR(f.predict(30), 213, 1e-8);
}

TEST(Fit, QuadraticRecoversLeadingCoefficient) {
  auto f = fit(synthetic(8, 20, [](double l) { return 2 * l * l; }), FitModel::Quadratic);
  EXPECT_NEAR(f.coeffs[2], 2, 1e-9);
  EXPECT_NEAR(f.coeffs[1], 0, 1e-7);
  EXPECT_NEAR(f.r2, 1, 1e-12);
}

TEST(Fit, CoefficientsToTenSignificantDigits) {
  std::vector<double> x, y;
  for (int i = 0; i < 9; ++i) {
    x.push_back(0.5 * i + 1);
    y.push_back(1.2345678901 - 0.0987654321 * x.back() + 3.14159265358979 * x.back() * x.back());
  }
  auto f = fit_points(x, y, FitModel::Quadratic);
  EXPECT_NEAR(f.coeffs[0] / 1.2345678901, 1, 1e-10);
  EXPECT_NEAR(f.coeffs[1] / -0.0987654321, 1, 1e-10);
  EXPECT_NEAR(f.coeffs[2] / 3.14159265358979, 1, 1e-10);

  // bits = 5 * 2^{0.4 ell} is a straight line in log2.
  auto p = fit(synthetic(10, 20, [](double l) { return 5e3 * std::exp2(0.4 * l); }), FitModel::Power);
  EXPECT_NEAR(p.coeffs[1], 0.4, 1e-6);
  // bits = ell^3 has log-log slope 3.
  auto g = fit(synthetic(4, 40, [](double l) { return l * l * l; }), FitModel::LogLog);
  EXPECT_NEAR(g.coeffs[1], 3, 1e-9);
}

TEST(Fit, RejectsTooFewPointsAndDegenerateDesigns) {
  EXPECT_THROW(fit(synthetic(8, 10, [](double l) { return l; }), FitModel::Linear), Error);
  std::vector<double> same(6, 3.0), y{1, 2, 3, 4, 5, 6};
  EXPECT_THROW(fit_points(same, y, FitModel::Linear), Error);
  EXPECT_THROW(fit_points({1, 2, 3, 4}, {1, 0, 2, 3}, FitModel::Power), Error);
  EXPECT_THROW(fit_points({1, 2, 3}, {1, 2}, FitModel::Linear), Error);
  EXPECT_THROW(parse_model("cubic"), Error);
  EXPECT_EQ(parse_model("loglog"), FitModel::LogLog);
}

TEST(Report, CsvHeaderAndRows) {
  auto recs = synthetic(8, 10, [](double l) { return 10 * l; });
  recs[1].dh = Rational(3, 4096);
  recs[1].seed = 9;
  auto csv = csv_text(recs);
  EXPECT_EQ(csv,
            "ell,bits,dh_num,dh_den,codec,seed\n"
            "8,80,1,1000,poly,0\n"
            "9,90,3,4096,poly,9\n"
            "10,100,1,1000,poly,0\n");
}

TEST(Report, SvgHasOnePolylinePerSeriesAndFit) {
  auto a = synthetic(8, 14, [](double l) { return 10 * l; });
  auto b = synthetic(8, 14, [](double l) { return 20 * l; });
  for (auto& r : b) r.seed = 2;
  a.insert(a.end(), b.begin(), b.end());
  std::vector<FitResult> fits{fit(a, FitModel::Linear), fit(a, FitModel::Power)};
  auto svg = svg_text(a, fits);
  EXPECT_EQ(count(svg, "class=\"data\""), 2u);
  EXPECT_EQ(count(svg, "class=\"model\""), 2u);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg, svg_text(a, fits));
}

TEST(Sweep, PolyMiddleThirdIsDeterministic) {
  SweepConfig cfg;
  cfg.codec = CodecId::Poly;
  auto recs = sweep(cfg, middle_third());
  ASSERT_EQ(recs.size(), 13u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].ell, 8 + i);
    EXPECT_LT(recs[i].dh, pow2q(-static_cast<long>(recs[i].ell)));
  }
  EXPECT_EQ(csv_text(recs), csv_text(sweep(cfg, middle_third())));
  auto f = fit(recs, FitModel::Linear);
  EXPECT_NEAR(f.coeffs[1], 4, 1e-9);

  auto csv = scratch("poly.csv"), svg = scratch("poly.svg");
  report(recs, {f}, csv.string(), svg.string());
  std::ifstream in(csv);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), csv_text(recs));
  EXPECT_TRUE(std::filesystem::exists(svg));
}

TEST(Sweep, ErrorsNameTheFailingPoint) {
  SweepConfig cfg;
  cfg.ell_min = 9;
  cfg.ell_max = 8;
  EXPECT_THROW(sweep(cfg, middle_third()), Error);

  cfg.codec = CodecId::Ck;
  cfg.ell_min = 6;
  cfg.ell_max = 7;
  ScalingParams p;
  p.zeta = Rational(1, 20);
  try {
    sweep(cfg, CkInput{p}, Budget{64});
    FAIL() << "tiny budget accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error::Kind::Budget);
    EXPECT_NE(std::string(e.what()).find("ell=6"), std::string::npos) << e.what();
  }

  cfg.codec = CodecId::Poly;
  EXPECT_THROW(sweep(cfg, RandInput{}), Error);
}

TEST(Sweep, SeedsApplyToRandomInputs) {
  SweepConfig cfg;
  cfg.codec = CodecId::Rand;
  cfg.ell_min = 6;
  cfg.ell_max = 9;
  cfg.seeds = {3, 5};
  auto recs = sweep(cfg, RandInput{});
  ASSERT_EQ(recs.size(), 8u);
  EXPECT_EQ(recs.front().seed, 3u);
  EXPECT_EQ(recs.back().seed, 5u);
}

TEST(Json, ParsesInputsAndConfigs) {
  auto ifs = input_from_json(Json::parse(R"({"kind":"ifs","rho":"1/3","maps":[
      {"type":"affine","a":"1/3","b":0},{"type":"polynomial","c":["2/3", 0.25, "1/20"]}]})"));
  const auto& spec = std::get<IfsSpec>(ifs);
  EXPECT_EQ(spec.rho, Rational(1, 3));
  ASSERT_EQ(spec.maps.size(), 2u);
  EXPECT_EQ(std::get<Polynomial>(spec.maps[1]).c[1], Rational(1, 4));

  auto r = std::get<RandInput>(input_from_json(Json::parse(R"({"kind":"rand","distribution":"uniform:1/4,3/4","seed":9})")));
  EXPECT_EQ(r.seed, 9u);
  EXPECT_EQ(r.dist.text(), Distribution::uniform(Rational(1, 4), Rational(3, 4)).text());

  auto c = std::get<CkInput>(input_from_json(Json::parse(R"({"kind":"ck","zeta":0.1})")));
  EXPECT_EQ(c.params.zeta, Rational(1, 10));

  EXPECT_THROW(input_from_json(Json::parse(R"({"kind":"tree"})")), Error);
  EXPECT_THROW(input_from_json(Json::parse(R"({"kind":"ifs","maps":[]})")), Error);
  EXPECT_THROW(input_from_json(Json::parse(R"({"kind":"ck","zeta":"2"})")), Error);
  EXPECT_THROW(input_from_json(Json::parse(R"({"kind":"rand","seed":-1})")), Error);

  auto s = sweep_from_json(Json::parse(R"({"codec":"ck","input":"ck.json","ell":[6,9],"seeds":[1,2],"csv":"o.csv"})"), "/data");
  EXPECT_EQ(s.config.codec, CodecId::Ck);
  EXPECT_EQ(s.config.ell_min, 6u);
  EXPECT_EQ(s.config.ell_max, 9u);
  EXPECT_EQ(s.config.seeds.size(), 2u);
  EXPECT_EQ(s.input_path, "/data/ck.json");
  EXPECT_THROW(sweep_from_json(Json::parse(R"({"codec":"poly","input":"a","ell":[9,8]})")), Error);
  EXPECT_THROW(sweep_from_json(Json::parse(R"({"codec":"zip","input":"a"})")), Error);

  auto bad = scratch("bad.json");
  write_text(bad.string(), "{not json");
  try {
    load_input(bad.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error::Kind::Format);
  }
  EXPECT_THROW(load_input(scratch("missing.json").string()), Error);
}

TEST(Packing, SingleTrialCarriesNoBits) {
  auto r = packing_estimate(Distribution::uniform(Rational(1, 10), Rational(9, 10)), 1, Rational(1, 64), 1);
  EXPECT_EQ(r.size, 1u);
  EXPECT_EQ(r.log2_size, 0);
  EXPECT_THROW(packing_estimate(Distribution::uniform(Rational(1, 10), Rational(9, 10)), 1, Rational(1, 64), 0), Error);
}

TEST(Packing, DistinctSetsGiveAtLeastOneBit) {
  // lambda = 1/10 and lambda = 9/10 produce level-1 gaps 4/5 and 1/10 wide: far apart at eps = 1/16.
  auto r = packing_estimate(Distribution::parse("uniform:1/10,9/10"), 1, Rational(1, 16), 16);
  EXPECT_GE(r.log2_size, 1);
  EXPECT_EQ(r.certificate_failures, 0u);
  EXPECT_EQ(r.certified + r.measured > 0, true);

}

TEST(Packing, IdenticalSamplesNeverSeparate) {
  std::vector<detail::SampleMaker> makers(6, [](unsigned) {
    detail::Sample s;
    s.pts = {0, 0.25, 0.75, 1};
    s.slack = 0;
    s.exact = [] { return std::pair{FinitePointSet::from({0, Rational(1, 4), Rational(3, 4), 1}), Rational(0)}; };
    return s;
  });
  auto r = detail::greedy_packing(makers, Rational(1, 64), [](std::size_t, std::size_t) { return false; });
  EXPECT_EQ(r.size, 1u);
  EXPECT_EQ(r.log2_size, 0);
  EXPECT_EQ(r.measured, 5u);
}

TEST(Packing, GreedyFamilyIsPairwiseSeparated) {
  const Rational eps(1, 256);
  const auto dist = Distribution::parse("uniform:19/40,21/40");
  auto r = packing_estimate(dist, 1000, eps, 48);
  EXPECT_EQ(r.certificate_failures, 0u);
  ASSERT_GE(r.size, 2u);
  // Every pair of members is separated by an exact distance at a much deeper level.
  std::vector<std::pair<FinitePointSet, Rational>> sets;
  for (std::uint64_t t = 0; t < 48; ++t) {
    LambdaStream s(1000 + t, dist);
    unsigned n = 1;
    Rational L = s.at(1) / 2;
    while (!(L < eps / 4096)) L *= s.at(++n) / 2;
    auto c = build_central(s, n);
    sets.emplace_back(c.endpoints(n), c.lengths[n]);
  }
  ASSERT_EQ(r.members.size(), r.size);
  for (std::size_t x = 0; x < r.members.size(); ++x) {
    for (std::size_t y = x + 1; y < r.members.size(); ++y) {
      const auto& a = sets[r.members[x]];
      const auto& b = sets[r.members[y]];
      EXPECT_GT(hausdorff_finite(a.first, b.first) - a.second - b.second, eps) << r.members[x] << " " << r.members[y];
    }
  }
}
