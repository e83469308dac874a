// edc: encode/decode descriptions of Cantor sets and run the eps-sweep experiments.
//
// Exit codes: 0 ok, 2 validation or input error, 3 contract (distance) failure, 4 budget.

#include "edc/edc.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace edc;

namespace {

int exit_code(const Error& e) {
  switch (e.kind()) {
    case Error::Kind::Contract:
      return 3;
    case Error::Kind::Budget:
      return 4;
    default:
      return 2;
  }
}

/// One exact value per row: "x,approx" with x as p/q; only the first column is read back.
void write_points(const std::string& path, const FinitePointSet& s) {
  std::ostringstream out;
  out << "x,approx\n";
  char buf[40];
  for (const auto& x : s.points()) {
    std::snprintf(buf, sizeof buf, "%.17g", to_double(x));
    out << to_text(x) << ',' << buf << '\n';
  }
  if (path.empty() || path == "-") {
    std::cout << out.str();
  } else {
    write_text(path, out.str());
  }
}

FinitePointSet read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Kind::Io, "cannot open '" + path + "'");
  std::vector<Rational> pts;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string first = line.substr(0, line.find(','));
    if (row == 1 && first.find_first_of("0123456789") == std::string::npos) continue;  // header
    Rational x = parse_rational(first);
    if (x < 0 || x > 1) throw validation_error(path + ":" + std::to_string(row) + ": point outside [0,1]");
    pts.push_back(std::move(x));
  }
  if (pts.empty()) throw validation_error("'" + path + "' holds no points");
  return FinitePointSet::from(std::move(pts));
}

std::vector<SweepRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Kind::Io, "cannot open '" + path + "'");
  std::vector<SweepRecord> out;
  std::string line;
  std::getline(in, line);
  if (line.rfind("ell,bits", 0) != 0) throw format_error("'" + path + "' is not a sweep CSV");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
    if (f.size() != 6) throw format_error("sweep CSV row needs 6 columns: " + line);
    SweepRecord r;
    r.ell = static_cast<unsigned>(std::stoul(f[0]));
    r.bits = std::stoull(f[1]);
    r.dh = parse_rational(f[2] + "/" + f[3]);
    r.codec = parse_codec(f[4]);
    r.seed = std::stoull(f[5]);
    out.push_back(r);
  }
  return out;
}

void print_fit(const FitResult& f) {
  std::printf("model=%s r2=%.6f coeffs=", model_name(f.model).c_str(), f.r2);
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) std::printf("%s%.10g", i ? "," : "", f.coeffs[i]);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Descriptions of Cantor sets within a Hausdorff tolerance"};
  app.require_subcommand(1);
  const Budget budget = Budget::from_env();

  std::string codec = "poly", input, out, in2;
  unsigned ell = 10;
  double delta = 0.05;
  auto* enc = app.add_subcommand("encode", "Encode an input at eps = 2^-L");
  enc->add_option("--codec", codec, "poly, analytic, rand or ck")->check(CLI::IsMember({"poly", "analytic", "rand", "ck"}));
  enc->add_option("--input", input, "input JSON")->required()->check(CLI::ExistingFile);
  enc->add_option("--eps-exp", ell, "L with eps = 2^-L")->required();
  enc->add_option("--out", out, "description file")->required();
  enc->add_option("--delta", delta, "cell-count slack reported by the ck codec");
  bool verify = false;
  enc->add_flag("--verify", verify, "decode and measure d_H against a reference");

  std::string file;
  auto* dec = app.add_subcommand("decode", "Decode a description to its point set");
  dec->add_option("file", file, "description file")->required()->check(CLI::ExistingFile);
  dec->add_option("--out", out, "points CSV (default stdout)");

  auto* dist = app.add_subcommand("dist", "Exact Hausdorff distance of two point CSVs");
  dist->add_option("a", input, "first points CSV")->required()->check(CLI::ExistingFile);
  dist->add_option("b", in2, "second points CSV")->required()->check(CLI::ExistingFile);

  unsigned jmin = 2, jmax = 7, depth = 0;
  std::string rho_text;
  auto* dim = app.add_subcommand("dim", "Box-counting dimension of a point CSV");
  dim->add_option("--in", input, "points CSV")->required()->check(CLI::ExistingFile);
  dim->add_option("--jmin", jmin);
  dim->add_option("--jmax", jmax);
  dim->add_option("--depth", depth, "level depth of the points, enables the resolution check");
  dim->add_option("--rho", rho_text, "largest ratio of the level set, with --depth");

  std::string dist_text = "uniform:1/10,9/10";
  std::uint64_t seed = 1;
  unsigned audit_q = 0;
  auto* rnd = app.add_subcommand("rand", "Random central set endpoints at a given depth");
  rnd->add_option("--distribution", dist_text);
  rnd->add_option("--seed", seed);
  rnd->add_option("--depth", depth)->required();
  rnd->add_option("--out", out, "points CSV (default stdout)");
  rnd->add_option("--audit-q", audit_q, "also report the Lambda_n / Psi_q audit for this q");

  std::string theta_text = "1/2", zeta_text = "1/20";
  auto* ck = app.add_subcommand("ck", "Scaling Cantor set level intervals");
  ck->add_option("--rho", rho_text)->default_str("1/4");
  ck->add_option("--theta", theta_text);
  ck->add_option("--zeta", zeta_text);
  ck->add_option("--seed", seed);
  ck->add_option("--depth", depth)->required();
  ck->add_option("--out", out, "intervals CSV (default stdout)");

  std::string config;
  auto* sw = app.add_subcommand("sweep", "Run an eps sweep from a JSON config");
  sw->add_option("config", config)->required()->check(CLI::ExistingFile);
  sw->add_option("--csv", out, "override the CSV path");

  std::string family = "rand";
  unsigned ell_min = 6, ell_max = 12;
  std::size_t trials = 512;
  auto* pk = app.add_subcommand("pack", "Greedy eps-packing of seeded random sets");
  pk->add_option("--family", family)->check(CLI::IsMember({"rand", "ck"}));
  pk->add_option("--distribution", dist_text, "lambda law of the rand family");
  pk->add_option("--rho", rho_text);
  pk->add_option("--theta", theta_text);
  pk->add_option("--zeta", zeta_text);
  pk->add_option("--seed", seed);
  pk->add_option("--ell-min", ell_min);
  pk->add_option("--ell-max", ell_max);
  pk->add_option("--trials", trials);
  pk->add_option("--out", out, "CSV (default stdout)");

  std::string model = "linear";
  auto* ft = app.add_subcommand("fit", "Fit a growth model to a sweep CSV");
  ft->add_option("--in", input, "sweep CSV")->required()->check(CLI::ExistingFile);
  ft->add_option("--model", model, "linear, quadratic, power or loglog")->check(CLI::IsMember({"linear", "quadratic", "power", "loglog"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*enc) {
      auto in = load_input(input);
      auto d = encode_input(parse_codec(codec), in, ell, delta, budget);
      write_file(out, d.bytes);
      Json rep{{"codec", codec_name(d.codec)}, {"ell", d.ell}, {"total_bits", d.total_bits},
               {"header_bits", d.header_bits}, {"payload_bits", d.payload_bits}, {"nbar", d.nbar}};
      for (const auto& [k, v] : d.params) rep["params"][k] = v;
      if (verify) {
        auto r = codec_report(d, in, budget);
        rep["dh_achieved"] = to_text(r.dh_achieved);
        rep["dh_over_eps"] = to_double(r.dh_achieved * pow2q(static_cast<long>(ell)));
        if (!(r.dh_achieved < pow2q(-static_cast<long>(ell)))) {
          std::cout << rep.dump(2) << '\n';
          throw contract_error("decoded set is not within eps of the reference");
        }
      }
      std::cout << rep.dump(2) << '\n';
    } else if (*dec) {
      write_points(out, decode(read_file(file), budget));
    } else if (*dist) {
      auto d = hausdorff_finite(read_points(input), read_points(in2));
      std::printf("%s %.17g\n", to_text(d).c_str(), to_double(d));
    } else if (*dim) {
      std::optional<Resolution> res;
      if (depth > 0) {
        if (rho_text.empty()) throw validation_error("--depth needs --rho");
        res = Resolution{depth, to_double(parse_rational(rho_text))};
      }
      auto e = estimate_dimension(read_points(input), jmin, jmax, res);
      std::printf("j,N\n");
      for (std::size_t i = 0; i < e.scales.size(); ++i) std::printf("%u,%zu\n", e.scales[i], e.counts[i]);
      std::printf("slope,%.10g\nr2,%.10g\n", e.slope, e.r2);
    } else if (*rnd) {
      LambdaStream s(seed, Distribution::parse(dist_text));
      write_points(out, build_central(s, depth, budget).endpoints(depth));
      if (audit_q > 0) {
        auto a = audit(s, depth, default_eta(s.distribution()), audit_q);
        std::cerr << "gamma=" << a.gamma << " eta=" << a.eta << " in_lambda=" << a.in_lambda
                  << " in_psi=" << a.in_psi << " N=" << a.N << '\n';
      }
    } else if (*ck) {
      ScalingParams p;
      p.rho = parse_rational(rho_text.empty() ? "1/4" : rho_text);
      p.theta = parse_rational(theta_text);
      p.zeta = parse_rational(zeta_text);
      p.seed = seed;
      auto t = build_ck(CkCantor(p), depth, budget);
      std::ostringstream os;
      os << "word,lo,hi\n";
      for (std::uint64_t x = 0; x < t.levels[depth].size(); ++x) {
        std::string w;
        for (auto sym : word_of(x, depth).symbols) w += static_cast<char>('0' + sym);
        os << (w.empty() ? "-" : w) << ',' << to_text(t.levels[depth][x].lo) << ',' << to_text(t.levels[depth][x].hi) << '\n';
      }
      if (out.empty() || out == "-") {
        std::cout << os.str();
      } else {
        write_text(out, os.str());
      }
    } else if (*sw) {
      auto loaded = load_sweep(config);
      auto& cfg = loaded.config;
      if (!out.empty()) cfg.csv_path = out;
      auto records = sweep(cfg, load_input(loaded.input_path), budget);
      std::vector<FitResult> fits;
      for (auto m : {FitModel::Linear, FitModel::Quadratic, FitModel::Power}) {
        if (records.size() >= 4) fits.push_back(fit(records, m));
      }
      report(records, fits, cfg.csv_path, cfg.svg_path);
      if (cfg.csv_path.empty()) std::cout << csv_text(records);
      for (const auto& f : fits) print_fit(f);
    } else if (*pk) {
      if (ell_min > ell_max || ell_min < 1) throw validation_error("empty ell range");
      std::ostringstream os;
      os << "ell,log2_packing,size,trials,certified,measured,certificate_failures\n";
      char buf[64];
      for (unsigned l = ell_min; l <= ell_max; ++l) {
        PackingResult r;
        if (family == "rand") {
          r = packing_estimate(Distribution::parse(dist_text), seed, pow2q(-static_cast<long>(l)), trials, budget);
        } else {
          ScalingParams p;
          p.rho = parse_rational(rho_text.empty() ? "1/4" : rho_text);
          p.theta = parse_rational(theta_text);
          p.zeta = parse_rational(zeta_text);
          p.seed = seed;
          p.check();
          r = packing_estimate(p, pow2q(-static_cast<long>(l)), trials, budget);
        }
        std::snprintf(buf, sizeof buf, "%.6f", r.log2_size);
        os << l << ',' << buf << ',' << r.size << ',' << r.trials << ',' << r.certified << ',' << r.measured << ','
           << r.certificate_failures << '\n';
      }
      if (out.empty() || out == "-") {
        std::cout << os.str();
      } else {
        write_text(out, os.str());
      }
    } else if (*ft) {
      print_fit(fit(read_records(input), parse_model(model)));
    }
  } catch (const Error& e) {
    std::cerr << "edc: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "edc: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
