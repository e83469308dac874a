#pragma once
// Eps sweeps over one codec input, growth-model fits and deterministic CSV/SVG output.

#include "edc/codecs.hpp"
#include "edc/hausdorff.hpp"

#include <Eigen/Dense>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <variant>

namespace edc {

/// Random central set: an explicit lambda list, or a stream drawn from `dist`.
struct RandInput {
  Distribution dist = Distribution::uniform(Rational(1, 10), Rational(9, 10));
  std::uint64_t seed = 1;
  std::vector<Rational> lambda;  // non-empty overrides the stream
};

struct CkInput {
  ScalingParams params;
};

using CodecInput = std::variant<IfsSpec, RandInput, CkInput>;

struct SweepConfig {
  CodecId codec = CodecId::Poly;
  unsigned ell_min = 8;
  unsigned ell_max = 20;
  std::vector<std::uint64_t> seeds;  // rand and ck inputs; empty keeps the input's own seed
  double delta = 0.05;
  std::string csv_path;
  std::string svg_path;
};

struct SweepRecord {
  unsigned ell = 0;
  std::size_t bits = 0;
  Rational dh;  // achieved d_H against the reference, exact
  CodecId codec = CodecId::Poly;
  std::uint64_t seed = 0;
  unsigned nbar = 0;
};

namespace detail {

inline RandInput seeded(RandInput in, std::optional<std::uint64_t> seed) {
  if (seed) in.seed = *seed;
  return in;
}

inline CkInput seeded(CkInput in, std::optional<std::uint64_t> seed) {
  if (seed) in.params.seed = *seed;
  return in;
}

}  // namespace detail

inline Description encode_input(CodecId codec, const CodecInput& input, unsigned ell, double delta = 0.05,
                                const Budget& budget = Budget::from_env()) {
  switch (codec) {
    case CodecId::Poly:
      if (const auto* ifs = std::get_if<IfsSpec>(&input)) return encode_poly(*ifs, ell, budget);
      throw validation_error("poly codec needs an IFS input");
    case CodecId::Analytic:
      if (const auto* ifs = std::get_if<IfsSpec>(&input)) return encode_analytic(*ifs, ell, budget);
      throw validation_error("analytic codec needs an IFS input");
    case CodecId::Rand:
      if (const auto* r = std::get_if<RandInput>(&input)) {
        if (!r->lambda.empty()) return encode_rand(r->lambda, ell, budget);
        return encode_rand(LambdaStream(r->seed, r->dist), ell, budget);
      }
      throw validation_error("rand codec needs a random central input");
    case CodecId::Ck:
      if (const auto* c = std::get_if<CkInput>(&input)) return encode_ck(CkCantor(c->params), ell, {delta}, budget);
      if (const auto* ifs = std::get_if<IfsSpec>(&input)) return encode_ck(ck_model(*ifs, 2, budget), ell, {delta}, budget);
      throw validation_error("ck codec needs a scaling set or an affine IFS input");
  }
  throw validation_error("unknown codec");
}

/// Disjoint intervals, sorted, whose union is within eps/8 of the set (plus the rounding widening
/// of non-affine maps, far below eps).
inline std::vector<Interval> reference_intervals(const CodecInput& input, unsigned ell,
                                                 const Budget& budget = Budget::from_env()) {
  const Rational target = pow2q(-static_cast<long>(ell) - 3);
  if (const auto* ifs = std::get_if<IfsSpec>(&input)) {
    return reference_cover(*ifs, depth_for(ifs->rho, target), ell + 24, budget);
  }
  if (const auto* r = std::get_if<RandInput>(&input)) {
    std::vector<Rational> lam;
    Rational L(1);
    while (!(L < target)) {
      std::size_t k = lam.size() + 1;
      if (r->lambda.empty()) {
        lam.push_back(LambdaStream(r->seed, r->dist).at(k));
      } else {
        if (k > r->lambda.size()) throw validation_error("lambda list too short for the reference at this eps");
        lam.push_back(r->lambda[k - 1]);
      }
      L *= lam.back() / 2;
    }
    auto n = static_cast<unsigned>(lam.size());
    return build_central(lam, n, budget).intervals(n);
  }
  const auto& c = std::get<CkInput>(input);
  unsigned n = depth_for(c.params.rate_upper(), target);
  return build_ck(CkCantor(c.params), n, budget).levels[n];
}

/// Encode, decode and verify one point; a d_H at or above eps is a contract failure.
inline SweepRecord run_point(CodecId codec, const CodecInput& input, unsigned ell, std::uint64_t seed, double delta,
                             const Budget& budget = Budget::from_env()) {
  auto where = [&] { return codec_name(codec) + " at ell=" + std::to_string(ell) + " seed=" + std::to_string(seed); };
  try {
    auto d = encode_input(codec, input, ell, delta, budget);
    auto pts = decode(d, budget);
    auto ref = reference_intervals(input, ell, budget);
    SweepRecord rec{ell, d.total_bits, hausdorff_vs_intervals(pts, ref), codec, seed, d.nbar};
    if (!(rec.dh < pow2q(-static_cast<long>(ell)))) {
      throw contract_error("d_H = " + std::to_string(to_double(rec.dh)) + " is not below eps");
    }
    return rec;
  } catch (const Error& e) {
    throw Error(e.kind(), where() + ": " + e.what());
  }
}

inline std::vector<SweepRecord> sweep(const SweepConfig& cfg, const CodecInput& input,
                                      const Budget& budget = Budget::from_env()) {
  if (cfg.ell_min > cfg.ell_max) throw validation_error("empty ell range");
  if (cfg.ell_min < 1 || cfg.ell_max > kMaxEll) throw validation_error("ell outside [1, " + std::to_string(kMaxEll) + "]");
  std::vector<std::optional<std::uint64_t>> seeds;
  if (std::holds_alternative<IfsSpec>(input) || cfg.seeds.empty()) {
    seeds.push_back(std::nullopt);
  } else {
    for (auto s : cfg.seeds) seeds.emplace_back(s);
  }
  std::vector<SweepRecord> out;
  for (const auto& seed : seeds) {
    CodecInput in = input;
    std::uint64_t shown = 0;
    if (auto* r = std::get_if<RandInput>(&in)) {
      *r = detail::seeded(*r, seed);
      shown = r->seed;
    } else if (auto* c = std::get_if<CkInput>(&in)) {
      *c = detail::seeded(*c, seed);
      shown = c->params.seed;
    }
    for (unsigned ell = cfg.ell_min; ell <= cfg.ell_max; ++ell) out.push_back(run_point(cfg.codec, in, ell, shown, cfg.delta, budget));
  }
  return out;
}

// ---------------------------------------------------------------------------------------------

enum class FitModel { Linear, Quadratic, Power, LogLog };

inline std::string model_name(FitModel m) {
  switch (m) {
    case FitModel::Linear:
      return "linear";
    case FitModel::Quadratic:
      return "quadratic";
    case FitModel::Power:
      return "power";
    case FitModel::LogLog:
      return "loglog";
  }
  return "?";
}

inline FitModel parse_model(const std::string& s) {
  for (auto m : {FitModel::Linear, FitModel::Quadratic, FitModel::Power, FitModel::LogLog}) {
    if (model_name(m) == s) return m;
  }
  throw validation_error("unknown fit model '" + s + "' (expected linear, quadratic, power or loglog)");
}

/// Coefficients in increasing powers of the model's abscissa:
///   linear     y = c0 + c1 x
///   quadratic  y = c0 + c1 x + c2 x^2
///   power      log2 y = c0 + c1 x          (bits ~ eps^{-c1} with x = ell)
///   loglog     ln y = c0 + c1 ln x
/// r2 and residuals are taken in the fitted coordinates.
struct FitResult {
  FitModel model = FitModel::Linear;
  std::vector<double> coeffs;
  double r2 = 0;
  std::vector<double> residuals;

  double predict(double x) const {
    switch (model) {
      case FitModel::Linear:
        return coeffs[0] + coeffs[1] * x;
      case FitModel::Quadratic:
        return coeffs[0] + (coeffs[1] + coeffs[2] * x) * x;
      case FitModel::Power:
        return std::exp2(coeffs[0] + coeffs[1] * x);
      case FitModel::LogLog:
        return std::exp(coeffs[0] + coeffs[1] * std::log(x));
    }
    return 0;
  }
};

inline FitResult fit_points(const std::vector<double>& x, const std::vector<double>& y, FitModel model) {
  if (x.size() != y.size()) throw validation_error("fit needs matching x and y");
  if (x.size() < 4) throw validation_error("fit needs at least 4 records");
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index cols = model == FitModel::Quadratic ? 3 : 2;
  Eigen::MatrixXd a(n, cols);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double xi = x[static_cast<std::size_t>(i)], yi = y[static_cast<std::size_t>(i)];
    if (model == FitModel::LogLog) {
      if (!(xi > 0 && yi > 0)) throw validation_error("loglog fit needs positive data");
      xi = std::log(xi);
      yi = std::log(yi);
    } else if (model == FitModel::Power) {
      if (!(yi > 0)) throw validation_error("power fit needs positive data");
      yi = std::log2(yi);
    }
    a(i, 0) = 1;
    a(i, 1) = xi;
    if (cols == 3) a(i, 2) = xi * xi;
    b(i) = yi;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < cols) throw validation_error("degenerate design matrix for the " + model_name(model) + " fit");
  Eigen::VectorXd beta = qr.solve(b);
  FitResult f;
  f.model = model;
  for (Eigen::Index j = 0; j < cols; ++j) f.coeffs.push_back(beta(j));
  Eigen::VectorXd res = b - a * beta;
  for (Eigen::Index i = 0; i < n; ++i) f.residuals.push_back(res(i));
  double ss_tot = (b.array() - b.mean()).matrix().squaredNorm();
  f.r2 = ss_tot > 0 ? std::clamp(1 - res.squaredNorm() / ss_tot, 0.0, 1.0) : 1.0;
  return f;
}

/// bits against ell.
inline FitResult fit(const std::vector<SweepRecord>& records, FitModel model) {
  std::vector<double> x, y;
  for (const auto& r : records) {
    x.push_back(r.ell);
    y.push_back(static_cast<double>(r.bits));
  }
  return fit_points(x, y, model);
}

// ---------------------------------------------------------------------------------------------

inline std::string csv_text(const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << "ell,bits,dh_num,dh_den,codec,seed\n";
  for (const auto& r : records) {
    out << r.ell << ',' << r.bits << ',' << r.dh.get_num().get_str() << ',' << r.dh.get_den().get_str() << ','
        << codec_name(r.codec) << ',' << r.seed << '\n';
  }
  return out.str();
}

/// log2(bits) against ell: one polyline per (codec, seed) series and one per fitted model.
inline std::string svg_text(const std::vector<SweepRecord>& records, const std::vector<FitResult>& fits) {
  if (records.empty()) throw validation_error("nothing to plot");
  const double W = 640, H = 400, M = 48;
  double x0 = records.front().ell, x1 = x0, y0 = 1e300, y1 = -1e300;
  for (const auto& r : records) {
    x0 = std::min<double>(x0, r.ell);
    x1 = std::max<double>(x1, r.ell);
    double y = std::log2(static_cast<double>(std::max<std::size_t>(r.bits, 1)));
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 - y0 < 1) y1 = y0 + 1;
  auto px = [&](double x) { return M + (x - x0) / (x1 - x0) * (W - 2 * M); };
  auto py = [&](double y) { return H - M - (y - y0) / (y1 - y0) * (H - 2 * M); };
  char buf[96];
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  out << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", M, H - M, W - M, H - M);
  out << buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", M, M, M, H - M);
  out << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\">ell</text>\n", W / 2, H - 12);
  out << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"8\" y=\"%.1f\" font-size=\"12\">log2 bits</text>\n", M - 16);
  out << buf;

  static const char* colors[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#17becf"};
  std::size_t series = 0;
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i;
    out << "<polyline class=\"data\" fill=\"none\" stroke=\"" << colors[series++ % 5] << "\" points=\"";
    for (; j < records.size() && records[j].codec == records[i].codec && records[j].seed == records[i].seed; ++j) {
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", j == i ? "" : " ", px(records[j].ell),
                    py(std::log2(static_cast<double>(std::max<std::size_t>(records[j].bits, 1)))));
      out << buf;
    }
    out << "\"/>\n";
    i = j;
  }
  static const char* dashes[] = {"6,3", "2,2", "8,2,2,2", "4,4"};
  std::size_t k = 0;
  for (const auto& f : fits) {
    out << "<polyline class=\"model\" data-model=\"" << model_name(f.model) << "\" fill=\"none\" stroke=\"#d62728\" stroke-dasharray=\""
        << dashes[k++ % 4] << "\" points=\"";
    const int steps = 32;
    bool first = true;
    for (int s = 0; s <= steps; ++s) {
      double x = x0 + (x1 - x0) * s / steps;
      double v = f.model == FitModel::Power ? f.coeffs[0] + f.coeffs[1] * x : std::log2(std::max(f.predict(x), 1.0));
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", first ? "" : " ", px(x), py(v));
      out << buf;
      first = false;
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Error::Kind::Io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(Error::Kind::Io, "write to '" + path + "' failed");
}

inline void report(const std::vector<SweepRecord>& records, const std::vector<FitResult>& fits,
                   const std::string& csv_path, const std::string& svg_path = "") {
  if (records.empty()) throw validation_error("report needs at least one record");
  if (!csv_path.empty()) write_text(csv_path, csv_text(records));
  if (!svg_path.empty()) write_text(svg_path, svg_text(records, fits));
}

// ---------------------------------------------------------------------------------------------

/// Summary of one encoding: size, achieved distance and the encoder's parameter table.
struct CodecReport {
  std::size_t total_bits = 0;
  Rational dh_achieved;
  unsigned nbar = 0;
  std::vector<std::pair<std::string, std::string>> params;
};

inline CodecReport codec_report(const Description& d, const CodecInput& input, const Budget& budget = Budget::from_env()) {
  CodecReport r;
  r.total_bits = d.total_bits;
  r.nbar = d.nbar;
  r.params = d.params;
  r.dh_achieved = hausdorff_vs_intervals(decode(d, budget), reference_intervals(input, d.ell, budget));
  return r;
}

}  // namespace edc
