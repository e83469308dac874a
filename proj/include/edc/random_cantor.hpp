#pragma once
// Random central Cantor sets: level n keeps 2^n intervals of length 2^-n prod_{h<=n} lambda_h,
// each parent losing its central part of relative length 1 - lambda_n.

#include "edc/budget.hpp"
#include "edc/hausdorff.hpp"
#include "edc/quantized.hpp"
#include "edc/rng.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <vector>

namespace edc {

/// Seeded i.i.d. contraction factors lambda_1, lambda_2, ... realized on demand.
class LambdaStream {
 public:
  LambdaStream(std::uint64_t seed, Distribution dist) : seed_(seed), dist_(std::move(dist)) {}

  std::uint64_t seed() const { return seed_; }
  const Distribution& distribution() const { return dist_; }

  /// lambda_k for k >= 1.
  Rational at(std::size_t k) const {
    if (k == 0) throw validation_error("lambda indices start at 1");
    if (auto it = overrides_.find(k); it != overrides_.end()) return it->second;
    return dist_.sample(uniform_open_unit(seed_, StreamTag::Central, k));
  }

  std::vector<Rational> take(std::size_t n) const {
    std::vector<Rational> out;
    out.reserve(n);
    for (std::size_t k = 1; k <= n; ++k) out.push_back(at(k));
    return out;
  }

  /// Copy with lambda_k replaced; the value must stay inside (0,1).
  LambdaStream with_override(std::size_t k, Rational v) const {
    if (!(v > 0 && v < 1)) throw validation_error("lambda override outside (0,1)");
    LambdaStream s = *this;
    s.overrides_[k] = std::move(v);
    return s;
  }

 private:
  std::uint64_t seed_;
  Distribution dist_;
  std::map<std::size_t, Rational> overrides_;
};

/// Level k holds 2^k intervals of common length lengths[k].
struct CentralLevels {
  std::vector<Rational> lambdas;                // lambda_1..lambda_n
  std::vector<Rational> lengths;                // L_0 = 1, L_k = L_{k-1} lambda_k / 2
  std::vector<std::vector<Rational>> lefts;     // left endpoints per level, increasing

  unsigned depth() const { return static_cast<unsigned>(lengths.size() - 1); }

  std::vector<Interval> intervals(unsigned k) const {
    std::vector<Interval> out;
    out.reserve(lefts[k].size());
    for (const auto& x : lefts[k]) out.push_back({x, x + lengths[k]});
    return out;
  }

  FinitePointSet endpoints(unsigned k) const {
    std::vector<Rational> pts;
    pts.reserve(2 * lefts[k].size());
    for (const auto& x : lefts[k]) {
      pts.push_back(x);
      pts.push_back(x + lengths[k]);
    }
    return FinitePointSet::from_sorted_unchecked(std::move(pts));
  }
};

inline CentralLevels build_central(std::span<const Rational> lambda, unsigned n,
                                   const Budget& budget = Budget::from_env()) {
  if (n < 1) throw validation_error("build_central needs depth n >= 1");
  if (lambda.size() < n) throw validation_error("not enough contraction factors for the requested depth");
  budget.require_depth(n, 2, "central Cantor set at depth " + std::to_string(n));
  CentralLevels c;
  c.lambdas.assign(lambda.begin(), lambda.begin() + n);
  c.lengths.push_back(Rational(1));
  c.lefts.push_back({Rational(0)});
  for (unsigned k = 1; k <= n; ++k) {
    const Rational& lam = c.lambdas[k - 1];
    if (!(lam > 0 && lam < 1)) throw validation_error("lambda_" + std::to_string(k) + " outside (0,1)");
    Rational parent = c.lengths.back();
    Rational len = parent * lam / 2;
    Rational shift = parent - len;
    std::vector<Rational> next;
    next.reserve(2 * c.lefts.back().size());
    for (const auto& x : c.lefts.back()) {
      next.push_back(x);
      next.push_back(x + shift);
    }
    c.lengths.push_back(std::move(len));
    c.lefts.push_back(std::move(next));
  }
  return c;
}

inline CentralLevels build_central(const LambdaStream& s, unsigned n, const Budget& budget = Budget::from_env()) {
  auto lam = s.take(n);
  return build_central(lam, n, budget);
}

/// N(eps) = min{ n : (2 e^{eta-gamma})^n eps > (log 1/eps)^-2 } for eps = 2^-q, q >= 2.
inline unsigned audit_depth(double gamma, double eta, unsigned q) {
  if (q < 2) throw validation_error("audit depth needs q >= 2");
  double log_eps = -static_cast<double>(q) * std::log(2.0);
  double rhs = -2.0 * std::log(-log_eps);
  double rate = std::log(2.0) + eta - gamma;
  unsigned n = 0;
  while (!(n * rate + log_eps > rhs)) ++n;
  return n;
}

struct AuditResult {
  double gamma = 0;
  double eta = 0;
  unsigned n = 0;          // depth of the Lambda_n check
  unsigned q = 0;
  unsigned N = 0;          // N(2^-q)
  bool in_lambda = false;  // lambda in Lambda_n
  std::optional<unsigned> lambda_violation;
  bool in_psi = false;     // lambda in Psi_q
  std::optional<unsigned> psi_violation;
};

/// First k in [floor(sqrt n), n] with sum_{h<=k} log lambda_h <= k (gamma - eta), if any.
inline std::optional<unsigned> lambda_set_violation(const LambdaStream& s, unsigned n, double gamma, double eta) {
  if (n == 0) return 0u;  // the empty product equals e^0, so the strict bound fails
  unsigned k0 = static_cast<unsigned>(std::floor(std::sqrt(static_cast<double>(n))));
  double acc = 0;
  for (unsigned k = 1; k <= n; ++k) {
    acc += std::log(to_double(s.at(k)));
    if (k >= k0 && !(acc > k * (gamma - eta))) return k;
  }
  return std::nullopt;
}

inline AuditResult audit(const LambdaStream& s, unsigned n, double eta, unsigned q) {
  if (!(eta > 0)) throw validation_error("audit needs eta > 0");
  AuditResult r;
  r.gamma = gamma_of(s.distribution()).value;
  r.eta = eta;
  r.n = n;
  r.q = q;
  r.lambda_violation = lambda_set_violation(s, n, r.gamma, eta);
  r.in_lambda = !r.lambda_violation;
  if (q < 3) {  // hole lengths are below 1 <= 2^{2-q}
    r.in_psi = false;
    r.psi_violation = 0;
    return r;
  }
  r.N = audit_depth(r.gamma, eta, q);
  if (auto v = lambda_set_violation(s, r.N, r.gamma, eta)) {
    r.psi_violation = *v;
    return r;
  }
  Rational bound = pow2q(2 - static_cast<long>(q));
  Rational len(1);  // prod_{h<=k} lambda_h / 2^k
  for (unsigned k = 0; k <= r.N; ++k) {
    Rational lam = s.at(k + 1);
    if (!((1 - lam) * len > bound)) {
      r.psi_violation = k;
      return r;
    }
    len *= lam / 2;
  }
  r.in_psi = true;
  return r;
}

inline double default_eta(const Distribution& d) { return std::fabs(gamma_of(d).value) / 10; }

/// Hole structure of the leftmost level-(k-1) interval: I = [0, L_{k-1}], H = [L_k, L_{k-1} - L_k].
inline HoleConfig central_hole(const std::vector<Rational>& lengths, unsigned k) {
  return HoleConfig::make(Rational(0), lengths[k - 1], lengths[k], lengths[k - 1] - lengths[k]);
}

struct ProbeResult {
  bool separated = false;
  unsigned level = 0;  // hole level used by the certificate
};

/// Walks the tube around lambda; at the first violated level picks the hole level and asks the
/// hole certificate. Abstains (false) unless both sequences lie in Psi_q with 2^-q = eps.
inline ProbeResult separation_probe_detail(const LambdaStream& a, const LambdaStream& b, const Rational& eps,
                                           std::optional<double> eta_opt = std::nullopt) {
  if (!(eps > 0 && eps < 1)) throw validation_error("separation_probe needs eps in (0,1)");
  unsigned q = static_cast<unsigned>(precision_for(eps));
  double eta = eta_opt ? *eta_opt : default_eta(a.distribution());
  auto ra = audit(a, 1, eta, q);
  if (!ra.in_psi) return {};
  auto rb = audit(b, 1, eta, q);
  if (!rb.in_psi) return {};
  unsigned N = std::max(ra.N, rb.N);
  double g = std::exp(eta - ra.gamma);
  double e = to_double(eps);
  unsigned root = static_cast<unsigned>(std::floor(std::sqrt(static_cast<double>(N))));

  unsigned violated = 0;
  for (unsigned k = 1; k <= N && violated == 0; ++k) {
    double diff = std::fabs(to_double(a.at(k) - b.at(k)));
    double tol;
    if (k == 1) {
      tol = 2 * e;
    } else if (k + 1 <= root) {
      tol = std::pow(2.0, k + 1) * std::pow(g, std::sqrt(static_cast<double>(N))) * e;
    } else {
      tol = 2 / g * std::pow(2 * g, k) * e;
    }
    if (!(diff < tol)) violated = k;
  }
  if (violated == 0) return {};

  std::vector<Rational> la{Rational(1)}, lb{Rational(1)};
  unsigned khat = violated;
  for (unsigned k = 1; k <= violated; ++k) {
    la.push_back(la.back() * a.at(k) / 2);
    lb.push_back(lb.back() * b.at(k) / 2);
    if (abs(la.back() - lb.back()) > eps) {
      khat = k;
      break;
    }
  }
  bool ok = separation_test(central_hole(la, khat), central_hole(lb, khat), eps);
  return {ok, khat};
}

inline bool separation_probe(const LambdaStream& a, const LambdaStream& b, const Rational& eps) {
  return separation_probe_detail(a, b, eps).separated;
}

/// The depth min{n : 2^-n < eps/2} that suffices for every lambda sequence.
inline unsigned worst_case_depth(const Rational& eps) {
  unsigned n = 0;
  while (!(pow2q(-static_cast<long>(n)) < eps / 2)) ++n;
  return n;
}

}  // namespace edc
