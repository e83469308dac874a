#pragma once
// Greedy eps-separated families drawn from seeded random sets.
//
// A candidate joins the family when it is separated from every member already chosen. The
// structural certificate is asked first; when it abstains the pair is measured directly. Every
// certificate that fires is also measured, and disagreements are counted rather than hidden.

#include "edc/ck_scaling.hpp"
#include "edc/hausdorff.hpp"
#include "edc/random_cantor.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

namespace edc {

struct PackingResult {
  double log2_size = 0;
  std::size_t size = 0;
  std::size_t trials = 0;
  std::size_t certified = 0;             // pairs separated by the certificate
  std::size_t measured = 0;              // pairs decided by direct measurement
  std::size_t certificate_failures = 0;  // certified pairs the measurement does not confirm
  std::vector<std::size_t> members;      // trial indices of the family, ascending
};

namespace detail {

/// A finite approximation E of a set C with d_H(E, C) <= slack; E kept in double for the fast
/// path and rebuilt exactly when the double comparison is too close to call.
struct Sample {
  std::vector<double> pts;
  double slack = 0;
  std::function<std::pair<FinitePointSet, Rational>()> exact;
};

/// Builds the approximation of one realization with slack below eps / 2^k.
using SampleMaker = std::function<Sample(unsigned k)>;

inline double hausdorff_double(const std::vector<double>& a, const std::vector<double>& b) {
  auto directed = [](const std::vector<double>& x, const std::vector<double>& y) {
    double worst = 0;
    std::size_t k = 0;
    for (double v : x) {
      while (k + 1 < y.size() && y[k + 1] <= v) ++k;
      double d = std::fabs(v - y[k]);
      if (k + 1 < y.size()) d = std::min(d, std::fabs(y[k + 1] - v));
      worst = std::max(worst, d);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

/// True when the two sampled sets are provably more than eps apart: d_H(E_a, E_b) - s_a - s_b > eps.
inline bool measured_separated(const Sample& a, const Sample& b, const Rational& eps) {
  const double margin = hausdorff_double(a.pts, b.pts) - a.slack - b.slack - to_double(eps);
  if (std::fabs(margin) > 1e-9) return margin > 0;
  auto [ea, sa] = a.exact();
  auto [eb, sb] = b.exact();
  return hausdorff_finite(ea, eb) - sa - sb > eps;
}

template <class F>
void parallel_for(std::size_t n, const F& f) {
  const std::size_t workers = std::max(1U, std::min(8U, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline constexpr unsigned kBaseSlack = 3;               // eps/8 per set for the greedy pass
inline constexpr unsigned kConfirmSlack[] = {6, 9, 12};  // refinements before a certificate counts as unconfirmed

/// Greedy extraction in index order; `certify(i, j)` is the structural certificate.
inline PackingResult greedy_packing(const std::vector<SampleMaker>& makers, const Rational& eps,
                                    const std::function<bool(std::size_t, std::size_t)>& certify) {
  PackingResult r;
  r.trials = makers.size();
  std::vector<Sample> samples(makers.size());
  parallel_for(makers.size(), [&](std::size_t t) { samples[t] = makers[t](kBaseSlack); });
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    bool ok = true;
    for (std::size_t j : chosen) {
      bool measured = measured_separated(samples[i], samples[j], eps);
      if (certify(j, i)) {
        ++r.certified;
        // The base measurement loses up to eps/4; refine before calling the certificate wrong.
        for (unsigned k : kConfirmSlack) {
          if (measured) break;
          measured = measured_separated(makers[i](k), makers[j](k), eps);
        }
        if (!measured) ++r.certificate_failures;
      } else {
        ++r.measured;
      }
      if (!measured) {
        ok = false;
        break;
      }
    }
    if (ok) chosen.push_back(i);
  }
  r.size = chosen.size();
  r.members = chosen;
  // A single realization separates nothing: log2 of the family is reported only from two on.
  r.log2_size = r.size >= 2 ? std::log2(static_cast<double>(r.size)) : 0.0;
  return r;
}

}  // namespace detail

/// Random central sets with lambda drawn from `dist`, seeds seed0, seed0 + 1, ...
inline PackingResult packing_estimate(const Distribution& dist, std::uint64_t seed0, const Rational& eps,
                                      std::size_t trials, const Budget& budget = Budget::from_env()) {
  if (!(eps > 0 && eps < 1)) throw validation_error("packing needs eps in (0,1)");
  if (trials == 0) throw validation_error("packing needs at least one trial");
  if (trials == 1) return {0, 1, 1, 0, 0, 0, {0}};
  std::vector<LambdaStream> streams;
  for (std::size_t t = 0; t < trials; ++t) streams.emplace_back(seed0 + t, dist);
  std::vector<detail::SampleMaker> makers;
  for (const auto& s : streams) {
    makers.push_back([s, eps, budget](unsigned k) {
      const Rational target = eps / pow2q(k);
      unsigned n = 1;
      Rational L = s.at(1) / 2;
      while (!(L < target)) L *= s.at(++n) / 2;
      auto c = build_central(s, n, budget);
      detail::Sample out;
      auto e = c.endpoints(n);
      for (const auto& x : e.points()) out.pts.push_back(to_double(x));
      out.slack = to_double(c.lengths[n]) * (1 + 1e-12);
      out.exact = [s, n, budget] {
        auto cc = build_central(s, n, budget);
        return std::pair{cc.endpoints(n), cc.lengths[n]};
      };
      return out;
    });
  }
  return detail::greedy_packing(makers, eps, [&](std::size_t i, std::size_t j) {
    return separation_probe(streams[i], streams[j], eps);
  });
}

/// Scaling sets sharing (rho, theta, zeta, dist), seeds p.seed, p.seed + 1, ...
inline PackingResult packing_estimate(const ScalingParams& p, const Rational& eps, std::size_t trials,
                                      const Budget& budget = Budget::from_env()) {
  if (!(eps > 0 && eps < 1)) throw validation_error("packing needs eps in (0,1)");
  if (trials == 0) throw validation_error("packing needs at least one trial");
  if (trials == 1) return {0, 1, 1, 0, 0, 0, {0}};
  std::vector<CkCantor> sets;
  for (std::size_t t = 0; t < trials; ++t) {
    ScalingParams q = p;
    q.seed = p.seed + t;
    sets.emplace_back(q);
  }
  auto widest = [](const CkLevels& t, unsigned n) {
    Rational w(0);
    for (const auto& iv : t.levels[n]) w = std::max(w, iv.length());
    return w;
  };
  std::vector<detail::SampleMaker> makers;
  for (const auto& c : sets) {
    makers.push_back([c, eps, budget, widest](unsigned k) {
      const unsigned n = depth_for(c.params().rate_upper(), eps / pow2q(k));
      auto tree = build_ck(c, n, budget);
      detail::Sample out;
      auto e = tree.endpoints(n);
      for (const auto& x : e.points()) out.pts.push_back(to_double(x));
      out.slack = to_double(widest(tree, n)) * (1 + 1e-12);
      out.exact = [c, n, budget, widest] {
        auto tr = build_ck(c, n, budget);
        return std::pair{tr.endpoints(n), widest(tr, n)};
      };
      return out;
    });
  }
  // The scan needs a non-negative depth, i.e. C eps / zeta <= 1.
  const bool certificate_applies = p.zeta > 0 && separation_constant(p) * to_double(eps) / to_double(p.zeta) <= 1;
  return detail::greedy_packing(makers, eps, [&](std::size_t i, std::size_t j) {
    return certificate_applies && separation_event(sets[i], sets[j], eps);
  });
}

}  // namespace edc
