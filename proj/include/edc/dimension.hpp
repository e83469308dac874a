#pragma once
// Box-counting over dyadic boxes [m 2^-j, (m+1) 2^-j); the point 1 lands in its own box 2^j.

#include "edc/point_set.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

namespace edc {

inline std::size_t box_count(const FinitePointSet& s, unsigned j) {
  std::size_t count = 0;
  bool have = false;
  Integer last, m;
  const Rational scale(pow2z(j));
  for (const auto& x : s.points()) {
    m = floor_q(x * scale);
    if (!have || m != last) {
      ++count;
      last = m;
      have = true;
    }
  }
  return count;
}

/// Finest usable scale of a level set: depth n with every ratio at most rho.
struct Resolution {
  unsigned depth = 0;
  double rho = 0;

  double max_j() const { return depth * std::log2(1 / rho) - 2; }
};

struct DimEstimate {
  std::vector<unsigned> scales;  // j, box width 2^-j
  std::vector<std::size_t> counts;
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

/// OLS fit of log2 N_j against j over [j_min, j_max].
inline DimEstimate estimate_dimension(const FinitePointSet& s, unsigned j_min, unsigned j_max,
                                      std::optional<Resolution> res = std::nullopt) {
  if (!(j_min < j_max)) throw validation_error("dimension window needs jmin < jmax");
  if (s.empty()) throw validation_error("cannot estimate the dimension of an empty set");
  if (res && j_max > res->max_j()) {
    throw validation_error("window jmax=" + std::to_string(j_max) + " is beyond the resolution floor " +
                           std::to_string(res->max_j()) + " of the level set");
  }
  DimEstimate e;
  const auto n = static_cast<Eigen::Index>(j_max - j_min + 1);
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (unsigned j = j_min; j <= j_max; ++j) {
    auto c = box_count(s, j);
    e.scales.push_back(j);
    e.counts.push_back(c);
    const auto r = static_cast<Eigen::Index>(j - j_min);
    a(r, 0) = j;
    a(r, 1) = 1;
    y(r) = std::log2(static_cast<double>(c));
  }
  Eigen::Vector2d beta = a.colPivHouseholderQr().solve(y);
  e.slope = beta(0);
  e.intercept = beta(1);
  double ss_res = (y - a * beta).squaredNorm();
  double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  e.r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0;
  return e;
}

}  // namespace edc
