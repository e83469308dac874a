#pragma once

#include "edc/rational.hpp"

#include <cstddef>
#include <cstdlib>
#include <string>

namespace edc {

/// Cap on the number of intervals or endpoints a single materialization may produce.
struct Budget {
  std::size_t max_points = std::size_t{1} << 22;

  /// Reads EDC_BUDGET_POINTS when set to a positive integer, otherwise keeps the default.
  static Budget from_env() {
    Budget b;
    if (const char* v = std::getenv("EDC_BUDGET_POINTS")) {
      char* end = nullptr;
      unsigned long long n = std::strtoull(v, &end, 10);
      if (end != v && *end == '\0' && n > 0) b.max_points = static_cast<std::size_t>(n);
    }
    return b;
  }

  /// Throws a budget error when `count` (possibly 2^depth) exceeds the cap.
  void require(long double count, const std::string& what) const {
    if (count > static_cast<long double>(max_points)) {
      throw budget_error(what + " needs " + std::to_string(static_cast<unsigned long long>(count)) +
                         " points, over the limit of " + std::to_string(max_points) + " (EDC_BUDGET_POINTS)");
    }
  }

  void require_depth(unsigned depth, unsigned points_per_leaf, const std::string& what) const {
    long double n = static_cast<long double>(points_per_leaf);
    for (unsigned i = 0; i < depth; ++i) n *= 2;
    require(n, what);
  }
};

}  // namespace edc
