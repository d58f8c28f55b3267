#pragma once

// Independent oracles used by the test suite. These deliberately avoid the
// library's analytic paths: ranges are found by dense sampling, minimal
// discrimination statistics by brute-force grid scans, and Poisson tails by
// direct series summation, so that library results are checked against a
// second route.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "popcode/codes.hpp"
#include "popcode/geometry.hpp"

namespace popcode::oracle {

// Distance range between arc closures by sampling `steps+1` points per arc.
// Error is at most (len1+len2)/steps since distance is 1-Lipschitz per slot.
inline DistanceRange sampled_distance_range(const Arc& c1, const Arc& c2, int steps = 500) {
  double u = c1.radius();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i <= steps; ++i) {
    double t1 = c1.start().theta() + c1.length() * i / steps;
    for (int j = 0; j <= steps; ++j) {
      double t2 = c2.start().theta() + c2.length() * j / steps;
      double d = distance(CirclePoint(t1, u), CirclePoint(t2, u));
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  return {lo, hi};
}

// Brute-force discrimination time: scan all pairs of a regular grid on S^1,
// keep the minimal discrimination statistic among pairs at distance >= rho.
// Uses only active sets, never the breakpoint-cell machinery.
inline double brute_t_of_rho(const Code& code, double rho, int points = 10000) {
  std::size_t words = (code.alias_count() + 63) / 64;
  std::vector<std::uint64_t> masks(static_cast<std::size_t>(points) * words, 0);
  for (int i = 0; i < points; ++i) {
    auto active = code.active_set(CirclePoint(static_cast<double>(i) / points));
    for (int a : active) masks[i * words + static_cast<std::size_t>(a) / 64] |= 1ull << (a % 64);
  }
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (int i = 0; i < points; ++i) {
    for (int j = i; j < points; ++j) {
      double gap = static_cast<double>(j - i) / points;
      double d = std::min(gap, 1.0 - gap);
      if (d < rho) continue;
      std::uint64_t only1 = 0;
      std::uint64_t only2 = 0;
      for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t mi = masks[i * words + w];
        std::uint64_t mj = masks[j * words + w];
        only1 += static_cast<std::uint64_t>(__builtin_popcountll(mi & ~mj));
        only2 += static_cast<std::uint64_t>(__builtin_popcountll(mj & ~mi));
      }
      best = std::min(best, std::max(only1, only2));
      if (best == 0) return std::numeric_limits<double>::infinity();
    }
  }
  if (best == std::numeric_limits<std::uint64_t>::max()) return 0.0;  // no qualifying grid pair
  return best == 0 ? std::numeric_limits<double>::infinity() : 1.0 / static_cast<double>(best);
}

}  // namespace popcode::oracle
