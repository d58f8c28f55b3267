#pragma once

// Closed-form bounds on the minimax discrimination time: place-cell lower
// bound and sandwich, adaptive staircase sandwich, grid-class lower bound with
// its degeneracy predicates, upper bounds for the adaptive grid construction,
// and the balanced-rate interval. These are evaluators for inequalities that
// the exact algorithm in analysis.hpp can be checked against.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "popcode/codes.hpp"
#include "popcode/geometry.hpp"

namespace popcode {

struct Sandwich {
  double lower;
  double upper;
};

namespace detail {

inline void check_rho_half(double rho, const char* who) {
  if (!std::isfinite(rho) || rho < 0.0 || rho > 0.5 + kAngleTol)
    throw std::invalid_argument(std::string(who) + ": rho must lie in [0, 1/2]");
}

}  // namespace detail

// Largest module index whose scale still resolves rho: max{k : lambda_k >= rho}.
inline int j_rho(const GridSpec& spec, double rho) {
  validate_grid_spec(spec);
  if (!std::isfinite(rho) || rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("j_rho: rho must lie in [0, 1]");
  int j = 1;
  for (std::size_t i = 1; i < spec.modules.size(); ++i)
    if (spec.modules[i].lambda >= rho) j = static_cast<int>(i) + 1;
  return j;
}

// Minimax lower bound over all place codes of size n:
// 1 / floor(n / floor((2 rho)^-1)), infinite when the outer floor vanishes.
inline double place_lower_bound(int n, double rho) {
  if (n < 1) throw std::invalid_argument("place_lower_bound: need n >= 1");
  detail::check_rho_half(rho, "place_lower_bound");
  if (rho <= 0.0) return kInf;
  double groups = std::floor(1.0 / (2.0 * rho));
  if (groups > static_cast<double>(n)) return kInf;
  auto outer = static_cast<long long>(n) / static_cast<long long>(groups);
  return outer == 0 ? kInf : 1.0 / static_cast<double>(outer);
}

// Two-sided minimax interval for place codes, attained up to constants by the
// ceil(1/rho)-uniform code: [1/floor(4 n rho), 1/floor(3 n rho / 2)].
inline Sandwich place_minimax_sandwich(int n, double rho) {
  if (n < 1) throw std::invalid_argument("place_minimax_sandwich: need n >= 1");
  if (!std::isfinite(rho) || rho <= 1.0 / n || rho > 0.5 + kAngleTol)
    throw std::invalid_argument("place_minimax_sandwich: need 1/n < rho <= 1/2");
  return {1.0 / std::floor(4.0 * n * rho), 1.0 / std::floor(3.0 * n * rho / 2.0)};
}

// Staircase place code: floor(2 n rho) distinguishing neurons up to a factor
// of two; indistinguishable below 1/(2n).
inline Sandwich adaptive_place_sandwich(int n, double rho) {
  if (n < 1) throw std::invalid_argument("adaptive_place_sandwich: need n >= 1");
  detail::check_rho_half(rho, "adaptive_place_sandwich");
  double k = std::floor(2.0 * n * rho);
  if (k < 1.0) return {kInf, kInf};
  return {1.0 / k, 2.0 / k};
}

struct GridLowerBound {
  double value;
  // Either predicate certifies that no code of the class can discriminate at
  // distance rho at all (the bound is then infinite as well).
  bool scale_gap_degenerate;
  bool rho_degenerate;
};

// Lower bound over the whole grid class:
// 1 / floor(6 min_k sum_{i<=k} (n_i / lambda_i) max(rho, lambda_{k+1})), with
// lambda_{m+1} = 0. Requires rho <= 1/2 for an even scale ratio
// lambda_1/lambda_2 and rho <= 1/2 - lambda_2/2 for an odd one; a single
// module behaves as the even case.
inline GridLowerBound grid_lower_bound(const GridSpec& spec, double rho) {
  validate_grid_spec(spec);
  detail::check_rho_half(rho, "grid_lower_bound");
  const auto& mods = spec.modules;
  const std::size_t m = mods.size();
  if (m >= 2) {
    auto ratio = static_cast<long long>(std::llround(mods[0].lambda / mods[1].lambda));
    if (ratio % 2 != 0 && rho > 0.5 - mods[1].lambda / 2.0 + kAngleTol)
      throw std::domain_error(
          "grid_lower_bound: odd scale ratio needs rho <= 1/2 - lambda_2/2");
  }
  double prefix = 0.0;
  double smallest = kInf;
  for (std::size_t k = 0; k < m; ++k) {
    prefix += mods[k].count / mods[k].lambda;
    double lam_next = k + 1 < m ? mods[k + 1].lambda : 0.0;
    smallest = std::min(smallest, prefix * std::max(rho, lam_next));
  }
  double denom = std::floor(6.0 * smallest);
  double value = denom < 1.0 ? kInf : 1.0 / denom;

  int j = j_rho(spec, rho);
  bool scale_gap = false;
  double min_ratio = kInf;
  for (int k = 2; k <= j; ++k) {
    min_ratio = std::min(min_ratio, mods[k - 2].lambda / (6.0 * mods[k - 2].count));
    if ((k - 1) * mods[k - 1].lambda < min_ratio) scale_gap = true;
  }
  double min_j = kInf;
  for (int i = 0; i < j; ++i)
    min_j = std::min(min_j, mods[i].lambda / (6.0 * mods[i].count));
  bool rho_deg = j * rho < min_j;
  return {value, scale_gap, rho_deg};
}

// Upper bound achieved by the per-module staircase grid code:
// 4 / min_k sum_{j<=k} floor((n_j / lambda_j) max(lambda_{k+1}, rho)).
inline double grid_adaptive_upper_bound(const GridSpec& spec, double rho) {
  validate_grid_spec(spec);
  detail::check_rho_half(rho, "grid_adaptive_upper_bound");
  const auto& mods = spec.modules;
  const std::size_t m = mods.size();
  double smallest = kInf;
  for (std::size_t k = 0; k < m; ++k) {
    double lam_next = k + 1 < m ? mods[k + 1].lambda : 0.0;
    double sum = 0.0;
    for (std::size_t j = 0; j <= k; ++j)
      sum += std::floor(mods[j].count / mods[j].lambda * std::max(lam_next, rho));
    smallest = std::min(smallest, sum);
  }
  return smallest < 1.0 ? kInf : 4.0 / smallest;
}

// Companion form without inner floors, adaptive up to a log_2(1/rho) factor:
// 16 log2(1/rho) / min_k sum_{j<=k} (n_j / lambda_j) max(lambda_{k+1}, rho).
inline double grid_adaptive_upper_bound_log(const GridSpec& spec, double rho) {
  validate_grid_spec(spec);
  detail::check_rho_half(rho, "grid_adaptive_upper_bound_log");
  if (rho <= 0.0) return kInf;
  const auto& mods = spec.modules;
  const std::size_t m = mods.size();
  double prefix = 0.0;
  double smallest = kInf;
  for (std::size_t k = 0; k < m; ++k) {
    prefix += mods[k].count / mods[k].lambda;
    double lam_next = k + 1 < m ? mods[k + 1].lambda : 0.0;
    smallest = std::min(smallest, prefix * std::max(lam_next, rho));
  }
  return smallest <= 0.0 ? kInf : 16.0 * std::log2(1.0 / rho) / smallest;
}

// Rate interval for the balanced dyadic family with m = floor(log2(1/rho))
// modules: [1/(3 floor(n/m)), 16/floor(n/m)].
inline Sandwich balanced_rate(int n, double rho) {
  if (n < 1) throw std::invalid_argument("balanced_rate: need n >= 1");
  if (!std::isfinite(rho) || rho > 0.5 + kAngleTol || rho < std::exp2(-n / 2.0))
    throw std::invalid_argument("balanced_rate: need 2^(-n/2) <= rho <= 1/2");
  int m_modules = static_cast<int>(std::floor(std::log2(1.0 / rho)));
  if (n < 2 * m_modules)
    throw std::invalid_argument("balanced_rate: need n >= 2 floor(log2(1/rho))");
  auto per = static_cast<double>(n / m_modules);
  return {1.0 / (3.0 * per), 16.0 / per};
}

}  // namespace popcode
