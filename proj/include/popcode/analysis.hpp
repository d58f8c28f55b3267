#pragma once

// Discrimination analysis. Observing a code for time T yields independent
// Poisson counts; this header carries the KL divergence between the two
// stimulus hypotheses, closed-form bounds on the optimal test's error
// probability, Poisson tail bounds with exact series companions, and the
// discrimination time T(f, rho): the smallest 1/delta over stimulus pairs at
// distance at least rho, computed exactly from the breakpoint cells or
// estimated from an anchored candidate grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "popcode/codes.hpp"
#include "popcode/geometry.hpp"

namespace popcode {

inline double c_mu(double mu) {
  if (!(mu > 1.0)) throw std::invalid_argument("c_mu: need mu > 1");
  double q = (mu - 1.0) * (mu - 1.0) / 4.0;
  return q * std::min(1.0 / (2.0 * mu), 3.0 / (5.0 + mu));
}

inline double c_tilde_mu(double mu) {
  if (!(mu > 1.0)) throw std::invalid_argument("c_tilde_mu: need mu > 1");
  return (mu - 1.0) * std::log(mu);
}

// K(P_{s1}, P_{s2}) over observation window T. Only neurons whose activity
// differs contribute: gained neurons at rate mu-1-log(mu), lost neurons at
// mu*log(mu)-mu+1.
inline double kl_divergence(const Code& code, const CirclePoint& s1, const CirclePoint& s2,
                            double T, double mu) {
  if (!(T >= 0.0)) throw std::invalid_argument("kl_divergence: need T >= 0");
  if (!(mu > 1.0)) throw std::invalid_argument("kl_divergence: need mu > 1");
  DeltaReport r = delta(code, s1, s2);
  return T * ((mu - 1.0 - std::log(mu)) * r.only_in_2 +
              (mu * std::log(mu) - mu + 1.0) * r.only_in_1);
}

struct ErrorBounds {
  double kl;
  double pe_lower;
  double pe_upper;
  double c_mu;
  double c_tilde_mu;
};

// Two-sided bounds on the minimax error probability of discriminating s1 from
// s2 after time T. With delta = 0 they degenerate to [1/2, 1].
inline ErrorBounds pe_bounds(const Code& code, const CirclePoint& s1, const CirclePoint& s2,
                             double T, double mu) {
  if (!(T >= 0.0)) throw std::invalid_argument("pe_bounds: need T >= 0");
  double c = c_mu(mu);
  double ct = c_tilde_mu(mu);
  double d = static_cast<double>(delta(code, s1, s2).delta);
  double lower = std::max(std::exp(-T * ct * d) / 4.0,
                          (1.0 - std::sqrt(T * ct * d / 2.0)) / 2.0);
  double upper = std::exp(-T * c * d);
  return {kl_divergence(code, s1, s2, T, mu), lower, upper, c, ct};
}

// --- Poisson tails ----------------------------------------------------------

inline double poisson_sf(double theta, double x);

namespace detail {

inline double pois_pmf_log(double theta, double k) {
  return k * std::log(theta) - theta - std::lgamma(k + 1.0);
}

}  // namespace detail

inline double poisson_pmf(double theta, std::uint64_t k) {
  if (!(theta > 0.0)) return k == 0 ? 1.0 : 0.0;
  return std::exp(detail::pois_pmf_log(theta, static_cast<double>(k)));
}

// P(X <= x) by series summation, stable for small results: below the mean it
// sums downward from floor(x), above it goes through the survival series.
inline double poisson_cdf(double theta, double x) {
  if (!(theta > 0.0)) return x >= 0.0 ? 1.0 : 0.0;
  double k = std::floor(x);
  if (k < 0.0) return 0.0;
  if (k >= theta) return 1.0 - poisson_sf(theta, k + 1.0);
  double term = std::exp(detail::pois_pmf_log(theta, k));
  double total = term;
  for (double j = k; j >= 1.0 && term > total * 1e-18; j -= 1.0) {
    term *= j / theta;
    total += term;
  }
  return std::min(total, 1.0);
}

// P(X >= x), summed upward from ceil(x) when that sits above the mean.
inline double poisson_sf(double theta, double x) {
  if (!(theta > 0.0)) return x <= 0.0 ? 1.0 : 0.0;
  double k = std::ceil(x);
  if (k <= 0.0) return 1.0;
  if (k <= theta) return 1.0 - poisson_cdf(theta, k - 1.0);
  double term = std::exp(detail::pois_pmf_log(theta, k));
  double total = term;
  for (double j = k; term > total * 1e-18; j += 1.0) {
    term *= theta / (j + 1.0);
    total += term;
  }
  return std::min(total, 1.0);
}

// P(X >= theta(1+x)) <= exp(-theta x^2 / (2(1+x/3))) for x >= 0.
inline double poisson_tail_upper(double theta, double x) {
  if (!(theta > 0.0) || !(x >= 0.0))
    throw std::invalid_argument("poisson_tail_upper: need theta > 0 and x >= 0");
  return std::exp(-theta * x * x / (2.0 * (1.0 + x / 3.0)));
}

// P(X <= theta - x) <= exp(-x^2 / (2 theta)) for 0 <= x <= theta.
inline double poisson_tail_lower(double theta, double x) {
  if (!(theta > 0.0) || !(x >= 0.0) || !(x <= theta))
    throw std::invalid_argument("poisson_tail_lower: need theta > 0 and 0 <= x <= theta");
  return std::exp(-x * x / (2.0 * theta));
}

// --- discrimination times ---------------------------------------------------

// Time scale on which the pair (s1, s2) becomes distinguishable: 1/delta, or
// infinity for indistinguishable pairs.
inline double t_min(const Code& code, const CirclePoint& s1, const CirclePoint& s2) {
  int d = delta(code, s1, s2).delta;
  return d == 0 ? kInf : 1.0 / static_cast<double>(d);
}

struct ExactOptions {
  std::size_t cell_budget = std::size_t{1} << 12;
  std::size_t breakpoint_cap = kDefaultBreakpointCap;
};

namespace detail {

inline double unit_gap(double delta) {
  double d = std::fmod(std::abs(delta), 1.0);
  return std::min(d, 1.0 - d);
}

// Half-open variant of arc_pair_reaches on the unit circle, on raw cell
// coordinates (start, length) for speed. See geometry.hpp for the reasoning.
inline bool cell_pair_reaches(double a, double la, double b, double lb, double rho) {
  double lo = a - b - lb;
  double hi = lo + la + lb;
  double peak = std::ceil(lo - 0.5) + 0.5;
  double maxd = peak <= hi ? 0.5 : std::max(unit_gap(lo), unit_gap(hi));
  if (maxd > rho) return true;
  if (peak == lo) peak += 1.0;
  return peak < hi && 0.5 >= rho;
}

}  // namespace detail

// Exact T(f, rho) = 1 / min{ delta(s1, s2) : d(s1, s2) >= rho }. The active
// set is constant on each cell between consecutive breakpoints, so the
// minimum is scanned over cell pairs (midpoint representatives, included when
// some half-open point pair reaches rho) and over breakpoint pairs (whose
// ownership the half-open rule assigns to the cell starting there). Quadratic
// in the cell count; refuses beyond the cell budget.
inline double t_of_rho_exact(const Code& code, double rho, const ExactOptions& opt = {}) {
  if (!std::isfinite(rho) || rho < 0.0 || rho > 0.5 + kAngleTol)
    throw std::invalid_argument("t_of_rho: rho must lie in [0, 1/2]");
  auto bps = breakpoints(code, opt.breakpoint_cap);
  const std::size_t M = bps.size();
  if (M > opt.cell_budget)
    throw BudgetExceeded("cell budget exceeded: " + std::to_string(M) + " cells > budget " +
                         std::to_string(opt.cell_budget) +
                         "; raise it or use t_of_rho_sampled");
  const std::size_t W = code.mask_words();
  std::vector<double> theta(M), len(M);
  std::vector<std::uint64_t> bp_mask(M * W), mid_mask(M * W);
  for (std::size_t j = 0; j < M; ++j) theta[j] = bps[j].theta();
  for (std::size_t j = 0; j < M; ++j) {
    double next = j + 1 < M ? theta[j + 1] : theta[0] + 1.0;
    len[j] = next - theta[j];
    code.fill_active_mask(bps[j], &bp_mask[j * W]);
    code.fill_active_mask(CirclePoint(theta[j] + len[j] / 2), &mid_mask[j * W]);
  }
  int best = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < M && best > 0; ++i) {
    for (std::size_t j = i; j < M; ++j) {
      if (detail::cell_pair_reaches(theta[i], len[i], theta[j], len[j], rho))
        best = std::min(best,
                        detail::delta_between_masks(&mid_mask[i * W], &mid_mask[j * W], W));
      double gap = theta[j] - theta[i];
      if (std::min(gap, 1.0 - gap) >= rho)
        best = std::min(best,
                        detail::delta_between_masks(&bp_mask[i * W], &bp_mask[j * W], W));
      if (best == 0) break;
    }
  }
  if (best == std::numeric_limits<int>::max())
    throw std::logic_error("t_of_rho: no qualifying pair");
  return best == 0 ? kInf : 1.0 / static_cast<double>(best);
}

// Anchored candidate grid for the sampled estimate: the pairs considered are
// (anchor, anchor + offset) for each candidate offset.
struct ProxyGrid {
  double anchor = 1.0 / 3.0;
  std::vector<double> offsets;
};

// Geometric gap ladder 2^-21, 2^-20.5, ..., 0.5 (41 points, ratio sqrt 2).
inline std::vector<double> standard_rho_grid() {
  std::vector<double> v;
  v.reserve(41);
  for (int j = 0; j <= 40; ++j) v.push_back(std::exp2(-21.0 + 0.5 * j));
  return v;
}

inline ProxyGrid standard_proxy_grid() { return {1.0 / 3.0, standard_rho_grid()}; }

// Sampled stand-in for t_of_rho_exact: the worst 1/delta among candidate pairs
// with offset >= rho. A maximum over a subset of the true feasible set, hence
// never above the exact value.
inline double t_of_rho_sampled(const Code& code, double rho, const ProxyGrid& grid) {
  if (!std::isfinite(rho) || rho < 0.0 || rho > 0.5 + kAngleTol)
    throw std::invalid_argument("t_of_rho: rho must lie in [0, 1/2]");
  CirclePoint anchor(grid.anchor);
  double best = -1.0;
  for (double off : grid.offsets) {
    if (off < rho) continue;
    best = std::max(best, t_min(code, anchor, CirclePoint(grid.anchor + off)));
    if (best == kInf) break;
  }
  if (best < 0.0)
    throw std::invalid_argument("t_of_rho_sampled: no candidate offset reaches rho");
  return best;
}

}  // namespace popcode
