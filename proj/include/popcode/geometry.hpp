#pragma once

// Circle geometry for periodic stimulus spaces: points on a circle of
// circumference u with coordinates normalized to [0, u), half-open arcs with
// wraparound, geodesic distance, and modular reduction between nested scales.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace popcode {

// Tolerance for circle-coordinate comparisons (dedup, scale checks). Endpoint
// membership itself is evaluated with exact floating-point comparisons so that
// half-open boundaries behave deterministically.
inline constexpr double kAngleTol = 1e-12;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class CirclePoint {
 public:
  explicit CirclePoint(double theta, double radius = 1.0) : radius_(radius) {
    if (!std::isfinite(radius) || !(radius > 0.0))
      throw std::invalid_argument("CirclePoint: circumference must be positive and finite");
    if (!std::isfinite(theta))
      throw std::invalid_argument("CirclePoint: coordinate must be finite");
    double t = std::fmod(theta, radius);
    if (t < 0.0) t += radius;
    if (t >= radius) t = 0.0;  // fmod/rounding can land exactly on the modulus
    theta_ = t;
  }

  double theta() const { return theta_; }
  double radius() const { return radius_; }

  friend bool operator==(const CirclePoint& a, const CirclePoint& b) {
    return a.theta_ == b.theta_ && a.radius_ == b.radius_;
  }

 private:
  double theta_;
  double radius_;
};

inline bool same_circle(const CirclePoint& a, const CirclePoint& b) {
  return std::abs(a.radius() - b.radius()) <= kAngleTol;
}

// Geodesic distance on S^u; always in [0, u/2].
inline double distance(const CirclePoint& a, const CirclePoint& b) {
  if (!same_circle(a, b)) throw std::invalid_argument("distance: scale mismatch");
  double u = a.radius();
  double d = std::abs(a.theta() - b.theta());
  return std::min(d, u - d);
}

// Reduce a point of S^radius onto the smaller circle S^u. Exact in floating
// point (IEEE fmod has no rounding error).
inline CirclePoint mod_reduce(const CirclePoint& s, double u) {
  if (!std::isfinite(u) || !(u > 0.0))
    throw std::invalid_argument("mod_reduce: modulus must be positive");
  if (u > s.radius() + kAngleTol)
    throw std::invalid_argument("mod_reduce: modulus exceeds circumference");
  return CirclePoint(std::fmod(s.theta(), u), u);
}

// Half-open arc from start to end, wrapping through 0 when end < start.
// Equal endpoints give the empty arc; a full-circle arc is not representable.
class Arc {
 public:
  Arc(CirclePoint start, CirclePoint end) : start_(start), end_(end) {
    if (!same_circle(start_, end_)) throw std::invalid_argument("Arc: scale mismatch");
  }

  const CirclePoint& start() const { return start_; }
  const CirclePoint& end() const { return end_; }
  double radius() const { return start_.radius(); }
  bool empty() const { return start_.theta() == end_.theta(); }

  double length() const {
    if (empty()) return 0.0;
    double len = end_.theta() - start_.theta();
    return len > 0.0 ? len : len + radius();
  }

 private:
  CirclePoint start_;
  CirclePoint end_;
};

inline bool arc_contains(const Arc& arc, const CirclePoint& s) {
  if (!same_circle(arc.start(), s)) throw std::invalid_argument("arc_contains: scale mismatch");
  double a = arc.start().theta();
  double b = arc.end().theta();
  double t = s.theta();
  if (a == b) return false;
  if (a < b) return a <= t && t < b;
  return t >= a || t < b;
}

// First n binary digits of x in [0,1): x_j = floor(2^j (x - sum_{k<j} x_k 2^-k)).
// Streaming form; exact for doubles since doubling is exact in binary.
inline std::vector<int> dyadic_digits(double x, int n) {
  if (!(x >= 0.0) || !(x < 1.0))
    throw std::invalid_argument("dyadic_digits: argument must lie in [0,1)");
  if (n < 1 || n > 52)
    throw std::invalid_argument("dyadic_digits: digit count must lie in [1,52]");
  std::vector<int> digits(static_cast<std::size_t>(n));
  double rem = x;
  for (int j = 0; j < n; ++j) {
    rem *= 2.0;
    int bit = rem >= 1.0 ? 1 : 0;
    digits[static_cast<std::size_t>(j)] = bit;
    rem -= bit;
  }
  return digits;
}

struct DistanceRange {
  double min;
  double max;
};

namespace detail {

// Geodesic gap of a signed coordinate difference on circumference u.
inline double circ_gap(double delta, double u) {
  double d = std::fmod(std::abs(delta), u);
  return std::min(d, u - d);
}

// Smallest point >= lo congruent to u/2 (mod u); such points maximize circ_gap.
inline double next_peak(double lo, double u) {
  return 0.5 * u + std::ceil((lo - 0.5 * u) / u) * u;
}

// Signed difference interval [lo, lo+len] swept by x - y as x, y run over the
// closures of two arcs with start coordinates a, b and lengths la, lb.
struct DiffInterval {
  double lo;
  double hi;
};

inline DiffInterval diff_interval(double a, double la, double b, double lb) {
  return {a - b - lb, a - b + la};
}

}  // namespace detail

// The set of geodesic distances achievable between the closures of two
// non-empty arcs. It is a closed interval: distance is continuous and the
// product of the closures is connected.
inline DistanceRange arc_pair_distance_range(const Arc& c1, const Arc& c2) {
  if (!same_circle(c1.start(), c2.start()))
    throw std::invalid_argument("arc_pair_distance_range: scale mismatch");
  if (c1.empty() || c2.empty())
    throw std::invalid_argument("arc_pair_distance_range: empty arc");
  double u = c1.radius();
  auto [lo, hi] = detail::diff_interval(c1.start().theta(), c1.length(),
                                        c2.start().theta(), c2.length());
  double at_lo = detail::circ_gap(lo, u);
  double at_hi = detail::circ_gap(hi, u);
  DistanceRange r{std::min(at_lo, at_hi), std::max(at_lo, at_hi)};
  if (std::ceil(lo / u) * u <= hi) r.min = 0.0;
  if (detail::next_peak(lo, u) <= hi) r.max = 0.5 * u;
  return r;
}

// True iff some pair of points in the half-open product c1 x c2 lies at
// geodesic distance >= rho. This refines arc_pair_distance_range at the
// boundary: when the supremum equals rho but is attained only at the arcs'
// missing right endpoints, the pair does not reach rho. The supremum u/2 is
// the one value attainable at interior points of the difference interval.
inline bool arc_pair_reaches(const Arc& c1, const Arc& c2, double rho) {
  if (!same_circle(c1.start(), c2.start()))
    throw std::invalid_argument("arc_pair_reaches: scale mismatch");
  if (c1.empty() || c2.empty()) return false;
  if (rho <= 0.0) return true;
  double u = c1.radius();
  auto [lo, hi] = detail::diff_interval(c1.start().theta(), c1.length(),
                                        c2.start().theta(), c2.length());
  double peak = detail::next_peak(lo, u);
  double maxd = peak <= hi ? 0.5 * u
                           : std::max(detail::circ_gap(lo, u), detail::circ_gap(hi, u));
  if (maxd > rho) return true;
  if (peak == lo) peak += u;
  return peak < hi && 0.5 * u >= rho;
}

}  // namespace popcode
