#pragma once

// Counter-derived deterministic random streams. Every consumer owns a stream
// whose seed is a hash of (master seed, role indices); results are therefore
// independent of scheduling and worker count. splitmix64 throughout.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace popcode {

// splitmix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ull;
  }
  return h;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a = 0,
                                           std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(master ^ 0x5851f42d4c957f2dull);
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  s = mix64(s ^ c);
  return s;
}

class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline StreamRng derive_stream(std::uint64_t master, std::uint64_t a = 0,
                               std::uint64_t b = 0, std::uint64_t c = 0) {
  return StreamRng(derive_seed(master, a, b, c));
}

namespace detail {

// Hoermann's PTRS transformed rejection sampler, valid for mean >= 10.
inline std::uint64_t poisson_ptrs(StreamRng& rng, double mean) {
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = rng.next_double() - 0.5;
    double v = rng.next_double();
    double us = 0.5 - std::abs(u);
    double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * loglam - mean - std::lgamma(k + 1.0))
      return static_cast<std::uint64_t>(k);
  }
}

}  // namespace detail

// Exact Poisson sampling for any mean: sequential inversion below 10 (one
// uniform per draw), PTRS rejection above.
inline std::uint64_t poisson_draw(StreamRng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 10.0) {
    double p = std::exp(-mean);
    double cum = p;
    double u = rng.next_double();
    std::uint64_t k = 0;
    while (u > cum && p > 1e-300) {
      ++k;
      p *= mean / static_cast<double>(k);
      cum += p;
    }
    return k;
  }
  return detail::poisson_ptrs(rng, mean);
}

}  // namespace popcode
