#pragma once

// Binary rate codes on the circle. A code is a list of modules; module i has a
// scale lambda_i and single-arc receptive fields on S^lambda_i. A neuron fires
// at rate mu when the stimulus, reduced mod its scale, lies in its field, and
// at rate 1 otherwise. Scales must be unit-leading and nested:
// 1 = lambda_1 > lambda_2 > ..., each ratio lambda_i/lambda_{i+1} an integer.
//
// Neurons normally carry their ordinal as active-set index. Several arcs may
// share an index alias, which makes them one logical neuron with a
// union-of-arcs field; the discrimination statistic then counts the alias
// once. Aliases may not cross modules.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "popcode/geometry.hpp"
#include "popcode/rng.hpp"

namespace popcode {

inline constexpr std::size_t kDefaultBreakpointCap = std::size_t{1} << 22;

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Neuron {
  double scale;
  Arc field;
  int alias;

  double rate(const CirclePoint& s, double mu) const {
    return arc_contains(field, mod_reduce(s, scale)) ? mu : 1.0;
  }
};

struct GridSpec {
  struct Mod {
    int count;
    double lambda;
  };
  std::vector<Mod> modules;
};

inline void validate_grid_spec(const GridSpec& spec) {
  if (spec.modules.empty()) throw std::invalid_argument("grid spec: no modules");
  double prev = 0.0;
  for (std::size_t i = 0; i < spec.modules.size(); ++i) {
    const auto& m = spec.modules[i];
    if (m.count < 1) throw std::invalid_argument("grid spec: module needs at least one neuron");
    if (!std::isfinite(m.lambda) || m.lambda <= 0.0)
      throw std::invalid_argument("grid spec: scale must be positive");
    if (i == 0) {
      if (std::abs(m.lambda - 1.0) > kAngleTol)
        throw std::invalid_argument("incoherent scales: leading scale must be 1");
    } else {
      if (m.lambda >= prev - kAngleTol)
        throw std::invalid_argument("incoherent scales: scales must strictly decrease");
      double ratio = prev / m.lambda;
      if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw std::invalid_argument("incoherent scales: scale ratios must be integers");
    }
    prev = m.lambda;
  }
}

// Balanced layout: m modules with lambda_i = 2^-(i-1); floor(n/m) neurons per
// module, remainder assigned to the last.
inline GridSpec balanced_grid_spec(int n, int m) {
  if (m < 1 || n < m) throw std::invalid_argument("balanced grid: need n >= m >= 1");
  GridSpec spec;
  int base = n / m;
  for (int i = 0; i < m; ++i) {
    int count = i + 1 < m ? base : n - base * (m - 1);
    spec.modules.push_back({count, std::ldexp(1.0, -i)});
  }
  return spec;
}

class Code {
 public:
  struct Module {
    double lambda;
    std::vector<Arc> fields;
    std::vector<int> aliases;  // empty means ordinals
  };

  Code(double mu, std::vector<Module> modules) : mu_(mu), modules_(std::move(modules)) {
    if (!std::isfinite(mu_) || !(mu_ > 1.0))
      throw std::invalid_argument("code: active rate mu must exceed the baseline rate 1");
    if (modules_.empty()) throw std::invalid_argument("code: no modules");
    GridSpec spec;
    for (const auto& m : modules_) {
      if (m.fields.empty()) throw std::invalid_argument("code: empty module");
      spec.modules.push_back({static_cast<int>(m.fields.size()), m.lambda});
      for (const auto& f : m.fields)
        if (std::abs(f.radius() - m.lambda) > kAngleTol)
          throw std::invalid_argument("code: field scale mismatch");
    }
    validate_grid_spec(spec);
    assign_aliases();
  }

  double mu() const { return mu_; }
  const std::vector<Module>& modules() const { return modules_; }
  std::size_t module_count() const { return modules_.size(); }

  // Number of stored arcs; logical neurons may be fewer when arcs share aliases.
  int n() const { return n_; }
  int alias_count() const { return alias_count_; }
  std::size_t mask_words() const { return (static_cast<std::size_t>(alias_count_) + 63) / 64; }

  Neuron neuron(int i) const {
    auto [mi, fi] = locate(i);
    return {modules_[mi].lambda, modules_[mi].fields[fi], alias_of(mi, fi)};
  }

  GridSpec grid_spec() const {
    GridSpec spec;
    for (const auto& m : modules_)
      spec.modules.push_back({static_cast<int>(m.fields.size()), m.lambda});
    return spec;
  }

  // Alias ids active at stimulus s (sorted, deduplicated).
  std::vector<int> active_set(const CirclePoint& s) const {
    check_stimulus(s);
    std::vector<int> out;
    for (std::size_t mi = 0; mi < modules_.size(); ++mi) {
      CirclePoint t = mod_reduce(s, modules_[mi].lambda);
      for (std::size_t fi = 0; fi < modules_[mi].fields.size(); ++fi)
        if (arc_contains(modules_[mi].fields[fi], t)) out.push_back(alias_of(mi, fi));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Active set as a bit mask over alias ids.
  std::vector<std::uint64_t> active_mask(const CirclePoint& s) const {
    std::vector<std::uint64_t> mask(mask_words(), 0);
    fill_active_mask(s, mask.data());
    return mask;
  }

  void fill_active_mask(const CirclePoint& s, std::uint64_t* mask) const {
    check_stimulus(s);
    for (std::size_t w = 0; w < mask_words(); ++w) mask[w] = 0;
    for (std::size_t mi = 0; mi < modules_.size(); ++mi) {
      CirclePoint t = mod_reduce(s, modules_[mi].lambda);
      for (std::size_t fi = 0; fi < modules_[mi].fields.size(); ++fi)
        if (arc_contains(modules_[mi].fields[fi], t)) {
          int a = alias_of(mi, fi);
          mask[static_cast<std::size_t>(a) / 64] |= std::uint64_t{1} << (a % 64);
        }
    }
  }

  // Alias range [first, last) owned by module mi; aliases never cross modules.
  std::pair<int, int> module_alias_range(std::size_t mi) const { return alias_range_[mi]; }

 private:
  void check_stimulus(const CirclePoint& s) const {
    if (std::abs(s.radius() - 1.0) > kAngleTol)
      throw std::invalid_argument("code: stimulus must live on the unit circle");
  }

  std::pair<std::size_t, std::size_t> locate(int i) const {
    if (i < 0 || i >= n_) throw std::out_of_range("code: neuron index");
    std::size_t mi = 0;
    std::size_t k = static_cast<std::size_t>(i);
    while (k >= modules_[mi].fields.size()) k -= modules_[mi].fields.size(), ++mi;
    return {mi, k};
  }

  int alias_of(std::size_t mi, std::size_t fi) const {
    const auto& m = modules_[mi];
    if (!m.aliases.empty()) return m.aliases[fi];
    return ordinal_base_[mi] + static_cast<int>(fi);
  }

  void assign_aliases() {
    n_ = 0;
    ordinal_base_.clear();
    alias_range_.clear();
    int next = 0;
    for (const auto& m : modules_) {
      ordinal_base_.push_back(next);
      if (!m.aliases.empty() && m.aliases.size() != m.fields.size())
        throw std::invalid_argument("code: alias list must match field list");
      int lo = next;
      int hi = next;
      if (m.aliases.empty()) {
        hi = next + static_cast<int>(m.fields.size());
      } else {
        lo = *std::min_element(m.aliases.begin(), m.aliases.end());
        hi = *std::max_element(m.aliases.begin(), m.aliases.end()) + 1;
      }
      alias_range_.push_back({lo, hi});
      n_ += static_cast<int>(m.fields.size());
      next = hi;
    }
    alias_count_ = next;
    // contiguity and module-disjointness
    std::vector<char> seen(static_cast<std::size_t>(alias_count_), 0);
    for (std::size_t mi = 0; mi < modules_.size(); ++mi) {
      for (std::size_t fi = 0; fi < modules_[mi].fields.size(); ++fi) {
        int a = alias_of(mi, fi);
        if (a < alias_range_[mi].first || a >= alias_range_[mi].second || a < 0 ||
            a >= alias_count_)
          throw std::invalid_argument("code: aliases may not cross modules");
        seen[static_cast<std::size_t>(a)] = 1;
      }
    }
    for (char c : seen)
      if (!c) throw std::invalid_argument("code: alias ids must form a contiguous range");
  }

  double mu_;
  std::vector<Module> modules_;
  std::vector<int> ordinal_base_;
  std::vector<std::pair<int, int>> alias_range_;
  int n_ = 0;
  int alias_count_ = 0;
};

struct DeltaReport {
  int delta;
  int only_in_1;
  int only_in_2;
  std::vector<int> per_module;
};

namespace detail {

inline std::pair<int, int> diff_counts(const std::uint64_t* a, const std::uint64_t* b,
                                       std::size_t words) {
  int only1 = 0;
  int only2 = 0;
  for (std::size_t w = 0; w < words; ++w) {
    only1 += std::popcount(a[w] & ~b[w]);
    only2 += std::popcount(b[w] & ~a[w]);
  }
  return {only1, only2};
}

inline int delta_between_masks(const std::uint64_t* a, const std::uint64_t* b,
                               std::size_t words) {
  auto [only1, only2] = diff_counts(a, b, words);
  return std::max(only1, only2);
}

}  // namespace detail

// Discrimination statistic between two stimuli: the larger of the two one-sided
// active-set differences, plus the per-module breakdown.
inline DeltaReport delta(const Code& code, const CirclePoint& s1, const CirclePoint& s2) {
  auto m1 = code.active_mask(s1);
  auto m2 = code.active_mask(s2);
  DeltaReport report{0, 0, 0, {}};
  report.per_module.reserve(code.module_count());
  for (std::size_t mi = 0; mi < code.module_count(); ++mi) {
    auto [lo, hi] = code.module_alias_range(mi);
    int only1 = 0;
    int only2 = 0;
    for (int a = lo; a < hi; ++a) {
      std::uint64_t bit = std::uint64_t{1} << (a % 64);
      bool in1 = m1[static_cast<std::size_t>(a) / 64] & bit;
      bool in2 = m2[static_cast<std::size_t>(a) / 64] & bit;
      only1 += in1 && !in2;
      only2 += in2 && !in1;
    }
    report.only_in_1 += only1;
    report.only_in_2 += only2;
    report.per_module.push_back(std::max(only1, only2));
  }
  report.delta = std::max(report.only_in_1, report.only_in_2);
  return report;
}

// All field endpoints lifted through their modules' periods onto S^1, sorted
// and deduplicated. These are the only points where an active set can change.
inline std::vector<CirclePoint> breakpoints(const Code& code,
                                            std::size_t cap = kDefaultBreakpointCap) {
  std::size_t total = 0;
  for (const auto& m : code.modules()) {
    auto reps = static_cast<std::size_t>(std::llround(1.0 / m.lambda));
    total += 2 * m.fields.size() * reps;
  }
  if (total > cap)
    throw BudgetExceeded("cell budget exceeded: " + std::to_string(total) +
                         " breakpoints; raise the cap or use the sampled estimate");
  std::vector<double> thetas;
  thetas.reserve(total);
  for (const auto& m : code.modules()) {
    auto reps = static_cast<std::size_t>(std::llround(1.0 / m.lambda));
    for (const auto& f : m.fields) {
      for (std::size_t k = 0; k < reps; ++k) {
        double base = static_cast<double>(k) * m.lambda;
        thetas.push_back(CirclePoint(f.start().theta() + base).theta());
        thetas.push_back(CirclePoint(f.end().theta() + base).theta());
      }
    }
  }
  std::sort(thetas.begin(), thetas.end());
  std::vector<double> dedup;
  for (double t : thetas)
    if (dedup.empty() || t - dedup.back() > kAngleTol) dedup.push_back(t);
  while (dedup.size() >= 2 && (1.0 - dedup.back()) + dedup.front() <= kAngleTol)
    dedup.pop_back();
  std::vector<CirclePoint> out;
  out.reserve(dedup.size());
  for (double t : dedup) out.emplace_back(t);
  return out;
}

// --- constructors -----------------------------------------------------------

// d contiguous arcs [k/d, (k+1)/d); the first d-1 groups hold floor(n/d)
// neurons each and the last group the remainder.
inline Code make_uniform_place(int n, int d, double mu) {
  if (n < 1 || d < 1 || d > n)
    throw std::invalid_argument("uniform place: need 1 <= d <= n");
  Code::Module m{1.0, {}, {}};
  int base = n / d;
  for (int k = 0; k < d; ++k) {
    int group = k + 1 < d ? base : n - base * (d - 1);
    Arc arc(CirclePoint(static_cast<double>(k) / d), CirclePoint(static_cast<double>(k + 1) / d));
    for (int j = 0; j < group; ++j) m.fields.push_back(arc);
  }
  return Code(mu, {std::move(m)});
}

inline Code make_grid_adaptive(const GridSpec& spec, double mu);

// Neuron i (1-based) covers [i/2n, i/2n + 1/2): half-circle fields with evenly
// staggered onsets. Single-module case of the adaptive grid layout.
inline Code make_adaptive_place(int n, double mu) {
  if (n < 1) throw std::invalid_argument("adaptive place: need n >= 1");
  return make_grid_adaptive(GridSpec{{{n, 1.0}}}, mu);
}

// Independent uniform endpoints per neuron; draw order is (start, end) for
// neuron 0, then neuron 1, and so on.
inline Code make_random_place(int n, double mu, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random place: need n >= 1");
  StreamRng rng = derive_stream(seed, fnv1a64("place-random"));
  Code::Module m{1.0, {}, {}};
  for (int i = 0; i < n; ++i) {
    double a = rng.next_double();
    double b = rng.next_double();
    m.fields.emplace_back(CirclePoint(a), CirclePoint(b));
  }
  return Code(mu, {std::move(m)});
}

// Within module i, neuron j (1-based) covers [j lambda_i / 2n_i, (j + n_i)
// lambda_i / 2n_i) on S^lambda_i: the adaptive layout scaled to the module.
inline Code make_grid_adaptive(const GridSpec& spec, double mu) {
  validate_grid_spec(spec);
  std::vector<Code::Module> mods;
  for (const auto& ms : spec.modules) {
    Code::Module m{ms.lambda, {}, {}};
    for (int j = 1; j <= ms.count; ++j) {
      double a = static_cast<double>(j) * ms.lambda / (2 * ms.count);
      double b = static_cast<double>(j + ms.count) * ms.lambda / (2 * ms.count);
      m.fields.emplace_back(CirclePoint(a, ms.lambda), CirclePoint(b, ms.lambda));
    }
    mods.push_back(std::move(m));
  }
  return Code(mu, std::move(mods));
}

// Independent uniform endpoints on each module's circle.
inline Code make_grid_random(const GridSpec& spec, double mu, std::uint64_t seed) {
  validate_grid_spec(spec);
  StreamRng rng = derive_stream(seed, fnv1a64("grid-random"));
  std::vector<Code::Module> mods;
  for (const auto& ms : spec.modules) {
    Code::Module m{ms.lambda, {}, {}};
    for (int j = 0; j < ms.count; ++j) {
      double a = rng.next_double() * ms.lambda;
      double b = rng.next_double() * ms.lambda;
      m.fields.emplace_back(CirclePoint(a, ms.lambda), CirclePoint(b, ms.lambda));
    }
    mods.push_back(std::move(m));
  }
  return Code(mu, std::move(mods));
}

// n single-neuron modules, lambda_i = 2^-(i-1), field [0, lambda_i/2): neuron i
// is active exactly when the i-th binary digit of the stimulus is 0.
inline Code make_extreme_dyadic(int n, double mu) {
  if (n < 1 || n > 52)
    throw std::invalid_argument("dyadic code: need 1 <= n <= 52 (double digit limit)");
  std::vector<Code::Module> mods;
  for (int i = 0; i < n; ++i) {
    double lam = std::ldexp(1.0, -i);
    Code::Module m{lam, {}, {}};
    m.fields.emplace_back(CirclePoint(0.0, lam), CirclePoint(lam / 2, lam));
    mods.push_back(std::move(m));
  }
  return Code(mu, std::move(mods));
}

}  // namespace popcode
