#pragma once

// Spike-count simulation and the optimal discrimination test. Spikes follow
// independent homogeneous Poisson processes, so per-neuron counts over the
// observation window are a sufficient description; the test compares the
// summed count over the oriented difference set against a fixed threshold.
// Error probabilities are estimated by repeated simulation with RNG streams
// keyed by (master seed, hypothesis, trial, neuron) so that results are
// bit-identical under any parallel schedule.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "popcode/codes.hpp"
#include "popcode/geometry.hpp"
#include "popcode/rng.hpp"

namespace popcode {

struct TrialBatch {
  std::string code_id;
  CirclePoint s1{0.0};
  CirclePoint s2{0.0};
  double t = 0.0;
  long trials = 0;
  long err_1_to_2 = 0;  // decided s2 while s1 was true
  long err_2_to_1 = 0;
  std::uint64_t master_seed = 0;

  double p_hat() const {
    return trials == 0 ? 0.0
                       : static_cast<double>(std::max(err_1_to_2, err_2_to_1)) / trials;
  }
};

// One draw of all neuron counts for a window of length T at stimulus s,
// consuming the passed stream sequentially in alias order.
inline std::vector<std::uint64_t> simulate_counts(const Code& code, const CirclePoint& s,
                                                  double T, StreamRng& rng) {
  if (!(T > 0.0)) throw std::invalid_argument("simulate_counts: need T > 0");
  auto mask = code.active_mask(s);
  std::vector<std::uint64_t> counts(code.alias_count());
  for (int a = 0; a < code.alias_count(); ++a) {
    bool active = (mask[a / 64] >> (a % 64)) & 1;
    counts[a] = poisson_draw(rng, (active ? code.mu() : 1.0) * T);
  }
  return counts;
}

enum class Decision { S1, S2 };

// The count-sum test: relabel so the first hypothesis owns the larger one-sided
// difference, sum counts over that difference set, and compare against
// delta * T * (mu + 1) / 2. A tie goes to the relabeled second hypothesis.
inline Decision optimal_test(const Code& code, const CirclePoint& s1, const CirclePoint& s2,
                             const std::vector<std::uint64_t>& counts, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("optimal_test: need T > 0");
  if (static_cast<int>(counts.size()) != code.alias_count())
    throw std::invalid_argument("optimal_test: counts size mismatch");
  auto m1 = code.active_mask(s1);
  auto m2 = code.active_mask(s2);
  auto [only1, only2] = detail::diff_counts(m1.data(), m2.data(), code.mask_words());
  if (only1 == 0 && only2 == 0)
    throw std::invalid_argument("optimal_test: indistinguishable pair");
  bool first_is_s1 = only1 >= only2;
  int d = first_is_s1 ? only1 : only2;
  std::uint64_t z = 0;
  for (int a = 0; a < code.alias_count(); ++a) {
    bool in1 = (m1[a / 64] >> (a % 64)) & 1;
    bool in2 = (m2[a / 64] >> (a % 64)) & 1;
    if (first_is_s1 ? (in1 && !in2) : (in2 && !in1)) z += counts[a];
  }
  double threshold = d * T * (code.mu() + 1.0) / 2.0;
  bool decide_first = static_cast<double>(z) > threshold;
  return decide_first == first_is_s1 ? Decision::S1 : Decision::S2;
}

namespace detail {

struct ErrorCounts {
  long err_1_to_2 = 0;
  long err_2_to_1 = 0;
  bool aborted = false;
};

// Core trial loop. Only neurons in the oriented difference set are ever drawn:
// the decision statistic does not depend on the rest, and per-neuron streams
// make the shortcut bit-identical to a full simulation. With abort_limit >= 0
// the loop may stop once either error count provably exceeds the limit; the
// exceeded/not-exceeded outcome is schedule-independent because counts only
// grow.
inline ErrorCounts run_error_trials(const Code& code, const CirclePoint& s1,
                                    const CirclePoint& s2, double T, long trials,
                                    std::uint64_t master_seed, int workers,
                                    long abort_limit) {
  if (!(T > 0.0)) throw std::invalid_argument("estimate_error: need T > 0");
  if (trials < 1) throw std::invalid_argument("estimate_error: need trials >= 1");
  auto m1 = code.active_mask(s1);
  auto m2 = code.active_mask(s2);
  auto [only1, only2] = diff_counts(m1.data(), m2.data(), code.mask_words());
  if (only1 == 0 && only2 == 0)
    throw std::invalid_argument("estimate_error: indistinguishable pair");
  const bool first_is_s1 = only1 >= only2;
  const int d = first_is_s1 ? only1 : only2;
  std::vector<int> diff_aliases;
  diff_aliases.reserve(d);
  for (int a = 0; a < code.alias_count(); ++a) {
    bool in1 = (m1[a / 64] >> (a % 64)) & 1;
    bool in2 = (m2[a / 64] >> (a % 64)) & 1;
    if (first_is_s1 ? (in1 && !in2) : (in2 && !in1)) diff_aliases.push_back(a);
  }
  const double threshold = d * T * (code.mu() + 1.0) / 2.0;
  const double mu = code.mu();

  std::atomic<long> err12{0};
  std::atomic<long> err21{0};
  std::atomic<bool> stop{false};

  auto run_range = [&](long lo, long hi) {
    for (long trial = lo; trial < hi; ++trial) {
      for (int hyp = 0; hyp < 2; ++hyp) {
        // The difference set is active when the relabeled first hypothesis is
        // the truth, inactive otherwise.
        bool truth_is_first = (hyp == 0) == first_is_s1;
        double rate = (truth_is_first ? mu : 1.0) * T;
        std::uint64_t z = 0;
        for (int a : diff_aliases) {
          StreamRng stream(derive_seed(master_seed, static_cast<std::uint64_t>(hyp),
                                       static_cast<std::uint64_t>(trial),
                                       static_cast<std::uint64_t>(a)));
          z += poisson_draw(stream, rate);
        }
        bool decide_first = static_cast<double>(z) > threshold;
        if (decide_first != truth_is_first)
          (hyp == 0 ? err12 : err21).fetch_add(1, std::memory_order_relaxed);
      }
      if (abort_limit >= 0 &&
          (err12.load(std::memory_order_relaxed) > abort_limit ||
           err21.load(std::memory_order_relaxed) > abort_limit)) {
        stop.store(true, std::memory_order_relaxed);
        return;
      }
      if (stop.load(std::memory_order_relaxed)) return;
    }
  };

  int nw = std::max(1, workers);
  if (nw == 1) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    long per = (trials + nw - 1) / nw;
    for (int w = 0; w < nw; ++w) {
      long lo = w * per;
      long hi = std::min<long>(trials, lo + per);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return {err12.load(), err21.load(), stop.load()};
}

}  // namespace detail

// Empirical error counts for the optimal test on (s1, s2) at window T, with
// `trials` simulations under each hypothesis. Deterministic for a given
// master_seed regardless of worker count.
inline TrialBatch estimate_error(const Code& code, const CirclePoint& s1,
                                 const CirclePoint& s2, double T, long trials,
                                 std::uint64_t master_seed, int workers = 1,
                                 const std::string& code_id = "") {
  auto counts = detail::run_error_trials(code, s1, s2, T, trials, master_seed, workers, -1);
  return {code_id, s1, s2, T, trials, counts.err_1_to_2, counts.err_2_to_1, master_seed};
}

// Smallest grid time whose empirical error proportion stays within alpha, or
// nothing when no grid point qualifies (including indistinguishable pairs).
// Times that fail are abandoned as soon as either error count crosses
// floor(alpha * trials); the selected time is unaffected.
inline std::optional<double> empirical_tmin(const Code& code, const CirclePoint& s1,
                                            const CirclePoint& s2, double alpha,
                                            const std::vector<double>& t_grid, long trials,
                                            std::uint64_t master_seed, int workers = 1) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("empirical_tmin: need 0 < alpha < 1");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()))
    throw std::invalid_argument("empirical_tmin: t_grid must be ascending");
  if (delta(code, s1, s2).delta == 0) return std::nullopt;
  long limit = static_cast<long>(std::floor(alpha * static_cast<double>(trials)));
  for (double t : t_grid) {
    auto counts = detail::run_error_trials(code, s1, s2, t, trials, master_seed, workers, limit);
    if (!counts.aborted && counts.err_1_to_2 <= limit && counts.err_2_to_1 <= limit) return t;
  }
  return std::nullopt;
}

inline constexpr const char* kTrialBatchCsvHeader =
    "code_id,theta1,theta2,T,trials,err12,err21,seed";

inline void append_trial_batch_csv(std::ostream& out, const TrialBatch& b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%ld,%ld,%ld,%llu",
                b.s1.theta(), b.s2.theta(), b.t, b.trials, b.err_1_to_2, b.err_2_to_1,
                static_cast<unsigned long long>(b.master_seed));
  out << b.code_id << ',' << buf << '\n';
}

}  // namespace popcode
