#include "popcode/codes.hpp"

#include <cmath>
#include <set>
#include <gtest/gtest.h>

#include "popcode/serialization.hpp"
#include "oracles.hpp"

namespace popcode {
namespace {

constexpr double kTol = 1e-12;

TEST(UniformPlace, GroupSizesAndArcs) {
  Code code = make_uniform_place(10, 3, 30.0);
  ASSERT_EQ(code.n(), 10);
  ASSERT_EQ(code.module_count(), 1u);
  const auto& fields = code.modules()[0].fields;
  int sizes[3] = {0, 0, 0};
  for (const auto& f : fields) {
    int k = static_cast<int>(std::floor(f.start().theta() * 3 + 0.5));
    sizes[k]++;
    EXPECT_NEAR(f.length(), 1.0 / 3.0, kTol);
  }
  EXPECT_EQ(sizes[0], 3);
  EXPECT_EQ(sizes[1], 3);
  EXPECT_EQ(sizes[2], 4);

  Code one = make_uniform_place(4, 4, 2.0);
  EXPECT_EQ(one.n(), 4);
  for (int k = 0; k < 4; ++k)
    EXPECT_NEAR(one.modules()[0].fields[k].start().theta(), k * 0.25, kTol);

  EXPECT_THROW(make_uniform_place(3, 4, 2.0), std::invalid_argument);
  EXPECT_THROW(make_uniform_place(4, 0, 2.0), std::invalid_argument);
}

TEST(AdaptivePlace, FieldLayout) {
  Code tiny = make_adaptive_place(1, 2.0);
  EXPECT_NEAR(tiny.modules()[0].fields[0].start().theta(), 0.5, kTol);
  EXPECT_NEAR(tiny.modules()[0].fields[0].length(), 0.5, kTol);

  Code code = make_adaptive_place(4, 2.0);
  EXPECT_NEAR(code.modules()[0].fields[1].start().theta(), 0.25, kTol);
  EXPECT_NEAR(code.modules()[0].fields[1].end().theta(), 0.75, kTol);
}

TEST(AdaptivePlace, ActiveSetsFollowTheStaircase) {
  Code code = make_adaptive_place(4, 2.0);
  EXPECT_EQ(code.active_set(CirclePoint(0.05)), (std::vector<int>{}));
  EXPECT_EQ(code.active_set(CirclePoint(0.3)), (std::vector<int>{0, 1}));
  EXPECT_EQ(code.active_set(CirclePoint(0.55)), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(code.active_set(CirclePoint(0.65)), (std::vector<int>{1, 2, 3}));
}

TEST(AdaptivePlace, NearbyVersusAntipodalDelta) {
  const int n = 16;
  Code code = make_adaptive_place(n, 2.0);
  CirclePoint s1(1.5 / (2 * n));  // inside [1/2n, 2/2n): active set {0}
  ASSERT_EQ(code.active_set(s1).size(), 1u);
  DeltaReport near = delta(code, s1, CirclePoint(s1.theta() + 1.0 / (2 * n)));
  EXPECT_EQ(near.delta, 1);
  DeltaReport anti = delta(code, s1, CirclePoint(s1.theta() + 0.5));
  EXPECT_EQ(anti.delta, n - 1);
}

TEST(UniformPlace, DeltaAcrossTheCircle) {
  Code code = make_uniform_place(100, 10, 30.0);
  DeltaReport r = delta(code, CirclePoint(0.0), CirclePoint(0.5));
  EXPECT_EQ(r.delta, 10);
  EXPECT_EQ(r.only_in_1, 10);
  EXPECT_EQ(r.only_in_2, 10);
  ASSERT_EQ(r.per_module.size(), 1u);
  EXPECT_EQ(r.per_module[0], 10);
}

TEST(Dyadic, ActiveSetMatchesBinaryDigits) {
  Code code = make_extreme_dyadic(3, 30.0);
  EXPECT_EQ(code.active_set(CirclePoint(0.0)), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(code.active_set(CirclePoint(0.625)), (std::vector<int>{1}));

  Code deep = make_extreme_dyadic(12, 30.0);
  StreamRng rng(derive_seed(8101));
  for (int it = 0; it < 500; ++it) {
    double theta = rng.next_double();
    auto digits = dyadic_digits(theta, 12);
    auto active = deep.active_set(CirclePoint(theta));
    std::vector<int> expected;
    for (int i = 0; i < 12; ++i)
      if (digits[i] == 0) expected.push_back(i);
    EXPECT_EQ(active, expected) << "theta=" << theta;
  }
  EXPECT_THROW(make_extreme_dyadic(53, 30.0), std::invalid_argument);
}

TEST(Dyadic, SingleDigitDifference) {
  Code code = make_extreme_dyadic(3, 30.0);
  DeltaReport r = delta(code, CirclePoint(0.0), CirclePoint(0.5));
  EXPECT_EQ(r.delta, 1);
  EXPECT_EQ(r.only_in_1, 1);
  EXPECT_EQ(r.only_in_2, 0);
  EXPECT_EQ(r.per_module, (std::vector<int>{1, 0, 0}));
}

TEST(RandomPlace, SeedDeterminism) {
  Code a = make_random_place(13, 30.0, 42);
  Code b = make_random_place(13, 30.0, 42);
  Code c = make_random_place(13, 30.0, 43);
  EXPECT_EQ(canonical_code_json(a), canonical_code_json(b));
  EXPECT_NE(canonical_code_json(a), canonical_code_json(c));
}

// Probability that both stimuli of a pair at gap t fall inside one uniformly
// random arc: 1/2 - t(1-t) on the unit circle.
TEST(RandomPlace, PairCaptureProbability) {
  StreamRng rng(derive_seed(8102));
  const int draws = 100000;
  for (double t : {0.1, 0.25, 0.5}) {
    CirclePoint s1(0.3), s2(0.3 + t);
    int hits = 0;
    for (int i = 0; i < draws; ++i) {
      Arc arc{CirclePoint(rng.next_double()), CirclePoint(rng.next_double())};
      if (arc_contains(arc, s1) && arc_contains(arc, s2)) ++hits;
    }
    double expected = 0.5 - t * (1.0 - t);
    double sigma = std::sqrt(expected * (1 - expected) / draws);
    EXPECT_NEAR(hits / static_cast<double>(draws), expected, 3 * sigma) << "t=" << t;
  }
}

TEST(GridAdaptive, ModuleFieldLayout) {
  GridSpec spec{{{4, 1.0}, {5, 0.5}}};
  Code code = make_grid_adaptive(spec, 30.0);
  ASSERT_EQ(code.module_count(), 2u);
  const Arc& f = code.modules()[1].fields[0];
  EXPECT_NEAR(f.start().theta(), 0.05, kTol);
  EXPECT_NEAR(f.end().theta(), 0.3, kTol);
  EXPECT_DOUBLE_EQ(f.radius(), 0.5);
  EXPECT_NEAR(f.length(), 0.25, kTol);  // half of the module period
}

TEST(GridAdaptive, SingleModuleEqualsAdaptivePlace) {
  GridSpec spec{{{7, 1.0}}};
  EXPECT_EQ(canonical_code_json(make_grid_adaptive(spec, 3.0)),
            canonical_code_json(make_adaptive_place(7, 3.0)));
}

TEST(GridSpecValidation, RejectsIncoherentScales) {
  EXPECT_THROW(validate_grid_spec(GridSpec{{{2, 0.5}}}), std::invalid_argument);
  EXPECT_THROW(validate_grid_spec(GridSpec{{{2, 1.0}, {2, 0.3}}}), std::invalid_argument);
  EXPECT_THROW(validate_grid_spec(GridSpec{{{2, 1.0}, {2, 1.0}}}), std::invalid_argument);
  EXPECT_THROW(validate_grid_spec(GridSpec{{{2, 1.0}, {0, 0.5}}}), std::invalid_argument);
  EXPECT_NO_THROW(validate_grid_spec(GridSpec{{{2, 1.0}, {2, 0.2}, {1, 0.05}}}));
}

TEST(BalancedGridSpec, SplitsNeuronsEvenly) {
  GridSpec spec = balanced_grid_spec(100, 20);
  ASSERT_EQ(spec.modules.size(), 20u);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(spec.modules[i].count, 5);
    EXPECT_DOUBLE_EQ(spec.modules[i].lambda, std::ldexp(1.0, -i));
  }
  GridSpec uneven = balanced_grid_spec(103, 20);
  EXPECT_EQ(uneven.modules[0].count, 5);
  EXPECT_EQ(uneven.modules[19].count, 8);
}

TEST(Code, ValidationErrors) {
  EXPECT_THROW(make_adaptive_place(4, 1.0), std::invalid_argument);  // mu at baseline
  EXPECT_THROW(make_adaptive_place(4, 0.5), std::invalid_argument);  // mu below baseline
  Code code = make_adaptive_place(4, 2.0);
  EXPECT_THROW(code.active_set(CirclePoint(0.1, 0.5)), std::invalid_argument);
  // field scale disagreeing with the module scale
  Code::Module bad{0.5, {Arc(CirclePoint(0.0), CirclePoint(0.25))}, {}};
  Code::Module lead{1.0, {Arc(CirclePoint(0.0), CirclePoint(0.5))}, {}};
  EXPECT_THROW(Code(2.0, {lead, bad}), std::invalid_argument);
}

TEST(Code, AliasedArcsActAsOneNeuron) {
  Code::Module m{1.0,
                 {Arc(CirclePoint(0.0), CirclePoint(0.2)), Arc(CirclePoint(0.5), CirclePoint(0.7))},
                 {0, 0}};
  Code code(2.0, {m});
  EXPECT_EQ(code.n(), 2);
  EXPECT_EQ(code.alias_count(), 1);
  EXPECT_EQ(code.active_set(CirclePoint(0.1)), (std::vector<int>{0}));
  EXPECT_EQ(code.active_set(CirclePoint(0.6)), (std::vector<int>{0}));
  EXPECT_EQ(delta(code, CirclePoint(0.1), CirclePoint(0.6)).delta, 0);
  EXPECT_EQ(delta(code, CirclePoint(0.1), CirclePoint(0.3)).delta, 1);

  Code::Module gap{1.0,
                   {Arc(CirclePoint(0.0), CirclePoint(0.2)), Arc(CirclePoint(0.5), CirclePoint(0.7))},
                   {0, 2}};
  EXPECT_THROW(Code(2.0, {gap}), std::invalid_argument);
}

TEST(Breakpoints, KnownLayouts) {
  auto uniform = breakpoints(make_uniform_place(4, 4, 2.0));
  ASSERT_EQ(uniform.size(), 4u);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(uniform[k].theta(), k * 0.25, kTol);

  auto adaptive = breakpoints(make_adaptive_place(4, 2.0));
  ASSERT_EQ(adaptive.size(), 8u);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(adaptive[k].theta(), k / 8.0, kTol);

  auto dyadic = breakpoints(make_extreme_dyadic(6, 2.0));
  ASSERT_EQ(dyadic.size(), 64u);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_DOUBLE_EQ(dyadic[k].theta(), k / 64.0);

  EXPECT_THROW(breakpoints(make_extreme_dyadic(20, 2.0), 1000), BudgetExceeded);
}

TEST(Breakpoints, ActiveSetsConstantOnCells) {
  StreamRng rng(derive_seed(8103));
  GridSpec spec{{{3, 1.0}, {4, 0.25}}};
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    Code code = make_grid_random(spec, 5.0, seed);
    auto bps = breakpoints(code);
    std::set<std::vector<int>> distinct;
    for (std::size_t j = 0; j < bps.size(); ++j) {
      double a = bps[j].theta();
      double b = j + 1 < bps.size() ? bps[j + 1].theta() : bps[0].theta() + 1.0;
      auto reference = code.active_set(CirclePoint(a + (b - a) / 2));
      distinct.insert(reference);
      for (int k = 1; k <= 5; ++k) {
        CirclePoint p(a + (b - a) * k / 6.0);
        EXPECT_EQ(code.active_set(p), reference);
      }
    }
    EXPECT_LE(distinct.size(), bps.size());
    EXPECT_LE(distinct.size(), std::size_t{1} << code.n());
    // interior sample between consecutive breakpoints must cover each alias change
    (void)rng;
  }
}

// Per-module statistics sandwich the total: each side loses at most a factor 2.
TEST(DeltaReport, ModuleSandwich) {
  StreamRng rng(derive_seed(8104));
  GridSpec spec{{{5, 1.0}, {4, 0.5}, {3, 0.125}}};
  Code code = make_grid_random(spec, 30.0, 99);
  for (int it = 0; it < 10000; ++it) {
    CirclePoint s1(rng.next_double());
    CirclePoint s2(rng.next_double());
    DeltaReport r = delta(code, s1, s2);
    EXPECT_EQ(r.delta, std::max(r.only_in_1, r.only_in_2));
    int sum = 0;
    for (int pm : r.per_module) sum += pm;
    EXPECT_LE(r.delta, sum);
    EXPECT_GE(2 * r.delta, sum);
    EXPECT_EQ(r.delta, delta(code, s2, s1).delta);
  }
}

TEST(Serialization, BitExactRoundTrip) {
  std::vector<Code> codes;
  codes.push_back(make_extreme_dyadic(10, 30.0));
  codes.push_back(make_adaptive_place(7, 5.5));
  codes.push_back(make_random_place(13, 30.0, 7));
  codes.push_back(make_grid_random(GridSpec{{{2, 1.0}, {3, 0.25}}}, 12.0, 3));
  for (const auto& code : codes) {
    std::string once = canonical_code_json(code);
    Code parsed = code_from_json(nlohmann::json::parse(once));
    EXPECT_EQ(canonical_code_json(parsed), once);
    EXPECT_EQ(parsed.n(), code.n());
  }
  EXPECT_THROW(code_from_json(nlohmann::json::parse(R"({"mu": 0.5, "modules": []})")),
               std::invalid_argument);
  EXPECT_THROW(code_from_json(nlohmann::json::parse(R"({"mu": 2.0})")), std::invalid_argument);
  EXPECT_THROW(
      code_from_json(nlohmann::json::parse(
          R"({"mu": 2.0, "modules": [{"lambda": 1.0, "fields": [[0.0]]}]})")),
      std::invalid_argument);
}

TEST(Neuron, RateRule) {
  Code code = make_adaptive_place(4, 30.0);
  Neuron n0 = code.neuron(0);  // field [1/8, 5/8)
  EXPECT_DOUBLE_EQ(n0.rate(CirclePoint(0.2), code.mu()), 30.0);
  EXPECT_DOUBLE_EQ(n0.rate(CirclePoint(0.7), code.mu()), 1.0);
  EXPECT_EQ(n0.alias, 0);
  EXPECT_THROW(code.neuron(4), std::out_of_range);
}

}  // namespace
}  // namespace popcode
