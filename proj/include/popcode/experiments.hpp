#pragma once

// Experiment harness: named code presets, JSON-configurable runs, the
// discrimination-time figure (empirical minimal times against 1/delta on an
// anchored stimulus-pair ladder, plus the worst-case proxy over gaps >= rho),
// an aggregated bound-verification report, and CSV/SVG emission.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "popcode/analysis.hpp"
#include "popcode/codes.hpp"
#include "popcode/geometry.hpp"
#include "popcode/montecarlo.hpp"
#include "popcode/rng.hpp"
#include "popcode/serialization.hpp"
#include "popcode/theory.hpp"

namespace popcode {

inline std::vector<double> standard_t_grid() {
  const int points = 200;
  std::vector<double> g(points);
  for (int j = 0; j < points; ++j)
    g[j] = 0.001 * std::pow(20.0 / 0.001, j / (points - 1.0));
  return g;
}

struct ExperimentConfig {
  std::string preset;        // empty or "all" runs every preset
  nlohmann::json code;       // explicit code JSON, overrides preset
  double mu = 30.0;
  double alpha = 0.05;
  double anchor_theta = 1.0 / 3.0;
  std::vector<double> rho_grid = standard_rho_grid();
  std::vector<double> t_grid = standard_t_grid();
  long trials = 5000;
  std::uint64_t master_seed = 0;
  std::string out_dir = ".";
  int workers = 1;
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "place-adaptive", "place-random", "grid-adaptive-balanced",
      "grid-adaptive-decreasing", "grid-random-balanced"};
  return names;
}

inline GridSpec decreasing_grid_spec() {
  const int counts[] = {15, 13, 11, 10, 8, 7, 6, 5, 4, 4, 3, 3, 2, 2, 2, 1, 1, 1, 1, 1};
  GridSpec spec;
  for (int i = 0; i < 20; ++i) spec.modules.push_back({counts[i], std::ldexp(1.0, -i)});
  return spec;
}

inline Code build_preset(const std::string& name, double mu, std::uint64_t master_seed) {
  if (name == "place-adaptive") return make_adaptive_place(100, mu);
  if (name == "place-random") return make_random_place(100, mu, master_seed);
  if (name == "grid-adaptive-balanced")
    return make_grid_adaptive(balanced_grid_spec(100, 20), mu);
  if (name == "grid-adaptive-decreasing") return make_grid_adaptive(decreasing_grid_spec(), mu);
  if (name == "grid-random-balanced")
    return make_grid_random(balanced_grid_spec(100, 20), mu, master_seed);
  throw std::invalid_argument("unknown preset \"" + name + "\"");
}

namespace detail {

inline std::vector<double> grid_from_json(const nlohmann::json& j, const char* key,
                                          bool geometric) {
  std::vector<double> g;
  if (j.is_array()) {
    g = j.get<std::vector<double>>();
  } else if (j.is_object() && geometric) {
    double lo = j.at("min").get<double>();
    double hi = j.at("max").get<double>();
    double ratio = j.at("ratio").get<double>();
    if (!(lo > 0.0) || !(hi >= lo) || !(ratio > 1.0))
      throw std::invalid_argument(std::string(key) +
                                  ": need 0 < min <= max and ratio > 1");
    for (double v = lo; v < hi * (1.0 - 1e-12); v *= ratio) g.push_back(v);
    g.push_back(hi);
  } else if (j.is_object()) {
    double lo = j.at("min").get<double>();
    double hi = j.at("max").get<double>();
    int points = j.at("points").get<int>();
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
      throw std::invalid_argument(std::string(key) +
                                  ": need 0 < min < max and points >= 2");
    for (int p = 0; p < points; ++p) g.push_back(lo * std::pow(hi / lo, p / (points - 1.0)));
  } else {
    throw std::invalid_argument(std::string(key) + ": expected array or range object");
  }
  if (g.empty() || !std::is_sorted(g.begin(), g.end()))
    throw std::invalid_argument(std::string(key) + ": grid must be non-empty and ascending");
  return g;
}

}  // namespace detail

inline void validate_config(const ExperimentConfig& cfg) {
  if (!(cfg.mu > 1.0)) throw std::invalid_argument("mu: must be > 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw std::invalid_argument("alpha: must lie in (0, 1)");
  if (cfg.trials < 1) throw std::invalid_argument("trials: must be >= 1");
  if (cfg.workers < 1) throw std::invalid_argument("workers: must be >= 1");
  if (!(cfg.anchor_theta >= 0.0 && cfg.anchor_theta < 1.0))
    throw std::invalid_argument("anchor_theta: must lie in [0, 1)");
  if (cfg.rho_grid.empty() || !std::is_sorted(cfg.rho_grid.begin(), cfg.rho_grid.end()))
    throw std::invalid_argument("rho_grid: must be non-empty and ascending");
  if (cfg.t_grid.empty() || !std::is_sorted(cfg.t_grid.begin(), cfg.t_grid.end()))
    throw std::invalid_argument("t_grid: must be non-empty and ascending");
  for (double r : cfg.rho_grid)
    if (!(r > 0.0) || r > 0.5 + kAngleTol)
      throw std::invalid_argument("rho_grid: entries must lie in (0, 1/2]");
  for (double t : cfg.t_grid)
    if (!(t > 0.0)) throw std::invalid_argument("t_grid: entries must be > 0");
  if (!cfg.preset.empty() && cfg.preset != "all") {
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), cfg.preset) == names.end())
      throw std::invalid_argument("preset: unknown name \"" + cfg.preset + "\"");
  }
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "preset") cfg.preset = it.value().get<std::string>();
    else if (key == "code") cfg.code = it.value();
    else if (key == "mu") cfg.mu = it.value().get<double>();
    else if (key == "alpha") cfg.alpha = it.value().get<double>();
    else if (key == "anchor_theta") cfg.anchor_theta = it.value().get<double>();
    else if (key == "rho_grid") cfg.rho_grid = detail::grid_from_json(it.value(), "rho_grid", true);
    else if (key == "t_grid") cfg.t_grid = detail::grid_from_json(it.value(), "t_grid", false);
    else if (key == "trials") cfg.trials = it.value().get<long>();
    else if (key == "master_seed") cfg.master_seed = it.value().get<std::uint64_t>();
    else if (key == "out_dir") cfg.out_dir = it.value().get<std::string>();
    else if (key == "workers") cfg.workers = it.value().get<int>();
    else throw std::invalid_argument("unknown config key \"" + key + "\"");
  }
  validate_config(cfg);
  return cfg;
}

// Codes the given config asks for, as (id, code) pairs.
inline std::vector<std::pair<std::string, Code>> resolve_codes(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, Code>> out;
  if (!cfg.code.is_null()) {
    out.emplace_back("custom", code_from_json(cfg.code));
    return out;
  }
  if (cfg.preset.empty() || cfg.preset == "all") {
    for (const auto& name : preset_names())
      out.emplace_back(name, build_preset(name, cfg.mu, cfg.master_seed));
    return out;
  }
  out.emplace_back(cfg.preset, build_preset(cfg.preset, cfg.mu, cfg.master_seed));
  return out;
}

struct LeftRow {
  std::string code_id;
  double rho_prime;
  int delta_value;
  double inv_delta;  // inf when delta is 0
  double tmin;       // inf when no grid time reaches alpha
};

struct RightRow {
  std::string code_id;
  double rho;
  double proxy_t;  // max of tmin over rho' >= rho; inf if any is inf
};

struct FigureResult {
  std::vector<LeftRow> left;
  std::vector<RightRow> right;
};

// The discrimination-time experiment: for each code and each gap rho' in the
// ladder, the empirical minimal time for the pair (anchor, anchor + rho'); the
// right panel aggregates the worst time over gaps >= rho. Per-row seeds are
// derived from (master seed, code id, row index), so results do not depend on
// scheduling or on which presets run together.
inline FigureResult run_figure(const ExperimentConfig& cfg) {
  validate_config(cfg);
  FigureResult result;
  CirclePoint anchor(cfg.anchor_theta);
  for (const auto& [id, code] : resolve_codes(cfg)) {
    std::size_t base = result.left.size();
    for (std::size_t r = 0; r < cfg.rho_grid.size(); ++r) {
      double rho_prime = cfg.rho_grid[r];
      CirclePoint other(cfg.anchor_theta + rho_prime);
      int d = delta(code, anchor, other).delta;
      std::uint64_t row_seed = derive_seed(cfg.master_seed, fnv1a64(id), r);
      double tmin = kInf;
      if (d > 0) {
        auto found = empirical_tmin(code, anchor, other, cfg.alpha, cfg.t_grid, cfg.trials,
                                    row_seed, cfg.workers);
        if (found) tmin = *found;
      }
      result.left.push_back({id, rho_prime, d, d > 0 ? 1.0 / d : kInf, tmin});
    }
    double worst = 0.0;
    for (std::size_t r = cfg.rho_grid.size(); r-- > 0;) {
      worst = std::max(worst, result.left[base + r].tmin);
      result.right.push_back({id, cfg.rho_grid[r], worst});
    }
    std::reverse(result.right.end() - static_cast<long>(cfg.rho_grid.size()),
                 result.right.end());
  }
  return result;
}

namespace detail {

inline std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_left_csv(std::ostream& out, const FigureResult& result) {
  out << "code,rho_prime,delta,inv_delta,empirical_tmin\n";
  for (const auto& row : result.left)
    out << row.code_id << ',' << detail::format_value(row.rho_prime) << ','
        << row.delta_value << ',' << detail::format_value(row.inv_delta) << ','
        << detail::format_value(row.tmin) << '\n';
}

inline void write_right_csv(std::ostream& out, const FigureResult& result) {
  out << "code,rho,proxy_T\n";
  for (const auto& row : result.right)
    out << row.code_id << ',' << detail::format_value(row.rho) << ','
        << detail::format_value(row.proxy_t) << '\n';
}

// --- minimal SVG chart ------------------------------------------------------

namespace detail {

struct ChartSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Log-log polyline chart; non-finite and non-positive points are dropped.
inline std::string line_chart_svg(const std::vector<ChartSeries>& series,
                                  const std::string& title) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      if (!(x > 0.0) || !(y > 0.0) || std::isinf(y)) continue;
      xmin = std::min(xmin, x); xmax = std::max(xmax, x);
      ymin = std::min(ymin, y); ymax = std::max(ymax, y);
    }
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  svg << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg << "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
  if (xmin < xmax && ymin < ymax) {
    auto px = [&](double x) { return 60.0 + 540.0 * (std::log10(x) - std::log10(xmin)) /
                                               (std::log10(xmax) - std::log10(xmin)); };
    auto py = [&](double y) { return 430.0 - 380.0 * (std::log10(y) - std::log10(ymin)) /
                                               (std::log10(ymax) - std::log10(ymin)); };
    svg << "<rect x=\"60\" y=\"50\" width=\"540\" height=\"380\" fill=\"none\" "
           "stroke=\"#999\"/>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      std::ostringstream pts;
      for (auto [x, y] : series[i].points) {
        if (!(x > 0.0) || !(y > 0.0) || std::isinf(y)) continue;
        pts << px(x) << ',' << py(y) << ' ';
      }
      const char* color = colors[i % 5];
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" "
          << "points=\"" << pts.str() << "\"/>\n";
      svg << "<text x=\"70\" y=\"" << 70 + 16 * i << "\" font-size=\"12\" fill=\"" << color
          << "\">" << series[i].label << "</text>\n";
    }
    svg << "<text x=\"60\" y=\"450\" font-size=\"11\">" << format_value(xmin) << "</text>\n";
    svg << "<text x=\"600\" y=\"450\" text-anchor=\"end\" font-size=\"11\">"
        << format_value(xmax) << "</text>\n";
    svg << "<text x=\"55\" y=\"430\" text-anchor=\"end\" font-size=\"11\">"
        << format_value(ymin) << "</text>\n";
    svg << "<text x=\"55\" y=\"60\" text-anchor=\"end\" font-size=\"11\">"
        << format_value(ymax) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace detail

inline std::string left_panel_svg(const FigureResult& result) {
  std::vector<detail::ChartSeries> series;
  for (const auto& row : result.left) {
    if (series.empty() || series.back().label != row.code_id)
      series.push_back({row.code_id, {}});
    series.back().points.emplace_back(row.inv_delta, row.tmin);
  }
  for (auto& s : series)
    std::sort(s.points.begin(), s.points.end());
  return detail::line_chart_svg(series, "empirical minimal time vs 1/delta");
}

inline std::string right_panel_svg(const FigureResult& result) {
  std::vector<detail::ChartSeries> series;
  for (const auto& row : result.right) {
    if (series.empty() || series.back().label != row.code_id)
      series.push_back({row.code_id, {}});
    series.back().points.emplace_back(row.rho, row.proxy_t);
  }
  return detail::line_chart_svg(series, "worst-case time proxy vs rho");
}

// --- aggregated bound verification -------------------------------------------

struct BoundReport {
  nlohmann::json report;
  bool all_pass = true;
};

namespace detail {

inline void add_check(BoundReport& rep, const std::string& name, bool pass, double margin,
                      nlohmann::json params) {
  rep.report["checks"].push_back(
      {{"name", name}, {"pass", pass}, {"margin", margin}, {"params", std::move(params)}});
  rep.all_pass = rep.all_pass && pass;
}

}  // namespace detail

// Re-derives the inequality suite at runtime on small instances: error-bound
// sandwich, impossibility below the dyadic resolution, place/adaptive/grid
// bounds against the exact algorithm, module-sum sandwich, Poisson tail
// dominance, and the random-arc capture probability. Margins are the smallest
// observed slack (negative means a violation).
inline BoundReport verify_bounds(const ExperimentConfig& cfg) {
  validate_config(cfg);
  BoundReport rep;
  rep.report["checks"] = nlohmann::json::array();
  const double mu = cfg.mu;
  const long trials = std::min<long>(cfg.trials, 5000);

  {  // empirical error inside the closed-form sandwich
    Code code = make_adaptive_place(20, mu);
    double sigma = std::sqrt(0.25 / trials);
    double margin = kInf;
    bool pass = true;
    for (double off : {0.03, 0.08, 0.2}) {
      CirclePoint a(0.11), b(0.11 + off);
      for (double t : {0.1, 0.4}) {
        TrialBatch batch = estimate_error(code, a, b, t, trials,
                                          derive_seed(cfg.master_seed, fnv1a64("pe")),
                                          cfg.workers);
        ErrorBounds eb = pe_bounds(code, a, b, t, mu);
        double lo = eb.pe_lower - 3.0 * sigma;
        double hi = eb.pe_upper + 3.0 * sigma;
        margin = std::min({margin, batch.p_hat() - lo, hi - batch.p_hat()});
        pass = pass && batch.p_hat() >= lo && batch.p_hat() <= hi;
      }
    }
    detail::add_check(rep, "error_probability_sandwich", pass, margin,
                      {{"trials", trials}, {"mu", mu}});
  }
  {  // no pair below the finest dyadic scale is distinguishable
    Code code = make_extreme_dyadic(10, mu);
    double below = t_of_rho_exact(code, std::exp2(-11.0));
    double at = t_of_rho_exact(code, std::exp2(-10.0));
    bool pass = std::isinf(below) && at == 1.0;
    detail::add_check(rep, "dyadic_resolution_threshold", pass, pass ? 1.0 : -1.0,
                      {{"n", 10}});
  }
  {  // place-class lower bound below every exact place-code value
    double margin = kInf;
    bool pass = true;
    for (double rho : {0.07, 0.13, 0.29, 0.41}) {
      double bound = place_lower_bound(40, rho);
      for (double exact : {t_of_rho_exact(make_adaptive_place(40, mu), rho),
                           t_of_rho_exact(make_random_place(40, mu, cfg.master_seed), rho),
                           t_of_rho_exact(make_uniform_place(
                                              40, static_cast<int>(std::ceil(1.0 / rho)), mu),
                                          rho)}) {
        margin = std::min(margin, exact - bound);
        pass = pass && bound <= exact;
      }
    }
    detail::add_check(rep, "place_lower_bound", pass, margin, {{"n", 40}});
  }
  {  // staircase code between its sandwich bounds
    Code code = make_adaptive_place(40, mu);
    double margin = kInf;
    bool pass = true;
    for (int j = 0; j < 12; ++j) {
      double lo = 1.0001 / 80.0;
      double rho = std::min(0.5, lo * std::pow(0.5 / lo, j / 11.0));
      Sandwich s = adaptive_place_sandwich(40, rho);
      double exact = t_of_rho_exact(code, rho);
      margin = std::min({margin, exact - s.lower, s.upper - exact});
      pass = pass && s.lower <= exact && exact <= s.upper;
    }
    detail::add_check(rep, "adaptive_place_sandwich", pass, margin, {{"n", 40}});
  }
  {  // per-module difference counts bracket the pooled statistic
    Code code = make_grid_adaptive(balanced_grid_spec(20, 3), mu);
    StreamRng rng(derive_seed(cfg.master_seed, fnv1a64("prop5")));
    double margin = kInf;
    bool pass = true;
    for (int rep_i = 0; rep_i < 200; ++rep_i) {
      CirclePoint a(rng.next_double()), b(rng.next_double());
      DeltaReport r = delta(code, a, b);
      int sum = 0;
      for (int dm : r.per_module) sum += dm;
      margin = std::min({margin, static_cast<double>(r.delta) - 0.5 * sum,
                         static_cast<double>(sum) - r.delta});
      pass = pass && 2 * r.delta >= sum && r.delta <= sum;
    }
    detail::add_check(rep, "module_sum_sandwich", pass, margin, {{"n", 20}, {"modules", 3}});
  }
  {  // grid class: scale-profile lower bound and staircase upper bound
    GridSpec spec = balanced_grid_spec(12, 2);
    Code code = make_grid_adaptive(spec, mu);
    double margin = kInf;
    bool pass = true;
    for (double rho : {0.26, 0.35, 0.5}) {
      double exact = t_of_rho_exact(code, rho);
      double lo = grid_lower_bound(spec, rho).value;
      double hi = grid_adaptive_upper_bound(spec, rho);
      margin = std::min({margin, exact - lo, hi - exact});
      pass = pass && lo <= exact && exact <= hi;
    }
    detail::add_check(rep, "grid_bounds_bracket_exact", pass, margin, {{"n", 12}, {"modules", 2}});
  }
  {  // balanced family rate interval, exact at small n and proxy at full scale
    bool pass = true;
    double margin = kInf;
    for (double rho : {0.25, 0.3, 0.45}) {
      Sandwich s = balanced_rate(12, rho);
      int m = static_cast<int>(std::floor(std::log2(1.0 / rho)));
      double exact = t_of_rho_exact(make_grid_adaptive(balanced_grid_spec(12, m), mu), rho);
      margin = std::min({margin, exact - s.lower, s.upper - exact});
      pass = pass && s.lower <= exact && exact <= s.upper;
    }
    // The interval speaks about the code whose module count matches the
    // separation, so the 20-module family is probed only where
    // floor(log2(1/rho)) is 20.
    Code full = make_grid_adaptive(balanced_grid_spec(100, 20), mu);
    ProxyGrid grid = standard_proxy_grid();
    for (double rho : {std::exp2(-20.5), std::exp2(-20.0)}) {
      double proxy = t_of_rho_sampled(full, rho, grid);
      double upper = balanced_rate(100, rho).upper;
      margin = std::min(margin, upper - proxy);
      pass = pass && proxy <= upper;
    }
    detail::add_check(rep, "balanced_rate_interval", pass, margin, {{"n_small", 12}, {"n_full", 100}});
  }
  {  // closed-form Poisson tails dominate the exact series
    double margin = kInf;
    bool pass = true;
    for (double theta : {0.5, 1.0, 5.0, 10.0, 50.0}) {
      for (int j = 1; j <= 20; ++j) {
        double x = 0.15 * j;
        double upper_slack = poisson_tail_upper(theta, x) - poisson_sf(theta, theta * (1.0 + x));
        double y = theta * j / 20.0;
        double lower_slack = poisson_tail_lower(theta, y) - poisson_cdf(theta, theta - y);
        margin = std::min({margin, upper_slack, lower_slack});
        pass = pass && upper_slack >= -1e-12 && lower_slack >= -1e-12;
      }
    }
    detail::add_check(rep, "poisson_tail_dominance", pass, margin, {{"thetas", 5}});
  }
  {  // probability that a uniformly random arc captures both ends of a gap
    StreamRng rng(derive_seed(cfg.master_seed, fnv1a64("capture")));
    const int draws = 100000;
    double margin = kInf;
    bool pass = true;
    for (double t : {0.1, 0.25, 0.5}) {
      CirclePoint s1(0.0), s2(t);
      int both = 0;
      for (int i = 0; i < draws; ++i) {
        Arc arc(CirclePoint(rng.next_double()), CirclePoint(rng.next_double()));
        if (arc_contains(arc, s1) && arc_contains(arc, s2)) ++both;
      }
      double expected = 0.5 - t * (1.0 - t);
      double se = std::sqrt(expected * (1.0 - expected) / draws);
      double err = std::abs(static_cast<double>(both) / draws - expected);
      margin = std::min(margin, 3.0 * se - err);
      pass = pass && err <= 3.0 * se;
    }
    detail::add_check(rep, "random_arc_capture_probability", pass, margin, {{"draws", draws}});
  }
  rep.report["all_pass"] = rep.all_pass;
  return rep;
}

}  // namespace popcode
