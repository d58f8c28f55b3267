// Command-line front end. Subcommands wrap the library one-to-one:
//   run-figure     discrimination-time experiment, left/right panel CSVs
//   verify-bounds  inequality suite, JSON report (exit 3 on any failure)
//   delta          discrimination statistic for one stimulus pair
//   tmin           minimal discrimination time for one pair
//   t-of-rho       worst-case time at separation rho (exact or sampled)
//   gen-code       emit a preset's code as canonical JSON
// Exit codes: 0 ok, 1 usage, 2 validation or budget refusal, 3 failed bound.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "popcode/experiments.hpp"

namespace {

using nlohmann::json;

json finite_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

struct CommonFlags {
  std::string config_path;
  std::string preset;
  std::uint64_t seed = 0;
  long trials = 0;
  double alpha = 0.0;
  std::string out_dir;
  int workers = 0;
  bool fast = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--preset", flags.preset, "code preset name (or \"all\")");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--trials", flags.trials, "simulated trials per hypothesis");
  cmd->add_option("--alpha", flags.alpha, "error level in (0, 1)");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--workers", flags.workers, "worker threads for simulation");
  cmd->add_flag("--fast", flags.fast, "500 trials; pair with 3x wider tolerances");
}

popcode::ExperimentConfig load_config(const CLI::App* cmd, const CommonFlags& flags) {
  popcode::ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw std::invalid_argument("cannot open config file " + flags.config_path);
    json j = json::parse(in);
    cfg = popcode::config_from_json(j);
  }
  if (cmd->count("--preset")) cfg.preset = flags.preset;
  if (cmd->count("--seed")) cfg.master_seed = flags.seed;
  if (cmd->count("--trials")) cfg.trials = flags.trials;
  if (cmd->count("--alpha")) cfg.alpha = flags.alpha;
  if (cmd->count("--out")) cfg.out_dir = flags.out_dir;
  if (cmd->count("--workers")) cfg.workers = flags.workers;
  if (flags.fast) cfg.trials = 500;
  popcode::validate_config(cfg);
  return cfg;
}

popcode::Code single_code(const popcode::ExperimentConfig& cfg) {
  auto codes = popcode::resolve_codes(cfg);
  if (codes.size() != 1)
    throw std::invalid_argument("this command needs one code: pass --preset NAME");
  return std::move(codes.front().second);
}

int cmd_run_figure(const CLI::App* cmd, const CommonFlags& flags, bool svg) {
  auto cfg = load_config(cmd, flags);
  auto result = popcode::run_figure(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  auto path = [&](const char* name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
  };
  {
    std::ofstream out(path("figure_left.csv"));
    popcode::write_left_csv(out, result);
  }
  {
    std::ofstream out(path("figure_right.csv"));
    popcode::write_right_csv(out, result);
  }
  std::cout << path("figure_left.csv") << '\n' << path("figure_right.csv") << '\n';
  if (svg) {
    std::ofstream(path("figure_left.svg")) << popcode::left_panel_svg(result);
    std::ofstream(path("figure_right.svg")) << popcode::right_panel_svg(result);
    std::cout << path("figure_left.svg") << '\n' << path("figure_right.svg") << '\n';
  }
  return 0;
}

int cmd_verify_bounds(const CLI::App* cmd, const CommonFlags& flags) {
  auto cfg = load_config(cmd, flags);
  auto rep = popcode::verify_bounds(cfg);
  std::cout << rep.report.dump(2) << '\n';
  return rep.all_pass ? 0 : 3;
}

int cmd_pair_stat(const CLI::App* cmd, const CommonFlags& flags, double theta1,
                  double theta2, bool want_tmin) {
  auto cfg = load_config(cmd, flags);
  popcode::Code code = single_code(cfg);
  popcode::CirclePoint s1(theta1), s2(theta2);
  json out;
  if (want_tmin) {
    out["tmin"] = finite_or_inf(popcode::t_min(code, s1, s2));
  } else {
    auto rep = popcode::delta(code, s1, s2);
    out["delta"] = rep.delta;
    out["per_module"] = rep.per_module;
  }
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_t_of_rho(const CLI::App* cmd, const CommonFlags& flags, double rho, bool sampled,
                 std::size_t cell_budget) {
  auto cfg = load_config(cmd, flags);
  popcode::Code code = single_code(cfg);
  json out;
  out["rho"] = rho;
  if (sampled) {
    popcode::ProxyGrid grid{cfg.anchor_theta, cfg.rho_grid};
    out["mode"] = "sampled";
    out["t_of_rho"] = finite_or_inf(popcode::t_of_rho_sampled(code, rho, grid));
  } else {
    popcode::ExactOptions opt;
    if (cell_budget) opt.cell_budget = cell_budget;
    out["mode"] = "exact";
    out["t_of_rho"] = finite_or_inf(popcode::t_of_rho_exact(code, rho, opt));
  }
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_gen_code(const CLI::App* cmd, const CommonFlags& flags) {
  auto cfg = load_config(cmd, flags);
  popcode::Code code = single_code(cfg);
  std::cout << popcode::canonical_code_json(code) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binary population codes on the circle: discrimination statistics,"
               " bounds, and experiments"};
  app.require_subcommand(1);

  CommonFlags flags;
  bool svg = false;
  bool sampled = false;
  bool exact = false;
  double theta1 = 0.0, theta2 = 0.0, rho = 0.0;
  std::size_t cell_budget = 0;

  auto* fig = app.add_subcommand("run-figure", "run the discrimination-time experiment");
  add_common(fig, flags);
  fig->add_flag("--svg", svg, "also render SVG line charts");

  auto* verify = app.add_subcommand("verify-bounds", "check the inequality suite");
  add_common(verify, flags);

  auto* del = app.add_subcommand("delta", "discrimination statistic for a pair");
  add_common(del, flags);
  del->add_option("--s1", theta1, "first stimulus angle")->required();
  del->add_option("--s2", theta2, "second stimulus angle")->required();

  auto* tm = app.add_subcommand("tmin", "minimal discrimination time for a pair");
  add_common(tm, flags);
  tm->add_option("--s1", theta1, "first stimulus angle")->required();
  tm->add_option("--s2", theta2, "second stimulus angle")->required();

  auto* tor = app.add_subcommand("t-of-rho", "worst-case time at separation rho");
  add_common(tor, flags);
  tor->add_option("--rho", rho, "separation in (0, 1/2]")->required();
  tor->add_flag("--exact", exact, "exact over all pairs (default)");
  tor->add_flag("--sampled", sampled, "anchored proxy over the rho grid");
  tor->add_option("--cell-budget", cell_budget, "cell budget for exact mode");

  auto* gen = app.add_subcommand("gen-code", "emit a preset code as canonical JSON");
  add_common(gen, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fig->parsed()) return cmd_run_figure(fig, flags, svg);
    if (verify->parsed()) return cmd_verify_bounds(verify, flags);
    if (del->parsed()) return cmd_pair_stat(del, flags, theta1, theta2, false);
    if (tm->parsed()) return cmd_pair_stat(tm, flags, theta1, theta2, true);
    if (tor->parsed()) {
      if (sampled && exact)
        throw std::invalid_argument("--exact and --sampled are mutually exclusive");
      return cmd_t_of_rho(tor, flags, rho, sampled, cell_budget);
    }
    if (gen->parsed()) return cmd_gen_code(gen, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
