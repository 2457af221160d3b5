#include "bountylab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bountylab/config.hpp"
#include "bountylab/errors.hpp"
#include "bountylab/mdp.hpp"
#include "bountylab/metrics.hpp"
#include "bountylab/report.hpp"
#include "bountylab/sim/scenario.hpp"

namespace bountylab::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> grid_step;
  int jobs = 1;
};

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.grid_step) cfg.optimizer.grid_step = *c.grid_step;
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Common& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

std::string file_label(std::string label) {
  for (auto& c : label) {
    if (c == ':' || c == '/' || c == ' ') c = '-';
  }
  return label;
}

int cmd_solve(const Common& c, std::ostream& out) {
  const RunConfig cfg = load(c);
  const auto dir = out_dir(c);
  const Solution sol = solve(cfg.game, cfg.attacker, cfg.reward);
  const MetricsReport exact = forward_metrics(cfg.game, cfg.attacker, cfg.reward, sol.policy, cfg.metrics);
  const MonteCarloEstimate mc = monte_carlo_estimate(cfg.game, cfg.attacker, cfg.reward, sol.policy,
                                                     cfg.trajectories, cfg.seed, cfg.metrics, c.jobs);
  {
    auto f = open_out(dir / "policy.csv");
    write_policy_csv(f, sol);
  }
  {
    auto f = open_out(dir / "values.csv");
    write_values_csv(f, sol.values);
  }
  ojson summary;
  summary["reward"] = label(cfg.reward);
  summary["value"] = sol.values.start_value();
  summary["metrics"] = to_json(exact);
  summary["monte_carlo"] = {{"trajectories", mc.trajectories},
                            {"seed", cfg.seed},
                            {"metrics", to_json(mc.report)},
                            {"se_p_e", mc.se_p_sell},
                            {"se_t_h", mc.se_hold_time},
                            {"se_c_d", mc.se_defender_cost}};
  summary["config"] = to_json(cfg);
  auto f = open_out(dir / "summary.json");
  f << summary.dump(2) << '\n';
  out << "value(0,0,0) = " << format_number(sol.values.start_value()) << '\n'
      << metrics_csv_header() << '\n'
      << metrics_csv_row(exact) << '\n';
  return kSuccess;
}

EpsilonOptimum run_optimizer(const RunConfig& cfg) {
  return optimize_epsilon(cfg.game, cfg.attacker, cfg.optimizer.alpha_cap, cfg.eta(),
                          cfg.optimizer.grid_step, cfg.metrics);
}

int cmd_optimize(const Common& c, std::ostream& out) {
  const RunConfig cfg = load(c);
  const auto dir = out_dir(c);
  const EpsilonOptimum opt = run_optimizer(cfg);
  {
    auto f = open_out(dir / "trace.csv");
    write_trace_csv(f, opt);
  }
  ojson j;
  j["epsilon_star"] = opt.epsilon_star;
  j["f_star"] = opt.f_star;
  j["grid_step"] = cfg.optimizer.grid_step;
  j["alpha_cap"] = cfg.optimizer.alpha_cap;
  j["eta"] = cfg.eta();
  for (const auto& p : opt.trace) {
    if (p.epsilon == opt.epsilon_star) j["metrics"] = to_json(p.report);
  }
  auto f = open_out(dir / "optimum.json");
  f << j.dump(2) << '\n';
  out << "epsilon* = " << format_number(opt.epsilon_star) << ", f* = " << format_number(opt.f_star) << '\n';
  return kSuccess;
}

int cmd_sweep(const Common& c, std::ostream& out) {
  const RunConfig cfg = load(c);
  const auto dir = out_dir(c);
  const double eps = cfg.sweep.epsilon ? *cfg.sweep.epsilon : run_optimizer(cfg).epsilon_star;
  SweepSettings settings;
  settings.alpha_cap = cfg.optimizer.alpha_cap;
  settings.eta = cfg.eta();
  settings.linear_bonus = cfg.sweep.linear_bonus;
  settings.linear_time_bonus = cfg.sweep.linear_time_bonus;
  settings.metrics = cfg.metrics;
  settings.jobs = c.jobs;
  const SweepTable table = sweep(cfg.game, eps, cfg.sweep.grid, settings);
  {
    auto f = open_out(dir / "sweep.csv");
    write_sweep_csv(f, table);
  }
  for (const auto& spec : table.grid().specs) {
    auto f = open_out(dir / ("heatmap_" + file_label(spec) + ".svg"));
    write_heatmap_svg(f, table, spec);
  }
  ojson j;
  j["epsilon_star"] = eps;
  const auto& g = table.grid();
  j["cells"] = g.ca_values.size() * g.ps_values.size();
  const bool has_proposed = std::find(g.specs.begin(), g.specs.end(), "proposed") != g.specs.end();
  if (has_proposed && g.specs.size() > 1) j["proposed_dominates"] = table.dominance_count();
  ojson max_f = ojson::object();
  for (std::size_t s = 0; s < g.specs.size(); ++s) {
    double worst = 0.0;
    for (std::size_t i = 0; i < g.ca_values.size(); ++i) {
      for (std::size_t k = 0; k < g.ps_values.size(); ++k) worst = std::max(worst, table.cell(s, i, k).f_score);
    }
    max_f[g.specs[s]] = worst;
  }
  j["max_f"] = max_f;
  auto f = open_out(dir / "sweep_summary.json");
  f << j.dump(2) << '\n';
  out << "epsilon* = " << format_number(eps) << ", " << g.specs.size() << " specs x "
      << g.ca_values.size() << " x " << g.ps_values.size() << " cells\n";
  if (j.contains("proposed_dominates")) {
    out << "proposed dominates in " << j["proposed_dominates"].get<std::size_t>() << " of "
        << j["cells"].get<std::size_t>() << " cells\n";
  }
  return kSuccess;
}

int cmd_simulate(const std::vector<std::string>& scenarios, const Common& c, std::ostream& out) {
  if (scenarios.empty()) throw ConfigError("simulate needs at least one scenario file");
  const auto dir = out_dir(c);
  ojson report = ojson::array();
  bool all_passed = true;
  for (const auto& path : scenarios) {
    const auto result = sim::run_scenario_file(path);
    {
      auto f = open_out(dir / (fs::path(path).stem().string() + ".events.jsonl"));
      for (const auto& line : result.event_log) f << line << '\n';
    }
    report.push_back({{"scenario", result.name},
                      {"file", fs::path(path).filename().string()},
                      {"passed", result.passed},
                      {"steps", result.steps},
                      {"failures", result.failures},
                      {"final_state", result.final_state}});
    out << (result.passed ? "PASS " : "FAIL ") << result.name << '\n';
    for (const auto& why : result.failures) out << "  " << why << '\n';
    all_passed = all_passed && result.passed;
  }
  auto f = open_out(dir / "simulation_report.json");
  f << report.dump(2) << '\n';
  return all_passed ? kSuccess : kAssertionFailure;
}

}  // namespace

CaseStudyModel case_study(const CaseStudyOptions& o) {
  return case_study_params(o.traces, Money::parse(o.tx_per_day), Money::parse(o.cloud_cost), o.key_value,
                           o.threshold, o.n_shares, o.horizon_days);
}

void write_case_study(std::ostream& out, const CaseStudyModel& m) {
  out << "days_per_share," << format_number(m.days_per_share.to_double()) << '\n';
  out << "days_per_share_exact," << m.days_per_share.num << '/' << m.days_per_share.den << '\n';
  out << "k,cost\n";
  for (int k = 1; k <= m.game.threshold; ++k) out << k << ',' << m.cost(k).to_string() << '\n';
  out << "total," << m.key_cost().to_string() << '\n';
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attacker-incentive analysis: MDP solver, reward optimizer and protocol simulator"};
  app.name(args.empty() ? "bountylab" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> scenarios;
  CaseStudyOptions cs;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON run config");
    sub->add_option("--out", common.out, "Output directory")->capture_default_str();
  };
  auto* solve_cmd = app.add_subcommand("solve", "Solve the attacker MDP; write policy, values, summary");
  add_config(solve_cmd);
  solve_cmd->add_option("--seed", common.seed, "Monte Carlo seed");
  solve_cmd->add_option("--jobs", common.jobs, "Worker threads");

  auto* opt_cmd = app.add_subcommand("optimize", "Grid-search epsilon for the capped reward");
  add_config(opt_cmd);
  opt_cmd->add_option("--grid-step", common.grid_step, "Epsilon grid step");
  opt_cmd->add_option("--seed", common.seed, "Seed (recorded only)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Compare reward families over (c_a, p_s)");
  add_config(sweep_cmd);
  sweep_cmd->add_option("--grid-step", common.grid_step, "Epsilon grid step when optimizing first");
  sweep_cmd->add_option("--jobs", common.jobs, "Worker threads");
  sweep_cmd->add_option("--seed", common.seed, "Seed (recorded only)");

  auto* sim_cmd = app.add_subcommand("simulate", "Run protocol scenario scripts");
  sim_cmd->add_option("scenarios", scenarios, "Scenario JSON files")->required();
  sim_cmd->add_option("--out", common.out, "Output directory")->capture_default_str();

  auto* cs_cmd = app.add_subcommand("case-study", "Cloud-rental attack cost table");
  cs_cmd->add_option("--traces", cs.traces, "Signature traces needed per share")->capture_default_str();
  cs_cmd->add_option("--tx-per-day", cs.tx_per_day, "Observed signatures per day")->capture_default_str();
  cs_cmd->add_option("--cloud-cost", cs.cloud_cost, "VM rental per day")->capture_default_str();
  cs_cmd->add_option("--key-value", cs.key_value, "Value of the full key")->capture_default_str();
  cs_cmd->add_option("--threshold", cs.threshold, "Shares needed (m)")->capture_default_str();
  cs_cmd->add_option("--shares", cs.n_shares, "Total shares (N)")->capture_default_str();
  cs_cmd->add_option("--horizon", cs.horizon_days, "Horizon in days")->capture_default_str();
  std::string cs_out;
  cs_cmd->add_option("--out", cs_out, "Also write case_study.csv here");

  std::vector<char*> argv;
  std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"bountylab"} : args;
  for (auto& a : storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(common, out);
    if (opt_cmd->parsed()) return cmd_optimize(common, out);
    if (sweep_cmd->parsed()) return cmd_sweep(common, out);
    if (sim_cmd->parsed()) return cmd_simulate(scenarios, common, out);
    if (cs_cmd->parsed()) {
      const auto model = case_study(cs);
      write_case_study(out, model);
      if (!cs_out.empty()) {
        fs::create_directories(cs_out);
        auto f = open_out(fs::path(cs_out) / "case_study.csv");
        write_case_study(f, model);
      }
      return kSuccess;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace bountylab::cli
