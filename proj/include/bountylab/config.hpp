#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "bountylab/game.hpp"
#include "bountylab/metrics.hpp"
#include "bountylab/optimizer.hpp"

namespace bountylab {

// JSON config schema (all sections optional, defaults reproduce the N=3, v=6
// figure setup):
//
// {
//   "game":     {"n_shares": 3, "threshold": 3, "horizon": 30, "key_value": 6,
//                "value_variant": "linear-capped" | "ceil-capped",
//                "zero_partial_value": false},
//   "attacker": {"cost_per_tee": 0.4, "success_prob": 0.4},
//   "weights":  {"alpha1": "1/3", "alpha2": "1/3"},      numbers or "p/q"
//   "hold_time": "conditional" | "unconditional",
//   "reward":   {"type": "capped", "alpha_cap": 0.8,
//                "inner": {"type": "proposed", "epsilon": 0.95, "eta": 0.06}},
//   "optimizer": {"alpha_cap": 0.8, "eta": 0.06, "grid_step": 0.01},
//   "sweep":    {"ca_values": [...], "ps_values": [...],
//                "specs": ["proposed", "linear", "zero"],
//                "epsilon": 0.95, "linear_bonus": 0.06, "linear_time_bonus": 0.06},
//   "monte_carlo": {"trajectories": 100000},
//   "seed": 1
// }
//
// Reward types: zero; constant {amount}; linear {bonus, time_bonus};
// det-start {level, bonus, time_bonus}; proposed {epsilon, eta};
// capped {alpha_cap, inner}.

struct OptimizerConfig {
  double alpha_cap = 0.8;
  double eta = -1.0;  // < 0: 1% of the key value
  double grid_step = 0.01;
};

struct SweepConfig {
  SweepGrid grid = SweepGrid::default_grid();
  std::optional<double> epsilon;  // unset: run the optimizer first
  double linear_bonus = -1.0;
  double linear_time_bonus = -1.0;
};

struct RunConfig {
  GameConfig game;
  AttackerParams attacker;
  MetricsOptions metrics;
  RewardSpec reward = rewards::Capped{rewards::Proposed{0.95, 0.06}, 0.8};
  OptimizerConfig optimizer;
  SweepConfig sweep;
  std::uint64_t trajectories = 100000;
  std::uint64_t seed = 1;

  /// Checks every nested invariant; throws ConfigError.
  void validate() const;
  double eta() const { return optimizer.eta < 0 ? default_bonus(game) : optimizer.eta; }
};

RewardSpec reward_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const RewardSpec& spec);
nlohmann::ordered_json to_json(const GameConfig& cfg);
nlohmann::ordered_json to_json(const AttackerParams& params);

/// Throws ConfigError on malformed input or violated invariants.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace bountylab
