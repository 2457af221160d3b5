#pragma once

#include <string>
#include <variant>
#include <vector>

#include "bountylab/money.hpp"

namespace bountylab {

enum class ValueVariant {
  LinearCapped,  // v*k/m below the threshold, v at or above it
  CeilCapped,    // min(ceil(v*k/m), v)
};

/// The bounty game: N shares, threshold m, T slots per key epoch, key value v.
struct GameConfig {
  int n_shares = 3;
  int threshold = 3;
  int horizon = 30;
  double key_value = 6.0;
  ValueVariant value_variant = ValueVariant::LinearCapped;
  // When set, fewer than m shares are worthless on the market.
  bool zero_partial_value = false;

  void validate() const;
};

/// Non-deterministic attacker: pays cost_per_tee for each TEE attacked in a
/// slot and extracts its share with probability success_prob.
struct AttackerParams {
  double cost_per_tee = 0.4;
  double success_prob = 0.4;

  void validate() const;
};

/// Deterministic attacker cost C(k) for k = 0..N. C(0) = 0, non-decreasing.
class DeterministicCost {
 public:
  explicit DeterministicCost(std::vector<Money> table);

  static DeterministicCost linear(int n_shares, Money per_share);
  /// C(k) = coeff * k^2, rounded to micro-units.
  static DeterministicCost quadratic(int n_shares, double coeff);

  Money operator()(int k) const;
  int max_shares() const { return static_cast<int>(table_.size()) - 1; }
  const std::vector<Money>& table() const { return table_; }

 private:
  std::vector<Money> table_;
};

// Reward-function families. All amounts are in the same unit as the key value.
namespace rewards {

struct Zero {};

struct Constant {
  double amount = 0.0;
};

/// V(k) + (1 - t/T) * time_bonus + bonus.
struct Linear {
  double bonus = 0.0;       // eta_1
  double time_bonus = 0.0;  // delta_1
};

/// level + bonus + (1 - t/T) * time_bonus, independent of k. `level` is
/// max_k (V(k) - C(k)) + C(1) for the cost function it was derived from.
struct DeterministicStart {
  double level = 0.0;
  double bonus = 0.0;       // eta_0
  double time_bonus = 0.0;  // delta_0
};

/// V(N)^eps * V(k)^(1-eps) + eta - g(k) * t/T, g(k) = V(N)^eps V(k)^(1-eps) + eta - V(k).
struct Proposed {
  double epsilon = 0.95;
  double eta = 0.06;
};

using Base = std::variant<Zero, Constant, Linear, DeterministicStart, Proposed>;

/// min(inner, alpha_cap * V(N)).
struct Capped {
  Base inner;
  double alpha_cap = 0.8;
};

}  // namespace rewards

using RewardSpec = std::variant<rewards::Zero, rewards::Constant, rewards::Linear,
                                rewards::DeterministicStart, rewards::Proposed, rewards::Capped>;

void validate(const RewardSpec& spec);
/// Short stable label used in CSV/SVG output: zero, constant, linear,
/// det-start, proposed, capped-proposed, ...
std::string label(const RewardSpec& spec);

/// Market value of k shares.
double share_value(const GameConfig& cfg, int k);

/// Bounty paid for k shares turned in at slot t. k = 0 pays nothing.
double reward(const RewardSpec& spec, const GameConfig& cfg, int k, int t);

/// Largest reward over k in [1, N] and t in [0, T]; the bounty deposit.
double max_reward(const RewardSpec& spec, const GameConfig& cfg);

enum class DetAction { Sell, TurnIn, Abstain };

struct DetResponse {
  int shares = 0;
  DetAction action = DetAction::Abstain;
  Money profit;
};

/// Best response of an attacker with known cost C(k): picks k and whether to
/// sell or turn in at t = 0. All comparisons run on micro-unit integers.
DetResponse det_best_response(const GameConfig& cfg, const DeterministicCost& cost,
                              const RewardSpec& spec);

struct DetConstantReward {
  RewardSpec spec;
  Money level;            // reward at t = 0
  bool bounty_needed = true;  // false when no k is profitable to sell
};

DetConstantReward det_optimal_constant_reward(const GameConfig& cfg,
                                              const DeterministicCost& cost,
                                              double bonus, double time_bonus);

}  // namespace bountylab
