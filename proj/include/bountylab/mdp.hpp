#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "bountylab/game.hpp"

namespace bountylab {

// The attacker's optimal-stopping game as a finite-horizon MDP. A slot t has
// two sub-steps: at d = 0 the attacker picks how many TEEs to attack, at d = 1
// it turns in, sells, or waits for the next slot.

struct MdpState {
  int shares = 0;  // k
  int slot = 0;    // t
  int substep = 0; // d
  bool terminal = false;

  static MdpState terminal_state() { return {0, 0, 0, true}; }
  friend bool operator==(const MdpState&, const MdpState&) = default;
};

struct MdpAction {
  enum class Kind { Attack, Wait, TurnIn, Sell };
  Kind kind = Kind::Wait;
  int targets = 0;  // TEEs attacked; Attack only

  static MdpAction attack(int n) { return {Kind::Attack, n}; }
  static MdpAction wait() { return {Kind::Wait, 0}; }
  static MdpAction turn_in() { return {Kind::TurnIn, 0}; }
  static MdpAction sell() { return {Kind::Sell, 0}; }
  friend bool operator==(const MdpAction&, const MdpAction&) = default;
};

const char* to_string(MdpAction::Kind kind);

struct Transition {
  MdpState next;
  double probability = 0.0;
  double reward = 0.0;
};

/// P(i successes out of n) with per-trial success p.
double binomial_pmf(int n, int i, double p);

/// Successor distribution of a legal (state, action) pair. Throws
/// ContractViolation for illegal pairs.
std::vector<Transition> transition_distribution(const GameConfig& cfg, const AttackerParams& params,
                                                const RewardSpec& spec, const MdpState& state,
                                                const MdpAction& action);

/// Dense (k, t, d) indexing shared by Policy and ValueTable.
class StateIndex {
 public:
  StateIndex(int n_shares, int horizon) : n_shares_(n_shares), horizon_(horizon) {}
  std::size_t size() const {
    return static_cast<std::size_t>(horizon_ + 1) * static_cast<std::size_t>(n_shares_ + 1) * 2;
  }
  std::size_t operator()(int k, int t, int d) const {
    return (static_cast<std::size_t>(t) * static_cast<std::size_t>(n_shares_ + 1) +
            static_cast<std::size_t>(k)) * 2 + static_cast<std::size_t>(d);
  }
  int n_shares() const { return n_shares_; }
  int horizon() const { return horizon_; }

 private:
  int n_shares_;
  int horizon_;
};

class Policy {
 public:
  Policy(int n_shares, int horizon)
      : index_(n_shares, horizon), actions_(index_.size()) {}
  const MdpAction& at(int k, int t, int d) const { return actions_[index_(k, t, d)]; }
  MdpAction& at(int k, int t, int d) { return actions_[index_(k, t, d)]; }
  const StateIndex& index() const { return index_; }

 private:
  StateIndex index_;
  std::vector<MdpAction> actions_;
};

class ValueTable {
 public:
  ValueTable(int n_shares, int horizon) : index_(n_shares, horizon), values_(index_.size(), 0.0) {}
  double at(int k, int t, int d) const { return values_[index_(k, t, d)]; }
  double& at(int k, int t, int d) { return values_[index_(k, t, d)]; }
  double value(const MdpState& s) const { return s.terminal ? 0.0 : at(s.shares, s.slot, s.substep); }
  /// Attacker's maximal expected profit from the start state.
  double start_value() const { return at(0, 0, 0); }
  const StateIndex& index() const { return index_; }

 private:
  StateIndex index_;
  std::vector<double> values_;
};

struct Solution {
  Policy policy;
  ValueTable values;
};

/// Exact backward induction. Ties go to TurnIn > Sell > Wait at d = 1 and to
/// the smaller attack size at d = 0. With no shares in hand TurnIn is illegal
/// and Wait beats a zero-value Sell.
Solution solve(const GameConfig& cfg, const AttackerParams& params, const RewardSpec& spec);

/// Independent oracle: exhaustive expectimax over the outcome tree of
/// histories (no shared table), i.e. the best of every deterministic strategy.
/// Throws InstanceTooLarge when the tree would exceed max_nodes.
double brute_force_value(const GameConfig& cfg, const AttackerParams& params,
                         const RewardSpec& spec, std::size_t max_nodes = 2'000'000);

/// CSV with header k,t,d,action,n,value; rows ordered by t, k, d.
void write_policy_csv(std::ostream& out, const Solution& solution);
/// CSV with header k,t,d,value.
void write_values_csv(std::ostream& out, const ValueTable& values);

}  // namespace bountylab
