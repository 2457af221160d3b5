#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"

#include "bountylab/errors.hpp"
#include "bountylab/mdp.hpp"

using namespace bountylab;

namespace {

using Kind = MdpAction::Kind;

GameConfig tiny(int n, int m, int horizon, double v) {
  return GameConfig{n, m, horizon, v, ValueVariant::LinearCapped, false};
}

// Markov enumeration for N = 1: list every deterministic stationary-in-state
// policy over the (k, t, d) grid, evaluate each by a hand-written forward pass
// and keep the best. The transition law is re-derived here, not borrowed.
double enumerate_n1(int horizon, const AttackerParams& ap, const RewardSpec& spec,
                    const GameConfig& cfg) {
  REQUIRE(cfg.n_shares == 1);
  // Decision points: (k=0,d=0): attack 0/1; (k=1,d=0): attack 0 only;
  // (k=0,d=1): wait/sell; (k=1,d=1): wait/sell/turn-in.
  const int slots = horizon + 1;
  std::vector<int> radix;
  for (int t = 0; t < slots; ++t) {
    radix.push_back(2);  // k=0, d=0
    radix.push_back(2);  // k=0, d=1
    radix.push_back(3);  // k=1, d=1
  }
  std::vector<int> digit(radix.size(), 0);
  double best = -INFINITY;
  while (true) {
    // Evaluate.
    double mass0 = 1.0, mass1 = 0.0, value = 0.0;
    for (int t = 0; t < slots; ++t) {
      const int attack = digit[3 * t];
      const int act0 = digit[3 * t + 1];
      const int act1 = digit[3 * t + 2];
      if (attack == 1) {
        value -= mass0 * ap.cost_per_tee;
        mass1 += mass0 * ap.success_prob;
        mass0 *= 1.0 - ap.success_prob;
      }
      if (act0 == 1) mass0 = 0.0;  // selling nothing ends the game with 0
      if (act1 == 1) {
        value += mass1 * share_value(cfg, 1);
        mass1 = 0.0;
      } else if (act1 == 2) {
        value += mass1 * reward(spec, cfg, 1, t);
        mass1 = 0.0;
      }
    }
    best = std::max(best, value);
    std::size_t pos = 0;
    while (pos < digit.size() && ++digit[pos] == radix[pos]) digit[pos++] = 0;
    if (pos == digit.size()) break;
  }
  return best;
}

// Evaluate a fixed policy by exact forward propagation through
// transition_distribution.
double policy_value(const GameConfig& cfg, const AttackerParams& ap, const RewardSpec& spec,
                    const Policy& policy) {
  std::map<std::tuple<int, int, int>, double> frontier{{{0, 0, 0}, 1.0}};
  double value = 0.0;
  while (!frontier.empty()) {
    auto node = frontier.begin();
    const auto [k, t, d] = node->first;
    const double mass = node->second;
    frontier.erase(node);
    const MdpState s{k, t, d, false};
    for (const auto& tr : transition_distribution(cfg, ap, spec, s, policy.at(k, t, d))) {
      value += mass * tr.probability * tr.reward;
      if (!tr.next.terminal) {
        frontier[{tr.next.shares, tr.next.slot, tr.next.substep}] += mass * tr.probability;
      }
    }
  }
  return value;
}

}  // namespace

TEST_CASE("binomial pmf") {
  CHECK(binomial_pmf(3, 2, 0.4) == doctest::Approx(3 * 0.16 * 0.6));
  CHECK(binomial_pmf(5, 0, 0.0) == 1.0);
  CHECK(binomial_pmf(5, 5, 1.0) == 1.0);
  CHECK(binomial_pmf(5, 4, 1.0) == 0.0);
  CHECK(binomial_pmf(2, 3, 0.5) == 0.0);
  for (int n = 0; n <= 12; ++n) {
    double total = 0.0;
    for (int i = 0; i <= n; ++i) total += binomial_pmf(n, i, 0.37);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("transition law") {
  const auto cfg = tiny(3, 3, 5, 6.0);
  const AttackerParams ap{0.4, 0.4};
  const RewardSpec spec = rewards::Capped{rewards::Proposed{0.95, 0.06}, 0.8};

  SUBCASE("attack outcomes are binomial and cost n c_a") {
    const auto out = transition_distribution(cfg, ap, spec, {1, 2, 0, false}, MdpAction::attack(2));
    REQUIRE(out.size() == 3);
    double total = 0.0;
    for (const auto& tr : out) {
      total += tr.probability;
      CHECK(tr.reward == doctest::Approx(-0.8));
      CHECK(tr.next.substep == 1);
      CHECK(tr.next.slot == 2);
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(out[2].next.shares == 3);
    CHECK(out[2].probability == doctest::Approx(0.16));
  }
  SUBCASE("wait advances the slot, and ends the game at T") {
    const auto mid = transition_distribution(cfg, ap, spec, {2, 4, 1, false}, MdpAction::wait());
    CHECK(mid.at(0).next == MdpState{2, 5, 0, false});
    const auto end = transition_distribution(cfg, ap, spec, {2, 5, 1, false}, MdpAction::wait());
    CHECK(end.at(0).next.terminal);
    CHECK(end.at(0).reward == 0.0);
  }
  SUBCASE("stopping actions pay and terminate") {
    const auto sell = transition_distribution(cfg, ap, spec, {2, 1, 1, false}, MdpAction::sell());
    CHECK(sell.at(0).reward == doctest::Approx(4.0));
    CHECK(sell.at(0).next.terminal);
    const auto claim = transition_distribution(cfg, ap, spec, {1, 0, 1, false}, MdpAction::turn_in());
    CHECK(claim.at(0).reward == doctest::Approx(4.8));
  }
  SUBCASE("illegal pairs") {
    CHECK_THROWS_AS(transition_distribution(cfg, ap, spec, MdpState::terminal_state(), MdpAction::wait()),
                    ContractViolation);
    CHECK_THROWS_AS(transition_distribution(cfg, ap, spec, {0, 0, 0, false}, MdpAction::sell()),
                    ContractViolation);
    CHECK_THROWS_AS(transition_distribution(cfg, ap, spec, {2, 0, 0, false}, MdpAction::attack(2)),
                    ContractViolation);
    CHECK_THROWS_AS(transition_distribution(cfg, ap, spec, {0, 0, 1, false}, MdpAction::attack(1)),
                    ContractViolation);
    CHECK_THROWS_AS(transition_distribution(cfg, ap, spec, {0, 0, 1, false}, MdpAction::turn_in()),
                    ContractViolation);
    CHECK_THROWS_AS(transition_distribution(cfg, ap, spec, {0, 6, 0, false}, MdpAction::attack(0)),
                    ContractViolation);
    CHECK_THROWS_AS(transition_distribution(cfg, ap, spec, {4, 0, 0, false}, MdpAction::attack(0)),
                    ContractViolation);
  }
}

TEST_CASE("hand-solved single-share instance") {
  // p_s = 1: attack for 0.1, then claim 1.41 > V = 1. A constant bounty makes
  // attacking now and in the last slot tie, so the smaller attack wins at t = 0.
  const auto cfg = tiny(1, 1, 1, 1.0);
  const AttackerParams ap{0.1, 1.0};
  const auto sol = solve(cfg, ap, rewards::Constant{1.41});
  CHECK(sol.values.start_value() == doctest::Approx(1.31).epsilon(1e-12));
  CHECK(sol.policy.at(0, 0, 0) == MdpAction::attack(0));
  CHECK(sol.policy.at(0, 1, 0) == MdpAction::attack(1));
  CHECK(sol.policy.at(1, 0, 1) == MdpAction::turn_in());
  CHECK(sol.policy.at(1, 1, 1) == MdpAction::turn_in());
  CHECK(policy_value(cfg, ap, rewards::Constant{1.41}, sol.policy) == doctest::Approx(1.31));
  CHECK(brute_force_value(cfg, ap, rewards::Constant{1.41}) == doctest::Approx(1.31).epsilon(1e-12));
}

TEST_CASE("hand-solved coin-flip instance without a bounty") {
  // One share, two slots, p_s = 1/2, c_a = 0.2: attack in both slots and sell.
  // 0.5 (1 - 0.2) + 0.5 (0.5 * 1 - 0.2) - 0.2 = 0.45.
  const auto cfg = tiny(1, 1, 1, 1.0);
  const AttackerParams ap{0.2, 0.5};
  CHECK(brute_force_value(cfg, ap, rewards::Zero{}) == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(solve(cfg, ap, rewards::Zero{}).values.start_value() == doctest::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("Markov enumeration agrees with backward induction for one share") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int horizon = 1 + trial % 2;
    const auto cfg = tiny(1, 1, horizon, 0.5 + 5 * unit(rng));
    const AttackerParams ap{unit(rng) * 2, unit(rng)};
    const RewardSpec specs[] = {rewards::Zero{}, rewards::Linear{unit(rng), unit(rng)},
                                rewards::Capped{rewards::Proposed{unit(rng), 0.01 + unit(rng)}, 0.5 + 0.5 * unit(rng)}};
    for (const auto& spec : specs) {
      const double expect = enumerate_n1(horizon, ap, spec, cfg);
      const auto sol = solve(cfg, ap, spec);
      CHECK(sol.values.start_value() == doctest::Approx(expect).epsilon(1e-12));
      CHECK(policy_value(cfg, ap, spec, sol.policy) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("brute-force expectimax agrees with backward induction") {
  std::mt19937_64 rng(2025);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 3;
    const int horizon = n == 3 ? 1 + trial % 2 : 1 + trial % 4;
    auto cfg = tiny(n, 1 + static_cast<int>(rng() % n), horizon, 0.5 + 9.5 * unit(rng));
    if (trial % 5 == 0) cfg.value_variant = ValueVariant::CeilCapped;
    const AttackerParams ap{unit(rng), unit(rng)};
    const RewardSpec spec = trial % 3 == 0   ? RewardSpec{rewards::Zero{}}
                            : trial % 3 == 1 ? RewardSpec{rewards::Linear{unit(rng), unit(rng)}}
                                             : RewardSpec{rewards::Capped{
                                                   rewards::Proposed{unit(rng), 0.01 + unit(rng)}, 0.8}};
    const double oracle = brute_force_value(cfg, ap, spec);
    const auto sol = solve(cfg, ap, spec);
    CHECK(sol.values.start_value() == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(policy_value(cfg, ap, spec, sol.policy) == doctest::Approx(oracle).epsilon(1e-12));
    ++compared;
  }
  CHECK(compared >= 50);
}

TEST_CASE("brute force refuses oversized trees") {
  CHECK_THROWS_AS(brute_force_value(tiny(3, 3, 30, 6.0), AttackerParams{0.4, 0.4}, rewards::Zero{}, 10'000),
                  InstanceTooLarge);
}

TEST_CASE("policy invariants on the reference instance") {
  const auto cfg = tiny(3, 3, 30, 6.0);
  const AttackerParams ap{0.4, 0.4};
  const RewardSpec spec = rewards::Capped{rewards::Proposed{0.95, 0.06}, 0.8};
  const auto sol = solve(cfg, ap, spec);
  for (int t = 0; t <= cfg.horizon; ++t) {
    for (int k = 0; k <= cfg.n_shares; ++k) {
      const auto& a0 = sol.policy.at(k, t, 0);
      CHECK(a0.kind == Kind::Attack);
      CHECK(a0.targets >= 0);
      CHECK(a0.targets <= cfg.n_shares - k);
      const auto& a1 = sol.policy.at(k, t, 1);
      CHECK(a1.kind != Kind::Attack);
      if (k == 0) CHECK(a1.kind == Kind::Wait);
      // Values dominate every one-step alternative.
      CHECK(sol.values.at(k, t, 1) >= share_value(cfg, k) - 1e-12);
      if (k > 0) CHECK(sol.values.at(k, t, 1) >= reward(spec, cfg, k, t) - 1e-12);
      if (t < cfg.horizon) CHECK(sol.values.at(k, t, 1) >= sol.values.at(k, t + 1, 0) - 1e-12);
      CHECK(sol.values.at(k, t, 0) >= sol.values.at(k, t, 1) - 1e-12);
    }
  }
  // The full key is always cashed in, whichever way pays more.
  for (int t = 0; t <= cfg.horizon; ++t) CHECK(sol.policy.at(3, t, 1).kind != Kind::Wait);
  CHECK(sol.values.start_value() >= 0.0);
}

TEST_CASE("ties prefer turn-in, then sell, then the smaller attack") {
  const auto cfg = tiny(2, 2, 2, 2.0);
  // A bounty equal to V makes TurnIn and Sell tie everywhere.
  const auto sol = solve(cfg, AttackerParams{0.0, 0.0}, rewards::Linear{0.0, 0.0});
  CHECK(sol.policy.at(1, 0, 1) == MdpAction::turn_in());
  CHECK(sol.policy.at(2, 2, 1) == MdpAction::turn_in());
  // Free, useless attacks: p_s = 0 makes every attack size tie, smallest wins.
  const auto idle = solve(cfg, AttackerParams{0.0, 0.0}, rewards::Zero{});
  CHECK(idle.policy.at(0, 0, 0) == MdpAction::attack(0));
  CHECK(idle.policy.at(1, 1, 1) == MdpAction::sell());
}

TEST_CASE("csv writers") {
  const auto cfg = tiny(1, 1, 1, 1.0);
  const auto sol = solve(cfg, AttackerParams{0.1, 1.0}, rewards::Constant{1.41});
  std::ostringstream policy;
  write_policy_csv(policy, sol);
  CHECK(policy.str().rfind("k,t,d,action,n,value\n0,0,0,attack,0,1.31\n", 0) == 0);
  std::ostringstream values;
  write_values_csv(values, sol.values);
  CHECK(values.str().rfind("k,t,d,value\n0,0,0,1.31\n", 0) == 0);
  int lines = 0;
  for (char c : values.str()) lines += c == '\n';
  CHECK(lines == 1 + 2 * 2 * 2);
}
