#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"

#include "bountylab/errors.hpp"
#include "bountylab/metrics.hpp"

using namespace bountylab;

namespace {

GameConfig make_cfg(int n, int m, int horizon, double v) {
  return GameConfig{n, m, horizon, v, ValueVariant::LinearCapped, false};
}

// Walk every history of the policy-induced chain and accumulate the metrics
// path by path. Only practical for small trees.
struct PathTotals {
  double sell = 0, claim = 0, cost = 0, with_share = 0, hold = 0;
};

PathTotals enumerate_paths(const GameConfig& cfg, const AttackerParams& ap, const RewardSpec& spec,
                           const Policy& policy) {
  PathTotals out;
  std::function<void(int, int, int, double)> walk = [&](int k, int t, int first, double prob) {
    const int n = policy.at(k, t, 0).targets;
    for (int i = 0; i <= n; ++i) {
      const double p = prob * std::tgamma(n + 1) / (std::tgamma(i + 1) * std::tgamma(n - i + 1)) *
                       std::pow(ap.success_prob, i) * std::pow(1 - ap.success_prob, n - i);
      if (p == 0.0) continue;
      const int k2 = k + i;
      const int f2 = first < 0 && k2 > 0 ? t : first;
      const auto act = policy.at(k2, t, 1).kind;
      const bool stop = act != MdpAction::Kind::Wait || t == cfg.horizon;
      if (!stop) {
        walk(k2, t + 1, f2, p);
        continue;
      }
      if (act == MdpAction::Kind::Sell && k2 > 0) {
        out.sell += p;
        out.cost += p * share_value(cfg, k2);
      } else if (act == MdpAction::Kind::TurnIn) {
        out.claim += p;
        out.cost += p * reward(spec, cfg, k2, t);
      }
      if (f2 >= 0) {
        out.with_share += p;
        out.hold += p * (t - f2);
      }
    }
  };
  walk(0, 0, -1, 1.0);
  return out;
}

// One share, two slots: attack once in slot 0, or in both slots; turn in on
// success.
Policy coin_policy(bool attack_both_slots) {
  Policy p(1, 1);
  for (int t = 0; t <= 1; ++t) {
    p.at(0, t, 0) = MdpAction::attack(t == 0 || attack_both_slots ? 1 : 0);
    p.at(1, t, 0) = MdpAction::attack(0);
    p.at(0, t, 1) = MdpAction::wait();
    p.at(1, t, 1) = MdpAction::turn_in();
  }
  return p;
}

}  // namespace

TEST_CASE("weights") {
  CHECK_NOTHROW(MetricWeights{0.5, 0.5}.validate());
  CHECK_THROWS_AS((MetricWeights{0.7, 0.4}.validate()), ConfigError);
  CHECK_THROWS_AS((MetricWeights{-0.1, 0.4}.validate()), ConfigError);
  const auto cfg = make_cfg(3, 3, 30, 6.0);
  CHECK(f_score(MetricWeights{}, 0.3, 15, 3.0, cfg) == doctest::Approx((0.3 + 0.5 + 0.5) / 3));
  const auto policy = solve(cfg, {0.4, 0.4}, rewards::Zero{}).policy;
  CHECK_THROWS_AS(forward_metrics(cfg, {0.4, 0.4}, rewards::Zero{}, policy, {MetricWeights{0.9, 0.9}}),
                  ConfigError);
}

TEST_CASE("an attacker who never attacks costs nothing") {
  const auto cfg = make_cfg(3, 3, 30, 6.0);
  const AttackerParams ap{7.0, 0.4};
  const auto sol = solve(cfg, ap, rewards::Zero{});
  const auto r = forward_metrics(cfg, ap, rewards::Zero{}, sol.policy);
  CHECK(r.p_sell == 0.0);
  CHECK(r.mean_hold_time == 0.0);
  CHECK(r.defender_cost == 0.0);
  CHECK(r.f_score == 0.0);
  CHECK(r.p_abstain == 1.0);
}

TEST_CASE("coin-flip turn-in policies") {
  const auto cfg = make_cfg(1, 1, 1, 1.0);
  const AttackerParams ap{0.2, 0.5};
  const RewardSpec spec = rewards::Linear{0.3, 0.2};
  SUBCASE("attack in the first slot only") {
    const auto r = forward_metrics(cfg, ap, spec, coin_policy(false));
    CHECK(r.p_claim == doctest::Approx(0.5));
    CHECK(r.defender_cost == doctest::Approx(0.5 * reward(spec, cfg, 1, 0)));
    CHECK(r.p_sell == 0.0);
    CHECK(r.mean_hold_time == 0.0);
  }
  SUBCASE("attack in both slots") {
    const auto r = forward_metrics(cfg, ap, spec, coin_policy(true));
    CHECK(r.p_claim == doctest::Approx(0.75));
    CHECK(r.defender_cost ==
          doctest::Approx(0.5 * reward(spec, cfg, 1, 0) + 0.25 * reward(spec, cfg, 1, 1)));
    CHECK(r.p_abstain == doctest::Approx(0.25));
  }
}

TEST_CASE("hold time counts whole slots from the first share") {
  // p_s = 1, no bounty, two shares needed; the cheapest plan is to attack one
  // TEE per slot, so the key completes one slot after the first share.
  const auto cfg = make_cfg(2, 2, 3, 10.0);
  Policy p(2, 3);
  for (int t = 0; t <= 3; ++t) {
    for (int k = 0; k <= 2; ++k) {
      p.at(k, t, 0) = MdpAction::attack(k < 2 ? 1 : 0);
      p.at(k, t, 1) = k == 2 ? MdpAction::sell() : MdpAction::wait();
    }
  }
  const auto r = forward_metrics(cfg, {1.0, 1.0}, rewards::Zero{}, p);
  CHECK(r.p_sell == 1.0);
  CHECK(r.mean_hold_time == 1.0);
  CHECK(r.defender_cost == 10.0);
  MetricsOptions uncond;
  uncond.hold_time = HoldTimeMode::Unconditional;
  // Same here, since every trajectory finds a share.
  CHECK(forward_metrics(cfg, {1.0, 1.0}, rewards::Zero{}, p, uncond).mean_hold_time == 1.0);
}

TEST_CASE("forward propagation matches path enumeration") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 3;
    const auto cfg = make_cfg(n, 1 + static_cast<int>(rng() % n), 2 + trial % 5, 1 + 9 * unit(rng));
    const AttackerParams ap{unit(rng) * 0.5 * cfg.key_value / n, 0.1 + 0.9 * unit(rng)};
    const RewardSpec spec = trial % 2 ? RewardSpec{rewards::Zero{}}
                                      : RewardSpec{rewards::Capped{rewards::Proposed{unit(rng), 0.05}, 0.8}};
    const auto sol = solve(cfg, ap, spec);
    MetricsOptions uncond;
    uncond.hold_time = HoldTimeMode::Unconditional;
    const auto r = forward_metrics(cfg, ap, spec, sol.policy);
    const auto u = forward_metrics(cfg, ap, spec, sol.policy, uncond);
    const auto e = enumerate_paths(cfg, ap, spec, sol.policy);
    CHECK(r.p_sell == doctest::Approx(e.sell).epsilon(1e-12));
    CHECK(r.p_claim == doctest::Approx(e.claim).epsilon(1e-12));
    CHECK(r.defender_cost == doctest::Approx(e.cost).epsilon(1e-12));
    CHECK(u.mean_hold_time == doctest::Approx(e.hold).epsilon(1e-12));
    if (e.with_share > 0) CHECK(r.mean_hold_time == doctest::Approx(e.hold / e.with_share).epsilon(1e-12));
    CHECK(r.p_sell + r.p_claim + r.p_abstain == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("report invariants on random instances") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const auto cfg = make_cfg(n, 1 + static_cast<int>(rng() % n), 1 + static_cast<int>(rng() % 40),
                              0.5 + 20 * unit(rng));
    const AttackerParams ap{unit(rng) * cfg.key_value, unit(rng)};
    const RewardSpec specs[] = {rewards::Zero{}, rewards::Linear{unit(rng), unit(rng)},
                                rewards::Capped{rewards::Proposed{unit(rng), 0.01 + unit(rng)}, 0.8},
                                rewards::Proposed{unit(rng), 0.01 + unit(rng)}};
    const MetricWeights w{unit(rng) / 2, unit(rng) / 2};
    for (const auto& spec : specs) {
      const auto sol = solve(cfg, ap, spec);
      const auto r = forward_metrics(cfg, ap, spec, sol.policy, {w});
      CHECK(r.p_sell + r.p_claim + r.p_abstain == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(r.defender_cost >= 0.0);
      CHECK(r.defender_cost <= std::max(cfg.key_value, max_reward(spec, cfg)) + 1e-9);
      CHECK(r.mean_hold_time >= 0.0);
      CHECK(r.mean_hold_time <= cfg.horizon);
      const double parts[] = {r.p_sell, r.mean_hold_time / cfg.horizon, r.defender_cost / cfg.key_value};
      const double hi = *std::max_element(std::begin(parts), std::end(parts));
      const double lo = *std::min_element(std::begin(parts), std::end(parts));
      CHECK(r.f_score <= hi + 1e-12);
      if (w.alpha1 + w.alpha2 <= 1.0) CHECK(r.f_score >= std::min(lo, 0.0) - 1e-12);
      if (r.defender_cost <= cfg.key_value) {
        CHECK(r.f_score >= -1e-12);
        CHECK(r.f_score <= 1.0 + 1e-12);
      }
      if (std::holds_alternative<rewards::Zero>(spec)) {
        CHECK(r.p_claim == 0.0);
      }
    }
  }
}

TEST_CASE("a generous constant bounty removes selling") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int profitable = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 2;
    const auto cfg = make_cfg(n, n, 1 + trial % 3, 1 + 5 * unit(rng));
    const AttackerParams ap{unit(rng) * cfg.key_value / n, 0.2 + 0.8 * unit(rng)};
    const RewardSpec bounty = rewards::Constant{cfg.key_value + 0.01};
    if (brute_force_value(cfg, ap, rewards::Zero{}) <= 0.0) continue;
    ++profitable;
    const auto sol = solve(cfg, ap, bounty);
    CHECK(forward_metrics(cfg, ap, bounty, sol.policy).p_sell == 0.0);
  }
  CHECK(profitable > 10);
}

TEST_CASE("Monte Carlo agrees with exact propagation within 3 sigma") {
  std::mt19937_64 rng(8080);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int instances = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const int n = 1 + trial % 4;
    const auto cfg = make_cfg(n, 1 + static_cast<int>(rng() % n), 5 + trial, 2 + 8 * unit(rng));
    const AttackerParams ap{0.05 + unit(rng) * 0.3 * cfg.key_value / n, 0.1 + 0.8 * unit(rng)};
    const RewardSpec spec = trial % 3 == 0 ? RewardSpec{rewards::Zero{}}
                          : trial % 3 == 1 ? RewardSpec{rewards::Linear{0.05, 0.05}}
                                           : RewardSpec{rewards::Capped{rewards::Proposed{0.5 + 0.5 * unit(rng), 0.05}, 0.8}};
    const auto sol = solve(cfg, ap, spec);
    const auto exact = forward_metrics(cfg, ap, spec, sol.policy);
    const auto mc = monte_carlo_estimate(cfg, ap, spec, sol.policy, 100'000, 1000 + trial);
    const double n_traj = 1e5;
    // Sampling resolution: a rare outcome that never shows up can shift the
    // sample mean by about one trajectory's worth while its SE reads zero.
    const double cost_slack = 3 * std::max(cfg.key_value, max_reward(spec, cfg)) / n_traj;
    const double hold_slack = 3.0 * cfg.horizon / n_traj;
    auto binom_sd = [&](double p) {
      p = std::clamp(p, 0.0, 1.0);
      return std::sqrt(p * (1 - p) / n_traj);
    };
    CHECK(std::abs(mc.report.p_sell - exact.p_sell) <= 3 * binom_sd(exact.p_sell) + 1e-9);
    CHECK(std::abs(mc.report.p_claim - exact.p_claim) <= 3 * binom_sd(exact.p_claim) + 1e-9);
    CHECK(std::abs(mc.report.defender_cost - exact.defender_cost) <= 3 * mc.se_defender_cost + cost_slack);
    CHECK(std::abs(mc.report.mean_hold_time - exact.mean_hold_time) <= 3 * mc.se_hold_time + hold_slack);
    ++instances;
  }
  CHECK(instances >= 20);
}

TEST_CASE("Monte Carlo determinism") {
  const auto cfg = make_cfg(3, 3, 30, 6.0);
  const AttackerParams ap{0.4, 0.4};
  const RewardSpec spec = rewards::Capped{rewards::Proposed{0.95, 0.06}, 0.8};
  const auto sol = solve(cfg, ap, spec);
  const auto a = monte_carlo_estimate(cfg, ap, spec, sol.policy, 20'000, 7);
  const auto b = monte_carlo_estimate(cfg, ap, spec, sol.policy, 20'000, 7);
  const auto c = monte_carlo_estimate(cfg, ap, spec, sol.policy, 20'000, 7, {}, 4);
  CHECK(metrics_csv_row(a.report) == metrics_csv_row(b.report));
  CHECK(metrics_csv_row(a.report) == metrics_csv_row(c.report));
  const auto d = monte_carlo_estimate(cfg, ap, spec, sol.policy, 20'000, 8);
  CHECK(metrics_csv_row(a.report) != metrics_csv_row(d.report));

  const AttackerParams hopeless{0.4, 0.0};
  const auto idle = solve(cfg, hopeless, spec);
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto r = monte_carlo_metrics(cfg, hopeless, spec, idle.policy, 5000, seed);
    CHECK(r.p_sell == 0.0);
    CHECK(r.defender_cost == 0.0);
    CHECK(r.mean_hold_time == 0.0);
  }
  CHECK_THROWS_AS(monte_carlo_metrics(cfg, ap, spec, sol.policy, 0, 1), ConfigError);
}

TEST_CASE("claim cost and service fee") {
  CHECK(expected_claim_cost({{4.8, 0.01}}) == doctest::Approx(0.048));
  CHECK(expected_claim_cost({}) == 0.0);
  CHECK(expected_claim_cost({{2, 0.5}, {4, 0.25}}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(expected_claim_cost({{2, 1.5}}), DomainError);

  CHECK(service_fee(0, 5, 64) == 5.0);
  // 40-digit evaluations.
  CHECK(service_fee(1, 0, std::exp(std::exp(1.0))) == doctest::Approx(3.718281828459045).epsilon(1e-13));
  CHECK(service_fee(0.048, 10, std::ldexp(1.0, 20)) == doctest::Approx(11.797538542322955).epsilon(1e-14));
  CHECK_THROWS_AS(service_fee(1, 0, 2.0), DomainError);
  CHECK_THROWS_AS(service_fee(-1, 0, 64), DomainError);
}

TEST_CASE("serialization") {
  MetricsReport r{0.25, 3.5, 1.2, 0.4, 0.5, 0.25};
  CHECK(metrics_csv_header() == "p_e,t_h,c_d,f,p_claim,p_abstain");
  CHECK(metrics_csv_row(r) == "0.25,3.5,1.2,0.4,0.5,0.25");
  CHECK(to_json(r).dump() == R"({"p_e":0.25,"t_h":3.5,"c_d":1.2,"f":0.4,"p_claim":0.5,"p_abstain":0.25})");
}
