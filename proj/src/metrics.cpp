#include "bountylab/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include "bountylab/errors.hpp"

namespace bountylab {

namespace {

constexpr int kNoShare = -1;

// Running sums for one block of trajectories.
struct Tally {
  double n = 0;
  double sell = 0;
  double claim = 0;
  double cost = 0, cost_sq = 0;
  double with_share = 0;
  double hold = 0, hold_sq = 0;

  void merge(const Tally& o) {
    n += o.n;
    sell += o.sell;
    claim += o.claim;
    cost += o.cost;
    cost_sq += o.cost_sq;
    with_share += o.with_share;
    hold += o.hold;
    hold_sq += o.hold_sq;
  }
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

Tally simulate_block(const GameConfig& cfg, const AttackerParams& params, const RewardSpec& spec,
                     const Policy& policy, std::uint64_t count, std::uint64_t seed,
                     std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Tally tally;
  for (std::uint64_t j = 0; j < count; ++j) {
    int k = 0;
    int first = kNoShare;
    double paid = 0.0;
    int end_slot = cfg.horizon;
    for (int t = 0; t <= cfg.horizon; ++t) {
      const auto& attack = policy.at(k, t, 0);
      if (attack.kind != MdpAction::Kind::Attack) throw ContractViolation("policy must attack at d=0");
      for (int a = 0; a < attack.targets; ++a) {
        if (unit(rng) < params.success_prob) ++k;
      }
      if (k > 0 && first == kNoShare) first = t;
      const auto& act = policy.at(k, t, 1);
      bool stop = false;
      switch (act.kind) {
        case MdpAction::Kind::Wait:
          break;
        case MdpAction::Kind::Sell:
          if (k > 0) {
            tally.sell += 1;
            paid = share_value(cfg, k);
          }
          stop = true;
          break;
        case MdpAction::Kind::TurnIn:
          if (k == 0) throw ContractViolation("policy turns in zero shares");
          tally.claim += 1;
          paid = reward(spec, cfg, k, t);
          stop = true;
          break;
        case MdpAction::Kind::Attack:
          throw ContractViolation("policy attacks at d=1");
      }
      if (stop) {
        end_slot = t;
        break;
      }
    }
    tally.n += 1;
    tally.cost += paid;
    tally.cost_sq += paid * paid;
    if (first != kNoShare) {
      const double h = end_slot - first;
      tally.with_share += 1;
      tally.hold += h;
      tally.hold_sq += h * h;
    }
  }
  return tally;
}

}  // namespace

void MetricWeights::validate() const {
  if (!(alpha1 >= 0.0 && alpha2 >= 0.0 && alpha1 + alpha2 <= 1.0 + 1e-12)) {
    throw ConfigError("weights need alpha1, alpha2 >= 0 and alpha1 + alpha2 <= 1");
  }
}

double f_score(const MetricWeights& w, double p_sell, double hold_time, double defender_cost,
               const GameConfig& cfg) {
  return w.alpha1 * p_sell + w.alpha2 * hold_time / cfg.horizon +
         (1.0 - w.alpha1 - w.alpha2) * defender_cost / cfg.key_value;
}

MetricsReport forward_metrics(const GameConfig& cfg, const AttackerParams& params,
                              const RewardSpec& spec, const Policy& policy,
                              const MetricsOptions& options) {
  options.weights.validate();
  cfg.validate();
  params.validate();
  const int n = cfg.n_shares;
  const int horizon = cfg.horizon;
  if (policy.index().n_shares() != n || policy.index().horizon() != horizon) {
    throw ContractViolation("policy shape does not match the game");
  }
  // mass[k][f + 1]: probability of holding k shares with the first share
  // found in slot f (f = -1: none yet).
  const auto width = static_cast<std::size_t>(horizon + 2);
  using Grid = std::vector<std::vector<double>>;
  Grid at_attack(static_cast<std::size_t>(n + 1), std::vector<double>(width, 0.0));
  at_attack[0][0] = 1.0;

  double sell = 0, claim = 0, cost = 0, with_share = 0, hold = 0;
  for (int t = 0; t <= horizon; ++t) {
    Grid at_decide(static_cast<std::size_t>(n + 1), std::vector<double>(width, 0.0));
    for (int k = 0; k <= n; ++k) {
      for (std::size_t fi = 0; fi < width; ++fi) {
        const double q = at_attack[k][fi];
        if (q == 0.0) continue;
        const auto& act = policy.at(k, t, 0);
        if (act.kind != MdpAction::Kind::Attack) throw ContractViolation("policy must attack at d=0");
        for (const auto& tr : transition_distribution(cfg, params, spec, {k, t, 0, false}, act)) {
          const int k2 = tr.next.shares;
          std::size_t f2 = fi;
          if (fi == 0 && k2 > 0) f2 = static_cast<std::size_t>(t + 1);
          at_decide[k2][f2] += q * tr.probability;
        }
      }
    }
    Grid next(static_cast<std::size_t>(n + 1), std::vector<double>(width, 0.0));
    for (int k = 0; k <= n; ++k) {
      const auto& act = policy.at(k, t, 1);
      for (std::size_t fi = 0; fi < width; ++fi) {
        const double q = at_decide[k][fi];
        if (q == 0.0) continue;
        const double held = fi == 0 ? 0.0 : static_cast<double>(t - static_cast<int>(fi - 1));
        bool ended = true;
        switch (act.kind) {
          case MdpAction::Kind::Wait:
            if (t < horizon) {
              next[k][fi] += q;
              ended = false;
            }
            break;
          case MdpAction::Kind::Sell:
            if (k > 0) {
              sell += q;
              cost += q * share_value(cfg, k);
            }
            break;
          case MdpAction::Kind::TurnIn:
            if (k == 0) throw ContractViolation("policy turns in zero shares");
            claim += q;
            cost += q * reward(spec, cfg, k, t);
            break;
          case MdpAction::Kind::Attack:
            throw ContractViolation("policy attacks at d=1");
        }
        if (ended && fi != 0) {
          with_share += q;
          hold += q * held;
        }
      }
    }
    at_attack = std::move(next);
  }

  MetricsReport r;
  r.p_sell = sell;
  r.p_claim = claim;
  r.p_abstain = std::max(0.0, 1.0 - sell - claim);
  r.defender_cost = cost;
  if (options.hold_time == HoldTimeMode::Conditional) {
    r.mean_hold_time = with_share > 0.0 ? hold / with_share : 0.0;
  } else {
    r.mean_hold_time = hold;
  }
  r.f_score = f_score(options.weights, r.p_sell, r.mean_hold_time, r.defender_cost, cfg);
  return r;
}

MonteCarloEstimate monte_carlo_estimate(const GameConfig& cfg, const AttackerParams& params,
                                        const RewardSpec& spec, const Policy& policy,
                                        std::uint64_t n_traj, std::uint64_t seed,
                                        const MetricsOptions& options, int jobs) {
  if (n_traj < 1) throw ConfigError("need at least one trajectory");
  options.weights.validate();
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t blocks = (n_traj + kBlock - 1) / kBlock;
  std::vector<Tally> tallies(blocks);
  auto run = [&](std::uint64_t b) {
    const std::uint64_t count = std::min(kBlock, n_traj - b * kBlock);
    tallies[b] = simulate_block(cfg, params, spec, policy, count, seed, b);
  };
  const auto workers = static_cast<std::uint64_t>(std::max(1, jobs));
  if (workers == 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) run(b);
  } else {
    std::vector<std::thread> pool;
    for (std::uint64_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t b = w; b < blocks; b += workers) run(b);
      });
    }
    for (auto& th : pool) th.join();
  }
  Tally total;
  for (const auto& t : tallies) total.merge(t);

  MonteCarloEstimate est;
  est.trajectories = n_traj;
  const double cnt = total.n;
  auto& r = est.report;
  r.p_sell = total.sell / cnt;
  r.p_claim = total.claim / cnt;
  r.p_abstain = 1.0 - r.p_sell - r.p_claim;
  r.defender_cost = total.cost / cnt;
  est.se_p_sell = std::sqrt(r.p_sell * (1.0 - r.p_sell) / cnt);
  est.se_p_claim = std::sqrt(r.p_claim * (1.0 - r.p_claim) / cnt);
  est.se_defender_cost =
      std::sqrt(std::max(0.0, total.cost_sq / cnt - r.defender_cost * r.defender_cost) / cnt);
  if (options.hold_time == HoldTimeMode::Conditional) {
    if (total.with_share > 0) {
      const double m = total.hold / total.with_share;
      r.mean_hold_time = m;
      est.se_hold_time =
          std::sqrt(std::max(0.0, total.hold_sq / total.with_share - m * m) / total.with_share);
    }
  } else {
    const double m = total.hold / cnt;
    r.mean_hold_time = m;
    est.se_hold_time = std::sqrt(std::max(0.0, total.hold_sq / cnt - m * m) / cnt);
  }
  r.f_score = f_score(options.weights, r.p_sell, r.mean_hold_time, r.defender_cost, cfg);
  return est;
}

MetricsReport monte_carlo_metrics(const GameConfig& cfg, const AttackerParams& params,
                                  const RewardSpec& spec, const Policy& policy,
                                  std::uint64_t n_traj, std::uint64_t seed,
                                  const MetricsOptions& options) {
  return monte_carlo_estimate(cfg, params, spec, policy, n_traj, seed, options).report;
}

double expected_claim_cost(const std::vector<std::pair<double, double>>& users) {
  double mu = 0.0;
  for (const auto& [first_share_reward, leak_prob] : users) {
    if (!(leak_prob >= 0.0 && leak_prob <= 1.0)) throw DomainError("leak probability outside [0, 1]");
    mu += first_share_reward * leak_prob;
  }
  return mu;
}

double service_fee(double mu, double op_cost, double lambda) {
  // ln(ln(lambda)) must be positive.
  if (!(lambda > std::exp(1.0))) throw DomainError("security parameter must exceed e");
  if (!(mu >= 0.0 && op_cost >= 0.0)) throw DomainError("mu and c_o must be >= 0");
  const double l = std::log(lambda);
  return (1.0 + l * std::log(l)) * mu + op_cost;
}

std::string metrics_csv_header() { return "p_e,t_h,c_d,f,p_claim,p_abstain"; }

std::string metrics_csv_row(const MetricsReport& r) {
  return fmt(r.p_sell) + ',' + fmt(r.mean_hold_time) + ',' + fmt(r.defender_cost) + ',' +
         fmt(r.f_score) + ',' + fmt(r.p_claim) + ',' + fmt(r.p_abstain);
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["p_e"] = r.p_sell;
  j["t_h"] = r.mean_hold_time;
  j["c_d"] = r.defender_cost;
  j["f"] = r.f_score;
  j["p_claim"] = r.p_claim;
  j["p_abstain"] = r.p_abstain;
  return j;
}

}  // namespace bountylab
