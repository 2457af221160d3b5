#include "bountylab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>

#include "bountylab/errors.hpp"

namespace bountylab {

namespace {

bool within_tie(double candidate, double best) {
  return candidate >= best - 1e-12 * std::max(1.0, std::abs(best));
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void check_state(const GameConfig& cfg, const MdpState& s) {
  if (s.terminal) throw ContractViolation("no action is legal in the terminal state");
  if (s.shares < 0 || s.shares > cfg.n_shares || s.slot < 0 || s.slot > cfg.horizon ||
      (s.substep != 0 && s.substep != 1)) {
    throw ContractViolation("state outside the game");
  }
}

}  // namespace

const char* to_string(MdpAction::Kind kind) {
  switch (kind) {
    case MdpAction::Kind::Attack: return "attack";
    case MdpAction::Kind::Wait: return "wait";
    case MdpAction::Kind::TurnIn: return "turn_in";
    case MdpAction::Kind::Sell: return "sell";
  }
  return "?";
}

double binomial_pmf(int n, int i, double p) {
  if (i < 0 || i > n) return 0.0;
  // Exact at the endpoints so p in {0, 1} gives point masses.
  if (p == 0.0) return i == 0 ? 1.0 : 0.0;
  if (p == 1.0) return i == n ? 1.0 : 0.0;
  double coeff = 1.0;
  for (int j = 1; j <= i; ++j) coeff = coeff * static_cast<double>(n - i + j) / j;
  return coeff * std::pow(p, i) * std::pow(1.0 - p, n - i);
}

std::vector<Transition> transition_distribution(const GameConfig& cfg, const AttackerParams& params,
                                                const RewardSpec& spec, const MdpState& state,
                                                const MdpAction& action) {
  check_state(cfg, state);
  const int k = state.shares;
  const int t = state.slot;
  std::vector<Transition> out;
  if (state.substep == 0) {
    if (action.kind != MdpAction::Kind::Attack) {
      throw ContractViolation("only Attack is legal at sub-step 0");
    }
    if (action.targets < 0 || action.targets > cfg.n_shares - k) {
      throw ContractViolation("attack size outside 0..N-k");
    }
    const int effective = std::min(action.targets, cfg.n_shares - k);
    const double cost = -static_cast<double>(action.targets) * params.cost_per_tee;
    for (int i = 0; i <= effective; ++i) {
      const double p = binomial_pmf(effective, i, params.success_prob);
      if (p > 0.0) out.push_back({MdpState{k + i, t, 1, false}, p, cost});
    }
    return out;
  }
  switch (action.kind) {
    case MdpAction::Kind::Attack:
      throw ContractViolation("Attack is only legal at sub-step 0");
    case MdpAction::Kind::Wait:
      if (t < cfg.horizon) {
        out.push_back({MdpState{k, t + 1, 0, false}, 1.0, 0.0});
      } else {
        out.push_back({MdpState::terminal_state(), 1.0, 0.0});
      }
      return out;
    case MdpAction::Kind::TurnIn:
      if (k == 0) throw ContractViolation("TurnIn needs at least one share");
      out.push_back({MdpState::terminal_state(), 1.0, reward(spec, cfg, k, t)});
      return out;
    case MdpAction::Kind::Sell:
      out.push_back({MdpState::terminal_state(), 1.0, share_value(cfg, k)});
      return out;
  }
  return out;
}

Solution solve(const GameConfig& cfg, const AttackerParams& params, const RewardSpec& spec) {
  cfg.validate();
  params.validate();
  validate(spec);
  const int n = cfg.n_shares;
  const int horizon = cfg.horizon;
  Solution sol{Policy(n, horizon), ValueTable(n, horizon)};

  // pmf[a][i]: probability of i successes when attacking a TEEs.
  std::vector<std::vector<double>> pmf(static_cast<std::size_t>(n + 1));
  for (int a = 0; a <= n; ++a) {
    for (int i = 0; i <= a; ++i) pmf[a].push_back(binomial_pmf(a, i, params.success_prob));
  }

  for (int t = horizon; t >= 0; --t) {
    for (int k = 0; k <= n; ++k) {
      const double wait = t < horizon ? sol.values.at(k, t + 1, 0) : 0.0;
      const double sell = share_value(cfg, k);
      double best;
      MdpAction choice;
      if (k == 0) {
        best = std::max(wait, sell);
        choice = within_tie(wait, best) ? MdpAction::wait() : MdpAction::sell();
      } else {
        const double turn_in = reward(spec, cfg, k, t);
        best = std::max({turn_in, sell, wait});
        if (within_tie(turn_in, best)) {
          choice = MdpAction::turn_in();
        } else if (within_tie(sell, best)) {
          choice = MdpAction::sell();
        } else {
          choice = MdpAction::wait();
        }
      }
      sol.policy.at(k, t, 1) = choice;
      sol.values.at(k, t, 1) = best;
    }
    for (int k = 0; k <= n; ++k) {
      std::vector<double> q;
      for (int a = 0; a <= n - k; ++a) {
        double e = -static_cast<double>(a) * params.cost_per_tee;
        for (int i = 0; i <= a; ++i) e += pmf[a][i] * sol.values.at(k + i, t, 1);
        q.push_back(e);
      }
      const double best = *std::max_element(q.begin(), q.end());
      int chosen = 0;
      while (!within_tie(q[static_cast<std::size_t>(chosen)], best)) ++chosen;
      sol.policy.at(k, t, 0) = MdpAction::attack(chosen);
      sol.values.at(k, t, 0) = best;
    }
  }
  return sol;
}

double brute_force_value(const GameConfig& cfg, const AttackerParams& params,
                         const RewardSpec& spec, std::size_t max_nodes) {
  cfg.validate();
  params.validate();
  validate(spec);
  std::size_t nodes = 0;
  // Plain recursion over histories: every decision node tries every legal
  // action, every chance node expands every outcome.
  std::function<double(const MdpState&)> best = [&](const MdpState& s) -> double {
    if (s.terminal) return 0.0;
    if (++nodes > max_nodes) throw InstanceTooLarge("outcome tree exceeds the node budget");
    std::vector<MdpAction> actions;
    if (s.substep == 0) {
      for (int a = 0; a <= cfg.n_shares - s.shares; ++a) actions.push_back(MdpAction::attack(a));
    } else {
      actions = {MdpAction::wait(), MdpAction::sell()};
      if (s.shares > 0) actions.push_back(MdpAction::turn_in());
    }
    double top = -INFINITY;
    for (const auto& a : actions) {
      double e = 0.0;
      for (const auto& tr : transition_distribution(cfg, params, spec, s, a)) {
        e += tr.probability * (tr.reward + best(tr.next));
      }
      top = std::max(top, e);
    }
    return top;
  };
  return best(MdpState{0, 0, 0, false});
}

void write_policy_csv(std::ostream& out, const Solution& solution) {
  const auto& idx = solution.policy.index();
  out << "k,t,d,action,n,value\n";
  for (int t = 0; t <= idx.horizon(); ++t) {
    for (int k = 0; k <= idx.n_shares(); ++k) {
      for (int d = 0; d <= 1; ++d) {
        const auto& a = solution.policy.at(k, t, d);
        out << k << ',' << t << ',' << d << ',' << to_string(a.kind) << ',' << a.targets << ','
            << format_double(solution.values.at(k, t, d)) << '\n';
      }
    }
  }
}

void write_values_csv(std::ostream& out, const ValueTable& values) {
  const auto& idx = values.index();
  out << "k,t,d,value\n";
  for (int t = 0; t <= idx.horizon(); ++t) {
    for (int k = 0; k <= idx.n_shares(); ++k) {
      for (int d = 0; d <= 1; ++d) {
        out << k << ',' << t << ',' << d << ',' << format_double(values.at(k, t, d)) << '\n';
      }
    }
  }
}

}  // namespace bountylab
