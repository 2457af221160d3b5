#include "bountylab/game.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bountylab/errors.hpp"

namespace bountylab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double time_fraction(const GameConfig& cfg, int t) {
  return static_cast<double>(t) / static_cast<double>(cfg.horizon);
}

double base_reward(const rewards::Base& spec, const GameConfig& cfg, int k, int t) {
  return std::visit(
      Overloaded{
          [](const rewards::Zero&) { return 0.0; },
          [](const rewards::Constant& c) { return c.amount; },
          [&](const rewards::Linear& l) {
            return share_value(cfg, k) + (1.0 - time_fraction(cfg, t)) * l.time_bonus + l.bonus;
          },
          [&](const rewards::DeterministicStart& d) {
            return d.level + d.bonus + (1.0 - time_fraction(cfg, t)) * d.time_bonus;
          },
          [&](const rewards::Proposed& p) {
            const double full = share_value(cfg, cfg.n_shares);
            const double partial = share_value(cfg, k);
            const double start = std::pow(full, p.epsilon) * std::pow(partial, 1.0 - p.epsilon) + p.eta;
            const double extra = start - partial;  // g(k)
            // Same as start - g(k) t/T, but exactly V(k) at t = T.
            return partial + extra * (1.0 - time_fraction(cfg, t));
          },
      },
      spec);
}

void validate_base(const rewards::Base& spec) {
  std::visit(Overloaded{
                 [](const rewards::Zero&) {},
                 [](const rewards::Constant& c) {
                   if (!(c.amount >= 0.0)) throw ConfigError("constant reward must be >= 0");
                 },
                 [](const rewards::Linear& l) {
                   if (!(l.bonus >= 0.0 && l.time_bonus >= 0.0)) {
                     throw ConfigError("linear reward bonuses must be >= 0");
                   }
                 },
                 [](const rewards::DeterministicStart& d) {
                   if (!(d.bonus >= 0.0 && d.time_bonus >= 0.0)) {
                     throw ConfigError("deterministic-start bonuses must be >= 0");
                   }
                 },
                 [](const rewards::Proposed& p) {
                   if (!(p.epsilon >= 0.0 && p.epsilon <= 1.0)) {
                     throw ConfigError("proposed reward epsilon must lie in [0, 1]");
                   }
                   if (!(p.eta > 0.0)) throw ConfigError("proposed reward eta must be > 0");
                 },
             },
             spec);
}

std::string base_label(const rewards::Base& spec) {
  return std::visit(Overloaded{
                        [](const rewards::Zero&) { return std::string("zero"); },
                        [](const rewards::Constant&) { return std::string("constant"); },
                        [](const rewards::Linear&) { return std::string("linear"); },
                        [](const rewards::DeterministicStart&) { return std::string("det-start"); },
                        [](const rewards::Proposed&) { return std::string("proposed"); },
                    },
                    spec);
}

}  // namespace

void GameConfig::validate() const {
  if (threshold < 1 || threshold > n_shares) throw ConfigError("need 1 <= m <= N");
  if (horizon < 1) throw ConfigError("need T >= 1");
  if (!(key_value > 0.0)) throw ConfigError("need v > 0");
}

void AttackerParams::validate() const {
  if (!(cost_per_tee >= 0.0)) throw ConfigError("need c_a >= 0");
  if (!(success_prob >= 0.0 && success_prob <= 1.0)) throw ConfigError("need p_s in [0, 1]");
}

DeterministicCost::DeterministicCost(std::vector<Money> table) : table_(std::move(table)) {
  if (table_.empty() || table_.front() != Money{}) throw ConfigError("cost table needs C(0) = 0");
  if (!std::is_sorted(table_.begin(), table_.end())) {
    throw ConfigError("cost table must be non-decreasing");
  }
}

DeterministicCost DeterministicCost::linear(int n_shares, Money per_share) {
  std::vector<Money> table;
  for (int k = 0; k <= n_shares; ++k) table.push_back(per_share * k);
  return DeterministicCost(std::move(table));
}

DeterministicCost DeterministicCost::quadratic(int n_shares, double coeff) {
  std::vector<Money> table;
  for (int k = 0; k <= n_shares; ++k) table.push_back(Money::from_double(coeff * k * k));
  return DeterministicCost(std::move(table));
}

Money DeterministicCost::operator()(int k) const {
  if (k < 0 || k > max_shares()) throw DomainError("cost queried outside 0..N");
  return table_[static_cast<std::size_t>(k)];
}

void validate(const RewardSpec& spec) {
  std::visit(Overloaded{
                 [](const rewards::Capped& c) {
                   if (!(c.alpha_cap > 0.0 && c.alpha_cap <= 1.0)) {
                     throw ConfigError("alpha_cap must lie in (0, 1]");
                   }
                   validate_base(c.inner);
                 },
                 [](const auto& base) { validate_base(rewards::Base{base}); },
             },
             spec);
}

std::string label(const RewardSpec& spec) {
  return std::visit(Overloaded{
                        [](const rewards::Capped& c) { return "capped-" + base_label(c.inner); },
                        [](const auto& base) { return base_label(rewards::Base{base}); },
                    },
                    spec);
}

double share_value(const GameConfig& cfg, int k) {
  if (k < 0 || k > cfg.n_shares) throw DomainError("share count outside 0..N");
  const double v = cfg.key_value;
  if (k >= cfg.threshold) return v;
  if (cfg.zero_partial_value) return 0.0;
  const double proportional = v * static_cast<double>(k) / static_cast<double>(cfg.threshold);
  if (cfg.value_variant == ValueVariant::CeilCapped) return std::min(std::ceil(proportional), v);
  return proportional;
}

double reward(const RewardSpec& spec, const GameConfig& cfg, int k, int t) {
  if (k < 0 || k > cfg.n_shares) throw DomainError("share count outside 0..N");
  if (t < 0 || t > cfg.horizon) throw DomainError("slot outside 0..T");
  if (k == 0) return 0.0;
  return std::visit(Overloaded{
                        [&](const rewards::Capped& c) {
                          const double cap = c.alpha_cap * share_value(cfg, cfg.n_shares);
                          return std::min(base_reward(c.inner, cfg, k, t), cap);
                        },
                        [&](const auto& base) { return base_reward(rewards::Base{base}, cfg, k, t); },
                    },
                    spec);
}

double max_reward(const RewardSpec& spec, const GameConfig& cfg) {
  double best = 0.0;
  for (int k = 1; k <= cfg.n_shares; ++k) {
    for (int t = 0; t <= cfg.horizon; ++t) best = std::max(best, reward(spec, cfg, k, t));
  }
  return best;
}

DetResponse det_best_response(const GameConfig& cfg, const DeterministicCost& cost,
                              const RewardSpec& spec) {
  if (cost.max_shares() < cfg.n_shares) throw DomainError("cost table shorter than N");
  DetResponse best;
  for (int k = 0; k <= cfg.n_shares; ++k) {
    const Money c = cost(k);
    // TurnIn first so it wins ties against Sell; strict > keeps the smaller k.
    const Money turn_in = Money::from_double(reward(spec, cfg, k, 0)) - c;
    const Money sell = Money::from_double(share_value(cfg, k)) - c;
    if (turn_in > best.profit) best = {k, DetAction::TurnIn, turn_in};
    if (sell > best.profit) best = {k, DetAction::Sell, sell};
  }
  return best;
}

DetConstantReward det_optimal_constant_reward(const GameConfig& cfg,
                                              const DeterministicCost& cost,
                                              double bonus, double time_bonus) {
  if (!(bonus > 0.0)) throw ConfigError("eta_0 must be > 0");
  if (!(time_bonus >= 0.0)) throw ConfigError("delta_0 must be >= 0");
  if (cost.max_shares() < cfg.n_shares) throw DomainError("cost table shorter than N");
  Money best_profit = Money::from_double(share_value(cfg, 1)) - cost(1);
  for (int k = 2; k <= cfg.n_shares; ++k) {
    best_profit = std::max(best_profit, Money::from_double(share_value(cfg, k)) - cost(k));
  }
  const Money level = best_profit + cost(1);
  DetConstantReward out;
  out.spec = rewards::DeterministicStart{level.to_double(), bonus, time_bonus};
  out.level = level + Money::from_double(bonus) + Money::from_double(time_bonus);
  out.bounty_needed = best_profit >= Money{};
  return out;
}

}  // namespace bountylab
