#include "bountylab/config.hpp"

#include <fstream>
#include <set>

#include "bountylab/errors.hpp"

namespace bountylab {

namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    // "p/q" fractions, e.g. "1/3".
    const auto s = v.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' is not a number: " + s);
    }
  }
  throw ConfigError("'" + key + "' must be a number");
}

int integer(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return j.at(key).get<int>();
}

std::vector<double> number_list(const json& j, const std::string& key) {
  if (!j.at(key).is_array()) throw ConfigError("'" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError("'" + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

rewards::Base base_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError("reward needs a string 'type'");
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "zero") {
    reject_unknown(j, {"type"}, "reward");
    return rewards::Zero{};
  }
  if (type == "constant") {
    reject_unknown(j, {"type", "amount"}, "reward");
    return rewards::Constant{number(j, "amount", 0.0)};
  }
  if (type == "linear") {
    reject_unknown(j, {"type", "bonus", "time_bonus"}, "reward");
    return rewards::Linear{number(j, "bonus", 0.0), number(j, "time_bonus", 0.0)};
  }
  if (type == "det-start") {
    reject_unknown(j, {"type", "level", "bonus", "time_bonus"}, "reward");
    return rewards::DeterministicStart{number(j, "level", 0.0), number(j, "bonus", 0.0),
                                      number(j, "time_bonus", 0.0)};
  }
  if (type == "proposed") {
    reject_unknown(j, {"type", "epsilon", "eta"}, "reward");
    return rewards::Proposed{number(j, "epsilon", 0.95), number(j, "eta", 0.06)};
  }
  if (type == "capped") throw ConfigError("capped rewards cannot nest");
  throw ConfigError("unknown reward type: " + type);
}

nlohmann::ordered_json base_to_json(const rewards::Base& spec) {
  return std::visit(
      Overloaded{
          [](const rewards::Zero&) { return nlohmann::ordered_json{{"type", "zero"}}; },
          [](const rewards::Constant& c) {
            return nlohmann::ordered_json{{"type", "constant"}, {"amount", c.amount}};
          },
          [](const rewards::Linear& l) {
            return nlohmann::ordered_json{{"type", "linear"}, {"bonus", l.bonus}, {"time_bonus", l.time_bonus}};
          },
          [](const rewards::DeterministicStart& d) {
            return nlohmann::ordered_json{
                {"type", "det-start"}, {"level", d.level}, {"bonus", d.bonus}, {"time_bonus", d.time_bonus}};
          },
          [](const rewards::Proposed& p) {
            return nlohmann::ordered_json{{"type", "proposed"}, {"epsilon", p.epsilon}, {"eta", p.eta}};
          },
      },
      spec);
}

}  // namespace

RewardSpec reward_from_json(const json& j) {
  if (j.is_object() && j.contains("type") && j.at("type") == "capped") {
    reject_unknown(j, {"type", "alpha_cap", "inner"}, "reward");
    if (!j.contains("inner")) throw ConfigError("capped reward needs 'inner'");
    return rewards::Capped{base_from_json(j.at("inner")), number(j, "alpha_cap", 0.8)};
  }
  return std::visit([](const auto& b) -> RewardSpec { return b; }, base_from_json(j));
}

nlohmann::ordered_json to_json(const RewardSpec& spec) {
  return std::visit(Overloaded{
                        [](const rewards::Capped& c) {
                          return nlohmann::ordered_json{
                              {"type", "capped"}, {"alpha_cap", c.alpha_cap}, {"inner", base_to_json(c.inner)}};
                        },
                        [](const auto& b) { return base_to_json(rewards::Base{b}); },
                    },
                    spec);
}

nlohmann::ordered_json to_json(const GameConfig& cfg) {
  return {{"n_shares", cfg.n_shares},
          {"threshold", cfg.threshold},
          {"horizon", cfg.horizon},
          {"key_value", cfg.key_value},
          {"value_variant", cfg.value_variant == ValueVariant::CeilCapped ? "ceil-capped" : "linear-capped"},
          {"zero_partial_value", cfg.zero_partial_value}};
}

nlohmann::ordered_json to_json(const AttackerParams& params) {
  return {{"cost_per_tee", params.cost_per_tee}, {"success_prob", params.success_prob}};
}

void RunConfig::validate() const {
  game.validate();
  attacker.validate();
  metrics.weights.validate();
  bountylab::validate(reward);
  if (!(optimizer.alpha_cap > 0.0 && optimizer.alpha_cap <= 1.0)) {
    throw ConfigError("optimizer.alpha_cap must lie in (0, 1]");
  }
  if (optimizer.eta == 0.0) throw ConfigError("optimizer.eta must be > 0");
  epsilon_grid(optimizer.grid_step);
  sweep.grid.normalized();
  if (sweep.epsilon && !(*sweep.epsilon >= 0.0 && *sweep.epsilon <= 1.0)) {
    throw ConfigError("sweep.epsilon must lie in [0, 1]");
  }
  if (trajectories < 1) throw ConfigError("monte_carlo.trajectories must be >= 1");
}

RunConfig run_config_from_json(const json& j) {
  reject_unknown(j, {"game", "attacker", "weights", "hold_time", "reward", "optimizer", "sweep",
                     "monte_carlo", "seed"},
                 "config");
  RunConfig cfg;
  try {
    if (j.contains("game")) {
      const auto& g = j.at("game");
      reject_unknown(g, {"n_shares", "threshold", "horizon", "key_value", "value_variant",
                         "zero_partial_value"},
                     "game");
      cfg.game.n_shares = integer(g, "n_shares", cfg.game.n_shares);
      cfg.game.threshold = integer(g, "threshold", cfg.game.threshold);
      cfg.game.horizon = integer(g, "horizon", cfg.game.horizon);
      cfg.game.key_value = number(g, "key_value", cfg.game.key_value);
      if (g.contains("value_variant")) {
        const auto v = g.at("value_variant").get<std::string>();
        if (v == "linear-capped") {
          cfg.game.value_variant = ValueVariant::LinearCapped;
        } else if (v == "ceil-capped") {
          cfg.game.value_variant = ValueVariant::CeilCapped;
        } else {
          throw ConfigError("unknown value_variant: " + v);
        }
      }
      if (g.contains("zero_partial_value")) cfg.game.zero_partial_value = g.at("zero_partial_value").get<bool>();
    }
    if (j.contains("attacker")) {
      const auto& a = j.at("attacker");
      reject_unknown(a, {"cost_per_tee", "success_prob"}, "attacker");
      cfg.attacker.cost_per_tee = number(a, "cost_per_tee", cfg.attacker.cost_per_tee);
      cfg.attacker.success_prob = number(a, "success_prob", cfg.attacker.success_prob);
    }
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      reject_unknown(w, {"alpha1", "alpha2"}, "weights");
      cfg.metrics.weights.alpha1 = number(w, "alpha1", cfg.metrics.weights.alpha1);
      cfg.metrics.weights.alpha2 = number(w, "alpha2", cfg.metrics.weights.alpha2);
    }
    if (j.contains("hold_time")) {
      const auto h = j.at("hold_time").get<std::string>();
      if (h == "conditional") {
        cfg.metrics.hold_time = HoldTimeMode::Conditional;
      } else if (h == "unconditional") {
        cfg.metrics.hold_time = HoldTimeMode::Unconditional;
      } else {
        throw ConfigError("unknown hold_time mode: " + h);
      }
    }
    if (j.contains("reward")) cfg.reward = reward_from_json(j.at("reward"));
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      reject_unknown(o, {"alpha_cap", "eta", "grid_step"}, "optimizer");
      cfg.optimizer.alpha_cap = number(o, "alpha_cap", cfg.optimizer.alpha_cap);
      cfg.optimizer.eta = number(o, "eta", cfg.optimizer.eta);
      cfg.optimizer.grid_step = number(o, "grid_step", cfg.optimizer.grid_step);
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      reject_unknown(s, {"ca_values", "ps_values", "specs", "epsilon", "linear_bonus", "linear_time_bonus"},
                     "sweep");
      if (s.contains("ca_values")) cfg.sweep.grid.ca_values = number_list(s, "ca_values");
      if (s.contains("ps_values")) cfg.sweep.grid.ps_values = number_list(s, "ps_values");
      if (s.contains("specs")) cfg.sweep.grid.specs = s.at("specs").get<std::vector<std::string>>();
      if (s.contains("epsilon")) cfg.sweep.epsilon = number(s, "epsilon", 0.0);
      cfg.sweep.linear_bonus = number(s, "linear_bonus", cfg.sweep.linear_bonus);
      cfg.sweep.linear_time_bonus = number(s, "linear_time_bonus", cfg.sweep.linear_time_bonus);
    }
    if (j.contains("monte_carlo")) {
      const auto& m = j.at("monte_carlo");
      reject_unknown(m, {"trajectories"}, "monte_carlo");
      if (m.contains("trajectories")) cfg.trajectories = m.at("trajectories").get<std::uint64_t>();
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return run_config_from_json(j);
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["game"] = to_json(cfg.game);
  j["attacker"] = to_json(cfg.attacker);
  j["weights"] = {{"alpha1", cfg.metrics.weights.alpha1}, {"alpha2", cfg.metrics.weights.alpha2}};
  j["hold_time"] = cfg.metrics.hold_time == HoldTimeMode::Conditional ? "conditional" : "unconditional";
  j["reward"] = to_json(cfg.reward);
  j["optimizer"] = {{"alpha_cap", cfg.optimizer.alpha_cap}, {"eta", cfg.eta()}, {"grid_step", cfg.optimizer.grid_step}};
  nlohmann::ordered_json s;
  s["ca_values"] = cfg.sweep.grid.ca_values;
  s["ps_values"] = cfg.sweep.grid.ps_values;
  s["specs"] = cfg.sweep.grid.specs;
  if (cfg.sweep.epsilon) s["epsilon"] = *cfg.sweep.epsilon;
  j["sweep"] = s;
  j["monte_carlo"] = {{"trajectories", cfg.trajectories}};
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace bountylab
