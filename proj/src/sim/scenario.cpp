#include "bountylab/sim/scenario.hpp"

#include <fstream>
#include <map>
#include <optional>

#include "bountylab/config.hpp"
#include "bountylab/errors.hpp"

namespace bountylab::sim {

namespace {

using nlohmann::json;

Money amount_arg(const json& args, const char* key) {
  if (!args.contains(key)) throw ConfigError(std::string("missing argument: ") + key);
  const auto& v = args.at(key);
  if (v.is_string()) return Money::parse(v.get<std::string>());
  if (v.is_number_integer()) return Money::from_units(v.get<std::int64_t>());
  if (v.is_number()) return Money::from_double(v.get<double>());
  throw ConfigError(std::string("amount must be a number or decimal string: ") + key);
}

std::string str_arg(const json& args, const char* key, std::optional<std::string> fallback = {}) {
  if (!args.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(std::string("missing argument: ") + key);
  }
  if (!args.at(key).is_string()) throw ConfigError(std::string("argument must be a string: ") + key);
  return args.at(key).get<std::string>();
}

bool bool_arg(const json& args, const char* key, bool fallback) {
  if (!args.contains(key)) return fallback;
  if (!args.at(key).is_boolean()) throw ConfigError(std::string("argument must be a boolean: ") + key);
  return args.at(key).get<bool>();
}

std::vector<int> index_list(const json& args, const char* key) {
  if (!args.contains(key) || !args.at(key).is_array()) {
    throw ConfigError(std::string("argument must be a list of share indices: ") + key);
  }
  std::vector<int> out;
  for (const auto& v : args.at(key)) {
    if (!v.is_number_integer()) throw ConfigError("share indices must be integers");
    out.push_back(v.get<int>());
  }
  return out;
}

ProviderBehavior behavior_arg(const json& args) {
  const std::string b = str_arg(args, "behavior", "reply");
  if (b == "reply") return ProviderBehavior::Reply;
  if (b == "silent") return ProviderBehavior::Silent;
  if (b == "mismatch") return ProviderBehavior::Mismatch;
  throw ConfigError("unknown provider behavior: " + b);
}

SimParams params_from_json(const json& script) {
  SimParams p;
  if (!script.is_object()) return p;
  if (script.contains("seed")) p.seed = script.at("seed").get<std::uint64_t>();
  if (!script.contains("params")) return p;
  const auto& j = script.at("params");
  if (!j.is_object()) throw ConfigError("params must be an object");
  json base = json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& key = it.key();
    if (key == "game" || key == "reward") {
      base[key] = it.value();
    } else if (key == "hold_slots") {
      p.hold_slots = it.value().get<int>();
    } else if (key == "insurance_deadline") {
      p.insurance_deadline = it.value().get<int>();
    } else if (key == "availability_deadline") {
      p.availability_deadline = it.value().get<int>();
    } else if (key == "compensation_bps") {
      p.compensation_bps = it.value().get<int>();
    } else if (key == "auto_rotate") {
      p.auto_rotate = it.value().get<bool>();
    } else {
      throw ConfigError("unknown scenario param: " + key);
    }
  }
  const RunConfig rc = run_config_from_json(base);
  p.game = rc.game;
  p.reward = rc.reward;
  return p;
}

// Steps are dispatched on a small interpreter that owns the World plus the
// actors' private state (leaked shares, pending commits, signed txs).
class Runner {
 public:
  explicit Runner(SimParams params) : world_(std::move(params)) {}

  void step(std::size_t index, const json& s) {
    if (!s.is_object()) throw ConfigError("step must be an object");
    for (auto it = s.begin(); it != s.end(); ++it) {
      if (it.key() != "slot" && it.key() != "actor" && it.key() != "op" && it.key() != "args") {
        throw ConfigError("unknown step field: " + it.key());
      }
    }
    if (!s.contains("slot") || !s.at("slot").is_number_integer()) throw ConfigError("step needs an integer slot");
    const auto slot = s.at("slot").get<std::int64_t>();
    if (slot < world_.now()) throw ConfigError("step slots must not decrease");
    const std::string op = str_arg(s, "op");
    const std::string actor = str_arg(s, "actor", "system");
    const json args = s.value("args", json::object());
    if (!args.is_object()) throw ConfigError("args must be an object");
    world_.advance_to(slot);
    current_ = "step " + std::to_string(index) + " (" + op + ")";

    if (op == "assert") {
      check(args);
    } else {
      last_result_ = dispatch(op, actor, args);
    }
    try {
      world_.check_invariants();
    } catch (const ContractViolation& e) {
      fail(std::string("invariant: ") + e.what());
    }
  }

  void finish(ScenarioResult& out) {
    for (const auto& share : world_.share_fingerprints_for_audit()) {
      for (const auto& line : world_.event_log()) {
        if (line.find(share) != std::string::npos) fail("raw share bytes appear in the event log");
      }
    }
    out.event_log = world_.event_log();
    out.final_state = world_.state_summary();
    out.failures = failures_;
    out.passed = failures_.empty();
  }

 private:
  std::string dispatch(const std::string& op, const std::string& actor, const json& args) {
    if (op == "add_provider") {
      world_.add_provider(str_arg(args, "name"));
      return "ok";
    }
    if (op == "mint") {
      world_.mint(str_arg(args, "account"), amount_arg(args, "amount"));
      return "ok";
    }
    if (op == "fund") return world_.fund(str_arg(args, "contract"), amount_arg(args, "amount"));
    if (op == "register") return do_register(args);
    if (op == "sign") return do_sign(args);
    if (op == "transfer") {
      auto stx = signed_tx(str_arg(args, "tx"));
      if (bool_arg(args, "tamper", false)) stx.tx.amount += Money::from_units(1);
      return world_.wallet_transfer(stx);
    }
    if (op == "insider_sign") {
      const std::string user = str_arg(args, "user");
      const Tx tx = world_.make_tx(user, str_arg(args, "to"), amount_arg(args, "amount"));
      auto stx = world_.insider_sign(user, tx, inventory_[actor][user]);
      if (!stx) return "Not enough shares";
      signed_[str_arg(args, "as")] = *stx;
      return "signed";
    }
    if (op == "leak") {
      const std::string user = str_arg(args, "user");
      for (int i : index_list(args, "shares")) inventory_[actor][user].push_back(world_.leak_share(user, i));
      return "ok";
    }
    if (op == "dispute") {
      return world_.insurance_claim(signed_tx(str_arg(args, "tx")).tx.id(), behavior_arg(args));
    }
    if (op == "availability") {
      return world_.availability_request(str_arg(args, "user"), str_arg(args, "payload", "ping"),
                                         behavior_arg(args));
    }
    if (op == "commit") {
      Commit c{actor, proof(actor, args), world_.fresh_salt()};
      const std::string label = str_arg(args, "as");
      commits_[label] = c;
      if (!bool_arg(args, "publish", true)) return "Not published";
      return world_.bounty_commit(actor, commit_digest(c.proof, c.salt, actor));
    }
    if (op == "reveal") {
      const auto it = commits_.find(str_arg(args, "commit"));
      if (it == commits_.end()) throw ConfigError("unknown commit label");
      return world_.bounty_reveal(it->second.claimant, it->second.proof, it->second.salt);
    }
    if (op == "pok_check") {
      const auto pp = world_.published_digests(str_arg(args, "user"));
      const auto p = proof(actor, args);
      const int k = args.contains("k") ? args.at("k").get<int>() : static_cast<int>(p.size());
      return pok_verify(pp, p, k) ? "1" : "0";
    }
    if (op == "rotate") {
      const std::string mode = str_arg(args, "mode", "normal");
      if (mode != "normal" && mode != "corrupt") throw ConfigError("unknown rotation mode: " + mode);
      world_.rotate_keys(mode == "corrupt");
      return "ok";
    }
    if (op == "repair") {
      world_.repair_publication();
      return "ok";
    }
    if (op == "recover") return world_.recover();
    if (op == "replace_key") {
      const std::string user = str_arg(args, "user");
      const std::string signer = str_arg(args, "signer", "attestation");
      if (signer != "attestation" && signer != "user") throw ConfigError("unknown signer: " + signer);
      const auto r = world_.prepare_replacement(user);
      const Signature sig = signer == "attestation" ? world_.attest_replacement(r)
                                                    : world_.user_sign_replacement(user, r);
      return world_.wallet_replace_key(r, sig);
    }
    if (op == "split") {
      return std::to_string(split_rate_limited(amount_arg(args, "deposit"), amount_arg(args, "cap")));
    }
    if (op == "tick") return last_result_;
    throw ConfigError("unknown op: " + op);
  }

  std::string do_register(const json& args) {
    const std::string user = str_arg(args, "user");
    const std::string token = str_arg(args, "token", "valid");
    if (!args.contains("providers") || !args.at("providers").is_array()) {
      throw ConfigError("register needs a providers list");
    }
    std::vector<std::string> ids;
    std::vector<IdToken> tokens;
    const Bytes request = World::registration_request(user, [&] {
      for (const auto& p : args.at("providers")) ids.push_back(p.get<std::string>() + ":" + user);
      return ids;
    }());
    for (const auto& p : args.at("providers")) {
      const std::string provider = p.get<std::string>();
      if (token == "valid") {
        tokens.push_back(world_.issue_token(provider, user, request));
      } else if (token == "wrong_nonce") {
        tokens.push_back(world_.issue_token(provider, user, World::registration_request(user + "-other", ids)));
      } else if (token == "bad_signature") {
        tokens.push_back(world_.forge_token(provider, user, request));
      } else {
        throw ConfigError("unknown token mode: " + token);
      }
    }
    const auto receipt = world_.register_user(user, ids, tokens);
    if (!receipt) return "Registration rejected";
    return world_.verify_attested(receipt->attestation) ? "Registered" : "Receipt does not verify";
  }

  std::string do_sign(const json& args) {
    const std::string user = str_arg(args, "user");
    const std::string mode = str_arg(args, "token", "valid");
    const Tx tx = world_.make_tx(user, str_arg(args, "to"), amount_arg(args, "amount"));
    std::vector<IdToken> tokens;
    const std::string provider = str_arg(args, "provider", "google");
    if (mode == "valid") {
      tokens.push_back(world_.issue_token(provider, user, tx.encode()));
    } else if (mode == "forged") {
      tokens.push_back(world_.forge_token(provider, user, tx.encode()));
    } else if (mode == "wrong_nonce") {
      Tx other = tx;
      other.nonce += 1000000;
      tokens.push_back(world_.issue_token(provider, user, other.encode()));
    } else if (mode != "none") {
      throw ConfigError("unknown token mode: " + mode);
    }
    const auto result = world_.sign_transaction(user, tx, tokens);
    if (result.signed_tx) {
      if (!verify(world_.wallet_key(tx.from), tx.encode(), result.signed_tx->signature)) {
        fail("signature does not verify under the user's key");
      }
      signed_[str_arg(args, "as")] = *result.signed_tx;
    } else if (!result.notice || !world_.verify_attested(*result.notice)) {
      fail("refusal notice is not attestation-signed");
    }
    return result.status;
  }

  std::vector<Bytes> proof(const std::string& actor, const json& args) {
    const std::string user = str_arg(args, "user");
    auto& held = inventory_[actor][user];
    std::vector<Bytes> out;
    for (int i : index_list(args, "shares")) {
      if (i < 0 || i >= static_cast<int>(held.size())) throw ConfigError("actor does not hold that share");
      out.push_back(held[static_cast<std::size_t>(i)]);
    }
    if (bool_arg(args, "flip_byte", false) && !out.empty()) out.front()[0] ^= 0x01;
    return out;
  }

  const SignedTx& signed_tx(const std::string& label) const {
    const auto it = signed_.find(label);
    if (it == signed_.end()) throw ConfigError("unknown transaction label: " + label);
    return it->second;
  }

  void check(const json& args) {
    const std::string what = str_arg(args, "check");
    auto money_eq = [&](Money actual, const char* label) {
      const Money expected = amount_arg(args, "equals");
      if (actual != expected) {
        fail(std::string(label) + " is " + actual.to_string() + ", expected " + expected.to_string());
      }
    };
    if (what == "red_flag") {
      const bool expected = bool_arg(args, "equals", true);
      if (world_.red_flag() != expected) fail(std::string("red flag is ") + (world_.red_flag() ? "on" : "off"));
    } else if (what == "result") {
      const std::string expected = str_arg(args, "equals");
      if (last_result_ != expected) fail("result is \"" + last_result_ + "\", expected \"" + expected + "\"");
    } else if (what == "balance") {
      money_eq(world_.balance(str_arg(args, "account")), "balance");
    } else if (what == "burned") {
      money_eq(world_.burned(), "burned");
    } else if (what == "held") {
      money_eq(world_.held_total(), "held");
    } else if (what == "deposit") {
      const std::string c = str_arg(args, "contract");
      const Money d = c == "insurance"      ? world_.insurance_deposit()
                      : c == "availability" ? world_.availability_deposit()
                      : c == "bounty"       ? world_.bounty_deposit()
                                            : throw ConfigError("unknown contract: " + c);
      money_eq(d, "deposit");
    } else if (what == "event") {
      const std::string type = str_arg(args, "type");
      const auto n = world_.count_events(type);
      if (args.contains("count") && n != args.at("count").get<std::size_t>()) {
        fail("event " + type + " seen " + std::to_string(n) + " times");
      }
      if (args.contains("min") && n < args.at("min").get<std::size_t>()) {
        fail("event " + type + " seen only " + std::to_string(n) + " times");
      }
    } else if (what == "compensated") {
      const bool expected = bool_arg(args, "equals", true);
      if (world_.compensated(signed_tx(str_arg(args, "tx")).tx.id()) != expected) {
        fail("compensation state differs");
      }
    } else {
      throw ConfigError("unknown assertion: " + what);
    }
  }

  void fail(const std::string& why) { failures_.push_back(current_ + ": " + why); }

  struct Commit {
    std::string claimant;
    std::vector<Bytes> proof;
    Salt salt;
  };

  World world_;
  std::string current_;
  std::string last_result_;
  std::vector<std::string> failures_;
  std::map<std::string, std::map<std::string, std::vector<Bytes>>> inventory_;  // actor -> user -> shares
  std::map<std::string, SignedTx> signed_;
  std::map<std::string, Commit> commits_;
};

}  // namespace

ScenarioResult run_scenario(const json& script) {
  ScenarioResult out;
  const json* steps = &script;
  if (script.is_object()) {
    for (auto it = script.begin(); it != script.end(); ++it) {
      if (it.key() != "name" && it.key() != "seed" && it.key() != "params" && it.key() != "steps" &&
          it.key() != "description") {
        throw ConfigError("unknown scenario field: " + it.key());
      }
    }
    out.name = script.value("name", std::string("scenario"));
    if (!script.contains("steps")) throw ConfigError("scenario needs a steps list");
    steps = &script.at("steps");
  }
  if (!steps->is_array()) throw ConfigError("steps must be an array");
  try {
    Runner runner(params_from_json(script));
    for (const auto& s : *steps) runner.step(out.steps++, s);
    runner.finish(out);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return out;
}

ScenarioResult run_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario: " + path);
  json script;
  try {
    in >> script;
  } catch (const json::exception& e) {
    throw ConfigError("scenario " + path + ": " + e.what());
  }
  auto result = run_scenario(script);
  if (result.name.empty()) result.name = path;
  return result;
}

}  // namespace bountylab::sim
