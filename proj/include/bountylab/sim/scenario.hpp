#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "bountylab/sim/world.hpp"

namespace bountylab::sim {

// Scenario scripts drive a World through timed actions.
//
//   {
//     "name": "happy-path",
//     "seed": 7,
//     "params": { "game": {...}, "reward": {...}, "hold_slots": 30,
//                 "insurance_deadline": 3, "availability_deadline": 3,
//                 "compensation_bps": 100, "auto_rotate": false },
//     "steps": [ { "slot": 0, "actor": "provider", "op": "mint", "args": {...} }, ... ]
//   }
//
// A bare array is read as the "steps" list with default params. Steps must
// have non-decreasing slots. Amounts are decimal strings or numbers. In
// leak, share indices [i..] name the cluster's shares; in commit and
// pok_check, [j..] index the actor's inventory in the order leaked.
//
// Ops and their args:
//   add_provider  {name}
//   mint          {account, amount}
//   fund          {contract: insurance|availability|bounty, amount}
//   register      {user, providers: [..], token: valid|wrong_nonce|bad_signature}
//   sign          {user, to, amount, as, token: valid|forged|wrong_nonce|none}
//   transfer      {tx, tamper: bool}
//   insider_sign  {user, to, amount, as}      actor spends its leaked shares
//   leak          {user, shares: [i..]}       shares go to the actor's inventory
//   dispute       {tx, behavior: reply|silent}
//   availability  {user, payload, behavior: reply|silent|mismatch}
//   commit        {user, shares: [j..], as, flip_byte: bool, publish: bool}
//   reveal        {commit}
//   pok_check     {user, shares: [j..], k, flip_byte: bool}   result "1" or "0"
//   rotate        {mode: normal|corrupt}
//   repair        {}
//   recover       {}
//   replace_key   {user, signer: attestation|user}
//   split         {deposit, cap}
//   tick          {}
//   assert        {check, ...}:
//       red_flag {equals}; result {equals}; balance {account, equals};
//       burned {equals}; held {equals}; deposit {contract, equals};
//       event {type, count | min}; compensated {tx, equals}
//
// After every step the runner checks money conservation and non-negative
// balances; at the end it scans the event log for raw share bytes.

struct ScenarioResult {
  std::string name;
  bool passed = true;
  std::vector<std::string> failures;
  std::vector<std::string> event_log;
  nlohmann::ordered_json final_state;
  std::size_t steps = 0;
};

/// Throws ConfigError for schema problems; assertion and invariant failures
/// are reported in the result.
ScenarioResult run_scenario(const nlohmann::json& script);
ScenarioResult run_scenario_file(const std::string& path);

}  // namespace bountylab::sim
