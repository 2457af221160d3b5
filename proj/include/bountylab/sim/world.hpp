#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "bountylab/game.hpp"
#include "bountylab/money.hpp"
#include "bountylab/sim/crypto.hpp"

namespace bountylab::sim {

enum class ProviderBehavior { Reply, Silent, Mismatch };

struct SimParams {
  GameConfig game{3, 3, 30, 6.0, ValueVariant::LinearCapped, false};
  RewardSpec reward = rewards::Capped{rewards::Proposed{0.95, 0.06}, 0.8};
  int hold_slots = -1;             // < 0: one horizon T
  int insurance_deadline = 3;      // slots the provider has to answer a dispute
  int availability_deadline = 3;
  int compensation_bps = 100;      // v_c in basis points of the tx value
  bool auto_rotate = false;        // rotate every T slots while the flag is off
  std::uint64_t seed = 1;

  int hold() const { return hold_slots < 0 ? game.horizon : hold_slots; }
  void validate() const;
};

struct Tx {
  std::string from;  // wallet address
  std::string to;    // wallet address or plain account
  Money amount;
  std::uint64_t nonce = 0;

  Bytes encode() const;
  Digest id() const { return sha256(encode()); }
};

struct SignedTx {
  Tx tx;
  Signature signature;
};

/// OAuth identity token whose nonce binds one request digest.
struct IdToken {
  std::string provider;
  std::string subject;
  Digest nonce{};
  Signature signature;

  Bytes signed_bytes() const;
};

/// A message signed by the cluster's attestation key.
struct Attested {
  std::string kind;
  Bytes payload;
  Signature signature;

  Bytes signed_bytes() const;
};

struct Receipt {
  std::string user;
  std::string address;
  PublicKey verification_key;
  std::vector<std::string> oauth_ids;
  Attested attestation;
};

struct SignResult {
  std::string status;  // "signed" or the refusal reason
  std::optional<SignedTx> signed_tx;
  std::optional<Attested> notice;  // attestation-signed refusal
};

/// Moves a wallet's balance to a fresh key. Accepted only under the
/// attestation key.
struct KeyReplacement {
  std::string old_address;
  std::string new_address;
  PublicKey new_key;

  Bytes encode() const;
};

/// Mock public-key envelope addressed to the cluster. Callers can seal one
/// and pass it around; only TeeCluster reads the contents.
class Envelope {
 public:
  static Envelope seal(std::vector<IdToken> tokens, Tx tx, std::string address);
  const Digest& fingerprint() const { return fingerprint_; }

 private:
  friend class TeeCluster;
  std::vector<IdToken> tokens_;
  Tx tx_;
  std::string address_;
  Digest fingerprint_{};
};

/// Mock TEE cluster: attestation key, per-user signing keys split into N
/// shares, the record of authorized requests, and address-to-identity map.
class TeeCluster {
 public:
  struct UserKey {
    KeyPair signing;
    std::vector<Bytes> shares;
    bool invalidated = false;
    std::vector<std::string> oauth_ids;
    std::string address;
  };

  TeeCluster(KeyPair attestation, int n_shares, int threshold)
      : attestation_(std::move(attestation)), n_shares_(n_shares), threshold_(threshold) {}

  const PublicKey& attestation_key() const { return attestation_.public_key(); }
  Attested attest(std::string kind, Bytes payload) const;

  bool has_user(const std::string& user) const { return users_.count(user) > 0; }
  const UserKey& user(const std::string& user) const;
  UserKey& user(const std::string& user);
  void add_user(const std::string& name, UserKey key) { users_.emplace(name, std::move(key)); }
  const std::map<std::string, UserKey>& users() const { return users_; }

  std::vector<Digest> share_digests(const std::string& user) const;
  int threshold() const { return threshold_; }
  int n_shares() const { return n_shares_; }

  /// Distinct current shares of `user` among `presented`.
  int count_valid(const std::string& user, const std::vector<Bytes>& presented) const;

  void record_request(const Digest& tx_id, const Digest& token_digest) {
    tx_tokens_db_.emplace(tx_id, token_digest);
  }
  /// Opens the envelope and checks whether its transaction was authorized.
  bool was_authorized(const Envelope& claim) const;
  /// Opens the envelope and returns the claimant's address.
  const std::string& claim_address(const Envelope& claim) const { return claim.address_; }

 private:
  KeyPair attestation_;
  int n_shares_;
  int threshold_;
  std::map<std::string, UserKey> users_;
  std::map<Digest, Digest> tx_tokens_db_;
};

/// Hash-based proof of knowledge.
std::vector<Digest> pok_setup(const std::vector<Bytes>& shares);
/// 1 iff |proof| == k and every (distinct) element hashes into pp.
bool pok_verify(const std::vector<Digest>& pp, const std::vector<Bytes>& proof, int k);

using Salt = std::array<std::uint8_t, 16>;
/// sha256(len-prefixed proof bytes || salt || address)
Digest commit_digest(const std::vector<Bytes>& proof, const Salt& salt, const std::string& address);

/// Number of rate-limited wallets needed to hold `deposit` with at most `cap`
/// in each.
std::int64_t split_rate_limited(Money deposit, Money cap);

/// The whole protocol: ledger, the four contracts, cluster and OAuth
/// providers, under one seeded clock.
class World {
 public:
  explicit World(SimParams params);

  // Clock ------------------------------------------------------------------
  std::int64_t now() const { return now_; }
  /// Moves the clock forward one slot at a time, firing deadlines and
  /// releases as they come due.
  void advance_to(std::int64_t slot);

  // Ledger -----------------------------------------------------------------
  void mint(const std::string& account, Money amount);
  Money balance(const std::string& account) const;
  Money burned() const { return burned_; }
  Money held_total() const;
  Money insurance_deposit() const { return insurance_deposit_; }
  Money availability_deposit() const { return availability_deposit_; }
  Money bounty_deposit() const { return bounty_deposit_; }
  Money minted() const { return minted_; }
  /// Balances + deposits + burned + held.
  Money total_money() const;
  bool red_flag() const { return red_flag_; }
  std::uint64_t epoch() const { return epoch_; }
  /// Throws ContractViolation if conservation or non-negativity fails.
  void check_invariants() const;

  /// Provider moves its own funds into a contract deposit.
  std::string fund(const std::string& contract, Money amount);

  // Identity ---------------------------------------------------------------
  void add_provider(const std::string& name);
  const PublicKey& provider_key(const std::string& name) const;
  IdToken issue_token(const std::string& provider, const std::string& subject,
                      const Bytes& request) const;
  /// A token signed by a key the provider never published.
  IdToken forge_token(const std::string& provider, const std::string& subject,
                      const Bytes& request);

  static Bytes registration_request(const std::string& user, const std::vector<std::string>& oauth_ids);
  std::optional<Receipt> register_user(const std::string& user,
                                       const std::vector<std::string>& oauth_ids,
                                       const std::vector<IdToken>& tokens);
  bool has_user(const std::string& user) const { return tee_.has_user(user); }
  const std::string& wallet_of(const std::string& user) const;
  PublicKey wallet_key(const std::string& address) const;
  const PublicKey& attestation_key() const { return tee_.attestation_key(); }
  bool verify_attested(const Attested& msg) const;

  // Signing and transfers -------------------------------------------------
  Tx make_tx(const std::string& user, const std::string& to, Money amount);
  SignResult sign_transaction(const std::string& user, const Tx& tx,
                              const std::vector<IdToken>& tokens);
  /// Signs with shares extracted outside the cluster's interface; nothing is
  /// recorded in the request database. Fails with fewer than m valid shares.
  std::optional<SignedTx> insider_sign(const std::string& user, const Tx& tx,
                                       const std::vector<Bytes>& shares);
  std::string wallet_transfer(const SignedTx& stx);
  /// Builds a replacement to a fresh cluster-held key for `user`. The key
  /// takes over only once wallet_replace_key accepts it.
  KeyReplacement prepare_replacement(const std::string& user);
  /// Signs a replacement with the cluster's attestation key.
  Signature attest_replacement(const KeyReplacement& r) const;
  /// Signs a replacement with the user's current wallet key (not accepted).
  Signature user_sign_replacement(const std::string& user, const KeyReplacement& r) const;
  std::string wallet_replace_key(const KeyReplacement& r, const Signature& signature);

  // Side channel -----------------------------------------------------------
  Bytes leak_share(const std::string& user, int index) const;

  // Insurance and availability --------------------------------------------
  std::string insurance_claim(const Digest& tx_id, ProviderBehavior behavior);
  bool compensated(const Digest& tx_id) const { return compensated_.count(tx_id) > 0; }
  std::string availability_request(const std::string& user, const std::string& payload,
                                   ProviderBehavior behavior);

  // Bounty -----------------------------------------------------------------
  std::vector<Digest> published_digests(const std::string& user) const;
  Salt fresh_salt();
  std::string bounty_commit(const std::string& claimant, const Digest& commitment);
  std::string bounty_reveal(const std::string& claimant, const std::vector<Bytes>& proof,
                            const Salt& salt);

  // Rotation and recovery ---------------------------------------------------
  /// Fresh shares for every user; with corrupt_publication the ledger gets
  /// digests that do not match, which disables signing until repaired.
  void rotate_keys(bool corrupt_publication = false);
  void repair_publication();
  std::string recover();

  // Log --------------------------------------------------------------------
  const std::vector<std::string>& event_log() const { return log_; }
  std::size_t count_events(const std::string& type) const;
  /// Hex of every share ever generated; for leak audits of the log.
  std::vector<std::string> share_fingerprints_for_audit() const;
  nlohmann::ordered_json state_summary() const;
  const SimParams& params() const { return params_; }

 private:
  struct Wallet {
    PublicKey key;
    std::string owner;
  };
  struct PendingClaim {
    Digest tx_id;
    std::string user;
    std::int64_t deadline;
  };
  struct PendingRequest {
    Digest digest;
    std::int64_t deadline;
  };
  struct Held {
    std::string claimant;
    std::string user;  // owner of the revealed key
    Money amount;
    std::int64_t reveal_slot;
    std::int64_t release_slot;
  };
  struct Executed {
    Tx tx;
    std::int64_t slot;
  };

  void emit(const std::string& type, nlohmann::ordered_json fields = nlohmann::ordered_json::object());
  std::array<std::uint8_t, 32> random_seed();
  Bytes random_bytes(std::size_t n);
  std::vector<Bytes> fresh_shares();
  void publish(const std::string& user, const std::vector<Digest>& digests);
  bool publication_ok(const std::string& user) const;
  std::string resolve(const std::string& name) const;
  std::string new_wallet(const std::string& user, const PublicKey& key);
  Money& account(const std::string& name);
  void raise_red_flag(const std::string& reason);
  void compensate(const Digest& tx_id, const std::string& reason);
  void process_slot();
  Attested refusal(const std::string& status, const Tx& tx) const;

  SimParams params_;
  std::mt19937_64 rng_;
  std::int64_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t epoch_ = 0;
  std::int64_t epoch_start_ = 0;
  bool red_flag_ = false;

  std::map<std::string, Money> balances_;
  Money minted_;
  Money burned_;
  Money insurance_deposit_;
  Money availability_deposit_;
  Money bounty_deposit_;

  std::map<std::string, KeyPair> providers_;
  TeeCluster tee_;
  std::map<std::string, Wallet> wallets_;
  std::map<std::string, std::vector<Digest>> published_;  // on-ledger share digests
  std::map<std::string, KeyPair> pending_keys_;  // by new wallet address
  std::map<Digest, Executed> executed_;
  std::uint64_t next_nonce_ = 1;

  std::set<Digest> compensated_;
  std::map<std::string, std::vector<std::int64_t>> compensation_slots_;  // by key owner
  std::vector<PendingClaim> pending_claims_;
  std::vector<PendingRequest> pending_requests_;

  std::map<Digest, std::int64_t> commits_;
  std::vector<Held> held_;
  std::set<std::uint64_t> claimed_epochs_;

  std::vector<std::string> log_;
  std::vector<std::string> share_audit_;
};

}  // namespace bountylab::sim
