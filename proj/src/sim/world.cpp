#include "bountylab/sim/world.hpp"

#include <algorithm>

#include "bountylab/errors.hpp"

namespace bountylab::sim {

namespace {

using ojson = nlohmann::ordered_json;

std::array<std::uint8_t, 32> seed_from(std::mt19937_64& rng) {
  std::array<std::uint8_t, 32> seed{};
  for (std::size_t i = 0; i < seed.size(); i += 8) {
    const std::uint64_t x = rng();
    for (std::size_t j = 0; j < 8; ++j) seed[i + j] = static_cast<std::uint8_t>(x >> (8 * j));
  }
  return seed;
}

std::string short_hex(const Digest& d) { return to_hex(d.data(), 8); }

}  // namespace

void SimParams::validate() const {
  game.validate();
  bountylab::validate(reward);
  if (insurance_deadline < 1 || availability_deadline < 1) {
    throw ConfigError("deadlines must be at least one slot");
  }
  if (compensation_bps < 0) throw ConfigError("compensation must be >= 0");
}

Bytes Tx::encode() const {
  return Encoder().str("tx").str(from).str(to).i64(amount.micros()).u64(nonce).data();
}

Bytes IdToken::signed_bytes() const {
  return Encoder().str("id-token").str(provider).str(subject).digest(nonce).data();
}

Bytes Attested::signed_bytes() const { return Encoder().str("attested").str(kind).bytes(payload).data(); }

Bytes KeyReplacement::encode() const {
  return Encoder()
      .str("replace-key")
      .str(old_address)
      .str(new_address)
      .raw(new_key.bytes.data(), new_key.bytes.size())
      .data();
}

Envelope Envelope::seal(std::vector<IdToken> tokens, Tx tx, std::string address) {
  Envelope e;
  Encoder enc;
  enc.str("envelope").bytes(tx.encode()).str(address).u64(tokens.size());
  for (const auto& t : tokens) enc.bytes(t.signed_bytes());
  e.fingerprint_ = sha256(enc.data());
  e.tokens_ = std::move(tokens);
  e.tx_ = std::move(tx);
  e.address_ = std::move(address);
  return e;
}

// ---------------------------------------------------------------------------
// TeeCluster

Attested TeeCluster::attest(std::string kind, Bytes payload) const {
  Attested a{std::move(kind), std::move(payload), {}};
  a.signature = attestation_.sign(a.signed_bytes());
  return a;
}

const TeeCluster::UserKey& TeeCluster::user(const std::string& name) const {
  const auto it = users_.find(name);
  if (it == users_.end()) throw DomainError("unknown user: " + name);
  return it->second;
}

TeeCluster::UserKey& TeeCluster::user(const std::string& name) {
  const auto it = users_.find(name);
  if (it == users_.end()) throw DomainError("unknown user: " + name);
  return it->second;
}

std::vector<Digest> TeeCluster::share_digests(const std::string& name) const {
  return pok_setup(user(name).shares);
}

int TeeCluster::count_valid(const std::string& name, const std::vector<Bytes>& presented) const {
  const auto& key = user(name);
  if (key.invalidated) return 0;
  std::set<std::size_t> matched;
  for (const auto& p : presented) {
    for (std::size_t i = 0; i < key.shares.size(); ++i) {
      if (key.shares[i] == p) matched.insert(i);
    }
  }
  return static_cast<int>(matched.size());
}

bool TeeCluster::was_authorized(const Envelope& claim) const {
  return tx_tokens_db_.count(claim.tx_.id()) > 0;
}

// ---------------------------------------------------------------------------
// Free functions

std::vector<Digest> pok_setup(const std::vector<Bytes>& shares) {
  std::vector<Digest> pp;
  pp.reserve(shares.size());
  for (const auto& s : shares) pp.push_back(sha256(s));
  return pp;
}

bool pok_verify(const std::vector<Digest>& pp, const std::vector<Bytes>& proof, int k) {
  if (k < 0 || proof.size() != static_cast<std::size_t>(k)) return false;
  std::set<Digest> seen;
  for (const auto& share : proof) {
    const Digest d = sha256(share);
    if (std::find(pp.begin(), pp.end(), d) == pp.end()) return false;
    if (!seen.insert(d).second) return false;
  }
  return true;
}

Digest commit_digest(const std::vector<Bytes>& proof, const Salt& salt, const std::string& address) {
  Encoder e;
  e.u64(proof.size());
  for (const auto& p : proof) e.bytes(p);
  e.raw(salt.data(), salt.size());
  e.str(address);
  return sha256(e.data());
}

std::int64_t split_rate_limited(Money deposit, Money cap) {
  if (cap <= Money{}) throw DomainError("rate limit must be positive");
  if (deposit < Money{}) throw DomainError("deposit must be >= 0");
  return (deposit.micros() + cap.micros() - 1) / cap.micros();
}

// ---------------------------------------------------------------------------
// World

World::World(SimParams params)
    : params_((params.validate(), std::move(params))),
      rng_(params_.seed),
      tee_(KeyPair::from_seed(seed_from(rng_)), params_.game.n_shares, params_.game.threshold) {
  emit("world_created", ojson{{"seed", params_.seed},
                              {"n_shares", params_.game.n_shares},
                              {"threshold", params_.game.threshold},
                              {"horizon", params_.game.horizon},
                              {"attestation_key", to_hex(tee_.attestation_key().bytes.data(), 32)}});
}

void World::emit(const std::string& type, ojson fields) {
  ojson e;
  e["slot"] = now_;
  e["seq"] = seq_++;
  e["type"] = type;
  for (auto& [k, v] : fields.items()) e[k] = v;
  log_.push_back(e.dump());
}

std::array<std::uint8_t, 32> World::random_seed() { return seed_from(rng_); }

Bytes World::random_bytes(std::size_t n) {
  Bytes b(n);
  for (std::size_t i = 0; i < n; i += 8) {
    const std::uint64_t x = rng_();
    for (std::size_t j = 0; j < 8 && i + j < n; ++j) b[i + j] = static_cast<std::uint8_t>(x >> (8 * j));
  }
  return b;
}

std::vector<Bytes> World::fresh_shares() {
  std::vector<Bytes> shares;
  for (int i = 0; i < params_.game.n_shares; ++i) {
    shares.push_back(random_bytes(32));
    share_audit_.push_back(to_hex(shares.back()));
  }
  return shares;
}

void World::publish(const std::string& user, const std::vector<Digest>& digests) {
  published_[user] = digests;
  ojson list = ojson::array();
  for (const auto& d : digests) list.push_back(to_hex(d));
  emit("shares_published", ojson{{"user", user}, {"epoch", epoch_}, {"digests", list}});
}

bool World::publication_ok(const std::string& user) const {
  const auto it = published_.find(user);
  return it != published_.end() && it->second == tee_.share_digests(user);
}

std::string World::resolve(const std::string& name) const {
  return tee_.has_user(name) ? tee_.user(name).address : name;
}

Money& World::account(const std::string& name) { return balances_[name]; }

void World::advance_to(std::int64_t slot) {
  if (slot < now_) throw DomainError("the clock cannot go backwards");
  while (now_ < slot) {
    ++now_;
    process_slot();
  }
}

void World::process_slot() {
  // Insurance disputes the provider left unanswered.
  for (auto it = pending_claims_.begin(); it != pending_claims_.end();) {
    if (it->deadline > now_) {
      ++it;
      continue;
    }
    const PendingClaim claim = *it;
    it = pending_claims_.erase(it);
    emit("dispute_timeout", ojson{{"tx", to_hex(claim.tx_id)}});
    compensate(claim.tx_id, "provider silent");
    if (insurance_deposit_ > Money{}) {
      emit("deposit_burned", ojson{{"contract", "insurance"}, {"amount", insurance_deposit_.to_string()}});
      burned_ += insurance_deposit_;
      insurance_deposit_ = Money{};
    }
  }
  // Availability requests never answered with a matching signed reply.
  for (auto it = pending_requests_.begin(); it != pending_requests_.end();) {
    if (it->deadline > now_) {
      ++it;
      continue;
    }
    emit("availability_timeout", ojson{{"request", to_hex(it->digest)}});
    it = pending_requests_.erase(it);
    if (availability_deposit_ > Money{}) {
      emit("deposit_burned",
           ojson{{"contract", "availability"}, {"amount", availability_deposit_.to_string()}});
      burned_ += availability_deposit_;
      availability_deposit_ = Money{};
    }
  }
  // Bounty rewards whose hold period is over.
  for (auto it = held_.begin(); it != held_.end();) {
    if (it->release_slot > now_) {
      ++it;
      continue;
    }
    const auto& slots = compensation_slots_[it->user];
    const bool claimed = std::any_of(slots.begin(), slots.end(), [&](std::int64_t s) {
      return s >= it->reveal_slot && s <= it->release_slot;
    });
    if (claimed) {
      bounty_deposit_ += it->amount;
      emit("reward_forfeited", ojson{{"claimant", it->claimant},
                                     {"key_owner", it->user},
                                     {"amount", it->amount.to_string()}});
    } else {
      account(it->claimant) += it->amount;
      emit("reward_paid", ojson{{"claimant", it->claimant},
                                {"key_owner", it->user},
                                {"amount", it->amount.to_string()}});
    }
    it = held_.erase(it);
  }
  if (params_.auto_rotate && !red_flag_ && now_ - epoch_start_ >= params_.game.horizon) {
    rotate_keys(false);
  }
}

void World::mint(const std::string& account_name, Money amount) {
  if (amount < Money{}) throw DomainError("cannot mint a negative amount");
  account(resolve(account_name)) += amount;
  minted_ += amount;
  emit("mint", ojson{{"account", resolve(account_name)}, {"amount", amount.to_string()}});
}

Money World::balance(const std::string& name) const {
  const auto it = balances_.find(resolve(name));
  return it == balances_.end() ? Money{} : it->second;
}

Money World::held_total() const {
  Money total;
  for (const auto& h : held_) total += h.amount;
  return total;
}

Money World::total_money() const {
  Money total = burned_ + insurance_deposit_ + availability_deposit_ + bounty_deposit_ + held_total();
  for (const auto& [name, amount] : balances_) total += amount;
  return total;
}

void World::check_invariants() const {
  for (const auto& [name, amount] : balances_) {
    if (amount < Money{}) throw ContractViolation("negative balance: " + name);
  }
  if (insurance_deposit_ < Money{} || availability_deposit_ < Money{} || bounty_deposit_ < Money{}) {
    throw ContractViolation("negative deposit");
  }
  if (total_money() != minted_) throw ContractViolation("money is not conserved");
}

std::string World::fund(const std::string& contract, Money amount) {
  Money& provider = account("provider");
  if (amount <= Money{}) return "Invalid amount";
  if (provider < amount) return "Insufficient balance";
  if (contract == "bounty") {
    const Money needed = Money::from_double(max_reward(params_.reward, params_.game));
    if (bounty_deposit_ + amount < needed) return "Deposit below maximum reward";
  }
  Money* target = contract == "insurance"      ? &insurance_deposit_
                  : contract == "availability" ? &availability_deposit_
                  : contract == "bounty"       ? &bounty_deposit_
                                               : nullptr;
  if (target == nullptr) throw DomainError("unknown contract: " + contract);
  provider -= amount;
  *target += amount;
  emit("deposit_funded", ojson{{"contract", contract}, {"amount", amount.to_string()}});
  return "Deposit funded";
}

void World::add_provider(const std::string& name) {
  if (providers_.count(name)) throw DomainError("duplicate identity provider: " + name);
  auto kp = KeyPair::from_seed(random_seed());
  emit("oauth_provider", ojson{{"provider", name}, {"key", to_hex(kp.public_key().bytes.data(), 32)}});
  providers_.emplace(name, std::move(kp));
}

const PublicKey& World::provider_key(const std::string& name) const {
  const auto it = providers_.find(name);
  if (it == providers_.end()) throw DomainError("unknown identity provider: " + name);
  return it->second.public_key();
}

IdToken World::issue_token(const std::string& provider, const std::string& subject,
                           const Bytes& request) const {
  const auto it = providers_.find(provider);
  if (it == providers_.end()) throw DomainError("unknown identity provider: " + provider);
  IdToken t{provider, subject, sha256(request), {}};
  t.signature = it->second.sign(t.signed_bytes());
  return t;
}

IdToken World::forge_token(const std::string& provider, const std::string& subject,
                           const Bytes& request) {
  // Signed by a key the provider never published.
  const auto rogue = KeyPair::from_seed(random_seed());
  IdToken t{provider, subject, sha256(request), {}};
  t.signature = rogue.sign(t.signed_bytes());
  return t;
}

Bytes World::registration_request(const std::string& user, const std::vector<std::string>& oauth_ids) {
  Encoder e;
  e.str("register").str(user).u64(oauth_ids.size());
  for (const auto& id : oauth_ids) e.str(id);
  return e.data();
}

std::string World::new_wallet(const std::string& user, const PublicKey& key) {
  const std::string address = "0x" + to_hex(sha256(Bytes(key.bytes.begin(), key.bytes.end())).data(), 10);
  wallets_[address] = Wallet{key, user};
  account(address);
  return address;
}

std::optional<Receipt> World::register_user(const std::string& user,
                                            const std::vector<std::string>& oauth_ids,
                                            const std::vector<IdToken>& tokens) {
  auto reject = [&](const std::string& why) {
    emit("registration_rejected", ojson{{"user", user}, {"reason", why}});
    return std::nullopt;
  };
  if (red_flag_) return reject("Red Flag is on");
  if (tee_.has_user(user)) return reject("already registered");
  if (oauth_ids.empty() || tokens.size() != oauth_ids.size()) return reject("token count mismatch");
  const Digest request = sha256(registration_request(user, oauth_ids));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    const auto it = providers_.find(t.provider);
    if (it == providers_.end()) return reject("unknown identity provider");
    if (t.provider + ":" + t.subject != oauth_ids[i]) return reject("token subject mismatch");
    if (!verify(it->second.public_key(), t.signed_bytes(), t.signature)) return reject("bad token signature");
    if (t.nonce != request) return reject("token nonce does not match the request");
  }
  TeeCluster::UserKey key{KeyPair::from_seed(random_seed()), fresh_shares(), false, oauth_ids, ""};
  const PublicKey vk = key.signing.public_key();
  key.address = new_wallet(user, vk);
  const std::string address = key.address;
  tee_.add_user(user, std::move(key));

  Encoder payload;
  payload.str(user).str(address).raw(vk.bytes.data(), vk.bytes.size()).u64(oauth_ids.size());
  for (const auto& id : oauth_ids) payload.str(id);
  Receipt receipt{user, address, vk, oauth_ids, tee_.attest("registration", payload.data())};
  emit("user_registered", ojson{{"user", user},
                                {"address", address},
                                {"verification_key", to_hex(vk.bytes.data(), 32)},
                                {"oauth_ids", oauth_ids}});
  publish(user, tee_.share_digests(user));
  return receipt;
}

const std::string& World::wallet_of(const std::string& user) const { return tee_.user(user).address; }

PublicKey World::wallet_key(const std::string& address) const {
  const auto it = wallets_.find(address);
  if (it == wallets_.end()) throw DomainError("unknown wallet: " + address);
  return it->second.key;
}

bool World::verify_attested(const Attested& msg) const {
  return verify(tee_.attestation_key(), msg.signed_bytes(), msg.signature);
}

Tx World::make_tx(const std::string& user, const std::string& to, Money amount) {
  return Tx{wallet_of(user), resolve(to), amount, next_nonce_++};
}

Attested World::refusal(const std::string& status, const Tx& tx) const {
  return tee_.attest("refusal", Encoder().str(status).digest(tx.id()).u64(epoch_).data());
}

SignResult World::sign_transaction(const std::string& user, const Tx& tx,
                                   const std::vector<IdToken>& tokens) {
  auto refuse = [&](const std::string& status) {
    emit("sign_refused", ojson{{"user", user}, {"tx", to_hex(tx.id())}, {"reason", status}});
    return SignResult{status, std::nullopt, refusal(status, tx)};
  };
  if (!tee_.has_user(user)) throw DomainError("unknown user: " + user);
  const auto& key = tee_.user(user);
  if (key.invalidated) return refuse("epoch shares invalidated");
  if (red_flag_) return refuse("red flag is on");
  if (tee_.count_valid(user, key.shares) < tee_.threshold()) return refuse("not enough live shares");
  if (!publication_ok(user)) return refuse("share publication mismatch");
  if (tx.from != key.address) return refuse("invalid request");

  const Digest request = tx.id();
  bool ok = !tokens.empty();
  for (const auto& t : tokens) {
    const auto it = providers_.find(t.provider);
    const bool known = std::find(key.oauth_ids.begin(), key.oauth_ids.end(),
                                 t.provider + ":" + t.subject) != key.oauth_ids.end();
    if (it == providers_.end() || !known || t.nonce != request ||
        !verify(it->second.public_key(), t.signed_bytes(), t.signature)) {
      ok = false;
    }
  }
  if (!ok) return refuse("invalid request");

  Encoder token_record;
  for (const auto& t : tokens) token_record.bytes(t.signed_bytes());
  tee_.record_request(request, sha256(token_record.data()));
  SignedTx stx{tx, key.signing.sign(tx.encode())};
  emit("tx_signed", ojson{{"user", user}, {"tx", to_hex(request)}, {"amount", tx.amount.to_string()}});
  return SignResult{"signed", stx, std::nullopt};
}

std::optional<SignedTx> World::insider_sign(const std::string& user, const Tx& tx,
                                            const std::vector<Bytes>& shares) {
  if (tee_.count_valid(user, shares) < tee_.threshold()) return std::nullopt;
  // No event: the whole point is that this happens off the record.
  return SignedTx{tx, tee_.user(user).signing.sign(tx.encode())};
}

std::string World::wallet_transfer(const SignedTx& stx) {
  const auto& tx = stx.tx;
  auto done = [&](const std::string& result) {
    emit("transfer", ojson{{"tx", to_hex(tx.id())}, {"from", tx.from}, {"to", tx.to},
                           {"amount", tx.amount.to_string()}, {"result", result}});
    return result;
  };
  if (red_flag_) return done("Red Flag is on");
  const auto wallet = wallets_.find(tx.from);
  if (wallet == wallets_.end() || !verify(wallet->second.key, tx.encode(), stx.signature)) {
    return done("Invalid signature");
  }
  if (tx.amount < Money{} || account(tx.from) < tx.amount) return done("Insufficient balance");
  account(tx.from) -= tx.amount;
  account(tx.to) += tx.amount;
  executed_.emplace(tx.id(), Executed{tx, now_});
  return done("Transfer Success");
}

KeyReplacement World::prepare_replacement(const std::string& user) {
  const auto& key = tee_.user(user);
  auto fresh = KeyPair::from_seed(random_seed());
  const PublicKey vk = fresh.public_key();
  const std::string address = new_wallet(user, vk);
  pending_keys_.insert_or_assign(address, std::move(fresh));
  return KeyReplacement{key.address, address, vk};
}

Signature World::attest_replacement(const KeyReplacement& r) const {
  return tee_.attest("replace-key", r.encode()).signature;
}

Signature World::user_sign_replacement(const std::string& user, const KeyReplacement& r) const {
  return tee_.user(user).signing.sign(Attested{"replace-key", r.encode(), {}}.signed_bytes());
}

std::string World::wallet_replace_key(const KeyReplacement& r, const Signature& signature) {
  const Attested msg{"replace-key", r.encode(), signature};
  auto done = [&](const std::string& result, Money moved) {
    emit("key_replacement", ojson{{"old", r.old_address}, {"new", r.new_address},
                                  {"moved", moved.to_string()}, {"result", result}});
    return result;
  };
  if (!verify_attested(msg)) return done("Invalid signature", Money{});
  if (!wallets_.count(r.old_address) || !wallets_.count(r.new_address)) {
    return done("Invalid signature", Money{});
  }
  const Money moved = account(r.old_address);
  account(r.old_address) = Money{};
  account(r.new_address) += moved;
  // The cluster switches to the new key once the contract has accepted it.
  const auto pending = pending_keys_.find(r.new_address);
  if (pending != pending_keys_.end()) {
    auto& key = tee_.user(wallets_.at(r.new_address).owner);
    if (key.address == r.old_address) {
      key.signing = std::move(pending->second);
      key.address = r.new_address;
    }
    pending_keys_.erase(pending);
  }
  return done("Key Replacement Success", moved);
}

Bytes World::leak_share(const std::string& user, int index) const {
  const auto& shares = tee_.user(user).shares;
  if (index < 0 || index >= static_cast<int>(shares.size())) throw DomainError("share index out of range");
  return shares[static_cast<std::size_t>(index)];
}

void World::raise_red_flag(const std::string& reason) {
  if (!red_flag_) {
    red_flag_ = true;
    emit("red_flag", ojson{{"reason", reason}});
  }
}

void World::compensate(const Digest& tx_id, const std::string& reason) {
  const auto& tx = executed_.at(tx_id).tx;
  const std::string owner = wallets_.at(tx.from).owner;
  const Money bonus = Money::from_micros((tx.amount.micros() * params_.compensation_bps + 5000) / 10000);
  const Money due = tx.amount + bonus;
  const Money paid = std::min(due, insurance_deposit_);
  insurance_deposit_ -= paid;
  const std::string to = tee_.user(owner).address;
  account(to) += paid;
  compensated_.insert(tx_id);
  compensation_slots_[owner].push_back(now_);
  emit("compensation", ojson{{"tx", to_hex(tx_id)}, {"to", to}, {"value", tx.amount.to_string()},
                             {"bonus", bonus.to_string()}, {"paid", paid.to_string()},
                             {"reason", reason}});
  raise_red_flag("unauthorized transaction " + short_hex(tx_id));
}

std::string World::insurance_claim(const Digest& tx_id, ProviderBehavior behavior) {
  auto done = [&](const std::string& result) {
    emit("dispute", ojson{{"tx", to_hex(tx_id)}, {"result", result}});
    return result;
  };
  const auto it = executed_.find(tx_id);
  if (it == executed_.end()) return done("Unknown transaction");
  if (compensated_.count(tx_id)) return done("Already compensated");
  for (const auto& p : pending_claims_) {
    if (p.tx_id == tx_id) return done("Claim pending");
  }
  const auto& tx = it->second.tx;
  const std::string owner = wallets_.at(tx.from).owner;
  // During a bounty hold the affected key's owner may still claim, so the
  // forfeit rule can fire.
  const bool on_hold = std::any_of(held_.begin(), held_.end(), [&](const Held& h) { return h.user == owner; });
  if (red_flag_ && !on_hold) return done("Red Flag is on");

  const Envelope claim = Envelope::seal({}, tx, tee_.user(owner).address);
  emit("dispute_filed", ojson{{"envelope", to_hex(claim.fingerprint())}});
  if (behavior == ProviderBehavior::Silent) {
    pending_claims_.push_back({tx_id, owner, now_ + params_.insurance_deadline});
    return done("Claim pending");
  }
  if (tee_.was_authorized(claim)) return done("Incorrect dispute");
  compensate(tx_id, "no matching authorization");
  return done("Compensated");
}

std::string World::availability_request(const std::string& user, const std::string& payload,
                                        ProviderBehavior behavior) {
  const Digest request = sha256(Encoder().str("availability").str(user).str(payload).i64(now_).data());
  emit("availability_request", ojson{{"user", user}, {"request", to_hex(request)}});
  pending_requests_.push_back({request, now_ + params_.availability_deadline});
  if (behavior == ProviderBehavior::Silent) return "Pending";
  Digest answered = request;
  if (behavior == ProviderBehavior::Mismatch) answered = sha256(Encoder().digest(request).str("other").data());
  const Attested reply = tee_.attest("availability-reply", Encoder().digest(answered).data());
  // Contract side: the reply must be attested and cover this request.
  const bool covers = verify_attested(reply) && reply.payload == Encoder().digest(request).data();
  if (!covers) {
    emit("availability_reply_rejected", ojson{{"request", to_hex(request)}});
    return "Reply rejected";
  }
  pending_requests_.pop_back();
  emit("availability_served", ojson{{"request", to_hex(request)}});
  return "Served";
}

std::vector<Digest> World::published_digests(const std::string& user) const {
  const auto it = published_.find(user);
  return it == published_.end() ? std::vector<Digest>{} : it->second;
}

Salt World::fresh_salt() {
  Salt s{};
  const Bytes b = random_bytes(s.size());
  std::copy(b.begin(), b.end(), s.begin());
  return s;
}

std::string World::bounty_commit(const std::string& claimant, const Digest& commitment) {
  if (commits_.count(commitment)) return "Duplicate commit";
  commits_.emplace(commitment, now_);
  emit("bounty_commit", ojson{{"claimant", claimant}, {"commitment", to_hex(commitment)}});
  return "Committed";
}

std::string World::bounty_reveal(const std::string& claimant, const std::vector<Bytes>& proof,
                                 const Salt& salt) {
  const Digest commitment = commit_digest(proof, salt, claimant);
  auto done = [&](const std::string& result) {
    emit("bounty_reveal", ojson{{"claimant", claimant}, {"commitment", to_hex(commitment)},
                                {"k", proof.size()}, {"result", result}});
    return result;
  };
  const auto c = commits_.find(commitment);
  if (c == commits_.end()) return done("No matching commit");
  if (c->second >= now_) return done("Reveal too early");
  if (claimed_epochs_.count(epoch_)) return done("Already extracted value");
  if (red_flag_) return done("Red Flag is on");

  std::string owner;
  const int k = static_cast<int>(proof.size());
  for (const auto& [user, pp] : published_) {
    if (k >= 1 && pok_verify(pp, proof, k)) owner = user;
  }
  if (owner.empty()) return done("Invalid proof");

  const int t = static_cast<int>(std::min<std::int64_t>(now_ - epoch_start_, params_.game.horizon));
  const Money amount = Money::from_double(reward(params_.reward, params_.game, k, t));
  if (amount > bounty_deposit_) return done("Insufficient deposit");
  commits_.erase(c);
  claimed_epochs_.insert(epoch_);
  raise_red_flag("bounty claim on " + owner);
  tee_.user(owner).invalidated = true;
  emit("shares_invalidated", ojson{{"user", owner}, {"epoch", epoch_}});

  bounty_deposit_ -= amount;
  held_.push_back({claimant, owner, amount, now_, now_ + params_.hold()});
  emit("reward_held", ojson{{"claimant", claimant}, {"key_owner", owner}, {"k", k}, {"t", t},
                            {"amount", amount.to_string()}, {"release_slot", now_ + params_.hold()}});
  if (bounty_deposit_ > Money{}) {
    account("provider") += bounty_deposit_;
    emit("deposit_returned", ojson{{"contract", "bounty"}, {"amount", bounty_deposit_.to_string()}});
    bounty_deposit_ = Money{};
  }
  return done("Reward held");
}

void World::rotate_keys(bool corrupt_publication) {
  ++epoch_;
  epoch_start_ = now_;
  emit("rotation", ojson{{"epoch", epoch_}, {"corrupt_publication", corrupt_publication}});
  for (auto& [name, key] : tee_.users()) {
    auto& k = tee_.user(name);
    k.shares = fresh_shares();
    k.invalidated = false;
    auto digests = tee_.share_digests(name);
    if (corrupt_publication) digests.front() = sha256(Encoder().digest(digests.front()).str("wrong").data());
    publish(name, digests);
  }
}

void World::repair_publication() {
  for (const auto& [name, key] : tee_.users()) {
    if (!publication_ok(name)) publish(name, tee_.share_digests(name));
  }
}

std::string World::recover() {
  if (!red_flag_) return "Red flag is off";
  emit("recovery_started", ojson{{"epoch", epoch_}});
  std::vector<std::string> names;
  for (const auto& [name, key] : tee_.users()) names.push_back(name);
  for (const auto& name : names) {
    const auto r = prepare_replacement(name);
    wallet_replace_key(r, attest_replacement(r));
  }
  rotate_keys(false);
  const Attested clear = tee_.attest("clear-red-flag", Encoder().u64(epoch_).data());
  if (!verify_attested(clear)) return "Invalid signature";
  red_flag_ = false;
  emit("red_flag_cleared", ojson{{"epoch", epoch_}});
  return "Recovered";
}

std::size_t World::count_events(const std::string& type) const {
  const std::string needle = "\"type\":\"" + type + "\"";
  return static_cast<std::size_t>(std::count_if(log_.begin(), log_.end(), [&](const std::string& line) {
    return line.find(needle) != std::string::npos;
  }));
}

std::vector<std::string> World::share_fingerprints_for_audit() const { return share_audit_; }

nlohmann::ordered_json World::state_summary() const {
  ojson s;
  s["slot"] = now_;
  s["epoch"] = epoch_;
  s["red_flag"] = red_flag_;
  ojson balances = ojson::object();
  for (const auto& [name, amount] : balances_) balances[name] = amount.to_string();
  s["balances"] = balances;
  s["deposits"] = ojson{{"insurance", insurance_deposit_.to_string()},
                        {"availability", availability_deposit_.to_string()},
                        {"bounty", bounty_deposit_.to_string()}};
  s["held"] = held_total().to_string();
  s["burned"] = burned_.to_string();
  s["minted"] = minted_.to_string();
  s["events"] = log_.size();
  return s;
}

}  // namespace bountylab::sim
