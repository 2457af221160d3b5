#include "bountylab/sim/crypto.hpp"

#include <sodium.h>

#include <stdexcept>

namespace bountylab::sim {

namespace {

void ensure_sodium() {
  static const bool ready = sodium_init() >= 0;
  if (!ready) throw std::runtime_error("libsodium failed to initialize");
}

}  // namespace

Digest sha256(const Bytes& data) {
  ensure_sodium();
  Digest out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

Digest sha256(std::string_view data) {
  ensure_sodium();
  Digest out;
  crypto_hash_sha256(out.data(), reinterpret_cast<const unsigned char*>(data.data()), data.size());
  return out;
}

std::string to_hex(const std::uint8_t* data, std::size_t size) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(size * 2);
  for (std::size_t i = 0; i < size; ++i) {
    s.push_back(digits[data[i] >> 4]);
    s.push_back(digits[data[i] & 0xf]);
  }
  return s;
}

std::string to_hex(const Digest& d) { return to_hex(d.data(), d.size()); }
std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }

Encoder& Encoder::u64(std::uint64_t x) {
  for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
  return *this;
}

Encoder& Encoder::str(std::string_view s) {
  u64(s.size());
  return raw(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

Encoder& Encoder::bytes(const Bytes& b) {
  u64(b.size());
  return raw(b.data(), b.size());
}

Encoder& Encoder::raw(const std::uint8_t* data, std::size_t size) {
  buf_.insert(buf_.end(), data, data + size);
  return *this;
}

KeyPair KeyPair::from_seed(const std::array<std::uint8_t, 32>& seed) {
  ensure_sodium();
  KeyPair kp;
  crypto_sign_seed_keypair(kp.pk_.bytes.data(), kp.sk_.data(), seed.data());
  return kp;
}

Signature KeyPair::sign(const Bytes& message) const {
  Signature sig;
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(), sk_.data());
  return sig;
}

bool verify(const PublicKey& pk, const Bytes& message, const Signature& sig) {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                     pk.bytes.data()) == 0;
}

}  // namespace bountylab::sim
