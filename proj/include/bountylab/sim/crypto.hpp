#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bountylab::sim {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(const Bytes& data);
Digest sha256(std::string_view data);

std::string to_hex(const std::uint8_t* data, std::size_t size);
std::string to_hex(const Digest& d);
std::string to_hex(const Bytes& b);

/// Canonical byte encoding helpers for signed and hashed messages.
class Encoder {
 public:
  Encoder& u64(std::uint64_t x);
  Encoder& i64(std::int64_t x) { return u64(static_cast<std::uint64_t>(x)); }
  Encoder& str(std::string_view s);   // length-prefixed
  Encoder& bytes(const Bytes& b);     // length-prefixed
  Encoder& raw(const std::uint8_t* data, std::size_t size);
  Encoder& digest(const Digest& d) { return raw(d.data(), d.size()); }
  const Bytes& data() const { return buf_; }

 private:
  Bytes buf_;
};

struct PublicKey {
  std::array<std::uint8_t, 32> bytes{};
  friend bool operator==(const PublicKey&, const PublicKey&) = default;
};

struct Signature {
  std::array<std::uint8_t, 64> bytes{};
  friend bool operator==(const Signature&, const Signature&) = default;
};

/// Ed25519 key pair. Deterministic given the seed.
class KeyPair {
 public:
  static KeyPair from_seed(const std::array<std::uint8_t, 32>& seed);

  const PublicKey& public_key() const { return pk_; }
  Signature sign(const Bytes& message) const;

 private:
  PublicKey pk_;
  std::array<std::uint8_t, 64> sk_{};
};

bool verify(const PublicKey& pk, const Bytes& message, const Signature& sig);

}  // namespace bountylab::sim
