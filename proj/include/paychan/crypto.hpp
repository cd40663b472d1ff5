#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "paychan/types.hpp"

namespace paychan {

/// Domain-separation tags. Every signed payload starts with one, and the
/// signature's trailing byte repeats it.
enum class SigTag : std::uint8_t {
  Payment = 0x01,
  Receipt = 0x02,
  Assertion = 0x03,
  Transaction = 0x04,
};

/// SHA-256.
Digest hash(ByteView data);

/// Incremental SHA-256.
class Hasher {
 public:
  Hasher();
  Hasher& update(ByteView data);
  Hasher& update(std::string_view text);
  Hasher& update_u64(std::uint64_t v);
  Hasher& update_u128(u128 v);
  Digest finish();

 private:
  alignas(64) std::array<std::uint8_t, 128> state_{};
};

struct KeyPair {
  Seed secret;
  PublicKey public_key;
  /// Expanded signing key (seed || pk), cached so signing skips key derivation.
  std::array<std::uint8_t, 64> signing_key{};

  static KeyPair from_seed(const Seed& seed);
  /// Derives a key from a label; used to give simulation actors reproducible identities.
  static KeyPair derive(std::string_view label, std::uint64_t salt = 0);
};

/// Account address of an externally owned key: last 20 bytes of H(pk).
Address address_of(const PublicKey& pk);

/// Deterministic signature over exactly `message`. The trailing byte is message[0].
Signature sign(const KeyPair& key, ByteView message);

/// True iff `sig` is `key`'s signature over `message`; malformed input yields false.
bool verify(const PublicKey& key, ByteView message, const Signature& sig);

using EncodedState = std::array<std::uint8_t, 48>;

/// bal_A (16B) || bal_B (16B) || idx (16B), big-endian.
EncodedState encode_state(const ChannelState& s);
ChannelState decode_state(ByteView bytes);

/// h_s = H(encode_state(s) || r).
Digest hash_commit(const ChannelState& s, const Nonce& r);

using PaymentPayload = std::array<std::uint8_t, 69>;

/// 0x01 || cid || idx || h_s: what both parties sign for an off-chain payment.
PaymentPayload payment_payload(const Cid& cid, Index idx, const Digest& h_s);
/// 0x02 || cid || idx || h_s: what the watchtower signs in a receipt.
PaymentPayload receipt_payload(const Cid& cid, Index idx, const Digest& h_s);

/// Seedable 256-bit nonce source (SHA-256 in counter mode), so runs are reproducible.
class NonceSource {
 public:
  explicit NonceSource(std::uint64_t seed, std::string_view stream = "nonce");
  Nonce next();

 private:
  Digest key_;
  std::uint64_t counter_ = 0;
};

}  // namespace paychan
