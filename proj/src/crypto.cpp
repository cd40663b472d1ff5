#include "paychan/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace paychan {

namespace {

struct SodiumInit {
  SodiumInit() {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  }
};

void ensure_sodium() { static const SodiumInit init; }

static_assert(sizeof(crypto_hash_sha256_state) <= 128);

crypto_hash_sha256_state* as_state(std::array<std::uint8_t, 128>& raw) {
  return reinterpret_cast<crypto_hash_sha256_state*>(raw.data());
}

PaymentPayload tagged_payload(SigTag tag, const Cid& cid, Index idx, const Digest& h_s) {
  PaymentPayload out{};
  out[0] = static_cast<std::uint8_t>(tag);
  std::memcpy(out.data() + 1, cid.bytes.data(), 20);
  put_u128(out.data() + 21, idx);
  std::memcpy(out.data() + 37, h_s.bytes.data(), 32);
  return out;
}

}  // namespace

Digest hash(ByteView data) {
  ensure_sodium();
  Digest out;
  crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
  return out;
}

Hasher::Hasher() {
  ensure_sodium();
  crypto_hash_sha256_init(as_state(state_));
}

Hasher& Hasher::update(ByteView data) {
  crypto_hash_sha256_update(as_state(state_), data.data(), data.size());
  return *this;
}

Hasher& Hasher::update(std::string_view text) {
  return update(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Hasher& Hasher::update_u64(std::uint64_t v) {
  std::uint8_t buf[8];
  put_u64(buf, v);
  return update(ByteView(buf, 8));
}

Hasher& Hasher::update_u128(u128 v) {
  std::uint8_t buf[16];
  put_u128(buf, v);
  return update(ByteView(buf, 16));
}

Digest Hasher::finish() {
  Digest out;
  crypto_hash_sha256_final(as_state(state_), out.bytes.data());
  return out;
}

KeyPair KeyPair::from_seed(const Seed& seed) {
  ensure_sodium();
  KeyPair kp;
  kp.secret = seed;
  static_assert(crypto_sign_SECRETKEYBYTES == 64);
  crypto_sign_seed_keypair(kp.public_key.bytes.data(), kp.signing_key.data(), seed.bytes.data());
  return kp;
}

KeyPair KeyPair::derive(std::string_view label, std::uint64_t salt) {
  Digest d = Hasher().update("paychan/key/").update_u64(salt).update(label).finish();
  return from_seed(Seed::from(d.view()));
}

Address address_of(const PublicKey& pk) {
  Digest d = hash(pk.view());
  return Address::from(ByteView(d.bytes.data() + 12, 20));
}

Signature sign(const KeyPair& key, ByteView message) {
  ensure_sodium();
  Signature sig;
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                       key.signing_key.data());
  sig.bytes[64] = message.empty() ? 0 : message[0];
  return sig;
}

bool verify(const PublicKey& key, ByteView message, const Signature& sig) {
  ensure_sodium();
  const std::uint8_t expected_tag = message.empty() ? 0 : message[0];
  if (sig.bytes[64] != expected_tag) return false;
  return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                     key.bytes.data()) == 0;
}

EncodedState encode_state(const ChannelState& s) {
  EncodedState out{};
  put_u128(out.data(), s.bal_a);
  put_u128(out.data() + 16, s.bal_b);
  put_u128(out.data() + 32, s.idx);
  return out;
}

ChannelState decode_state(ByteView bytes) {
  if (bytes.size() != 48) throw DecodeError("channel state must be 48 bytes");
  return {get_u128(bytes.data()), get_u128(bytes.data() + 16), get_u128(bytes.data() + 32)};
}

Digest hash_commit(const ChannelState& s, const Nonce& r) {
  auto enc = encode_state(s);
  return Hasher().update(ByteView(enc)).update(r.view()).finish();
}

PaymentPayload payment_payload(const Cid& cid, Index idx, const Digest& h_s) {
  return tagged_payload(SigTag::Payment, cid, idx, h_s);
}

PaymentPayload receipt_payload(const Cid& cid, Index idx, const Digest& h_s) {
  return tagged_payload(SigTag::Receipt, cid, idx, h_s);
}

NonceSource::NonceSource(std::uint64_t seed, std::string_view stream)
    : key_(Hasher().update("paychan/nonce/").update_u64(seed).update(stream).finish()) {}

Nonce NonceSource::next() {
  Digest d = Hasher().update(key_.view()).update_u64(counter_++).finish();
  return Nonce::from(d.view());
}

}  // namespace paychan
