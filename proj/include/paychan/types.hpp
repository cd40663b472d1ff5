#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "paychan/bytes.hpp"

namespace paychan {

struct DigestTag {};
struct NonceTag {};
struct AddressTag {};
struct PublicKeyTag {};
struct SeedTag {};
struct SignatureTag {};

using Digest = FixedBytes<32, DigestTag>;
using Nonce = FixedBytes<32, NonceTag>;
/// 20-byte account or contract address.
using Address = FixedBytes<20, AddressTag>;
/// Channel id: the channel contract's address.
using Cid = Address;
using PublicKey = FixedBytes<32, PublicKeyTag>;
using Seed = FixedBytes<32, SeedTag>;
/// 64-byte Ed25519 signature followed by the payload's domain tag.
using Signature = FixedBytes<65, SignatureTag>;

using Amount = u128;
using Index = u128;
/// Block height; one block is one logical time unit.
using Height = std::uint64_t;

enum class Role : std::uint8_t { A, B };

inline Role other(Role r) { return r == Role::A ? Role::B : Role::A; }
inline const char* role_name(Role r) { return r == Role::A ? "A" : "B"; }

/// Off-chain payment tuple (bal_A, bal_B, idx). All channel signatures cover it.
struct ChannelState {
  Amount bal_a = 0;
  Amount bal_b = 0;
  Index idx = 0;

  Amount total() const { return bal_a + bal_b; }
  Amount balance(Role r) const { return r == Role::A ? bal_a : bal_b; }
  bool operator==(const ChannelState&) const = default;
};

std::string to_string(const ChannelState& s);

/// Closed block-height range [from, until].
struct Interval {
  Height from = 0;
  Height until = 0;

  bool contains(Height h) const { return from <= h && h <= until; }
  bool operator==(const Interval&) const = default;
};

inline bool any_contains(const std::vector<Interval>& windows, Height h) {
  for (const auto& w : windows)
    if (w.contains(h)) return true;
  return false;
}

/// Exact non-negative rational num/den, used for the watchtower penalty fraction.
struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Fraction one() { return {1, 1}; }
  bool is_zero() const { return num == 0; }
  bool at_least_one() const { return num >= den; }
  /// Returns min(this, 1).
  Fraction clamped() const { return at_least_one() ? one() : *this; }

  friend bool operator==(const Fraction& a, const Fraction& b) {
    return static_cast<u128>(a.num) * b.den == static_cast<u128>(b.num) * a.den;
  }
  friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
    return static_cast<u128>(a.num) * b.den <=> static_cast<u128>(b.num) * a.den;
  }
};

/// floor(amount * min(fraction, 1)) without intermediate overflow.
Amount scale_floor(Amount amount, Fraction fraction);

std::string to_string(const Fraction& f);

}  // namespace paychan

template <std::size_t N, typename Tag>
struct std::hash<paychan::FixedBytes<N, Tag>> {
  std::size_t operator()(const paychan::FixedBytes<N, Tag>& v) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t) && i < N; ++i) h = (h << 8) | v.bytes[i];
    return h;
  }
};
