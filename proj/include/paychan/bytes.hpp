#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace paychan {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// 128-bit unsigned integer used for balances and transaction indices.
using u128 = unsigned __int128;

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-length byte string. `Tag` keeps Digest, Nonce, Address, ... distinct types.
template <std::size_t N, typename Tag>
struct FixedBytes {
  static constexpr std::size_t size = N;
  std::array<std::uint8_t, N> bytes{};

  static FixedBytes from(ByteView in) {
    if (in.size() != N) throw DecodeError("fixed-length field: expected " + std::to_string(N) + " bytes");
    FixedBytes out;
    std::copy(in.begin(), in.end(), out.bytes.begin());
    return out;
  }

  bool is_zero() const {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
  }
  ByteView view() const { return {bytes.data(), N}; }
  auto operator<=>(const FixedBytes&) const = default;
};

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

template <std::size_t N, typename Tag>
std::string to_hex(const FixedBytes<N, Tag>& v) {
  return to_hex(v.view());
}

template <typename T>
T fixed_from_hex(std::string_view hex) {
  return T::from(from_hex(hex));
}

// Big-endian fixed-width integer helpers.
void put_u128(std::uint8_t* out, u128 v);
u128 get_u128(const std::uint8_t* in);
void put_u64(std::uint8_t* out, std::uint64_t v);
std::uint64_t get_u64(const std::uint8_t* in);

inline void append(Bytes& out, ByteView data) { out.insert(out.end(), data.begin(), data.end()); }
void append_u128(Bytes& out, u128 v);
void append_u64(Bytes& out, std::uint64_t v);

std::string u128_to_string(u128 v);
/// Parses a non-negative decimal; throws EncodingError when the value does not fit in 16 bytes.
u128 parse_u128(std::string_view text);

/// Bounds-checked sequential reader for wire decoding.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  ByteView take(std::size_t n) {
    if (remaining() < n) throw DecodeError("truncated input");
    ByteView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  template <typename T>
  T fixed() {
    return T::from(take(T::size));
  }
  u128 u128_be() { return get_u128(take(16).data()); }
  std::uint64_t u64_be() { return get_u64(take(8).data()); }
  std::uint16_t u16_be() {
    auto b = take(2);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace paychan
