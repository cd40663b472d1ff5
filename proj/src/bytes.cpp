#include "paychan/bytes.hpp"

#include <algorithm>

namespace paychan {

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.starts_with("0x")) hex.remove_prefix(2);
  if (hex.size() % 2 != 0) throw DecodeError("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw DecodeError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

void put_u128(std::uint8_t* out, u128 v) {
  for (int i = 15; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
}

u128 get_u128(const std::uint8_t* in) {
  u128 v = 0;
  for (int i = 0; i < 16; ++i) v = (v << 8) | in[i];
  return v;
}

void put_u64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
}

std::uint64_t get_u64(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

void append_u128(Bytes& out, u128 v) {
  std::uint8_t buf[16];
  put_u128(buf, v);
  out.insert(out.end(), buf, buf + 16);
}

void append_u64(Bytes& out, std::uint64_t v) {
  std::uint8_t buf[8];
  put_u64(buf, v);
  out.insert(out.end(), buf, buf + 8);
}

std::string u128_to_string(u128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

u128 parse_u128(std::string_view text) {
  if (text.empty()) throw EncodingError("empty integer");
  constexpr u128 kMax = ~static_cast<u128>(0);
  u128 v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw EncodingError("invalid decimal digit in '" + std::string(text) + "'");
    auto d = static_cast<unsigned>(c - '0');
    if (v > (kMax - d) / 10) throw EncodingError("value exceeds 16-byte range: " + std::string(text));
    v = v * 10 + d;
  }
  return v;
}

}  // namespace paychan
