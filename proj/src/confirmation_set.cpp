#include "paychan/confirmation_set.hpp"

#include <stdexcept>

namespace paychan {

ConfirmationSet::ConfirmationSet(std::size_t m) : size_(m), packed_((m + 7) / 8, 0) {
  if (m > kMaxBits) throw EncodingError("confirmation set larger than 65535 entries");
}

ConfirmationSet::ConfirmationSet(std::initializer_list<int> bits) : ConfirmationSet(bits.size()) {
  std::size_t j = 0;
  for (int b : bits) set(j++, b != 0);
}

bool ConfirmationSet::bit(std::size_t j) const {
  if (j >= size_) throw std::out_of_range("confirmation bit index");
  return ((packed_[j / 8] >> (7 - j % 8)) & 1) != 0;
}

void ConfirmationSet::set(std::size_t j, bool value) {
  if (j >= size_) throw std::out_of_range("confirmation bit index");
  const auto mask = static_cast<std::uint8_t>(1u << (7 - j % 8));
  if (value)
    packed_[j / 8] |= mask;
  else
    packed_[j / 8] &= static_cast<std::uint8_t>(~mask);
}

Bytes ConfirmationSet::encode() const {
  Bytes out;
  out.reserve(2 + packed_.size());
  out.push_back(static_cast<std::uint8_t>(size_ >> 8));
  out.push_back(static_cast<std::uint8_t>(size_ & 0xff));
  append(out, packed_);
  return out;
}

ConfirmationSet ConfirmationSet::decode(ByteView wire) {
  ByteReader in(wire);
  const std::size_t m = in.u16_be();
  ConfirmationSet out(m);
  auto body = in.take(out.packed_.size());
  if (in.remaining() != 0) throw DecodeError("confirmation set: trailing bytes");
  out.packed_.assign(body.begin(), body.end());
  if (m % 8 != 0) {
    const auto unused = static_cast<std::uint8_t>(0xffu >> (m % 8));
    if ((out.packed_.back() & unused) != 0) throw DecodeError("confirmation set: padding bits set");
  }
  return out;
}

}  // namespace paychan
