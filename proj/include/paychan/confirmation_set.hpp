#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "paychan/bytes.hpp"

namespace paychan {

/// One bit per pending closure; bit j = 1 allows channel j of the pending entry to pay out.
///
/// Wire form: m as 2-byte big-endian, then ceil(m/8) bytes with bit j stored at
/// (byte[j/8] >> (7 - j%8)) & 1. Unused trailing bits must be zero.
class ConfirmationSet {
 public:
  static constexpr std::size_t kMaxBits = 0xffff;

  ConfirmationSet() = default;
  explicit ConfirmationSet(std::size_t m);
  ConfirmationSet(std::initializer_list<int> bits);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool bit(std::size_t j) const;
  void set(std::size_t j, bool value);

  /// Packed bitmap only, ceil(m/8) bytes.
  const Bytes& bitmap() const { return packed_; }
  Bytes encode() const;
  static ConfirmationSet decode(ByteView wire);

  bool operator==(const ConfirmationSet&) const = default;

 private:
  std::size_t size_ = 0;
  Bytes packed_;
};

}  // namespace paychan
