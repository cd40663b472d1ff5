#include <gtest/gtest.h>

#include <random>

#include "paychan/confirmation_set.hpp"

using namespace paychan;

namespace {
// Reference packing written independently of the class.
Bytes pack(const std::vector<int>& bits) {
  Bytes out{static_cast<std::uint8_t>(bits.size() >> 8), static_cast<std::uint8_t>(bits.size() & 0xff)};
  out.resize(2 + (bits.size() + 7) / 8, 0);
  for (std::size_t j = 0; j < bits.size(); ++j)
    if (bits[j]) out[2 + j / 8] |= static_cast<std::uint8_t>(0x80 >> (j % 8));
  return out;
}
}  // namespace

TEST(ConfirmationSet, matches_reference_packing) {
  std::mt19937_64 rng(5);
  for (std::size_t m : {0, 1, 7, 8, 9, 15, 16, 17, 100, 1000, 65535}) {
    std::vector<int> bits(m);
    ConfirmationSet c(m);
    for (std::size_t j = 0; j < m; ++j) {
      bits[j] = static_cast<int>(rng() & 1);
      c.set(j, bits[j] != 0);
    }
    const Bytes enc = c.encode();
    EXPECT_EQ(enc, pack(bits)) << m;
    EXPECT_EQ(c.bitmap().size(), (m + 7) / 8);
    EXPECT_EQ(ConfirmationSet::decode(enc), c);
    for (std::size_t j = 0; j < m; ++j) EXPECT_EQ(c.bit(j), bits[j] != 0);
  }
}

TEST(ConfirmationSet, bitmap_sizes) {
  EXPECT_EQ(ConfirmationSet(1).bitmap().size(), 1u);
  EXPECT_EQ(ConfirmationSet(10).bitmap().size(), 2u);
  EXPECT_EQ(ConfirmationSet(100).bitmap().size(), 13u);
  EXPECT_EQ(ConfirmationSet(1000).bitmap().size(), 125u);
}

TEST(ConfirmationSet, msb_first_within_byte) {
  const ConfirmationSet c{1, 0, 0, 0, 0, 0, 0, 0, 0, 1};
  EXPECT_EQ(to_hex(c.encode()), "000a8040");
}

TEST(ConfirmationSet, decode_rejects_malformed) {
  EXPECT_THROW(ConfirmationSet::decode(Bytes{0x00}), DecodeError);
  EXPECT_THROW(ConfirmationSet::decode(Bytes{0x00, 0x09, 0xff}), DecodeError);        // short bitmap
  EXPECT_THROW(ConfirmationSet::decode(Bytes{0x00, 0x01, 0x80, 0x00}), DecodeError);  // trailing byte
  EXPECT_THROW(ConfirmationSet::decode(Bytes{0x00, 0x01, 0xc0}), DecodeError);        // padding bit set
  EXPECT_NO_THROW(ConfirmationSet::decode(Bytes{0x00, 0x01, 0x80}));
}

TEST(ConfirmationSet, bounds) {
  ConfirmationSet c(3);
  EXPECT_THROW(c.bit(3), std::out_of_range);
  EXPECT_THROW(c.set(3, true), std::out_of_range);
  EXPECT_THROW(ConfirmationSet(65536), EncodingError);
}
