#include <gtest/gtest.h>

#include <random>

#include "paychan/bytes.hpp"
#include "paychan/types.hpp"

using namespace paychan;

TEST(Bytes, hex_roundtrip) {
  const Bytes b{0x00, 0x01, 0xab, 0xff};
  EXPECT_EQ(to_hex(b), "0001abff");
  EXPECT_EQ(from_hex("0001ABff"), b);
  EXPECT_THROW(from_hex("abc"), DecodeError);
  EXPECT_THROW(from_hex("zz"), DecodeError);
}

TEST(Bytes, u128_big_endian) {
  Bytes out;
  append_u128(out, (static_cast<u128>(0x0102030405060708ULL) << 64) | 0x090a0b0c0d0e0f10ULL);
  EXPECT_EQ(to_hex(out), "0102030405060708090a0b0c0d0e0f10");
  ByteReader rd(out);
  EXPECT_EQ(rd.u128_be(), (static_cast<u128>(0x0102030405060708ULL) << 64) | 0x090a0b0c0d0e0f10ULL);
  EXPECT_EQ(rd.remaining(), 0u);
  EXPECT_THROW(rd.u8(), DecodeError);
}

TEST(Bytes, u128_decimal) {
  const u128 max = ~static_cast<u128>(0);
  EXPECT_EQ(u128_to_string(0), "0");
  EXPECT_EQ(u128_to_string(max), "340282366920938463463374607431768211455");
  EXPECT_EQ(parse_u128("340282366920938463463374607431768211455"), max);
  EXPECT_THROW(parse_u128("340282366920938463463374607431768211456"), EncodingError);
  EXPECT_THROW(parse_u128(""), EncodingError);
  EXPECT_THROW(parse_u128("12a"), EncodingError);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const u128 v = (static_cast<u128>(rng()) << 64) | rng();
    EXPECT_EQ(parse_u128(u128_to_string(v)), v);
  }
}

TEST(Bytes, fixed_bytes_length_checked) {
  EXPECT_THROW(Cid::from(Bytes(19)), DecodeError);
  EXPECT_TRUE(Cid::from(Bytes(20)).is_zero());
}

TEST(Types, fraction_compares_exactly) {
  EXPECT_EQ((Fraction{1, 2}), (Fraction{2, 4}));
  EXPECT_LT((Fraction{1, 3}), (Fraction{1, 2}));
  EXPECT_TRUE((Fraction{5, 4}).at_least_one());
  EXPECT_EQ((Fraction{5, 4}).clamped(), Fraction::one());
  EXPECT_EQ((Fraction{3, 4}).clamped(), (Fraction{3, 4}));
}

TEST(Types, scale_floor_matches_direct_product) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const u128 amount = rng() % 1000000007ULL;
    const std::uint64_t den = 1 + rng() % 100000;
    const std::uint64_t num = rng() % (den + 1);
    EXPECT_EQ(scale_floor(amount, {num, den}), amount * num / den);
  }
}

TEST(Types, scale_floor_no_overflow_at_max) {
  const u128 max = ~static_cast<u128>(0);
  EXPECT_EQ(scale_floor(max, Fraction::one()), max);
  EXPECT_EQ(scale_floor(max, {1, 2}), max / 2);
  EXPECT_EQ(scale_floor(max, {7, 3}), max);
  EXPECT_EQ(scale_floor(max, {0, 3}), 0);
}

TEST(Types, interval_contains_is_inclusive) {
  const Interval w{5, 9};
  EXPECT_FALSE(w.contains(4));
  EXPECT_TRUE(w.contains(5));
  EXPECT_TRUE(w.contains(9));
  EXPECT_FALSE(w.contains(10));
}
