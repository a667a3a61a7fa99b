#include <gtest/gtest.h>

#include "afp/errors.hpp"
#include "afp/rng.hpp"
#include "afp/word_codec.hpp"

using namespace afp;

TEST(WordCodec, MsbFirstOrder) {
  const auto bits = to_bits_msb_first({0x80000001u});
  EXPECT_EQ(bits[0], 1);
  EXPECT_EQ(bits[31], 1);
  for (int i = 1; i < 31; ++i) EXPECT_EQ(bits[i], 0);
}

TEST(WordCodec, RoundTripRandomWords) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const ArincWord w{static_cast<std::uint32_t>(rng.next_u64())};
    EXPECT_EQ(from_bits_msb_first(to_bits_msb_first(w)), w);
    EXPECT_EQ(from_bits_wire_order(to_bits_wire_order(w)), w);
  }
}

TEST(WordCodec, WireOrderSendsLabelReversed) {
  // Label 0x01 in bits 1..8: bit 1 goes last among the first eight.
  const auto bits = to_bits_wire_order({0x00000001u});
  for (int i = 0; i < 7; ++i) EXPECT_EQ(bits[i], 0);
  EXPECT_EQ(bits[7], 1);
  const auto order = wire_order_bit_numbers();
  EXPECT_EQ(order[0], 8);
  EXPECT_EQ(order[7], 1);
  EXPECT_EQ(order[8], 9);
  EXPECT_EQ(order[31], 32);
}

TEST(WordCodec, ParseAndFormat) {
  EXPECT_EQ(parse_word("0x5A5A5A5A"), (ArincWord{0x5A5A5A5Au}));
  EXPECT_EQ(parse_word("0Xff"), (ArincWord{0xFFu}));
  EXPECT_EQ(format_word({0xA5u}), "0x000000A5");
  for (auto w : kReferenceWords) EXPECT_EQ(parse_word(format_word(w)), w);
  EXPECT_THROW(parse_word("123"), ConfigError);
  EXPECT_THROW(parse_word("0x123456789"), ConfigError);
  EXPECT_THROW(parse_word("0xG1"), ConfigError);
}

TEST(Rng, ReproducibleAndIndependentStreams) {
  Rng a(5), b(5), c(derive_seed(5, {1}));
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(Rng(5).next_u64(), c.next_u64());
  EXPECT_NE(derive_seed(5, {1, 2}), derive_seed(5, {2, 1}));
}

TEST(Rng, MomentsOfUniformAndNormal) {
  Rng rng(3);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.01);
}

TEST(Rng, UniformIndexCoversRange) {
  Rng rng(9);
  std::array<int, 7> hist{};
  for (int i = 0; i < 70000; ++i) ++hist[rng.uniform_index(7)];
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
}
