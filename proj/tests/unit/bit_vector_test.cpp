#include <gtest/gtest.h>

#include "harness.hpp"
#include "oblivgm/bit_vector.hpp"

namespace oblivgm {
namespace {

using testing::random_bits;
using testing::seeded;

std::vector<bool> bits_of(const BitVector& v) {
  std::vector<bool> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(v.get(i));
  return out;
}

bool tail_is_clear(const BitVector& v) {
  auto w = v.words();
  if (v.size() % 32 == 0) return true;
  return (w.back() >> (v.size() % 32)) == 0;
}

TEST(BitVector, FromStringAndOneHot) {
  auto v = BitVector::from_string("1000");
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v, BitVector::one_hot(4, 0));
  EXPECT_EQ(v.one_hot_index(), 0);
  EXPECT_EQ(BitVector(9).one_hot_index(), -1);
  EXPECT_EQ(v.to_string(), "1000");
}

TEST(BitVector, AppendAndSliceMatchBitwiseReference) {
  auto rng = seeded(1);
  for (int trial = 0; trial < 400; ++trial) {
    auto a = random_bits(rng.uniform(100), rng);
    auto b = random_bits(1 + rng.uniform(100), rng);
    auto expect = bits_of(a);
    auto tail = bits_of(b);
    expect.insert(expect.end(), tail.begin(), tail.end());
    auto joined = a;
    joined.append(b);
    ASSERT_EQ(bits_of(joined), expect);
    ASSERT_TRUE(tail_is_clear(joined));

    auto off = rng.uniform(joined.size());
    auto len = rng.uniform(joined.size() - off + 1);
    auto s = joined.slice(off, len);
    ASSERT_EQ(bits_of(s), std::vector<bool>(expect.begin() + off, expect.begin() + off + len));
    ASSERT_TRUE(tail_is_clear(s));
  }
}

TEST(BitVector, XorAndParityPopcount) {
  auto rng = seeded(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 1 + rng.uniform(130);
    auto a = random_bits(n, rng);
    auto b = random_bits(n, rng);
    auto x = a ^ b;
    auto y = a & b;
    std::size_t ones = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_EQ(x.get(i), a.get(i) != b.get(i));
      ASSERT_EQ(y.get(i), a.get(i) && b.get(i));
      ones += a.get(i);
    }
    EXPECT_EQ(a.popcount(), ones);
    EXPECT_EQ(a.parity(), ones % 2 == 1);
    EXPECT_TRUE((a ^ a).is_zero());
  }
}

TEST(BitVector, LengthMismatchThrows) {
  BitVector a(5), b(6);
  EXPECT_ANY_THROW(a ^= b);
  EXPECT_ANY_THROW(a &= b);
}

TEST(BitVector, FromWordsClearsTail) {
  auto v = BitVector::from_words({0xffffffffu}, 5);
  EXPECT_EQ(v.popcount(), 5u);
  EXPECT_TRUE(tail_is_clear(v));
}

}  // namespace
}  // namespace oblivgm
