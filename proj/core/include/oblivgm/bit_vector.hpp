#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oblivgm {

/// Bit string packed into 32-bit words, bit i stored at word i/32, position
/// i%32. Bits past size() are always zero.
class BitVector {
 public:
  static constexpr std::size_t kWordBits = 32;

  BitVector() = default;
  explicit BitVector(std::size_t len) : words_(word_count(len), 0u), len_(len) {}

  static BitVector from_words(std::vector<std::uint32_t> words, std::size_t len);
  /// "0110" -> bits 0..3 = 0,1,1,0.
  static BitVector from_string(std::string_view bits);
  static BitVector one_hot(std::size_t len, std::size_t index);

  static constexpr std::size_t word_count(std::size_t len) { return (len + kWordBits - 1) / kWordBits; }

  std::size_t size() const { return len_; }
  bool empty() const { return len_ == 0; }

  bool get(std::size_t i) const { return (words_[i / kWordBits] >> (i % kWordBits)) & 1u; }
  void set(std::size_t i, bool v) {
    auto mask = 1u << (i % kWordBits);
    if (v)
      words_[i / kWordBits] |= mask;
    else
      words_[i / kWordBits] &= ~mask;
  }
  void flip(std::size_t i) { words_[i / kWordBits] ^= 1u << (i % kWordBits); }

  std::span<const std::uint32_t> words() const { return words_; }
  /// Raw word access; callers must leave the tail zero (or call clear_tail()).
  std::span<std::uint32_t> mutable_words() { return words_; }
  void clear_tail();

  std::size_t popcount() const;
  bool parity() const;
  bool is_zero() const;

  BitVector& operator^=(const BitVector& other);
  BitVector& operator&=(const BitVector& other);
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  friend BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }
  friend bool operator==(const BitVector&, const BitVector&) = default;

  void append(const BitVector& tail);
  BitVector slice(std::size_t offset, std::size_t len) const;

  /// Index of the single set bit; -1 when all zero, -2 when more than one.
  std::ptrdiff_t one_hot_index() const;

  std::string to_string() const;

 private:
  std::vector<std::uint32_t> words_;
  std::size_t len_ = 0;
};

/// Parity of (a & b) without materialising the product.
bool and_parity(const BitVector& a, const BitVector& b);

/// dst ^= src when bit is set.
inline void xor_if(BitVector& dst, const BitVector& src, bool bit) {
  if (bit) dst ^= src;
}

}  // namespace oblivgm
