#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "oblivgm/bit_vector.hpp"

namespace oblivgm {

/// 128-bit value: PRG seeds, PRF keys, pairwise shuffle seeds.
struct Block {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  Block& operator^=(const Block& o) {
    lo ^= o.lo;
    hi ^= o.hi;
    return *this;
  }
  friend Block operator^(Block a, const Block& b) { return a ^= b; }
  friend bool operator==(const Block&, const Block&) = default;

  bool lsb() const { return lo & 1u; }
  bool bit(unsigned i) const { return i < 64 ? (lo >> i) & 1u : (hi >> (i - 64)) & 1u; }

  std::array<std::uint8_t, 16> to_bytes() const;
  static Block from_bytes(std::span<const std::uint8_t> b);
  /// Up to 32 hex digits, most significant first; shorter strings are zero-extended on the left.
  static Block from_hex(std::string_view hex);
  std::string to_hex() const;
};

/// AES-128 block encryption under a fixed key (ECB over whole blocks).
/// Not thread-safe; every thread keeps its own instance.
class Aes128 {
 public:
  explicit Aes128(const Block& key);
  ~Aes128();
  Aes128(Aes128&&) noexcept;
  Aes128& operator=(Aes128&&) noexcept;
  Aes128(const Aes128&) = delete;
  Aes128& operator=(const Aes128&) = delete;

  void encrypt(std::span<const Block> in, std::span<Block> out);
  Block encrypt(const Block& in);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Thread-local AES instance under a public constant key, used as the
/// correlation-robust permutation inside the GGM tree PRG.
Aes128& fixed_key_aes();

/// Fills a block with operating-system randomness.
Block os_random_block();

/// Counter-mode AES stream keyed by a 128-bit seed. `stream` domain-separates
/// independent streams under the same seed.
class Prg {
 public:
  using result_type = std::uint64_t;

  explicit Prg(const Block& seed, std::uint64_t stream = 0);
  static Prg from_os() { return Prg(os_random_block()); }

  Block next_block();
  std::uint64_t next_u64();
  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64()); }
  bool next_bit() { return next_u64() & 1u; }
  /// Uniform in [0, bound) by rejection sampling; bound > 0.
  std::uint64_t uniform(std::uint64_t bound);
  void fill(std::span<std::uint32_t> words);
  BitVector random_bits(std::size_t len);

  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  void refill();

  Aes128 aes_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<Block, 64> buf_{};
  std::size_t pos_ = 64;
};

/// Keyed PRF F(k, j) expanded to an arbitrary number of output bits.
class Prf {
 public:
  explicit Prf(const Block& key) : aes_(key) {}
  BitVector eval(std::uint64_t index, std::size_t nbits);

 private:
  Aes128 aes_;
};

/// Seeded Fisher-Yates permutation of [0, n): out[i] is the source row of output position i.
std::vector<std::uint32_t> random_permutation(std::size_t n, Prg& prg);

}  // namespace oblivgm
