#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "oblivgm/bit_vector.hpp"
#include "oblivgm/bytes.hpp"
#include "oblivgm/crypto.hpp"

namespace oblivgm {

/// Parties are numbered 1..3; arithmetic on indices wraps around.
inline constexpr int next_party(int i) { return i % 3 + 1; }
inline constexpr int prev_party(int i) { return (i + 1) % 3 + 1; }

/// One party's view of a binary replicated sharing: party i holds
/// (<x>_i, <x>_{i+1}).
struct SharedBitVector {
  int party = 1;
  BitVector a;  // <x>_party
  BitVector b;  // <x>_{party+1}

  SharedBitVector() = default;
  SharedBitVector(int party_index, BitVector share_a, BitVector share_b);
  /// All-zero sharing of the given length (every share zero).
  static SharedBitVector zeros(int party_index, std::size_t len) {
    return {party_index, BitVector(len), BitVector(len)};
  }

  std::size_t size() const { return a.size(); }

  void append(const SharedBitVector& tail);
  SharedBitVector slice(std::size_t offset, std::size_t len) const;
  /// Sharing of the single bit at position i.
  SharedBitVector bit(std::size_t i) const { return slice(i, 1); }
  /// Sharing of the XOR of all bits (local).
  SharedBitVector parity() const;

  friend bool operator==(const SharedBitVector&, const SharedBitVector&) = default;
};

/// Splits x into three random shares and hands party i the pair (<x>_i, <x>_{i+1}).
std::array<SharedBitVector, 3> share(const BitVector& plaintext, Prg& rng);

/// XOR of the three distinct share indices covered by `pairs` (two parties suffice).
BitVector reconstruct(std::span<const SharedBitVector> pairs);

SharedBitVector xor_local(const SharedBitVector& x, const SharedBitVector& y);

/// XORs a public constant into the sharing (only share index 1 changes).
SharedBitVector xor_public(const SharedBitVector& x, const BitVector& constant);

/// Local step of the AND gate: this party's 3-out-of-3 additive share of x & y.
BitVector and_local(const SharedBitVector& x, const SharedBitVector& y);

/// acc ^= additive share of (bit * vector) where the bit's replicated pair is (xa, xb)
/// and the vector's pair is (va, vb).
void accumulate_scaled(BitVector& acc, bool xa, bool xb, const BitVector& va, const BitVector& vb);

/// PRF state for fresh zero-sharings: party i holds k_i and k_{i-1}.
class ZeroShareContext {
 public:
  ZeroShareContext(const Block& own_key, const Block& prev_key) : own_(own_key), prev_(prev_key) {}

  /// F(k_i, j) ^ F(k_{i-1}, j) for the next counter j; the three parties' outputs XOR to zero.
  BitVector next(std::size_t nbits);
  std::uint64_t counter() const { return counter_; }

 private:
  Prf own_;
  Prf prev_;
  std::uint64_t counter_ = 0;
};

inline BitVector zero_share_next(ZeroShareContext& ctx, std::size_t nbits) { return ctx.next(nbits); }

// Share record: "OGMS", u16 version, u8 party, u64 logical_len, words(a), words(b).
inline constexpr std::uint16_t kShareFormatVersion = 1;
void write_share(ByteWriter& out, const SharedBitVector& s);
SharedBitVector read_share(ByteReader& in);

}  // namespace oblivgm
