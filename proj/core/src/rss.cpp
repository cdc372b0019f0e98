#include "oblivgm/rss.hpp"

#include "oblivgm/errors.hpp"

namespace oblivgm {

namespace {

void check_party(int p) {
  if (p < 1 || p > 3) throw ValidationError("party index must be 1, 2 or 3");
}

}  // namespace

SharedBitVector::SharedBitVector(int party_index, BitVector share_a, BitVector share_b)
    : party(party_index), a(std::move(share_a)), b(std::move(share_b)) {
  check_party(party);
  if (a.size() != b.size()) throw ValidationError("share pair length mismatch");
}

void SharedBitVector::append(const SharedBitVector& tail) {
  if (tail.party != party) throw ValidationError("cannot concatenate shares of different parties");
  a.append(tail.a);
  b.append(tail.b);
}

SharedBitVector SharedBitVector::slice(std::size_t offset, std::size_t len) const {
  return {party, a.slice(offset, len), b.slice(offset, len)};
}

SharedBitVector SharedBitVector::parity() const {
  BitVector pa(1), pb(1);
  pa.set(0, a.parity());
  pb.set(0, b.parity());
  return {party, std::move(pa), std::move(pb)};
}

std::array<SharedBitVector, 3> share(const BitVector& plaintext, Prg& rng) {
  if (plaintext.empty()) throw ValidationError("cannot share an empty bit vector");
  auto s1 = rng.random_bits(plaintext.size());
  auto s2 = rng.random_bits(plaintext.size());
  auto s3 = plaintext ^ s1 ^ s2;
  return {SharedBitVector{1, s1, s2}, SharedBitVector{2, s2, s3}, SharedBitVector{3, s3, s1}};
}

BitVector reconstruct(std::span<const SharedBitVector> pairs) {
  if (pairs.empty()) throw ValidationError("no shares to reconstruct");
  std::array<const BitVector*, 3> by_index{};
  const auto len = pairs.front().size();
  for (const auto& p : pairs) {
    check_party(p.party);
    if (p.a.size() != len || p.b.size() != len) throw ValidationError("share length mismatch");
    by_index[p.party - 1] = &p.a;
    by_index[next_party(p.party) - 1] = &p.b;
  }
  for (auto* s : by_index)
    if (s == nullptr) throw ValidationError("shares do not cover all three indices");
  return *by_index[0] ^ *by_index[1] ^ *by_index[2];
}

SharedBitVector xor_local(const SharedBitVector& x, const SharedBitVector& y) {
  if (x.party != y.party) throw ValidationError("xor of shares held by different parties");
  return {x.party, x.a ^ y.a, x.b ^ y.b};
}

SharedBitVector xor_public(const SharedBitVector& x, const BitVector& constant) {
  SharedBitVector out = x;
  if (x.party == 1) out.a ^= constant;
  if (x.party == 3) out.b ^= constant;
  return out;
}

BitVector and_local(const SharedBitVector& x, const SharedBitVector& y) {
  if (x.party != y.party) throw ValidationError("and of shares held by different parties");
  if (x.size() != y.size()) throw ValidationError("and operand length mismatch");
  BitVector z(x.size());
  auto zw = z.mutable_words();
  auto xa = x.a.words(), xb = x.b.words(), ya = y.a.words(), yb = y.b.words();
  for (std::size_t w = 0; w < zw.size(); ++w) zw[w] = (xa[w] & ya[w]) ^ (xa[w] & yb[w]) ^ (xb[w] & ya[w]);
  return z;
}

void accumulate_scaled(BitVector& acc, bool xa, bool xb, const BitVector& va, const BitVector& vb) {
  if (!xa && !xb) return;
  auto aw = acc.mutable_words();
  auto a = va.words(), b = vb.words();
  if (acc.size() != va.size() || va.size() != vb.size()) throw ValidationError("scaled operand length mismatch");
  // x_i v_i ^ x_i v_{i+1} ^ x_{i+1} v_i
  for (std::size_t w = 0; w < aw.size(); ++w) {
    std::uint32_t t = 0;
    if (xa) t ^= a[w] ^ b[w];
    if (xb) t ^= a[w];
    aw[w] ^= t;
  }
}

BitVector ZeroShareContext::next(std::size_t nbits) {
  if (counter_ == UINT64_MAX) throw ProtocolError("zero-sharing counter exhausted");
  auto j = counter_++;
  return own_.eval(j, nbits) ^ prev_.eval(j, nbits);
}

void write_share(ByteWriter& out, const SharedBitVector& s) {
  out.raw("OGMS");
  out.u16(kShareFormatVersion);
  out.u8(static_cast<std::uint8_t>(s.party));
  out.u64(s.size());
  out.words(s.a.words());
  out.words(s.b.words());
}

SharedBitVector read_share(ByteReader& in) {
  in.expect_magic("OGMS");
  if (in.u16() != kShareFormatVersion) throw ValidationError("unsupported share format version");
  int party = in.u8();
  check_party(party);
  auto len = in.u64();
  auto nwords = BitVector::word_count(len);
  if (nwords * 8 > in.remaining()) throw ValidationError("truncated share record");
  std::vector<std::uint32_t> wa(nwords), wb(nwords);
  in.words(wa);
  in.words(wb);
  auto a = BitVector::from_words(std::move(wa), len);
  auto b = BitVector::from_words(std::move(wb), len);
  return {party, std::move(a), std::move(b)};
}

}  // namespace oblivgm
