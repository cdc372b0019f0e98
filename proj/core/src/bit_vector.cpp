#include "oblivgm/bit_vector.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "oblivgm/bytes.hpp"
#include "oblivgm/errors.hpp"

namespace oblivgm {

BitVector BitVector::from_words(std::vector<std::uint32_t> words, std::size_t len) {
  if (words.size() != word_count(len)) throw ValidationError("word count does not match bit length");
  BitVector v;
  v.words_ = std::move(words);
  v.len_ = len;
  v.clear_tail();
  return v;
}

BitVector BitVector::from_string(std::string_view bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      v.set(i, true);
    else if (bits[i] != '0')
      throw ValidationError("bit string may only contain 0 and 1");
  }
  return v;
}

BitVector BitVector::one_hot(std::size_t len, std::size_t index) {
  if (index >= len) throw ValidationError("one-hot index outside vector");
  BitVector v(len);
  v.set(index, true);
  return v;
}

void BitVector::clear_tail() {
  auto rem = len_ % kWordBits;
  if (rem != 0 && !words_.empty()) words_.back() &= (1u << rem) - 1u;
}

std::size_t BitVector::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitVector::parity() const {
  std::uint32_t acc = 0;
  for (auto w : words_) acc ^= w;
  return std::popcount(acc) & 1;
}

bool BitVector::is_zero() const {
  for (auto w : words_)
    if (w != 0) return false;
  return true;
}

BitVector& BitVector::operator^=(const BitVector& other) {
  if (other.len_ != len_) throw ValidationError("bit vector length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

BitVector& BitVector::operator&=(const BitVector& other) {
  if (other.len_ != len_) throw ValidationError("bit vector length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

void BitVector::append(const BitVector& tail) {
  auto offset = len_;
  len_ += tail.len_;
  words_.resize(word_count(len_), 0u);
  if (offset % kWordBits == 0) {
    std::copy(tail.words_.begin(), tail.words_.end(), words_.begin() + static_cast<std::ptrdiff_t>(offset / kWordBits));
    return;
  }
  const auto shift = offset % kWordBits;
  auto base = offset / kWordBits;
  for (std::size_t i = 0; i < tail.words_.size(); ++i) {
    const std::uint64_t w = static_cast<std::uint64_t>(tail.words_[i]) << shift;
    words_[base + i] |= static_cast<std::uint32_t>(w);
    if (base + i + 1 < words_.size()) words_[base + i + 1] |= static_cast<std::uint32_t>(w >> kWordBits);
  }
}

BitVector BitVector::slice(std::size_t offset, std::size_t len) const {
  if (offset + len > len_) throw ValidationError("slice outside bit vector");
  BitVector out(len);
  if (offset % kWordBits == 0) {
    auto first = words_.begin() + static_cast<std::ptrdiff_t>(offset / kWordBits);
    std::copy(first, first + static_cast<std::ptrdiff_t>(out.words_.size()), out.words_.begin());
    out.clear_tail();
    return out;
  }
  const auto shift = offset % kWordBits;
  const auto base = offset / kWordBits;
  for (std::size_t i = 0; i < out.words_.size(); ++i) {
    std::uint64_t w = words_[base + i] >> shift;
    if (base + i + 1 < words_.size()) w |= static_cast<std::uint64_t>(words_[base + i + 1]) << (kWordBits - shift);
    out.words_[i] = static_cast<std::uint32_t>(w);
  }
  out.clear_tail();
  return out;
}

std::ptrdiff_t BitVector::one_hot_index() const {
  std::ptrdiff_t found = -1;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    auto word = words_[w];
    if (word == 0) continue;
    if (found >= 0 || std::popcount(word) > 1) return -2;
    found = static_cast<std::ptrdiff_t>(w * kWordBits) + std::countr_zero(word);
  }
  return found;
}

std::string BitVector::to_string() const {
  std::string s(len_, '0');
  for (std::size_t i = 0; i < len_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

bool and_parity(const BitVector& a, const BitVector& b) {
  if (a.size() != b.size()) throw ValidationError("bit vector length mismatch");
  auto wa = a.words();
  auto wb = b.words();
  std::uint32_t acc = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) acc ^= wa[i] & wb[i];
  return std::popcount(acc) & 1;
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw ValidationError("short write to " + path);
}

}  // namespace oblivgm
