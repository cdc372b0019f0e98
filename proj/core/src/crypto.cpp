#include "oblivgm/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <numeric>

#include "oblivgm/errors.hpp"

namespace oblivgm {

std::array<std::uint8_t, 16> Block::to_bytes() const {
  std::array<std::uint8_t, 16> out{};
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>(lo >> (8 * i));
    out[8 + i] = static_cast<std::uint8_t>(hi >> (8 * i));
  }
  return out;
}

Block Block::from_bytes(std::span<const std::uint8_t> b) {
  if (b.size() != 16) throw ValidationError("block must be 16 bytes");
  Block out;
  for (int i = 0; i < 8; ++i) {
    out.lo |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    out.hi |= static_cast<std::uint64_t>(b[8 + i]) << (8 * i);
  }
  return out;
}

Block Block::from_hex(std::string_view hex) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.empty() || hex.size() > 32) throw ValidationError("seed must be 1..32 hex digits");
  Block out;
  for (char c : hex) {
    unsigned v;
    if (c >= '0' && c <= '9')
      v = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f')
      v = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F')
      v = static_cast<unsigned>(c - 'A' + 10);
    else
      throw ValidationError("invalid hex digit in seed");
    out.hi = (out.hi << 4) | (out.lo >> 60);
    out.lo = (out.lo << 4) | v;
  }
  return out;
}

std::string Block::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(32, '0');
  for (int i = 0; i < 16; ++i) {
    s[15 - i] = kDigits[(hi >> (4 * i)) & 0xf];
    s[31 - i] = kDigits[(lo >> (4 * i)) & 0xf];
  }
  return s;
}

struct Aes128::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Impl() { EVP_CIPHER_CTX_free(ctx); }
};

Aes128::Aes128(const Block& key) : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_CIPHER_CTX_new();
  auto k = key.to_bytes();
  if (impl_->ctx == nullptr || EVP_EncryptInit_ex(impl_->ctx, EVP_aes_128_ecb(), nullptr, k.data(), nullptr) != 1) {
    throw std::runtime_error("AES initialisation failed");
  }
  EVP_CIPHER_CTX_set_padding(impl_->ctx, 0);
}

Aes128::~Aes128() = default;
Aes128::Aes128(Aes128&&) noexcept = default;
Aes128& Aes128::operator=(Aes128&&) noexcept = default;

void Aes128::encrypt(std::span<const Block> in, std::span<Block> out) {
  static_assert(sizeof(Block) == 16);
  if (in.size() != out.size()) throw std::logic_error("AES in/out size mismatch");
  if (in.empty()) return;
  // Blocks are stored little-endian on the host, which is also their byte encoding.
  int outl = 0;
  auto* dst = reinterpret_cast<unsigned char*>(out.data());
  const auto* src = reinterpret_cast<const unsigned char*>(in.data());
  if (EVP_EncryptUpdate(impl_->ctx, dst, &outl, src, static_cast<int>(in.size() * 16)) != 1) {
    throw std::runtime_error("AES encryption failed");
  }
}

Block Aes128::encrypt(const Block& in) {
  Block out;
  encrypt(std::span<const Block>(&in, 1), std::span<Block>(&out, 1));
  return out;
}

Aes128& fixed_key_aes() {
  thread_local Aes128 aes(Block{0x6f626c6976676d5fULL, 0x67676d2d70726721ULL});
  return aes;
}

Block os_random_block() {
  std::array<std::uint8_t, 16> b{};
  if (RAND_bytes(b.data(), static_cast<int>(b.size())) != 1) throw std::runtime_error("RAND_bytes failed");
  return Block::from_bytes(b);
}

Prg::Prg(const Block& seed, std::uint64_t stream) : aes_(seed), stream_(stream) {}

void Prg::refill() {
  std::array<Block, 64> ctr{};
  for (auto& c : ctr) c = Block{counter_++, stream_};
  aes_.encrypt(ctr, buf_);
  pos_ = 0;
}

Block Prg::next_block() {
  if (pos_ == buf_.size()) refill();
  return buf_[pos_++];
}

std::uint64_t Prg::next_u64() { return next_block().lo; }

std::uint64_t Prg::uniform(std::uint64_t bound) {
  if (bound == 0) throw std::logic_error("uniform bound must be positive");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    auto r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

void Prg::fill(std::span<std::uint32_t> words) {
  std::size_t i = 0;
  while (i < words.size()) {
    auto b = next_block();
    std::uint32_t parts[4] = {static_cast<std::uint32_t>(b.lo), static_cast<std::uint32_t>(b.lo >> 32),
                              static_cast<std::uint32_t>(b.hi), static_cast<std::uint32_t>(b.hi >> 32)};
    for (int k = 0; k < 4 && i < words.size(); ++k) words[i++] = parts[k];
  }
}

BitVector Prg::random_bits(std::size_t len) {
  BitVector v(len);
  fill(v.mutable_words());
  v.clear_tail();
  return v;
}

BitVector Prf::eval(std::uint64_t index, std::size_t nbits) {
  BitVector out(nbits);
  auto words = out.mutable_words();
  std::size_t nblocks = (words.size() + 3) / 4;
  std::vector<Block> in(nblocks), enc(nblocks);
  for (std::size_t lane = 0; lane < nblocks; ++lane) in[lane] = Block{index, lane};
  aes_.encrypt(in, enc);
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto& b = enc[w / 4];
    std::uint64_t half = (w % 4) < 2 ? b.lo : b.hi;
    words[w] = static_cast<std::uint32_t>(half >> (32 * (w % 2)));
  }
  out.clear_tail();
  return out;
}

std::vector<std::uint32_t> random_permutation(std::size_t n, Prg& prg) {
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  for (std::size_t i = n; i > 1; --i) {
    auto j = static_cast<std::size_t>(prg.uniform(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace oblivgm
