#include "oblivgm/fss.hpp"

#include <bit>

#include "oblivgm/errors.hpp"

namespace oblivgm::fss {

namespace {

constexpr std::uint64_t kClearLsb = ~std::uint64_t{1};

struct Expansion {
  Block seed[2];
  bool t[2];
  bool v[2];
};

Block tweak(const Block& s, std::uint64_t j) { return Block{s.lo ^ j, s.hi}; }

Expansion split(const Block& out0, const Block& out1, const Block* out2) {
  Expansion e;
  e.t[0] = out0.lsb();
  e.t[1] = out1.lsb();
  e.seed[0] = Block{out0.lo & kClearLsb, out0.hi};
  e.seed[1] = Block{out1.lo & kClearLsb, out1.hi};
  e.v[0] = out2 != nullptr && out2->bit(0);
  e.v[1] = out2 != nullptr && out2->bit(1);
  return e;
}

// Length-expanding PRG G(s) = MMO(s^0) || MMO(s^1) [|| MMO(s^2)] under fixed-key AES.
Expansion expand(const Block& s, bool with_values) {
  Block in[3] = {tweak(s, 0), tweak(s, 1), tweak(s, 2)};
  Block out[3];
  std::size_t n = with_values ? 3 : 2;
  fixed_key_aes().encrypt(std::span<const Block>(in, n), std::span<Block>(out, n));
  for (std::size_t j = 0; j < n; ++j) out[j] ^= in[j];
  return split(out[0], out[1], with_values ? &out[2] : nullptr);
}

bool convert(const Block& s) { return (s.lo >> 1) & 1u; }

bool path_bit(std::uint64_t x, unsigned bits, unsigned level) { return (x >> (bits - 1 - level)) & 1u; }

void check_bits(unsigned bits) {
  if (bits == 0 || bits > kMaxDomainBits) throw ValidationError("FSS domain must have 1..32 bits");
}

template <class Key>
std::pair<Key, Key> tree_gen(std::uint64_t alpha, unsigned bits, bool comparison, Prg& rng) {
  Key k0, k1;
  k0.party_bit = 0;
  k1.party_bit = 1;
  k0.domain_bits = k1.domain_bits = static_cast<std::uint8_t>(bits);
  Block s[2] = {rng.next_block(), rng.next_block()};
  s[0].lo &= kClearLsb;
  s[1].lo &= kClearLsb;
  k0.root = s[0];
  k1.root = s[1];
  bool t[2] = {false, true};
  bool acc = false;  // running XOR of value shares along the alpha path

  for (unsigned i = 0; i < bits; ++i) {
    const bool a = path_bit(alpha, bits, i);
    Expansion e[2] = {expand(s[0], comparison), expand(s[1], comparison)};
    const int keep = a ? 1 : 0;
    const int lose = 1 - keep;

    CorrectionWord cw;
    cw.seed = e[0].seed[lose] ^ e[1].seed[lose];
    cw.t_left = e[0].t[0] ^ e[1].t[0] ^ a ^ true;
    cw.t_right = e[0].t[1] ^ e[1].t[1] ^ a;
    if (comparison) {
      // Leaving the path to the left means x < alpha at this bit.
      cw.value = e[0].v[lose] ^ e[1].v[lose] ^ acc ^ (lose == 0);
      acc ^= e[0].v[keep] ^ e[1].v[keep] ^ cw.value;
    }
    const bool t_keep_cw = keep == 0 ? cw.t_left : cw.t_right;
    for (int b = 0; b < 2; ++b) {
      Block next = e[b].seed[keep];
      if (t[b]) next ^= cw.seed;
      bool next_t = e[b].t[keep] ^ (t[b] && t_keep_cw);
      s[b] = next;
      t[b] = next_t;
    }
    k0.levels.push_back(cw);
    k1.levels.push_back(cw);
  }
  bool fin = convert(s[0]) ^ convert(s[1]);
  fin ^= comparison ? acc : true;
  k0.final_correction = k1.final_correction = fin;
  return {std::move(k0), std::move(k1)};
}

struct NodeState {
  Block seed;
  bool t;
  bool v;
};

bool tree_eval(const TreeKey& key, std::uint64_t x, bool comparison) {
  const unsigned bits = key.domain_bits;
  if (bits < 64 && x >= (std::uint64_t{1} << bits)) throw ValidationError("FSS evaluation point outside domain");
  Block s = key.root;
  bool t = key.party_bit != 0;
  bool v = false;
  for (unsigned i = 0; i < bits; ++i) {
    const auto& cw = key.levels[i];
    Expansion e = expand(s, comparison);
    if (t) {
      e.seed[0] ^= cw.seed;
      e.seed[1] ^= cw.seed;
      e.t[0] ^= cw.t_left;
      e.t[1] ^= cw.t_right;
    }
    const int dir = path_bit(x, bits, i) ? 1 : 0;
    if (comparison) v ^= e.v[dir] ^ (t && cw.value);
    s = e.seed[dir];
    t = e.t[dir];
  }
  bool out = convert(s) ^ (t && key.final_correction);
  if (comparison) out ^= v ^ key.output_flip;
  return out;
}

BitVector tree_full_eval(const TreeKey& key, std::uint64_t n, bool comparison) {
  const unsigned bits = key.domain_bits;
  if (n == 0) throw ValidationError("full-domain evaluation needs at least one point");
  if (bits < 64 && n > (std::uint64_t{1} << bits)) throw ValidationError("evaluation size exceeds FSS domain");

  std::vector<NodeState> level{{key.root, key.party_bit != 0, false}};
  std::vector<Block> in, out;
  for (unsigned i = 0; i < bits; ++i) {
    const unsigned remaining = bits - i - 1;
    const std::uint64_t child_count = (n + (std::uint64_t{1} << remaining) - 1) >> remaining;
    const std::size_t per = comparison ? 3 : 2;
    in.resize(level.size() * per);
    out.resize(in.size());
    for (std::size_t k = 0; k < level.size(); ++k)
      for (std::size_t j = 0; j < per; ++j) in[k * per + j] = tweak(level[k].seed, j);
    fixed_key_aes().encrypt(in, out);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] ^= in[k];

    const auto& cw = key.levels[i];
    std::vector<NodeState> next;
    next.reserve(static_cast<std::size_t>(child_count));
    for (std::size_t k = 0; k < level.size(); ++k) {
      Expansion e = split(out[k * per], out[k * per + 1], comparison ? &out[k * per + 2] : nullptr);
      const bool t = level[k].t;
      if (t) {
        e.seed[0] ^= cw.seed;
        e.seed[1] ^= cw.seed;
        e.t[0] ^= cw.t_left;
        e.t[1] ^= cw.t_right;
      }
      for (int dir = 0; dir < 2; ++dir) {
        if (next.size() == child_count) break;
        bool v = level[k].v;
        if (comparison) v ^= e.v[dir] ^ (t && cw.value);
        next.push_back({e.seed[dir], e.t[dir], v});
      }
    }
    level = std::move(next);
  }

  BitVector result(static_cast<std::size_t>(n));
  for (std::size_t x = 0; x < level.size(); ++x) {
    const auto& node = level[x];
    bool bit = convert(node.seed) ^ (node.t && key.final_correction);
    if (comparison) bit ^= node.v ^ key.output_flip;
    if (bit) result.set(x, true);
  }
  return result;
}

void write_tree(ByteWriter& out, KeyTag tag, const TreeKey& key) {
  out.u8(static_cast<std::uint8_t>(tag));
  out.u8(key.domain_bits);
  out.u8(key.party_bit);
  out.raw(key.root.to_bytes());
  for (const auto& cw : key.levels) {
    out.raw(cw.seed.to_bytes());
    out.u8(static_cast<std::uint8_t>(cw.t_left | (cw.t_right << 1) | (cw.value << 2)));
  }
  out.u8(static_cast<std::uint8_t>(key.final_correction | (key.output_flip << 1)));
}

template <class Key>
Key read_tree_body(ByteReader& in) {
  Key key;
  key.domain_bits = in.u8();
  check_bits(key.domain_bits);
  key.party_bit = in.u8();
  if (key.party_bit > 1) throw ValidationError("FSS key party bit must be 0 or 1");
  key.root = Block::from_bytes(in.raw(16));
  key.levels.resize(key.domain_bits);
  for (auto& cw : key.levels) {
    cw.seed = Block::from_bytes(in.raw(16));
    auto flags = in.u8();
    cw.t_left = flags & 1u;
    cw.t_right = flags & 2u;
    cw.value = flags & 4u;
  }
  auto fin = in.u8();
  key.final_correction = fin & 1u;
  key.output_flip = fin & 2u;
  return key;
}

DcfKey read_dcf(ByteReader& in) {
  if (static_cast<KeyTag>(in.u8()) != KeyTag::Dcf) throw ValidationError("expected a DCF key");
  return read_tree_body<DcfKey>(in);
}

}  // namespace

unsigned domain_bits_for(std::uint64_t n) {
  if (n == 0) throw ValidationError("empty FSS domain");
  unsigned bits = n <= 1 ? 1u : static_cast<unsigned>(std::bit_width(n - 1));
  check_bits(bits);
  return bits;
}

std::pair<DpfKey, DpfKey> dpf_gen(std::uint64_t alpha, std::uint64_t domain_size, Prg& rng) {
  auto bits = domain_bits_for(domain_size);
  if (alpha >= domain_size) throw ValidationError("DPF point outside domain");
  return tree_gen<DpfKey>(alpha, bits, false, rng);
}

std::pair<DcfKey, DcfKey> dcf_gen(std::uint64_t alpha, std::uint64_t domain_size, Prg& rng) {
  auto bits = domain_bits_for(domain_size);
  if (alpha >= domain_size) throw ValidationError("DCF threshold outside domain");
  return dcf_gen_threshold(alpha, bits, false, rng);
}

std::pair<DcfKey, DcfKey> dcf_gen_threshold(std::uint64_t threshold, unsigned bits, bool invert, Prg& rng) {
  check_bits(bits);
  const std::uint64_t size = std::uint64_t{1} << bits;
  if (threshold > size) throw ValidationError("DCF threshold outside domain");
  // [x < 2^bits] is constant one: the complement of [x < 0].
  if (threshold == size) {
    threshold = 0;
    invert = !invert;
  }
  auto keys = tree_gen<DcfKey>(threshold, bits, true, rng);
  bool r = rng.next_bit();
  keys.first.output_flip = r;
  keys.second.output_flip = r ^ invert;
  return keys;
}

std::pair<IntervalKey, IntervalKey> ic_gen(std::uint64_t a, std::uint64_t a_prime, std::uint64_t domain_size, Prg& rng,
                                           bool lower_closed, bool upper_closed) {
  auto bits = domain_bits_for(domain_size);
  if (a > a_prime) throw ValidationError("interval lower bound exceeds upper bound");
  if (a_prime >= domain_size) throw ValidationError("interval bound outside domain");
  auto spec = PredicateSpec::interval(a, a_prime, lower_closed, upper_closed);
  auto lower = dcf_gen_threshold(spec.lo, bits, false, rng);
  auto upper = dcf_gen_threshold(spec.hi, bits, false, rng);
  IntervalKey k0{lower.first, upper.first, lower_closed, upper_closed};
  IntervalKey k1{lower.second, upper.second, lower_closed, upper_closed};
  return {std::move(k0), std::move(k1)};
}

bool dpf_eval(const DpfKey& key, std::uint64_t x) { return tree_eval(key, x, false); }
bool dcf_eval(const DcfKey& key, std::uint64_t x) { return tree_eval(key, x, true); }
bool ic_eval(const IntervalKey& key, std::uint64_t x) { return dcf_eval(key.lower, x) ^ dcf_eval(key.upper, x); }

bool eval(const FssKey& key, std::uint64_t x) {
  return std::visit(
      [x](const auto& k) -> bool {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, DpfKey>)
          return dpf_eval(k, x);
        else if constexpr (std::is_same_v<K, DcfKey>)
          return dcf_eval(k, x);
        else
          return ic_eval(k, x);
      },
      key);
}

BitVector full_domain_eval(const DpfKey& key, std::uint64_t n) { return tree_full_eval(key, n, false); }
BitVector full_domain_eval(const DcfKey& key, std::uint64_t n) { return tree_full_eval(key, n, true); }
BitVector full_domain_eval(const IntervalKey& key, std::uint64_t n) {
  return full_domain_eval(key.lower, n) ^ full_domain_eval(key.upper, n);
}
BitVector full_domain_eval(const FssKey& key, std::uint64_t n) {
  return std::visit([n](const auto& k) { return full_domain_eval(k, n); }, key);
}

std::vector<BitVector> component_masks(const FssKey& key, std::uint64_t n) {
  if (const auto* ic = std::get_if<IntervalKey>(&key)) {
    return {full_domain_eval(ic->lower, n), full_domain_eval(ic->upper, n)};
  }
  return {full_domain_eval(key, n)};
}

std::size_t component_count(PredicateKind kind) { return kind == PredicateKind::Interval ? 2 : 1; }

unsigned domain_bits(const FssKey& key) {
  return std::visit(
      [](const auto& k) -> unsigned {
        if constexpr (std::is_same_v<std::decay_t<decltype(k)>, IntervalKey>)
          return k.lower.domain_bits;
        else
          return k.domain_bits;
      },
      key);
}

FssKeyBundle gen_bundle(const PredicateSpec& pred, std::uint64_t domain_size, Prg& rng) {
  pred.validate(domain_size);
  const unsigned bits = domain_bits_for(domain_size);
  FssKeyBundle bundle;
  bundle.kind = pred.kind;
  for (auto& pair : bundle.pairs) {
    switch (pred.kind) {
      case PredicateKind::Equal: {
        auto [k0, k1] = dpf_gen(pred.lo, domain_size, rng);
        pair = {std::move(k0), std::move(k1)};
        break;
      }
      case PredicateKind::Less:
      case PredicateKind::LessEq: {
        auto [k0, k1] = dcf_gen_threshold(pred.hi, bits, false, rng);
        pair = {std::move(k0), std::move(k1)};
        break;
      }
      case PredicateKind::Greater:
      case PredicateKind::GreaterEq: {
        auto [k0, k1] = dcf_gen_threshold(pred.lo, bits, true, rng);
        pair = {std::move(k0), std::move(k1)};
        break;
      }
      case PredicateKind::Interval: {
        auto lower = dcf_gen_threshold(pred.lo, bits, false, rng);
        auto upper = dcf_gen_threshold(pred.hi, bits, false, rng);
        pair = {IntervalKey{lower.first, upper.first, pred.lower_closed, pred.upper_closed},
                IntervalKey{lower.second, upper.second, pred.lower_closed, pred.upper_closed}};
        break;
      }
    }
  }
  return bundle;
}

void write_key(ByteWriter& out, const FssKey& key) {
  std::visit(
      [&out](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, DpfKey>) {
          write_tree(out, KeyTag::Dpf, k);
        } else if constexpr (std::is_same_v<K, DcfKey>) {
          write_tree(out, KeyTag::Dcf, k);
        } else {
          out.u8(static_cast<std::uint8_t>(KeyTag::Interval));
          out.u8(k.lower.domain_bits);
          out.u8(static_cast<std::uint8_t>(k.lower_closed | (k.upper_closed << 1)));
          write_tree(out, KeyTag::Dcf, k.lower);
          write_tree(out, KeyTag::Dcf, k.upper);
        }
      },
      key);
}

FssKey read_key(ByteReader& in) {
  auto tag = static_cast<KeyTag>(in.u8());
  switch (tag) {
    case KeyTag::Dpf:
      return read_tree_body<DpfKey>(in);
    case KeyTag::Dcf:
      return read_tree_body<DcfKey>(in);
    case KeyTag::Interval: {
      auto bits = in.u8();
      auto flags = in.u8();
      IntervalKey k;
      k.lower_closed = flags & 1u;
      k.upper_closed = flags & 2u;
      k.lower = read_dcf(in);
      k.upper = read_dcf(in);
      if (k.lower.domain_bits != bits || k.upper.domain_bits != bits)
        throw ValidationError("interval sub-keys disagree on domain size");
      return k;
    }
  }
  throw ValidationError("unknown FSS key tag");
}

std::size_t serialized_size(const FssKey& key) {
  ByteWriter w;
  write_key(w, key);
  return w.size();
}

}  // namespace oblivgm::fss
