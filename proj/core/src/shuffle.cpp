#include "oblivgm/shuffle.hpp"

#include "oblivgm/errors.hpp"
#include "oblivgm/party.hpp"

namespace oblivgm {

namespace {

enum Label : std::uint8_t { kPerm = 0, kMaskT = 1, kMaskR = 2 };

Prg derived_stream(const Block& seed, std::uint64_t invocation, std::uint32_t table_id, std::uint8_t label) {
  Aes128 aes(seed);
  return Prg(aes.encrypt(Block{invocation, (static_cast<std::uint64_t>(table_id) << 8) | label}));
}

std::vector<BitVector> permute(const std::vector<BitVector>& in, const std::vector<std::uint32_t>& perm) {
  std::vector<BitVector> out;
  out.reserve(in.size());
  for (auto src : perm) out.push_back(in[src]);
  return out;
}

void xor_rows(std::vector<BitVector>& dst, const std::vector<BitVector>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
}

struct Dims {
  std::size_t rows;
  std::size_t width;
};

Bytes pack_tables(const std::vector<Dims>& dims, const std::vector<std::vector<BitVector>>& tables) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) {
    w.u32(static_cast<std::uint32_t>(d.rows));
    w.u32(static_cast<std::uint32_t>(d.width));
  }
  BitVector all;
  for (const auto& t : tables)
    for (const auto& r : t) all.append(r);
  w.words(all.words());
  return std::move(w).take();
}

std::vector<std::vector<BitVector>> unpack_tables(const std::vector<Dims>& dims, const Bytes& payload) {
  ByteReader r(payload);
  if (r.u32() != dims.size()) throw ProtocolError("shuffle table count differs across parties");
  std::size_t total = 0;
  for (auto d : dims) {
    if (r.u32() != d.rows || r.u32() != d.width) throw ProtocolError("shuffle table dimensions differ across parties");
    total += d.rows * d.width;
  }
  auto bits = unpack_bits(r.raw(r.remaining()), total);
  std::vector<std::vector<BitVector>> out(dims.size());
  std::size_t off = 0;
  for (std::size_t t = 0; t < dims.size(); ++t) {
    for (std::size_t i = 0; i < dims[t].rows; ++i) {
      out[t].push_back(bits.slice(off, dims[t].width));
      off += dims[t].width;
    }
  }
  return out;
}

}  // namespace

std::array<ShuffleSeeds, 3> ShuffleSeeds::deal(Prg& rng) {
  auto s12 = rng.next_block();
  auto s23 = rng.next_block();
  auto s31 = rng.next_block();
  return deal(s12, s23, s31);
}

std::array<ShuffleSeeds, 3> ShuffleSeeds::deal(const Block& s12, const Block& s23, const Block& s31) {
  std::array<ShuffleSeeds, 3> out;
  out[0].s12 = s12;
  out[0].s31 = s31;
  out[1].s12 = s12;
  out[1].s23 = s23;
  out[2].s23 = s23;
  out[2].s31 = s31;
  return out;
}

std::vector<std::uint32_t> derive_permutation(const Block& seed, std::uint64_t invocation, std::uint32_t table_id,
                                              std::size_t rows) {
  auto prg = derived_stream(seed, invocation, table_id, kPerm);
  return random_permutation(rows, prg);
}

std::vector<BitVector> derive_mask_table(const Block& seed, std::uint64_t invocation, std::uint32_t table_id,
                                         std::uint8_t label, std::size_t rows, std::size_t width) {
  auto prg = derived_stream(seed, invocation, table_id, label);
  std::vector<BitVector> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) out.push_back(prg.random_bits(width));
  return out;
}

std::vector<std::uint32_t> composed_permutation(const Block& s12, const Block& s23, const Block& s31,
                                                std::uint64_t invocation, std::uint32_t table_id, std::size_t rows) {
  auto p12 = derive_permutation(s12, invocation, table_id, rows);
  auto p31 = derive_permutation(s31, invocation, table_id, rows);
  auto p23 = derive_permutation(s23, invocation, table_id, rows);
  std::vector<std::uint32_t> out(rows);
  for (std::size_t i = 0; i < rows; ++i) out[i] = p12[p31[p23[i]]];
  return out;
}

std::vector<MatchTable> sec_shuffle(Party& party, std::vector<MatchTable> tables) {
  std::vector<Dims> dims;
  bool any = false;
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      if (r.party != party.index()) throw ValidationError("shuffle row belongs to another party");
      if (r.size() != t.width()) throw ValidationError("shuffle table rows differ in width");
    }
    dims.push_back({t.size(), t.width()});
    any |= t.size() > 0;
  }
  if (!any) return tables;

  const auto inv = party.next_shuffle_invocation();
  const auto& seeds = party.shuffle_seeds();
  const int me = party.index();
  const auto ntables = tables.size();

  auto perm = [&](const std::optional<Block>& s, std::size_t t) {
    return derive_permutation(*s, inv, static_cast<std::uint32_t>(t), dims[t].rows);
  };
  auto mask = [&](const std::optional<Block>& s, std::size_t t, std::uint8_t label) {
    return derive_mask_table(*s, inv, static_cast<std::uint32_t>(t), label, dims[t].rows, dims[t].width);
  };
  auto column = [&](std::size_t t, bool second) {
    std::vector<BitVector> out;
    for (const auto& r : tables[t].rows) out.push_back(second ? r.b : r.a);
    return out;
  };

  std::vector<MatchTable> out(ntables);
  auto emit = [&](std::size_t t, std::vector<BitVector> a, std::vector<BitVector> b) {
    for (std::size_t i = 0; i < a.size(); ++i) out[t].rows.emplace_back(me, std::move(a[i]), std::move(b[i]));
  };

  // Round 1: party 1 sends X1 to party 2.
  party.begin_round();
  std::vector<std::vector<BitVector>> x1(ntables);
  if (me == 1) {
    for (std::size_t t = 0; t < ntables; ++t) {
      auto d = column(t, false);
      xor_rows(d, column(t, true));
      xor_rows(d, mask(seeds.s12, t, kMaskT));
      auto inner = permute(d, perm(seeds.s12, t));
      xor_rows(inner, mask(seeds.s31, t, kMaskT));
      x1[t] = permute(inner, perm(seeds.s31, t));
    }
    party.send(2, OpTag::Shuffle, pack_tables(dims, x1));
  } else if (me == 2) {
    x1 = unpack_tables(dims, party.recv(1, OpTag::Shuffle));
  }

  // Round 2: party 2 sends Y1 and C1 to party 3.
  party.begin_round();
  std::vector<std::vector<BitVector>> y1(ntables), c1(ntables);
  if (me == 2) {
    for (std::size_t t = 0; t < ntables; ++t) {
      auto d3 = column(t, true);
      xor_rows(d3, mask(seeds.s12, t, kMaskT));
      y1[t] = permute(d3, perm(seeds.s12, t));
      auto x = x1[t];
      xor_rows(x, mask(seeds.s23, t, kMaskT));
      c1[t] = permute(x, perm(seeds.s23, t));
      xor_rows(c1[t], mask(seeds.s12, t, kMaskR));
    }
    auto both = y1;
    both.insert(both.end(), c1.begin(), c1.end());
    auto dims2 = dims;
    dims2.insert(dims2.end(), dims.begin(), dims.end());
    party.send(3, OpTag::Shuffle, pack_tables(dims2, both));
  } else if (me == 3) {
    auto dims2 = dims;
    dims2.insert(dims2.end(), dims.begin(), dims.end());
    auto both = unpack_tables(dims2, party.recv(2, OpTag::Shuffle));
    for (std::size_t t = 0; t < ntables; ++t) {
      y1[t] = std::move(both[t]);
      c1[t] = std::move(both[ntables + t]);
    }
  }

  // Round 3: party 3 sends R3 to party 2.
  party.begin_round();
  std::vector<std::vector<BitVector>> r3(ntables);
  if (me == 3) {
    for (std::size_t t = 0; t < ntables; ++t) {
      auto y = y1[t];
      xor_rows(y, mask(seeds.s31, t, kMaskT));
      auto inner = permute(y, perm(seeds.s31, t));
      xor_rows(inner, mask(seeds.s23, t, kMaskT));
      auto c2 = permute(inner, perm(seeds.s23, t));
      xor_rows(c2, mask(seeds.s31, t, kMaskR));
      xor_rows(c2, c1[t]);
      r3[t] = std::move(c2);
    }
    party.send(2, OpTag::Shuffle, pack_tables(dims, r3));
  } else if (me == 2) {
    r3 = unpack_tables(dims, party.recv(3, OpTag::Shuffle));
  }

  // Party 1 holds (R1, R2), party 2 (R2, R3), party 3 (R3, R1).
  for (std::size_t t = 0; t < ntables; ++t) {
    if (dims[t].rows == 0) continue;
    switch (me) {
      case 1: emit(t, mask(seeds.s31, t, kMaskR), mask(seeds.s12, t, kMaskR)); break;
      case 2: emit(t, mask(seeds.s12, t, kMaskR), std::move(r3[t])); break;
      default: emit(t, std::move(r3[t]), mask(seeds.s31, t, kMaskR)); break;
    }
  }
  return out;
}

MatchTable sec_shuffle(Party& party, MatchTable table) {
  std::vector<MatchTable> v;
  v.push_back(std::move(table));
  return std::move(sec_shuffle(party, std::move(v)).front());
}

}  // namespace oblivgm
