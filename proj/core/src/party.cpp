#include "oblivgm/party.hpp"

#include <set>

#include "oblivgm/errors.hpp"

namespace oblivgm {

Bytes pack_bits(const BitVector& v) {
  ByteWriter w;
  w.words(v.words());
  return std::move(w).take();
}

BitVector unpack_bits(std::span<const std::uint8_t> payload, std::size_t nbits) {
  const auto nwords = BitVector::word_count(nbits);
  if (payload.size() != nwords * 4) throw ProtocolError("payload size does not match the expected bit length");
  std::vector<std::uint32_t> words(nwords);
  ByteReader r(payload);
  r.words(words);
  return BitVector::from_words(std::move(words), nbits);
}

Party::Party(int index, PartyLinks links, std::uint32_t session)
    : index_(index), links_(std::move(links)), session_(session) {
  if (index < 1 || index > 3) throw ValidationError("party index must be 1, 2 or 3");
  if (!links_.next || !links_.prev) throw ValidationError("party needs links to both neighbours");
}

Party::~Party() = default;

void Party::abort() {
  if (links_.next) links_.next->close();
  if (links_.prev) links_.prev->close();
}

LinkPtr& Party::link_to(int party) {
  if (party == next_party(index_)) return links_.next;
  if (party == prev_party(index_)) return links_.prev;
  throw ValidationError("no link from party " + std::to_string(index_) + " to " + std::to_string(party));
}

ZeroShareContext& Party::zero() {
  if (!zero_) throw ProtocolError("session keys not set up");
  return *zero_;
}

void Party::setup(Prg& rng) {
  PhaseScope scope(*this, "setup");
  const Block own_key = rng.next_block();
  const Block own_seed = rng.next_block();
  begin_round();
  ByteWriter w;
  for (const auto& b : {own_key, own_seed}) w.raw(b.to_bytes());
  send(next_party(index_), OpTag::Setup, std::move(w).take());
  auto got = recv(prev_party(index_), OpTag::Setup);
  if (got.size() != 32) throw ProtocolError("malformed setup message");
  const Block prev_key = Block::from_bytes(std::span(got).subspan(0, 16));
  const Block prev_seed = Block::from_bytes(std::span(got).subspan(16, 16));

  // Party i samples s_{i,i+1}; the previous party's seed is s_{i-1,i}.
  ShuffleSeeds seeds;
  switch (index_) {
    case 1:
      seeds.s12 = own_seed;
      seeds.s31 = prev_seed;
      break;
    case 2:
      seeds.s23 = own_seed;
      seeds.s12 = prev_seed;
      break;
    default:
      seeds.s31 = own_seed;
      seeds.s23 = prev_seed;
      break;
  }
  install_keys(own_key, prev_key, seeds);
}

void Party::install_keys(const Block& own_key, const Block& prev_key, const ShuffleSeeds& seeds) {
  int held = seeds.s12.has_value() + seeds.s23.has_value() + seeds.s31.has_value();
  bool ok = held == 2 && (index_ == 1   ? seeds.s12 && seeds.s31
                          : index_ == 2 ? seeds.s12 && seeds.s23
                                        : seeds.s23 && seeds.s31);
  if (!ok) throw ValidationError("shuffle seeds do not match the pairwise rule for party " + std::to_string(index_));
  zero_.emplace(own_key, prev_key);
  seeds_ = seeds;
  shuffle_invocations_ = 0;
}

void Party::set_phase(std::string phase) {
  const auto now = std::chrono::steady_clock::now();
  stats_[phase_].nanos += static_cast<std::uint64_t>(std::chrono::nanoseconds(now - phase_start_).count());
  phase_start_ = now;
  phase_ = std::move(phase);
}

void Party::reset_stats() {
  stats_.clear();
  phase_start_ = std::chrono::steady_clock::now();
}

std::uint32_t Party::begin_round() {
  ++stats_[phase_].rounds;
  return ++round_;
}

void Party::send(int to, OpTag op, Bytes payload) {
  auto bytes = encode_frame(Frame{session_, round_, op, std::move(payload)});
  auto& s = stats_[phase_];
  s.bytes_sent += bytes.size();
  ++s.messages;
  if (recording_) transcript_.push_back(bytes);
  link_to(to)->send(std::move(bytes));
}

Bytes Party::recv(int from, OpTag op) {
  auto bytes = link_to(from)->recv();
  if (recording_) transcript_.push_back(bytes);
  auto f = decode_frame(bytes);
  if (f.session != session_) throw ProtocolError("frame from another session");
  if (f.round != round_ || f.op != op) {
    throw ProtocolError("round skew: party " + std::to_string(index_) + " expected round " + std::to_string(round_) +
                        " op " + std::to_string(static_cast<int>(op)) + ", got round " + std::to_string(f.round) +
                        " op " + std::to_string(static_cast<int>(f.op)));
  }
  return std::move(f.payload);
}

SharedBitVector Party::reshare(const BitVector& additive) {
  return std::move(reshare_many({additive}).front());
}

std::vector<SharedBitVector> Party::reshare_many(const std::vector<BitVector>& additive) {
  BitVector packed;
  for (const auto& v : additive) packed.append(v);
  packed ^= zero().next(packed.size());
  begin_round();
  send(next_party(index_), OpTag::Reshare, pack_bits(packed));
  auto got = unpack_bits(recv(prev_party(index_), OpTag::Reshare), packed.size());
  std::vector<SharedBitVector> out;
  out.reserve(additive.size());
  std::size_t off = 0;
  for (const auto& v : additive) {
    out.emplace_back(index_, got.slice(off, v.size()), packed.slice(off, v.size()));
    off += v.size();
  }
  return out;
}

SharedBitVector Party::and_gate(const SharedBitVector& x, const SharedBitVector& y) {
  return reshare(and_local(x, y));
}

BitVector Party::open(const SharedBitVector& x) {
  if (x.party != index_) throw ValidationError("share belongs to another party");
  begin_round();
  send(next_party(index_), OpTag::Open, pack_bits(x.a));
  auto got = unpack_bits(recv(prev_party(index_), OpTag::Open), x.size());
  auto value = x.a ^ x.b ^ got;
  open_log_.push_back(value);
  return value;
}

CommStats Party::total_stats() const {
  CommStats t;
  for (const auto& [_, s] : stats_) {
    t.bytes_sent += s.bytes_sent;
    t.messages += s.messages;
    t.rounds += s.rounds;
    t.nanos += s.nanos;
  }
  return t;
}

Trio make_local_trio(std::uint32_t session) {
  auto ring = make_memory_ring();
  Trio trio;
  for (int i = 0; i < 3; ++i) trio[i] = std::make_unique<Party>(i + 1, std::move(ring[i]), session);
  return trio;
}

Trio setup_session(const std::array<PartyConfig, 3>& configs) {
  std::set<int> seen;
  for (const auto& c : configs) {
    if (c.index < 1 || c.index > 3) throw ValidationError("party index must be 1, 2 or 3");
    if (!seen.insert(c.index).second) throw ValidationError("duplicate party index " + std::to_string(c.index));
    if (c.session != configs[0].session) throw ValidationError("parties disagree on the session id");
  }
  auto trio = make_local_trio(configs[0].session);
  std::array<Block, 3> seeds;
  for (const auto& c : configs) seeds[c.index - 1] = c.seed;
  run_trio(trio, [&](Party& p) {
    Prg rng(seeds[p.index() - 1], 0x5e7);
    p.setup(rng);
  });
  return trio;
}

}  // namespace oblivgm
