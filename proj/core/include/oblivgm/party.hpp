#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "oblivgm/net.hpp"
#include "oblivgm/rss.hpp"
#include "oblivgm/shuffle.hpp"

namespace oblivgm {

struct CommStats {
  std::uint64_t bytes_sent = 0;
  std::uint64_t messages = 0;
  std::uint64_t rounds = 0;
  std::uint64_t nanos = 0;  // wall time with this phase innermost
};

/// One protocol participant. Every communicating step advances a round counter
/// at all three parties; frames carry (session, round, op) and are checked on receipt.
class Party {
 public:
  Party(int index, PartyLinks links, std::uint32_t session);
  ~Party();
  Party(const Party&) = delete;
  Party& operator=(const Party&) = delete;

  int index() const { return index_; }
  std::uint32_t session() const { return session_; }

  /// Samples k_i and s_{i,i+1}, sends both to the next party and receives the previous party's pair.
  void setup(Prg& rng);
  void install_keys(const Block& own_key, const Block& prev_key, const ShuffleSeeds& seeds);
  bool ready() const { return zero_.has_value(); }

  ZeroShareContext& zero();
  const ShuffleSeeds& shuffle_seeds() const { return seeds_; }
  std::uint64_t next_shuffle_invocation() { return shuffle_invocations_++; }

  std::uint32_t begin_round();
  std::uint32_t round() const { return round_; }
  void send(int to, OpTag op, Bytes payload);
  Bytes recv(int from, OpTag op);

  /// Re-shares an additive 3-out-of-3 sharing into RSS with one message to the next party.
  SharedBitVector reshare(const BitVector& additive);
  /// One message carrying all vectors back to back.
  std::vector<SharedBitVector> reshare_many(const std::vector<BitVector>& additive);
  SharedBitVector and_gate(const SharedBitVector& x, const SharedBitVector& y);
  BitVector open(const SharedBitVector& x);

  void set_phase(std::string phase);
  const std::string& phase() const { return phase_; }
  const std::map<std::string, CommStats>& stats() const { return stats_; }
  CommStats total_stats() const;
  void reset_stats();

  void record_transcript(bool on) { recording_ = on; }
  const std::vector<Bytes>& transcript() const { return transcript_; }
  /// Every value this party has opened, in order.
  const std::vector<BitVector>& open_log() const { return open_log_; }

  /// Closes both links so blocked peers fail fast.
  void abort();

 private:
  LinkPtr& link_to(int party);

  int index_;
  PartyLinks links_;
  std::uint32_t session_;
  std::uint32_t round_ = 0;
  std::optional<ZeroShareContext> zero_;
  ShuffleSeeds seeds_;
  std::uint64_t shuffle_invocations_ = 0;
  std::string phase_ = "setup";
  std::chrono::steady_clock::time_point phase_start_ = std::chrono::steady_clock::now();
  std::map<std::string, CommStats> stats_;
  bool recording_ = false;
  std::vector<Bytes> transcript_;
  std::vector<BitVector> open_log_;
};

/// Sets the phase for the lifetime of the scope.
class PhaseScope {
 public:
  PhaseScope(Party& p, std::string phase) : p_(p), saved_(p.phase()) { p_.set_phase(std::move(phase)); }
  ~PhaseScope() { p_.set_phase(saved_); }
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  Party& p_;
  std::string saved_;
};

struct PartyConfig {
  int index = 1;
  std::uint32_t session = 1;
  Block seed;
};

using Trio = std::array<std::unique_ptr<Party>, 3>;

/// Three parties joined by an in-process ring, without key setup.
Trio make_local_trio(std::uint32_t session);

/// In-process session: ring, then key and seed exchange. Indices must be distinct.
Trio setup_session(const std::array<PartyConfig, 3>& configs);

/// Runs fn(party) for the three parties on separate threads and returns the
/// results in party order. The first failure aborts every party and is rethrown.
template <typename Fn>
auto run_trio(std::array<Party*, 3> parties, Fn&& fn) {
  using R = decltype(fn(*parties[0]));
  std::array<std::exception_ptr, 3> errors;
  std::atomic<int> first{-1};
  auto body = [&](int i, auto* slot) {
    try {
      if constexpr (std::is_void_v<R>) {
        fn(*parties[i]);
      } else {
        *slot = fn(*parties[i]);
      }
    } catch (...) {
      errors[i] = std::current_exception();
      int none = -1;
      first.compare_exchange_strong(none, i);
      for (auto* p : parties) p->abort();
    }
  };
  if constexpr (std::is_void_v<R>) {
    std::array<std::thread, 3> threads;
    for (int i = 0; i < 3; ++i) threads[i] = std::thread(body, i, static_cast<int*>(nullptr));
    for (auto& t : threads) t.join();
    if (first >= 0) std::rethrow_exception(errors[first]);
  } else {
    std::array<std::optional<R>, 3> results;
    std::array<std::thread, 3> threads;
    for (int i = 0; i < 3; ++i) threads[i] = std::thread(body, i, &results[i]);
    for (auto& t : threads) t.join();
    if (first >= 0) std::rethrow_exception(errors[first]);
    return std::array<R, 3>{std::move(*results[0]), std::move(*results[1]), std::move(*results[2])};
  }
}

template <typename Fn>
auto run_trio(Trio& trio, Fn&& fn) {
  return run_trio(std::array<Party*, 3>{trio[0].get(), trio[1].get(), trio[2].get()}, std::forward<Fn>(fn));
}

Bytes pack_bits(const BitVector& v);
BitVector unpack_bits(std::span<const std::uint8_t> payload, std::size_t nbits);

}  // namespace oblivgm
