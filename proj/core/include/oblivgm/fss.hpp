#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "oblivgm/bit_vector.hpp"
#include "oblivgm/bytes.hpp"
#include "oblivgm/crypto.hpp"
#include "oblivgm/predicate.hpp"

// Two-party function secret sharing over a GGM tree, output group Z2.
//
// DPF keys share [x == alpha]; DCF keys share [x < alpha] (optionally
// complemented); interval keys are a pair of DCF keys whose outputs XOR to
// [lo <= x < hi]. DPF and DCF keys have the same byte layout so that
// equality and single-sided predicates cannot be told apart by size.
namespace oblivgm::fss {

inline constexpr unsigned kMaxDomainBits = 32;

enum class KeyTag : std::uint8_t { Dpf = 1, Dcf = 2, Interval = 3 };

struct CorrectionWord {
  Block seed;
  bool t_left = false;
  bool t_right = false;
  bool value = false;  // DCF value correction; unused by DPF
  friend bool operator==(const CorrectionWord&, const CorrectionWord&) = default;
};

struct TreeKey {
  std::uint8_t party_bit = 0;
  std::uint8_t domain_bits = 0;
  Block root;
  std::vector<CorrectionWord> levels;
  bool final_correction = false;
  bool output_flip = false;  // DCF only: the two keys' flips XOR to the complement flag
  friend bool operator==(const TreeKey&, const TreeKey&) = default;
};

struct DpfKey : TreeKey {};
struct DcfKey : TreeKey {};

struct IntervalKey {
  DcfKey lower;  // shares [x < lo]
  DcfKey upper;  // shares [x < hi]
  bool lower_closed = true;
  bool upper_closed = true;
  friend bool operator==(const IntervalKey&, const IntervalKey&) = default;
};

using FssKey = std::variant<DpfKey, DcfKey, IntervalKey>;
using KeyPair = std::pair<FssKey, FssKey>;

/// Three independent key pairs for one predicate; pair j is split across the
/// parties so that the pair meets the replicated share index j.
struct FssKeyBundle {
  PredicateKind kind = PredicateKind::Equal;
  std::array<KeyPair, 3> pairs;
};

/// Smallest tree depth covering n points (at least 1).
unsigned domain_bits_for(std::uint64_t n);

std::pair<DpfKey, DpfKey> dpf_gen(std::uint64_t alpha, std::uint64_t domain_size, Prg& rng);
/// Keys for [x < alpha]; alpha must lie inside the domain.
std::pair<DcfKey, DcfKey> dcf_gen(std::uint64_t alpha, std::uint64_t domain_size, Prg& rng);
/// Keys for [x < threshold] ^ invert over a 2^domain_bits domain; threshold may equal 2^domain_bits.
std::pair<DcfKey, DcfKey> dcf_gen_threshold(std::uint64_t threshold, unsigned domain_bits, bool invert, Prg& rng);
/// Keys for a <= x <= a_prime (ends adjustable to open).
std::pair<IntervalKey, IntervalKey> ic_gen(std::uint64_t a, std::uint64_t a_prime, std::uint64_t domain_size, Prg& rng,
                                           bool lower_closed = true, bool upper_closed = true);

bool dpf_eval(const DpfKey& key, std::uint64_t x);
bool dcf_eval(const DcfKey& key, std::uint64_t x);
bool ic_eval(const IntervalKey& key, std::uint64_t x);
bool eval(const FssKey& key, std::uint64_t x);

/// Evaluations at 0..n-1 in one tree traversal.
BitVector full_domain_eval(const DpfKey& key, std::uint64_t n);
BitVector full_domain_eval(const DcfKey& key, std::uint64_t n);
BitVector full_domain_eval(const IntervalKey& key, std::uint64_t n);
BitVector full_domain_eval(const FssKey& key, std::uint64_t n);

/// The independently re-shared parts of a key: one mask for DPF/DCF, the
/// lower and upper prefix masks for an interval key.
std::vector<BitVector> component_masks(const FssKey& key, std::uint64_t n);
std::size_t component_count(PredicateKind kind);

unsigned domain_bits(const FssKey& key);

FssKeyBundle gen_bundle(const PredicateSpec& pred, std::uint64_t domain_size, Prg& rng);

// Serialization: tag byte, domain_bits u8, then level-ordered correction words.
void write_key(ByteWriter& out, const FssKey& key);
FssKey read_key(ByteReader& in);
std::size_t serialized_size(const FssKey& key);

}  // namespace oblivgm::fss
