#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "oblivgm/crypto.hpp"
#include "oblivgm/rss.hpp"

namespace oblivgm {

class Party;

/// Pairwise seeds: party 1 holds s12 and s31, party 2 s12 and s23, party 3 s23 and s31.
struct ShuffleSeeds {
  std::optional<Block> s12;
  std::optional<Block> s23;
  std::optional<Block> s31;

  /// Seeds for all three parties from one generator (tests and simulators).
  static std::array<ShuffleSeeds, 3> deal(Prg& rng);
  /// Seeds for all three parties from fixed values.
  static std::array<ShuffleSeeds, 3> deal(const Block& s12, const Block& s23, const Block& s31);
};

/// Rows of equal width; each row one party's share pair of a record.
struct MatchTable {
  std::vector<SharedBitVector> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t width() const { return rows.empty() ? 0 : rows.front().size(); }
};

/// Permutation of rows for one (seed, invocation, table) triple; out[i] = in[perm[i]].
std::vector<std::uint32_t> derive_permutation(const Block& seed, std::uint64_t invocation, std::uint32_t table_id,
                                              std::size_t rows);

/// Blinding table for one (seed, invocation, table, label) quadruple.
std::vector<BitVector> derive_mask_table(const Block& seed, std::uint64_t invocation, std::uint32_t table_id,
                                         std::uint8_t label, std::size_t rows, std::size_t width);

/// Permutation the protocol realises: pi_23 after pi_31 after pi_12.
std::vector<std::uint32_t> composed_permutation(const Block& s12, const Block& s23, const Block& s31,
                                                std::uint64_t invocation, std::uint32_t table_id, std::size_t rows);

/// Shuffles several tables in one three-round exchange. All parties must pass
/// tables with identical dimensions; table t uses table id t.
std::vector<MatchTable> sec_shuffle(Party& party, std::vector<MatchTable> tables);
MatchTable sec_shuffle(Party& party, MatchTable table);

}  // namespace oblivgm
