#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oblivgm/graph.hpp"
#include "oblivgm/party.hpp"
#include "oblivgm/query.hpp"
#include "oblivgm/rss.hpp"

namespace oblivgm {

/// ANY as logical OR (x ^ y ^ xy) or as a plain XOR chain, which is only
/// correct when the predicates are mutually exclusive.
enum class AnyMode : std::uint8_t { LogicalOr = 0, Xor = 1 };

struct EngineOptions {
  AnyMode any_mode = AnyMode::LogicalOr;
  std::function<void(const std::string&)> progress;
};

/// Candidates that share one parent slot (or the root). attrs[c][k] is the
/// k-th needed attribute of candidate c.
struct CandidateSet {
  std::optional<std::size_t> parent_slot;
  std::vector<SharedBitVector> ids;
  std::vector<std::vector<SharedBitVector>> attrs;

  std::size_t size() const { return ids.size(); }
};

struct MatchedSlot {
  std::optional<std::size_t> parent_slot;
  SharedBitVector id;
  std::vector<SharedBitVector> attrs;
};

struct HopTrace {
  std::size_t vertex = 0;
  std::size_t candidates = 0;
  std::size_t matched = 0;
  bool unique_fetch = false;
};

struct MatchResultSet {
  std::vector<std::vector<MatchedSlot>> slots;       // [query vertex][slot]
  std::vector<std::vector<std::size_t>> subgraphs;  // [subgraph][query vertex] -> slot
  std::vector<HopTrace> trace;
};

/// Distinct attribute indices used by a token vertex, in first-use order.
std::vector<std::uint32_t> needed_attributes(const TokenVertex& v);

/// Predicate bits for all candidates (bit c for candidate c); one re-share per key component.
SharedBitVector sec_eval(Party& party, const std::vector<const SharedBitVector*>& attrs, const TokenPredicate& pred);

SharedBitVector combine_predicates(Party& party, std::vector<SharedBitVector> bits, Combiner combiner,
                                   AnyMode mode = AnyMode::LogicalOr);

/// XOR over candidates of bit_c AND record_c, for several groups in one re-share.
/// groups[g] = (bits, records); bits has one entry per record.
std::vector<SharedBitVector> sec_fetch_unique(
    Party& party, const std::vector<std::pair<SharedBitVector, std::vector<SharedBitVector>>>& groups);

/// Shuffles each group's (bit || record) table, opens the bits and keeps the records whose bit is 1.
std::vector<std::vector<SharedBitVector>> sec_fetch_multi(
    Party& party, const std::vector<std::pair<SharedBitVector, std::vector<SharedBitVector>>>& groups);

/// Neighbours of each matched vertex: posting-list fetch by one-hot selection,
/// shuffle, validity opening, attribute fetch. One candidate set per matched ID.
std::vector<CandidateSet> sec_access(Party& party, const EncryptedGraphShare& graph,
                                     const std::vector<SharedBitVector>& matched_ids, std::size_t parent_type,
                                     std::size_t neighbor_type, const std::vector<std::uint32_t>& neighbor_attrs);

MatchResultSet sec_match(Party& party, const PartyToken& token, const EncryptedGraphShare& graph,
                         const EngineOptions& options = {});

/// Tree-shaped assembly over public parent links; subgraphs missing any slot are dropped.
std::vector<std::vector<std::size_t>> assemble_subgraphs(const PartyToken& token,
                                                         const std::vector<std::vector<MatchedSlot>>& slots);

}  // namespace oblivgm
