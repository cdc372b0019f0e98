#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oblivgm/bytes.hpp"
#include "oblivgm/crypto.hpp"
#include "oblivgm/fss.hpp"
#include "oblivgm/graph.hpp"
#include "oblivgm/predicate.hpp"

namespace oblivgm {

enum class Combiner : std::uint8_t { All = 0, Any = 1 };

struct TargetPredicate {
  std::string attr;
  std::size_t attr_index = 0;
  PredicateSpec spec;
};

struct QueryVertex {
  std::string name;
  std::string type;
  std::size_t type_index = 0;
  std::vector<TargetPredicate> predicates;
  Combiner combiner = Combiner::All;
};

/// Rooted-tree query. Edges point from parent to child.
struct QueryGraph {
  std::vector<QueryVertex> vertices;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t root = 0;

  std::size_t add_vertex(std::string name, std::string type);
  void add_predicate(std::size_t vertex, std::string attr, PredicateSpec spec);
  void add_edge(std::size_t parent, std::size_t child) { edges.emplace_back(parent, child); }
  std::size_t index_of(std::string_view name) const;

  /// Resolves type and attribute indices and checks tree shape and operand domains.
  void validate(const Schema& schema);

  std::vector<std::size_t> children(std::size_t v) const;
  std::optional<std::size_t> parent(std::size_t v) const;
  std::vector<std::size_t> bfs_order() const;
};

/// Line format:
///   Q <name> <type> <attr> <op> <operand(s)>   op: = < <= > >= in in[] in[) in(] in()
///   ANY <name>
///   QE <parent> <child>
///   START <name>
/// Operands are attribute values; ordinal ranges map onto dictionary bounds.
QueryGraph parse_query(std::string_view text, const Schema& schema);
QueryGraph load_query(const std::string& path, const Schema& schema);

/// 64-bit fingerprint of the public schema; tokens and graph shares must agree on it.
std::uint64_t schema_fingerprint(const Schema& schema);

struct TokenPredicate {
  std::uint32_t attr_index = 0;
  PredicateKind kind = PredicateKind::Equal;
  std::uint32_t domain_size = 0;
  fss::FssKey first;   // applied to share index i
  fss::FssKey second;  // applied to share index i+1
};

struct TokenVertex {
  std::string name;
  std::uint32_t type_index = 0;
  Combiner combiner = Combiner::All;
  bool unique_fetch = false;  // ALL-combined equality on a unique attribute
  std::vector<TokenPredicate> predicates;
};

/// One party's view of a query: public structure plus its two keys per predicate.
struct PartyToken {
  int party = 1;
  Block nonce;
  std::uint64_t schema_id = 0;
  std::vector<TokenVertex> vertices;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::uint32_t root = 0;

  std::vector<std::size_t> children(std::size_t v) const;
  std::vector<std::size_t> bfs_order() const;
};

/// Key pair j of each bundle meets replicated share index j:
/// party 1 holds (k1^1, k1^2), party 2 (k2^2, k1^3), party 3 (k2^3, k2^1).
std::array<PartyToken, 3> gen_token(const QueryGraph& query, const Schema& schema, Prg& rng);

/// Deals the six keys: P1 gets (pair1.a, pair2.a), P2 (pair2.b, pair3.a), P3 (pair3.b, pair1.b).
std::array<TokenPredicate, 3> split_bundle(fss::FssKeyBundle bundle, std::uint32_t attr_index,
                                           std::uint32_t domain_size);

/// Re-pairs the six keys of predicate `p` on vertex `v` into the bundle they came from.
fss::FssKeyBundle recombine_bundle(std::span<const PartyToken, 3> tokens, std::size_t v, std::size_t p);

// Token file: "OGMT", u16 version, u8 party, nonce, schema id, structure, keys.
Bytes serialize_token(const PartyToken& token);
PartyToken parse_token(std::span<const std::uint8_t> bytes, std::optional<int> expected_party = std::nullopt);

}  // namespace oblivgm
