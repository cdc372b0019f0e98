#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oblivgm/bytes.hpp"
#include "oblivgm/engine.hpp"
#include "oblivgm/graph.hpp"
#include "oblivgm/query.hpp"

namespace oblivgm {

/// One party's share of the assembled subgraphs, mirroring the token's tree.
/// Each record is id || attribute values of one query vertex.
struct ResultShare {
  int party = 1;
  Block nonce;
  std::uint64_t schema_id = 0;
  std::vector<std::string> names;
  std::vector<std::uint32_t> types;
  std::vector<std::vector<std::uint32_t>> attrs;  // needed attribute indices per query vertex
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::uint32_t root = 0;
  std::vector<std::vector<SharedBitVector>> subgraphs;  // [subgraph][query vertex]
};

ResultShare make_result_share(const PartyToken& token, const MatchResultSet& result);

// Result file: "OGMR", u16 version, u8 party, nonce, schema id, structure, records.
Bytes serialize_result(const ResultShare& share);
ResultShare parse_result(std::span<const std::uint8_t> bytes);

struct PlainVertex {
  std::string name;
  std::string type;
  std::string id;
  std::vector<std::pair<std::string, std::string>> attrs;
};

using PlainSubgraph = std::vector<PlainVertex>;  // indexed like the query vertices

/// Merges two or three party shares. Subgraphs holding an all-zero ID (an empty
/// unique fetch) are dropped; any other non-one-hot record is an error.
std::vector<PlainSubgraph> open_results(std::span<const ResultShare> shares, const GraphSidecar& sidecar);

/// External-ID tuples, one per subgraph, in query vertex order.
std::set<std::vector<std::string>> id_tuples(const std::vector<PlainSubgraph>& subgraphs);

/// One line per subgraph: name=id(attr=value,...) in query vertex order.
std::string format_subgraphs(const std::vector<PlainSubgraph>& subgraphs);

}  // namespace oblivgm
