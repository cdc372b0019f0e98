#pragma once

#include <set>
#include <string>
#include <vector>

#include "oblivgm/graph.hpp"
#include "oblivgm/query.hpp"
#include "oblivgm/results.hpp"

namespace oblivgm {

/// External ID per query vertex, in query vertex order.
using PlainMatch = std::vector<std::string>;

/// Plaintext tree matching: root candidates filtered by their predicates,
/// children expanded along typed posting lists, Cartesian assembly per slot.
/// Sibling slots may map to the same graph vertex.
std::set<PlainMatch> oracle_match(const AttributedGraph& graph, const QueryGraph& query);

/// Checks every per-slot condition of one match directly against the graph;
/// returns an empty string when it holds, else the first violated condition.
std::string check_match(const AttributedGraph& graph, const QueryGraph& query, const PlainMatch& match);

/// oracle_match rendered like opened results: per vertex, the attributes its
/// predicates mention, in first-use order.
std::vector<PlainSubgraph> oracle_subgraphs(const AttributedGraph& graph, const QueryGraph& query);

}  // namespace oblivgm
