#pragma once

#include <cstddef>
#include <string>

#include "oblivgm/crypto.hpp"
#include "oblivgm/graph.hpp"
#include "oblivgm/query.hpp"

namespace oblivgm {

struct SynthGraphParams {
  std::size_t vertices = 200;
  std::size_t types = 3;
  std::size_t attrs_per_type = 2;
  std::size_t min_dict = 16;
  std::size_t max_dict = 256;
  double avg_degree = 4.0;
  /// Make attribute 0 of the first type unique (dictionary = population).
  bool unique_attribute = true;
};

/// Random typed graph: every type gets at least max(4, vertices / (2 * types)) vertices.
AttributedGraph random_graph(const SynthGraphParams& params, Prg& rng);

struct SynthQueryParams {
  std::size_t min_vertices = 2;
  std::size_t max_vertices = 5;
  /// Chance that a vertex carries a second predicate.
  double second_predicate = 0.2;
  /// Chance that operands are drawn blind rather than from a real match.
  double blind = 0.15;
  /// Longest root-to-leaf path in edges.
  std::size_t max_depth = 8;
};

/// Tree query grown along a random walk of the graph so that most queries
/// have matches; predicates mix equality, one-sided and interval kinds.
QueryGraph random_query(const AttributedGraph& graph, const SynthQueryParams& params, Prg& rng);

/// Graph in the text format understood by parse_graph.
std::string format_graph(const AttributedGraph& graph);
/// Query in the text format understood by parse_query.
std::string format_query(const QueryGraph& query, const Schema& schema);

}  // namespace oblivgm
