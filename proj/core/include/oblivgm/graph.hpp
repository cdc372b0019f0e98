#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oblivgm/bit_vector.hpp"
#include "oblivgm/bytes.hpp"
#include "oblivgm/crypto.hpp"
#include "oblivgm/rss.hpp"

namespace oblivgm {

/// Public dictionary of one attribute of one vertex type. Index order is the
/// one-hot position; ordinal dictionaries are sorted numerically.
struct AttributeSchema {
  std::string name;
  bool ordinal = false;
  bool unique = false;
  std::vector<std::string> values;

  std::size_t size() const { return values.size(); }
  std::optional<std::size_t> index_of(std::string_view value) const;
  /// First index whose value is >= v (ordinal only).
  std::size_t lower_bound(double v) const;
  /// First index whose value is > v (ordinal only).
  std::size_t upper_bound(double v) const;

  friend bool operator==(const AttributeSchema&, const AttributeSchema&) = default;
};

struct VertexTypeSchema {
  std::string name;
  std::vector<AttributeSchema> attributes;
  std::uint32_t population = 0;

  std::size_t attribute_index(std::string_view attr) const;
  friend bool operator==(const VertexTypeSchema&, const VertexTypeSchema&) = default;
};

/// Public schema shared by the data owner and all three servers. Every vertex
/// type keeps one posting list per vertex type (possibly empty).
struct Schema {
  std::vector<VertexTypeSchema> types;

  std::size_t type_index(std::string_view type) const;
  std::optional<std::size_t> find_type(std::string_view type) const;
  const AttributeSchema& attribute(std::size_t type, std::size_t attr) const { return types.at(type).attributes.at(attr); }

  std::string to_json() const;
  static Schema from_json(std::string_view json);

  friend bool operator==(const Schema&, const Schema&) = default;
};

inline constexpr std::uint32_t kDummyId = std::numeric_limits<std::uint32_t>::max();

struct VertexRecord {
  std::string ext_id;
  std::vector<std::uint32_t> attrs;                   // dictionary index per attribute
  std::vector<std::vector<std::uint32_t>> postings;   // per neighbor type: local neighbor indices or kDummyId

  friend bool operator==(const VertexRecord&, const VertexRecord&) = default;
};

/// Plaintext attributed graph with typed vertices and inverted-index posting lists.
struct AttributedGraph {
  Schema schema;
  std::vector<std::vector<VertexRecord>> vertices;  // [type][local index]

  const VertexRecord& vertex(std::size_t type, std::size_t index) const { return vertices.at(type).at(index); }
  std::size_t vertex_count() const;
  std::size_t edge_count() const;
  /// Throws ValidationError when a posting list names a missing vertex or the graph is inconsistent.
  void validate() const;
};

/// Parses the line format:
///   A <type> <attr> ordinal|categorical [unique] [values=v1,v2,...]
///   V <type> <ext-id> <attr>=<value> ...
///   E <ext-id> <ext-id>
AttributedGraph parse_graph(std::string_view text);
AttributedGraph load_graph(const std::string& path);

/// One-hot vector of `index` over a dictionary of `size` entries.
BitVector encode_one_hot(std::size_t index, std::size_t size);
BitVector encode_one_hot(std::string_view value, const AttributeSchema& dict);
/// Dictionary index of a one-hot vector; std::nullopt for the all-zero dummy. Weight > 1 throws.
std::optional<std::size_t> decode_one_hot(const BitVector& v);

struct PaddingStats {
  std::size_t dummies = 0;
  std::vector<std::vector<std::size_t>> group_sizes;  // [type] -> sizes
};

/// Graph whose posting lists have been padded with dummies so that each group
/// of >= k same-type vertices shares one posting-length vector.
struct PaddedGraph {
  AttributedGraph graph;
  std::size_t k = 0;
  std::vector<std::vector<std::vector<std::uint32_t>>> groups;  // [type] -> groups of local indices
  PaddingStats stats;

  /// posting-length vector of one vertex (one entry per neighbor type)
  std::vector<std::size_t> length_profile(std::size_t type, std::size_t index) const;
};

PaddedGraph pad_k_groups(const AttributedGraph& graph, std::size_t k);

struct EncryptedVertex {
  std::uint32_t type = 0;
  SharedBitVector id;
  std::vector<SharedBitVector> attrs;
  std::vector<std::vector<SharedBitVector>> postings;
};

/// Everything one server stores: its shares plus the public layout.
struct EncryptedGraphShare {
  int party = 1;
  Schema schema;
  std::vector<std::vector<std::vector<std::uint32_t>>> groups;
  std::vector<std::vector<EncryptedVertex>> vertices;  // [type][local index]

  /// Longest padded posting list of `neighbor_type` over all vertices of `type`.
  std::size_t max_posting_length(std::size_t type, std::size_t neighbor_type) const;
};

std::array<EncryptedGraphShare, 3> encrypt_graph(const PaddedGraph& padded, Prg& rng);

/// Reassembles the padded plaintext (dummy entries become kDummyId) from two or three shares.
AttributedGraph reconstruct_graph(std::span<const EncryptedGraphShare> shares);

// Graph share file: "OGMG", u16 version, u8 party, schema JSON, group map, then share records.
Bytes serialize_graph_share(const EncryptedGraphShare& share);
EncryptedGraphShare parse_graph_share(std::span<const std::uint8_t> bytes);

/// Public sidecar kept by the data owner: schema, k, group sizes and the
/// external ID of every one-hot position.
struct GraphSidecar {
  Schema schema;
  std::size_t k = 0;
  std::vector<std::vector<std::string>> external_ids;  // [type][local index]

  std::string to_json() const;
  static GraphSidecar from_json(std::string_view json);
  static GraphSidecar load(const std::string& path);
};

GraphSidecar make_sidecar(const PaddedGraph& padded);

}  // namespace oblivgm
