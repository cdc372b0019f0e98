#include "oblivgm/graph.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "oblivgm/errors.hpp"

namespace oblivgm {

using nlohmann::json;

namespace {

double as_number(const std::string& s) { return std::stod(s); }

json schema_to_json(const Schema& schema) {
  json types = json::array();
  for (const auto& t : schema.types) {
    json attrs = json::array();
    for (const auto& a : t.attributes) {
      attrs.push_back({{"name", a.name}, {"ordinal", a.ordinal}, {"unique", a.unique}, {"values", a.values}});
    }
    types.push_back({{"name", t.name}, {"population", t.population}, {"attributes", attrs}});
  }
  return json{{"types", types}};
}

Schema schema_from_json(const json& j) {
  Schema schema;
  for (const auto& t : j.at("types")) {
    VertexTypeSchema type;
    type.name = t.at("name").get<std::string>();
    type.population = t.at("population").get<std::uint32_t>();
    for (const auto& a : t.at("attributes")) {
      AttributeSchema attr;
      attr.name = a.at("name").get<std::string>();
      attr.ordinal = a.at("ordinal").get<bool>();
      attr.unique = a.at("unique").get<bool>();
      attr.values = a.at("values").get<std::vector<std::string>>();
      if (attr.values.empty()) throw ValidationError("attribute dictionary is empty: " + attr.name);
      type.attributes.push_back(std::move(attr));
    }
    schema.types.push_back(std::move(type));
  }
  return schema;
}

}  // namespace

std::optional<std::size_t> AttributeSchema::index_of(std::string_view value) const {
  if (ordinal) {
    // Numeric comparison so that "030" and "30" name the same entry.
    double v;
    try {
      v = std::stod(std::string(value));
    } catch (const std::exception&) {
      return std::nullopt;
    }
    auto i = lower_bound(v);
    if (i < values.size() && as_number(values[i]) == v) return i;
    return std::nullopt;
  }
  auto it = std::find(values.begin(), values.end(), value);
  if (it == values.end()) return std::nullopt;
  return static_cast<std::size_t>(it - values.begin());
}

std::size_t AttributeSchema::lower_bound(double v) const {
  auto it = std::partition_point(values.begin(), values.end(), [v](const std::string& s) { return as_number(s) < v; });
  return static_cast<std::size_t>(it - values.begin());
}

std::size_t AttributeSchema::upper_bound(double v) const {
  auto it = std::partition_point(values.begin(), values.end(), [v](const std::string& s) { return as_number(s) <= v; });
  return static_cast<std::size_t>(it - values.begin());
}

std::size_t VertexTypeSchema::attribute_index(std::string_view attr) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == attr) return i;
  throw ValidationError("vertex type " + name + " has no attribute " + std::string(attr));
}

std::optional<std::size_t> Schema::find_type(std::string_view type) const {
  for (std::size_t i = 0; i < types.size(); ++i)
    if (types[i].name == type) return i;
  return std::nullopt;
}

std::size_t Schema::type_index(std::string_view type) const {
  if (auto i = find_type(type)) return *i;
  throw ValidationError("unknown vertex type " + std::string(type));
}

std::string Schema::to_json() const { return schema_to_json(*this).dump(); }

Schema Schema::from_json(std::string_view text) {
  try {
    return schema_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed schema: ") + e.what());
  }
}

std::size_t AttributedGraph::vertex_count() const {
  std::size_t n = 0;
  for (const auto& t : vertices) n += t.size();
  return n;
}

std::size_t AttributedGraph::edge_count() const {
  std::size_t endpoints = 0;
  for (const auto& t : vertices)
    for (const auto& v : t)
      for (const auto& list : v.postings)
        for (auto id : list)
          if (id != kDummyId) ++endpoints;
  return endpoints / 2;
}

void AttributedGraph::validate() const {
  if (vertices.size() != schema.types.size()) throw ValidationError("vertex table does not match schema");
  for (std::size_t t = 0; t < vertices.size(); ++t) {
    const auto& type = schema.types[t];
    if (vertices[t].size() != type.population) throw ValidationError("population mismatch for type " + type.name);
    for (const auto& v : vertices[t]) {
      if (v.attrs.size() != type.attributes.size()) throw ValidationError("attribute count mismatch at " + v.ext_id);
      for (std::size_t a = 0; a < v.attrs.size(); ++a)
        if (v.attrs[a] >= type.attributes[a].size()) throw ValidationError("attribute value outside dictionary at " + v.ext_id);
      if (v.postings.size() != schema.types.size()) throw ValidationError("posting list count mismatch at " + v.ext_id);
      for (std::size_t nt = 0; nt < v.postings.size(); ++nt)
        for (auto id : v.postings[nt])
          if (id != kDummyId && id >= vertices[nt].size())
            throw ValidationError("posting list of " + v.ext_id + " names a missing vertex");
    }
  }
}

BitVector encode_one_hot(std::size_t index, std::size_t size) { return BitVector::one_hot(size, index); }

BitVector encode_one_hot(std::string_view value, const AttributeSchema& dict) {
  auto idx = dict.index_of(value);
  if (!idx) throw ValidationError("value '" + std::string(value) + "' not in dictionary of " + dict.name);
  return BitVector::one_hot(dict.size(), *idx);
}

std::optional<std::size_t> decode_one_hot(const BitVector& v) {
  auto idx = v.one_hot_index();
  if (idx == -2) throw ValidationError("decoded vector is not one-hot (weight > 1)");
  if (idx < 0) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

std::vector<std::size_t> PaddedGraph::length_profile(std::size_t type, std::size_t index) const {
  std::vector<std::size_t> out;
  for (const auto& list : graph.vertex(type, index).postings) out.push_back(list.size());
  return out;
}

PaddedGraph pad_k_groups(const AttributedGraph& graph, std::size_t k) {
  if (k < 2) throw ValidationError("k must be at least 2");
  graph.validate();
  PaddedGraph out;
  out.graph = graph;
  out.k = k;
  const auto ntypes = graph.schema.types.size();
  out.groups.resize(ntypes);
  out.stats.group_sizes.resize(ntypes);

  for (std::size_t t = 0; t < ntypes; ++t) {
    auto& verts = out.graph.vertices[t];
    if (verts.size() < k) {
      throw ValidationError("k=" + std::to_string(k) + " exceeds the population (" + std::to_string(verts.size()) +
                            ") of type " + graph.schema.types[t].name);
    }
    std::vector<std::uint32_t> order(verts.size());
    std::iota(order.begin(), order.end(), 0u);
    auto total = [&](std::uint32_t i) {
      std::size_t n = 0;
      for (const auto& l : verts[i].postings) n += l.size();
      return n;
    };
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return total(x) < total(y); });

    const std::size_t full = verts.size() / k;
    for (std::size_t g = 0; g < full; ++g) {
      std::size_t end = (g + 1 == full) ? verts.size() : (g + 1) * k;
      out.groups[t].emplace_back(order.begin() + static_cast<std::ptrdiff_t>(g * k),
                                 order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    for (const auto& group : out.groups[t]) {
      out.stats.group_sizes[t].push_back(group.size());
      for (std::size_t nt = 0; nt < ntypes; ++nt) {
        std::size_t target = 0;
        for (auto v : group) target = std::max(target, verts[v].postings[nt].size());
        for (auto v : group) {
          auto& list = verts[v].postings[nt];
          out.stats.dummies += target - list.size();
          list.resize(target, kDummyId);
        }
      }
    }
  }
  return out;
}

std::size_t EncryptedGraphShare::max_posting_length(std::size_t type, std::size_t neighbor_type) const {
  std::size_t m = 0;
  for (const auto& v : vertices.at(type)) m = std::max(m, v.postings.at(neighbor_type).size());
  return m;
}

std::array<EncryptedGraphShare, 3> encrypt_graph(const PaddedGraph& padded, Prg& rng) {
  const auto& graph = padded.graph;
  graph.validate();
  std::array<EncryptedGraphShare, 3> out;
  for (int p = 0; p < 3; ++p) {
    out[p].party = p + 1;
    out[p].schema = graph.schema;
    out[p].groups = padded.groups;
    out[p].vertices.resize(graph.vertices.size());
  }
  auto put = [&](const BitVector& plain, auto&& sink) {
    auto shares = share(plain, rng);
    for (int p = 0; p < 3; ++p) sink(p, std::move(shares[p]));
  };

  for (std::size_t t = 0; t < graph.vertices.size(); ++t) {
    const auto& type = graph.schema.types[t];
    for (std::size_t i = 0; i < graph.vertices[t].size(); ++i) {
      const auto& v = graph.vertices[t][i];
      for (int p = 0; p < 3; ++p) {
        EncryptedVertex ev;
        ev.type = static_cast<std::uint32_t>(t);
        ev.postings.resize(graph.vertices.size());
        out[p].vertices[t].push_back(std::move(ev));
      }
      put(encode_one_hot(i, type.population), [&](int p, SharedBitVector s) { out[p].vertices[t][i].id = std::move(s); });
      for (std::size_t a = 0; a < v.attrs.size(); ++a) {
        put(encode_one_hot(v.attrs[a], type.attributes[a].size()),
            [&](int p, SharedBitVector s) { out[p].vertices[t][i].attrs.push_back(std::move(s)); });
      }
      for (std::size_t nt = 0; nt < v.postings.size(); ++nt) {
        const auto width = graph.schema.types[nt].population;
        for (auto id : v.postings[nt]) {
          BitVector plain = id == kDummyId ? BitVector(width) : encode_one_hot(id, width);
          put(plain, [&](int p, SharedBitVector s) { out[p].vertices[t][i].postings[nt].push_back(std::move(s)); });
        }
      }
    }
  }
  return out;
}

AttributedGraph reconstruct_graph(std::span<const EncryptedGraphShare> shares) {
  if (shares.size() < 2) throw ValidationError("need at least two graph shares");
  const auto& first = shares.front();
  for (const auto& s : shares)
    if (!(s.schema == first.schema)) throw ValidationError("graph shares disagree on the public schema");

  auto open = [&](auto&& pick) {
    std::vector<SharedBitVector> parts;
    for (const auto& s : shares) parts.push_back(pick(s));
    return reconstruct(parts);
  };

  AttributedGraph g;
  g.schema = first.schema;
  g.vertices.resize(first.vertices.size());
  for (std::size_t t = 0; t < first.vertices.size(); ++t) {
    for (std::size_t i = 0; i < first.vertices[t].size(); ++i) {
      VertexRecord rec;
      auto id = decode_one_hot(open([&](const EncryptedGraphShare& s) { return s.vertices[t][i].id; }));
      if (!id || *id != i) throw ValidationError("vertex ID share does not decode to its position");
      rec.ext_id = first.schema.types[t].name + "#" + std::to_string(i);
      for (std::size_t a = 0; a < first.vertices[t][i].attrs.size(); ++a) {
        auto val = decode_one_hot(open([&](const EncryptedGraphShare& s) { return s.vertices[t][i].attrs[a]; }));
        if (!val) throw ValidationError("attribute share decodes to the dummy vector");
        rec.attrs.push_back(static_cast<std::uint32_t>(*val));
      }
      rec.postings.resize(first.vertices[t][i].postings.size());
      for (std::size_t nt = 0; nt < rec.postings.size(); ++nt) {
        for (std::size_t l = 0; l < first.vertices[t][i].postings[nt].size(); ++l) {
          auto nb = decode_one_hot(open([&](const EncryptedGraphShare& s) { return s.vertices[t][i].postings[nt][l]; }));
          rec.postings[nt].push_back(nb ? static_cast<std::uint32_t>(*nb) : kDummyId);
        }
      }
      g.vertices[t].push_back(std::move(rec));
    }
  }
  return g;
}

Bytes serialize_graph_share(const EncryptedGraphShare& share) {
  ByteWriter w;
  w.raw("OGMG");
  w.u16(1);
  w.u8(static_cast<std::uint8_t>(share.party));
  w.str(share.schema.to_json());
  for (const auto& groups : share.groups) {
    w.u32(static_cast<std::uint32_t>(groups.size()));
    for (const auto& g : groups) {
      w.u32(static_cast<std::uint32_t>(g.size()));
      for (auto v : g) w.u32(v);
    }
  }
  for (const auto& verts : share.vertices) {
    for (const auto& v : verts) {
      write_share(w, v.id);
      for (const auto& a : v.attrs) write_share(w, a);
      for (const auto& list : v.postings) {
        w.u32(static_cast<std::uint32_t>(list.size()));
        for (const auto& id : list) write_share(w, id);
      }
    }
  }
  return std::move(w).take();
}

EncryptedGraphShare parse_graph_share(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("OGMG");
  if (r.u16() != 1) throw ValidationError("unsupported graph share version");
  EncryptedGraphShare share;
  share.party = r.u8();
  if (share.party < 1 || share.party > 3) throw ValidationError("bad party index in graph share");
  share.schema = Schema::from_json(r.str());
  const auto ntypes = share.schema.types.size();
  share.groups.resize(ntypes);
  for (auto& groups : share.groups) {
    groups.resize(r.u32());
    for (auto& g : groups) {
      g.resize(r.u32());
      for (auto& v : g) v = r.u32();
    }
  }
  auto read_checked = [&](std::size_t width) {
    auto s = read_share(r);
    if (s.party != share.party) throw ValidationError("share record belongs to another party");
    if (s.size() != width) throw ValidationError("share record has unexpected width");
    return s;
  };
  share.vertices.resize(ntypes);
  for (std::size_t t = 0; t < ntypes; ++t) {
    const auto& type = share.schema.types[t];
    for (std::uint32_t i = 0; i < type.population; ++i) {
      EncryptedVertex v;
      v.type = static_cast<std::uint32_t>(t);
      v.id = read_checked(type.population);
      for (const auto& a : type.attributes) v.attrs.push_back(read_checked(a.size()));
      v.postings.resize(ntypes);
      for (std::size_t nt = 0; nt < ntypes; ++nt) {
        auto len = r.u32();
        for (std::uint32_t l = 0; l < len; ++l) v.postings[nt].push_back(read_checked(share.schema.types[nt].population));
      }
      share.vertices[t].push_back(std::move(v));
    }
  }
  r.expect_done();
  return share;
}

}  // namespace oblivgm
