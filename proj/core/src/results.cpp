#include "oblivgm/results.hpp"

#include <sstream>

#include "oblivgm/errors.hpp"

namespace oblivgm {

ResultShare make_result_share(const PartyToken& token, const MatchResultSet& result) {
  ResultShare r;
  r.party = token.party;
  r.nonce = token.nonce;
  r.schema_id = token.schema_id;
  for (const auto& v : token.vertices) {
    r.names.push_back(v.name);
    r.types.push_back(v.type_index);
    r.attrs.push_back(needed_attributes(v));
  }
  r.edges = token.edges;
  r.root = token.root;
  for (const auto& sg : result.subgraphs) {
    auto& rows = r.subgraphs.emplace_back();
    for (std::size_t v = 0; v < sg.size(); ++v) {
      const auto& slot = result.slots[v].at(sg[v]);
      SharedBitVector row = slot.id;
      for (const auto& a : slot.attrs) row.append(a);
      rows.push_back(std::move(row));
    }
  }
  return r;
}

namespace {
constexpr std::uint16_t kResultVersion = 1;
}

Bytes serialize_result(const ResultShare& s) {
  ByteWriter w;
  w.raw("OGMR");
  w.u16(kResultVersion);
  w.u8(static_cast<std::uint8_t>(s.party));
  w.u64(s.nonce.lo);
  w.u64(s.nonce.hi);
  w.u64(s.schema_id);
  w.u32(static_cast<std::uint32_t>(s.names.size()));
  for (std::size_t v = 0; v < s.names.size(); ++v) {
    w.str(s.names[v]);
    w.u32(s.types[v]);
    w.u32(static_cast<std::uint32_t>(s.attrs[v].size()));
    for (auto a : s.attrs[v]) w.u32(a);
  }
  w.u32(static_cast<std::uint32_t>(s.edges.size()));
  for (auto [p, c] : s.edges) {
    w.u32(p);
    w.u32(c);
  }
  w.u32(s.root);
  w.u32(static_cast<std::uint32_t>(s.subgraphs.size()));
  for (const auto& sg : s.subgraphs)
    for (const auto& row : sg) write_share(w, row);
  return std::move(w).take();
}

ResultShare parse_result(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("OGMR");
  if (r.u16() != kResultVersion) throw ValidationError("unsupported result version");
  ResultShare s;
  s.party = r.u8();
  if (s.party < 1 || s.party > 3) throw ValidationError("bad party index in result file");
  s.nonce.lo = r.u64();
  s.nonce.hi = r.u64();
  s.schema_id = r.u64();
  auto n = r.u32();
  for (std::uint32_t v = 0; v < n; ++v) {
    s.names.push_back(r.str());
    s.types.push_back(r.u32());
    auto& attrs = s.attrs.emplace_back(r.u32());
    for (auto& a : attrs) a = r.u32();
  }
  auto ne = r.u32();
  for (std::uint32_t i = 0; i < ne; ++i) {
    auto p = r.u32();
    auto c = r.u32();
    s.edges.emplace_back(p, c);
  }
  s.root = r.u32();
  auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto& sg = s.subgraphs.emplace_back();
    for (std::uint32_t v = 0; v < n; ++v) {
      sg.push_back(read_share(r));
      if (sg.back().party != s.party) throw ValidationError("result record belongs to another party");
    }
  }
  r.expect_done();
  return s;
}

std::vector<PlainSubgraph> open_results(std::span<const ResultShare> shares, const GraphSidecar& sidecar) {
  if (shares.size() < 2) throw ValidationError("need result shares from at least two parties");
  const auto& first = shares.front();
  for (const auto& s : shares) {
    if (s.nonce != first.nonce || s.schema_id != first.schema_id || s.names != first.names || s.types != first.types ||
        s.attrs != first.attrs || s.edges != first.edges || s.root != first.root ||
        s.subgraphs.size() != first.subgraphs.size())
      throw ValidationError("result shares disagree on their public metadata");
  }
  const auto& schema = sidecar.schema;
  for (auto t : first.types)
    if (t >= schema.types.size()) throw ValidationError("result names a vertex type missing from the sidecar");

  std::vector<PlainSubgraph> out;
  for (std::size_t g = 0; g < first.subgraphs.size(); ++g) {
    PlainSubgraph sg;
    bool dummy = false;
    for (std::size_t v = 0; v < first.names.size(); ++v) {
      std::vector<SharedBitVector> parts;
      for (const auto& s : shares) parts.push_back(s.subgraphs[g].at(v));
      const auto row = reconstruct(parts);
      const auto& type = schema.types[first.types[v]];
      std::size_t width = type.population;
      for (auto a : first.attrs[v]) width += type.attributes.at(a).size();
      if (row.size() != width) throw ValidationError("result record width does not match the schema");

      auto id = decode_one_hot(row.slice(0, type.population));
      PlainVertex pv{first.names[v], type.name, {}, {}};
      std::size_t off = type.population;
      std::vector<std::optional<std::size_t>> values;
      for (auto a : first.attrs[v]) {
        const auto& dict = type.attributes[a];
        values.push_back(decode_one_hot(row.slice(off, dict.size())));
        off += dict.size();
      }
      if (!id) {
        for (const auto& val : values)
          if (val) throw ValidationError("result record has attribute values but no vertex ID");
        dummy = true;
        continue;
      }
      pv.id = sidecar.external_ids[first.types[v]].at(*id);
      for (std::size_t k = 0; k < values.size(); ++k) {
        const auto& dict = type.attributes[first.attrs[v][k]];
        if (!values[k]) throw ValidationError("result record has a vertex ID but an empty attribute value");
        pv.attrs.emplace_back(dict.name, dict.values[*values[k]]);
      }
      sg.push_back(std::move(pv));
    }
    if (!dummy) out.push_back(std::move(sg));
  }
  return out;
}

std::set<std::vector<std::string>> id_tuples(const std::vector<PlainSubgraph>& subgraphs) {
  std::set<std::vector<std::string>> out;
  for (const auto& sg : subgraphs) {
    std::vector<std::string> ids;
    for (const auto& v : sg) ids.push_back(v.id);
    out.insert(std::move(ids));
  }
  return out;
}

std::string format_subgraphs(const std::vector<PlainSubgraph>& subgraphs) {
  std::ostringstream os;
  for (const auto& sg : subgraphs) {
    for (std::size_t v = 0; v < sg.size(); ++v) {
      if (v) os << ' ';
      os << sg[v].name << '=' << sg[v].id << '(';
      for (std::size_t k = 0; k < sg[v].attrs.size(); ++k) {
        if (k) os << ',';
        os << sg[v].attrs[k].first << '=' << sg[v].attrs[k].second;
      }
      os << ')';
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace oblivgm
