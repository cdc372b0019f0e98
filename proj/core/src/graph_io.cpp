#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "oblivgm/errors.hpp"
#include "oblivgm/graph.hpp"

namespace oblivgm {

namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_csv(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    if (end > start) out.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size();
}

struct AttrDecl {
  std::string name;
  std::optional<bool> ordinal;
  bool unique = false;
  std::vector<std::string> values;
  bool explicit_values = false;
};

struct TypeDecl {
  std::string name;
  std::vector<AttrDecl> attrs;
  std::vector<std::pair<std::string, std::map<std::string, std::string>>> vertices;

  AttrDecl& attr(const std::string& n) {
    for (auto& a : attrs)
      if (a.name == n) return a;
    attrs.push_back(AttrDecl{n, std::nullopt, false, {}, false});
    return attrs.back();
  }
};

void sort_ordinal(std::vector<std::string>& values) {
  std::stable_sort(values.begin(), values.end(),
                   [](const std::string& x, const std::string& y) { return std::stod(x) < std::stod(y); });
  values.erase(std::unique(values.begin(), values.end(),
                           [](const std::string& x, const std::string& y) { return std::stod(x) == std::stod(y); }),
               values.end());
}

}  // namespace

AttributedGraph parse_graph(std::string_view text) {
  std::vector<TypeDecl> types;
  auto type_of = [&](const std::string& name) -> TypeDecl& {
    for (auto& t : types)
      if (t.name == name) return t;
    types.push_back(TypeDecl{name, {}, {}});
    return types.back();
  };
  std::vector<std::pair<std::string, std::string>> edges;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    auto fail = [&](const std::string& msg) {
      throw ValidationError("graph line " + std::to_string(lineno) + ": " + msg);
    };
    if (tok[0] == "A") {
      if (tok.size() < 4) fail("expected 'A <type> <attr> ordinal|categorical ...'");
      auto& a = type_of(tok[1]).attr(tok[2]);
      if (tok[3] == "ordinal")
        a.ordinal = true;
      else if (tok[3] == "categorical")
        a.ordinal = false;
      else
        fail("attribute kind must be ordinal or categorical");
      for (std::size_t i = 4; i < tok.size(); ++i) {
        if (tok[i] == "unique") {
          a.unique = true;
        } else if (tok[i].rfind("values=", 0) == 0) {
          a.values = split_csv(std::string_view(tok[i]).substr(7));
          a.explicit_values = true;
        } else {
          fail("unknown attribute option " + tok[i]);
        }
      }
    } else if (tok[0] == "V") {
      if (tok.size() < 3) fail("expected 'V <type> <ext-id> attr=value...'");
      std::map<std::string, std::string> attrs;
      auto& t = type_of(tok[1]);
      for (std::size_t i = 3; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string::npos || eq == 0) fail("expected attr=value, got " + tok[i]);
        auto key = tok[i].substr(0, eq);
        if (!attrs.emplace(key, tok[i].substr(eq + 1)).second) fail("attribute repeated: " + key);
        t.attr(key);
      }
      t.vertices.emplace_back(tok[2], std::move(attrs));
    } else if (tok[0] == "E") {
      if (tok.size() != 3) fail("expected 'E <ext-id> <ext-id>'");
      edges.emplace_back(tok[1], tok[2]);
    } else {
      fail("unknown record type " + tok[0]);
    }
  }
  if (types.empty()) throw ValidationError("graph has no vertex types");

  AttributedGraph g;
  std::unordered_map<std::string, std::pair<std::size_t, std::uint32_t>> where;
  for (auto& t : types) {
    if (t.vertices.empty()) throw ValidationError("vertex type " + t.name + " has no vertices");
    VertexTypeSchema ts;
    ts.name = t.name;
    ts.population = static_cast<std::uint32_t>(t.vertices.size());
    for (auto& a : t.attrs) {
      std::vector<std::string> seen;
      for (auto& [id, attrs] : t.vertices) {
        auto it = attrs.find(a.name);
        if (it == attrs.end()) throw ValidationError("vertex " + id + " lacks attribute " + a.name);
        seen.push_back(it->second);
      }
      if (!a.ordinal) a.ordinal = std::all_of(seen.begin(), seen.end(), is_number);
      if (*a.ordinal) {
        for (const auto& v : a.explicit_values ? a.values : seen)
          if (!is_number(v)) throw ValidationError("ordinal attribute " + a.name + " has non-numeric value " + v);
      }
      AttributeSchema as{a.name, *a.ordinal, a.unique, a.explicit_values ? a.values : seen};
      if (as.ordinal) {
        sort_ordinal(as.values);
      } else if (!a.explicit_values) {
        std::sort(as.values.begin(), as.values.end());
        as.values.erase(std::unique(as.values.begin(), as.values.end()), as.values.end());
      }
      if (as.unique) {
        std::set<std::string> distinct(seen.begin(), seen.end());
        if (distinct.size() != seen.size()) throw ValidationError("attribute " + a.name + " declared unique but repeats");
      }
      ts.attributes.push_back(std::move(as));
    }
    g.schema.types.push_back(std::move(ts));
  }

  const auto ntypes = types.size();
  g.vertices.resize(ntypes);
  for (std::size_t t = 0; t < ntypes; ++t) {
    const auto& ts = g.schema.types[t];
    for (auto& [id, attrs] : types[t].vertices) {
      if (!where.emplace(id, std::make_pair(t, static_cast<std::uint32_t>(g.vertices[t].size()))).second)
        throw ValidationError("duplicate vertex id " + id);
      VertexRecord rec;
      rec.ext_id = id;
      for (const auto& as : ts.attributes) {
        auto idx = as.index_of(attrs.at(as.name));
        if (!idx) throw ValidationError("value " + attrs.at(as.name) + " of " + id + " missing from dictionary " + as.name);
        rec.attrs.push_back(static_cast<std::uint32_t>(*idx));
      }
      rec.postings.resize(ntypes);
      g.vertices[t].push_back(std::move(rec));
    }
  }

  std::set<std::pair<std::string, std::string>> seen_edges;
  for (const auto& [x, y] : edges) {
    auto ix = where.find(x);
    auto iy = where.find(y);
    if (ix == where.end() || iy == where.end()) throw ValidationError("edge names unknown vertex: " + x + " " + y);
    if (x == y) throw ValidationError("self-loop on " + x);
    if (!seen_edges.emplace(std::min(x, y), std::max(x, y)).second) throw ValidationError("duplicate edge " + x + " " + y);
    auto [tx, lx] = ix->second;
    auto [ty, ly] = iy->second;
    g.vertices[tx][lx].postings[ty].push_back(ly);
    g.vertices[ty][ly].postings[tx].push_back(lx);
  }
  g.validate();
  return g;
}

AttributedGraph load_graph(const std::string& path) {
  auto bytes = read_file(path);
  return parse_graph(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string GraphSidecar::to_json() const {
  nlohmann::json j;
  j["schema"] = nlohmann::json::parse(schema.to_json());
  j["k"] = k;
  j["external_ids"] = external_ids;
  return j.dump(2);
}

GraphSidecar GraphSidecar::from_json(std::string_view text) {
  try {
    auto j = nlohmann::json::parse(text);
    GraphSidecar s;
    s.schema = Schema::from_json(j.at("schema").dump());
    s.k = j.at("k").get<std::size_t>();
    s.external_ids = j.at("external_ids").get<std::vector<std::vector<std::string>>>();
    if (s.external_ids.size() != s.schema.types.size()) throw ValidationError("sidecar external id table mismatch");
    for (std::size_t t = 0; t < s.external_ids.size(); ++t)
      if (s.external_ids[t].size() != s.schema.types[t].population)
        throw ValidationError("sidecar external id count mismatch for " + s.schema.types[t].name);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed sidecar: ") + e.what());
  }
}

GraphSidecar GraphSidecar::load(const std::string& path) {
  auto bytes = read_file(path);
  return from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

GraphSidecar make_sidecar(const PaddedGraph& padded) {
  GraphSidecar s;
  s.schema = padded.graph.schema;
  s.k = padded.k;
  for (const auto& verts : padded.graph.vertices) {
    auto& ids = s.external_ids.emplace_back();
    for (const auto& v : verts) ids.push_back(v.ext_id);
  }
  return s;
}

}  // namespace oblivgm
