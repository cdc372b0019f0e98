#include "oblivgm/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "oblivgm/errors.hpp"

namespace oblivgm {

namespace {

std::string label(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "v%03zu", i);
  return buf;
}

double unit(Prg& rng) { return static_cast<double>(rng.next_u64() >> 11) * 0x1.0p-53; }

std::size_t pick(Prg& rng, std::size_t lo, std::size_t hi) { return lo + rng.uniform(hi - lo + 1); }

}  // namespace

AttributedGraph random_graph(const SynthGraphParams& params, Prg& rng) {
  if (params.types == 0 || params.attrs_per_type == 0) throw ValidationError("need at least one type and attribute");
  const std::size_t base = std::max<std::size_t>(4, params.vertices / (2 * params.types));
  if (base * params.types > params.vertices) throw ValidationError("too few vertices for the requested types");
  if (params.min_dict == 0 || params.min_dict > params.max_dict) throw ValidationError("bad dictionary size range");

  std::vector<std::size_t> pop(params.types, base);
  for (std::size_t r = params.vertices - base * params.types; r > 0; --r) ++pop[rng.uniform(params.types)];

  AttributedGraph g;
  for (std::size_t t = 0; t < params.types; ++t) {
    VertexTypeSchema ts;
    ts.name = "T" + std::to_string(t);
    ts.population = static_cast<std::uint32_t>(pop[t]);
    for (std::size_t a = 0; a < params.attrs_per_type; ++a) {
      AttributeSchema as;
      as.name = "a" + std::to_string(a);
      const bool unique = params.unique_attribute && t == 0 && a == 0;
      const std::size_t n = unique ? pop[t] : pick(rng, params.min_dict, params.max_dict);
      as.ordinal = unique || a % 2 == 0;
      as.unique = unique;
      for (std::size_t k = 0; k < n; ++k) as.values.push_back(as.ordinal ? std::to_string(k * 5) : label(k));
      ts.attributes.push_back(std::move(as));
    }
    g.schema.types.push_back(std::move(ts));
  }

  g.vertices.resize(params.types);
  for (std::size_t t = 0; t < params.types; ++t) {
    const auto& ts = g.schema.types[t];
    std::vector<std::uint32_t> unique_values(pop[t]);
    for (std::size_t i = 0; i < pop[t]; ++i) unique_values[i] = static_cast<std::uint32_t>(i);
    std::shuffle(unique_values.begin(), unique_values.end(), rng);
    for (std::size_t i = 0; i < pop[t]; ++i) {
      VertexRecord rec;
      rec.ext_id = ts.name + "_" + std::to_string(i);
      for (std::size_t a = 0; a < ts.attributes.size(); ++a) {
        const auto& as = ts.attributes[a];
        rec.attrs.push_back(as.unique ? unique_values[i] : static_cast<std::uint32_t>(rng.uniform(as.size())));
      }
      rec.postings.resize(params.types);
      g.vertices[t].push_back(std::move(rec));
    }
  }

  const auto target = static_cast<std::size_t>(params.avg_degree * static_cast<double>(params.vertices) / 2.0);
  std::vector<std::pair<std::size_t, std::size_t>> flat;
  for (std::size_t t = 0; t < params.types; ++t)
    for (std::size_t i = 0; i < pop[t]; ++i) flat.emplace_back(t, i);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t tries = 0; seen.size() < target && tries < target * 20; ++tries) {
    auto x = rng.uniform(flat.size());
    auto y = rng.uniform(flat.size());
    if (x == y || !seen.emplace(std::min(x, y), std::max(x, y)).second) continue;
    auto [tx, ix] = flat[x];
    auto [ty, iy] = flat[y];
    g.vertices[tx][ix].postings[ty].push_back(static_cast<std::uint32_t>(iy));
    g.vertices[ty][iy].postings[tx].push_back(static_cast<std::uint32_t>(ix));
  }
  g.validate();
  return g;
}

namespace {

PredicateSpec covering_predicate(std::uint64_t x, std::uint64_t n, Prg& rng) {
  switch (rng.uniform(6)) {
    case 0:
    case 1: return PredicateSpec::equal(x);
    case 2: return PredicateSpec::less(x + 1 + rng.uniform(n - x));
    case 3: return x == 0 ? PredicateSpec::greater_eq(0) : PredicateSpec::greater(rng.uniform(x));
    default: {
      auto a = x - rng.uniform(std::min<std::uint64_t>(x, 12) + 1);
      auto b = x + rng.uniform(std::min<std::uint64_t>(n - 1 - x, 12) + 1);
      bool lc = a < x ? rng.next_bit() : true;
      bool uc = b > x ? rng.next_bit() : true;
      return PredicateSpec::interval(a, b, lc, uc);
    }
  }
}

PredicateSpec blind_predicate(std::uint64_t n, Prg& rng) {
  auto a = rng.uniform(n);
  auto b = rng.uniform(n);
  if (a > b) std::swap(a, b);
  switch (rng.uniform(5)) {
    case 0: return PredicateSpec::equal(a);
    case 1: return PredicateSpec::less(a);
    case 2: return PredicateSpec::less_eq(b);
    case 3: return PredicateSpec::greater_eq(a);
    default: return PredicateSpec::interval(a, b, rng.next_bit(), rng.next_bit());
  }
}

}  // namespace

QueryGraph random_query(const AttributedGraph& graph, const SynthQueryParams& params, Prg& rng) {
  const auto ntypes = graph.vertices.size();
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto size = pick(rng, params.min_vertices, params.max_vertices);
    std::vector<std::pair<std::size_t, std::size_t>> mapped;  // (type, index) per query vertex
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<std::size_t> depth{0};
    auto t0 = rng.uniform(ntypes);
    mapped.emplace_back(t0, rng.uniform(graph.vertices[t0].size()));
    for (int stall = 0; mapped.size() < size && stall < 64; ++stall) {
      auto p = rng.uniform(mapped.size());
      if (depth[p] >= params.max_depth) continue;
      auto [tp, ip] = mapped[p];
      std::vector<std::pair<std::size_t, std::size_t>> nbrs;
      for (std::size_t nt = 0; nt < ntypes; ++nt)
        for (auto id : graph.vertices[tp][ip].postings[nt])
          if (id != kDummyId) nbrs.emplace_back(nt, id);
      if (nbrs.empty()) continue;
      mapped.push_back(nbrs[rng.uniform(nbrs.size())]);
      edges.emplace_back(p, mapped.size() - 1);
      depth.push_back(depth[p] + 1);
    }
    if (mapped.size() < params.min_vertices) continue;

    QueryGraph q;
    for (std::size_t v = 0; v < mapped.size(); ++v) {
      auto [t, i] = mapped[v];
      const auto& ts = graph.schema.types[t];
      q.add_vertex("q" + std::to_string(v), ts.name);
      const std::size_t npred = unit(rng) < params.second_predicate ? 2 : 1;
      for (std::size_t k = 0; k < npred; ++k) {
        auto a = rng.uniform(ts.attributes.size());
        const std::uint64_t n = ts.attributes[a].size();
        auto spec = unit(rng) < params.blind ? blind_predicate(n, rng)
                                             : covering_predicate(graph.vertices[t][i].attrs[a], n, rng);
        q.add_predicate(v, ts.attributes[a].name, spec);
      }
      if (npred > 1 && rng.next_bit()) q.vertices[v].combiner = Combiner::Any;
    }
    for (auto [p, c] : edges) q.add_edge(p, c);
    q.root = 0;
    q.validate(graph.schema);
    return q;
  }
  throw ValidationError("could not grow a query on this graph");
}

std::string format_graph(const AttributedGraph& graph) {
  std::ostringstream os;
  for (const auto& t : graph.schema.types) {
    for (const auto& a : t.attributes) {
      os << "A " << t.name << ' ' << a.name << ' ' << (a.ordinal ? "ordinal" : "categorical");
      if (a.unique) os << " unique";
      os << " values=";
      for (std::size_t k = 0; k < a.values.size(); ++k) os << (k ? "," : "") << a.values[k];
      os << '\n';
    }
  }
  for (std::size_t t = 0; t < graph.vertices.size(); ++t) {
    const auto& ts = graph.schema.types[t];
    for (const auto& v : graph.vertices[t]) {
      os << "V " << ts.name << ' ' << v.ext_id;
      for (std::size_t a = 0; a < v.attrs.size(); ++a) os << ' ' << ts.attributes[a].name << '=' << ts.attributes[a].values[v.attrs[a]];
      os << '\n';
    }
  }
  for (std::size_t t = 0; t < graph.vertices.size(); ++t) {
    for (std::size_t i = 0; i < graph.vertices[t].size(); ++i) {
      for (std::size_t nt = t; nt < graph.vertices.size(); ++nt) {
        for (auto j : graph.vertices[t][i].postings[nt]) {
          if (j == kDummyId || (nt == t && j <= i)) continue;
          os << "E " << graph.vertices[t][i].ext_id << ' ' << graph.vertices[nt][j].ext_id << '\n';
        }
      }
    }
  }
  return os.str();
}

std::string format_query(const QueryGraph& query, const Schema& schema) {
  std::ostringstream os;
  for (const auto& v : query.vertices) {
    const auto& ts = schema.types.at(schema.type_index(v.type));
    for (const auto& p : v.predicates) {
      const auto& dict = ts.attributes.at(ts.attribute_index(p.attr)).values;
      const auto n = dict.size();
      const auto& s = p.spec;
      os << "Q " << v.name << ' ' << v.type << ' ' << p.attr << ' ';
      switch (s.kind) {
        case PredicateKind::Equal: os << "= " << dict[s.lo]; break;
        case PredicateKind::Less:
        case PredicateKind::LessEq:
          if (s.hi == 0) os << "< " << dict[0];
          else os << "<= " << dict[s.hi - 1];
          break;
        case PredicateKind::Greater:
        case PredicateKind::GreaterEq:
          if (s.lo >= n) os << "> " << dict[n - 1];
          else os << ">= " << dict[s.lo];
          break;
        case PredicateKind::Interval:
          if (s.lo < s.hi) os << "in[] " << dict[s.lo] << ' ' << dict[s.hi - 1];
          else if (s.lo < n) os << "in[) " << dict[s.lo] << ' ' << dict[s.lo];
          else os << "in() " << dict[n - 1] << ' ' << dict[n - 1];
          break;
      }
      os << '\n';
    }
    if (v.combiner == Combiner::Any) os << "ANY " << v.name << '\n';
  }
  for (auto [p, c] : query.edges) os << "QE " << query.vertices[p].name << ' ' << query.vertices[c].name << '\n';
  os << "START " << query.vertices[query.root].name << '\n';
  return os.str();
}

}  // namespace oblivgm
