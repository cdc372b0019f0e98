#include "oblivgm/oracle.hpp"

#include <algorithm>
#include <map>

#include "oblivgm/errors.hpp"

namespace oblivgm {

namespace {

bool satisfies(const AttributedGraph& g, const QueryVertex& qv, std::size_t index) {
  const auto& rec = g.vertices[qv.type_index][index];
  auto test = [&](const TargetPredicate& p) { return p.spec.matches(rec.attrs.at(p.attr_index)); };
  if (qv.combiner == Combiner::All) return std::all_of(qv.predicates.begin(), qv.predicates.end(), test);
  return std::any_of(qv.predicates.begin(), qv.predicates.end(), test);
}

using Partial = std::vector<std::string>;

// Every assignment of v's subtree with v mapped to graph vertex `index`.
std::vector<Partial> expand(const AttributedGraph& g, const QueryGraph& q, std::size_t v, std::size_t index) {
  Partial base(q.vertices.size());
  base[v] = g.vertices[q.vertices[v].type_index][index].ext_id;
  std::vector<Partial> acc{base};
  for (auto u : q.children(v)) {
    const auto& qu = q.vertices[u];
    std::vector<Partial> options;
    for (auto nb : g.vertices[q.vertices[v].type_index][index].postings[qu.type_index]) {
      if (nb == kDummyId || !satisfies(g, qu, nb)) continue;
      auto sub = expand(g, q, u, nb);
      options.insert(options.end(), sub.begin(), sub.end());
    }
    std::vector<Partial> next;
    for (const auto& a : acc) {
      for (const auto& o : options) {
        Partial m = a;
        for (std::size_t i = 0; i < m.size(); ++i)
          if (!o[i].empty()) m[i] = o[i];
        next.push_back(std::move(m));
      }
    }
    acc = std::move(next);
    if (acc.empty()) break;
  }
  return acc;
}

}  // namespace

std::set<PlainMatch> oracle_match(const AttributedGraph& graph, const QueryGraph& query) {
  QueryGraph q = query;
  q.validate(graph.schema);
  std::set<PlainMatch> out;
  const auto& root = q.vertices[q.root];
  for (std::size_t i = 0; i < graph.vertices[root.type_index].size(); ++i) {
    if (!satisfies(graph, root, i)) continue;
    for (auto& m : expand(graph, q, q.root, i)) out.insert(std::move(m));
  }
  return out;
}

std::string check_match(const AttributedGraph& graph, const QueryGraph& query, const PlainMatch& match) {
  QueryGraph q = query;
  q.validate(graph.schema);
  if (match.size() != q.vertices.size()) return "match does not fill every query slot";
  std::vector<std::pair<std::size_t, std::size_t>> where(match.size());
  for (std::size_t v = 0; v < match.size(); ++v) {
    bool found = false;
    for (std::size_t t = 0; t < graph.vertices.size() && !found; ++t) {
      for (std::size_t i = 0; i < graph.vertices[t].size(); ++i) {
        if (graph.vertices[t][i].ext_id == match[v]) {
          where[v] = {t, i};
          found = true;
          break;
        }
      }
    }
    if (!found) return "slot " + q.vertices[v].name + " names unknown vertex " + match[v];
    const auto& qv = q.vertices[v];
    if (where[v].first != qv.type_index) return "slot " + qv.name + " has the wrong vertex type";
    const auto& rec = graph.vertices[where[v].first][where[v].second];
    std::size_t hits = 0;
    for (const auto& p : qv.predicates) {
      const auto x = rec.attrs[p.attr_index];
      bool ok = false;
      switch (p.spec.kind) {
        case PredicateKind::Equal: ok = x == p.spec.lo; break;
        case PredicateKind::Less:
        case PredicateKind::LessEq: ok = x + 1 <= p.spec.hi; break;
        case PredicateKind::Greater:
        case PredicateKind::GreaterEq: ok = x + 1 > p.spec.lo; break;
        case PredicateKind::Interval: ok = x + 1 > p.spec.lo && x + 1 <= p.spec.hi; break;
      }
      hits += ok;
    }
    bool pass = qv.combiner == Combiner::All ? hits == qv.predicates.size() : hits > 0;
    if (!pass) return "slot " + qv.name + " fails its predicates";
  }
  for (auto [p, c] : q.edges) {
    const auto& rec = graph.vertices[where[p].first][where[p].second];
    const auto& list = rec.postings[where[c].first];
    if (std::find(list.begin(), list.end(), where[c].second) == list.end())
      return "slots " + q.vertices[p].name + " and " + q.vertices[c].name + " are not adjacent";
  }
  return {};
}

std::vector<PlainSubgraph> oracle_subgraphs(const AttributedGraph& graph, const QueryGraph& query) {
  QueryGraph q = query;
  q.validate(graph.schema);
  std::vector<std::map<std::string, std::size_t>> by_id(graph.vertices.size());
  for (std::size_t t = 0; t < graph.vertices.size(); ++t)
    for (std::size_t i = 0; i < graph.vertices[t].size(); ++i) by_id[t][graph.vertices[t][i].ext_id] = i;

  std::vector<PlainSubgraph> out;
  for (const auto& m : oracle_match(graph, q)) {
    PlainSubgraph sg;
    for (std::size_t v = 0; v < q.vertices.size(); ++v) {
      const auto& qv = q.vertices[v];
      const auto& ts = graph.schema.types[qv.type_index];
      const auto& rec = graph.vertices[qv.type_index][by_id[qv.type_index].at(m[v])];
      PlainVertex pv{qv.name, ts.name, m[v], {}};
      std::vector<std::size_t> seen;
      for (const auto& p : qv.predicates) {
        if (std::find(seen.begin(), seen.end(), p.attr_index) != seen.end()) continue;
        seen.push_back(p.attr_index);
        const auto& as = ts.attributes[p.attr_index];
        pv.attrs.emplace_back(as.name, as.values[rec.attrs[p.attr_index]]);
      }
      sg.push_back(std::move(pv));
    }
    out.push_back(std::move(sg));
  }
  return out;
}

}  // namespace oblivgm
