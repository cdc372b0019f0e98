#include "oblivgm/query.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "oblivgm/errors.hpp"

namespace oblivgm {

std::string_view to_string(PredicateKind kind) {
  switch (kind) {
    case PredicateKind::Equal: return "=";
    case PredicateKind::Less: return "<";
    case PredicateKind::LessEq: return "<=";
    case PredicateKind::Greater: return ">";
    case PredicateKind::GreaterEq: return ">=";
    case PredicateKind::Interval: return "in";
  }
  return "?";
}

PredicateSpec PredicateSpec::equal(std::uint64_t a) { return {PredicateKind::Equal, a, a + 1, true, true}; }
PredicateSpec PredicateSpec::less(std::uint64_t a) { return {PredicateKind::Less, 0, a, true, false}; }
PredicateSpec PredicateSpec::less_eq(std::uint64_t a) { return {PredicateKind::LessEq, 0, a + 1, true, true}; }
PredicateSpec PredicateSpec::greater(std::uint64_t a) { return {PredicateKind::Greater, a + 1, 0, false, true}; }
PredicateSpec PredicateSpec::greater_eq(std::uint64_t a) { return {PredicateKind::GreaterEq, a, 0, true, true}; }

PredicateSpec PredicateSpec::interval(std::uint64_t a, std::uint64_t a_prime, bool lower_closed, bool upper_closed) {
  if (a > a_prime) throw ValidationError("interval lower bound exceeds upper bound");
  std::uint64_t lo = lower_closed ? a : a + 1;
  std::uint64_t hi = upper_closed ? a_prime + 1 : a_prime;
  return {PredicateKind::Interval, lo, std::max(lo, hi), lower_closed, upper_closed};
}

bool PredicateSpec::matches(std::uint64_t x) const {
  switch (kind) {
    case PredicateKind::Equal: return x == lo;
    case PredicateKind::Less:
    case PredicateKind::LessEq: return x < hi;
    case PredicateKind::Greater:
    case PredicateKind::GreaterEq: return x >= lo;
    case PredicateKind::Interval: return lo <= x && x < hi;
  }
  return false;
}

void PredicateSpec::validate(std::uint64_t domain_size) const {
  if (domain_size == 0) throw ValidationError("empty predicate domain");
  switch (kind) {
    case PredicateKind::Equal:
      if (lo >= domain_size) throw ValidationError("equality operand outside the dictionary");
      return;
    case PredicateKind::Less:
    case PredicateKind::LessEq:
      if (hi > domain_size) throw ValidationError("upper operand outside the dictionary");
      return;
    case PredicateKind::Greater:
    case PredicateKind::GreaterEq:
      if (lo > domain_size) throw ValidationError("lower operand outside the dictionary");
      return;
    case PredicateKind::Interval:
      if (lo > hi) throw ValidationError("interval bounds inverted");
      if (hi > domain_size) throw ValidationError("interval operand outside the dictionary");
      return;
  }
  throw ValidationError("unknown predicate kind");
}

std::size_t QueryGraph::add_vertex(std::string name, std::string type) {
  for (const auto& v : vertices)
    if (v.name == name) throw ValidationError("query vertex declared twice: " + name);
  vertices.push_back(QueryVertex{std::move(name), std::move(type), 0, {}, Combiner::All});
  return vertices.size() - 1;
}

void QueryGraph::add_predicate(std::size_t vertex, std::string attr, PredicateSpec spec) {
  vertices.at(vertex).predicates.push_back(TargetPredicate{std::move(attr), 0, spec});
}

std::size_t QueryGraph::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i].name == name) return i;
  throw ValidationError("unknown query vertex " + std::string(name));
}

std::vector<std::size_t> QueryGraph::children(std::size_t v) const {
  std::vector<std::size_t> out;
  for (auto [p, c] : edges)
    if (p == v) out.push_back(c);
  return out;
}

std::optional<std::size_t> QueryGraph::parent(std::size_t v) const {
  for (auto [p, c] : edges)
    if (c == v) return p;
  return std::nullopt;
}

namespace {

template <typename Children>
std::vector<std::size_t> bfs(std::size_t root, Children&& children) {
  std::vector<std::size_t> order{root};
  for (std::size_t i = 0; i < order.size(); ++i)
    for (auto c : children(order[i])) order.push_back(c);
  return order;
}

}  // namespace

std::vector<std::size_t> QueryGraph::bfs_order() const {
  return bfs(root, [this](std::size_t v) { return children(v); });
}

void QueryGraph::validate(const Schema& schema) {
  if (vertices.empty()) throw ValidationError("query has no vertices");
  if (root >= vertices.size()) throw ValidationError("query root out of range");
  for (auto& v : vertices) {
    if (v.predicates.empty()) throw ValidationError("query vertex " + v.name + " has no target attributes");
    v.type_index = schema.type_index(v.type);
    const auto& type = schema.types[v.type_index];
    for (auto& p : v.predicates) {
      p.attr_index = type.attribute_index(p.attr);
      p.spec.validate(type.attributes[p.attr_index].size());
    }
  }
  std::vector<int> indegree(vertices.size(), 0);
  for (auto [p, c] : edges) {
    if (p >= vertices.size() || c >= vertices.size()) throw ValidationError("query edge out of range");
    if (p == c) throw ValidationError("query edge is a self-loop");
    ++indegree[c];
  }
  if (indegree[root] != 0) throw ValidationError("query root has a parent");
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (i != root && indegree[i] != 1) throw ValidationError("query vertex " + vertices[i].name + " must have exactly one parent");
  if (edges.size() + 1 != vertices.size()) throw ValidationError("query is not a tree");
  if (bfs_order().size() != vertices.size()) throw ValidationError("query is not connected");
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double number(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("expected a numeric operand, got " + s);
}

std::uint64_t exact_index(const AttributeSchema& attr, const std::string& value) {
  auto idx = attr.index_of(value);
  if (!idx) throw ValidationError("value " + value + " is not in the dictionary of " + attr.name);
  return *idx;
}

// Index of the first dictionary entry >= value (closed) or > value (open).
std::uint64_t lower_index(const AttributeSchema& attr, const std::string& value, bool closed) {
  if (!attr.ordinal) return exact_index(attr, value) + (closed ? 0 : 1);
  return closed ? attr.lower_bound(number(value)) : attr.upper_bound(number(value));
}

// One past the last dictionary entry <= value (closed) or < value (open).
std::uint64_t upper_index(const AttributeSchema& attr, const std::string& value, bool closed) {
  if (!attr.ordinal) return exact_index(attr, value) + (closed ? 1 : 0);
  return closed ? attr.upper_bound(number(value)) : attr.lower_bound(number(value));
}

PredicateSpec make_spec(const AttributeSchema& attr, const std::string& op, const std::vector<std::string>& operands) {
  auto need = [&](std::size_t n) {
    if (operands.size() != n) throw ValidationError("operator " + op + " takes " + std::to_string(n) + " operand(s)");
  };
  if (op == "=") {
    need(1);
    return PredicateSpec::equal(exact_index(attr, operands[0]));
  }
  if (op == "<" || op == "<=") {
    need(1);
    auto hi = upper_index(attr, operands[0], op == "<=");
    return {op == "<" ? PredicateKind::Less : PredicateKind::LessEq, 0, hi, true, op == "<="};
  }
  if (op == ">" || op == ">=") {
    need(1);
    auto lo = lower_index(attr, operands[0], op == ">=");
    return {op == ">" ? PredicateKind::Greater : PredicateKind::GreaterEq, lo, 0, op == ">=", true};
  }
  if (op == "in" || (op.size() == 4 && op.rfind("in", 0) == 0)) {
    need(2);
    bool lc = op == "in" || op[2] == '[';
    bool uc = op == "in" || op[3] == ']';
    if (op != "in" && ((op[2] != '[' && op[2] != '(') || (op[3] != ']' && op[3] != ')')))
      throw ValidationError("unknown interval operator " + op);
    if (attr.ordinal && number(operands[0]) > number(operands[1]))
      throw ValidationError("interval lower bound exceeds upper bound");
    auto lo = lower_index(attr, operands[0], lc);
    auto hi = upper_index(attr, operands[1], uc);
    if (!attr.ordinal && lo > hi) throw ValidationError("interval lower bound exceeds upper bound");
    return {PredicateKind::Interval, lo, std::max(lo, hi), lc, uc};
  }
  throw ValidationError("unknown predicate operator " + op);
}

}  // namespace

QueryGraph parse_query(std::string_view text, const Schema& schema) {
  QueryGraph q;
  std::optional<std::string> start;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < q.vertices.size(); ++i)
      if (q.vertices[i].name == name) return i;
    return std::nullopt;
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    try {
      if (tok[0] == "Q") {
        if (tok.size() < 6) throw ValidationError("expected 'Q <name> <type> <attr> <op> <operand(s)>'");
        auto v = find(tok[1]);
        if (!v) {
          v = q.add_vertex(tok[1], tok[2]);
        } else if (q.vertices[*v].type != tok[2]) {
          throw ValidationError("query vertex " + tok[1] + " redeclared with another type");
        }
        const auto& type = schema.types[schema.type_index(tok[2])];
        const auto& attr = type.attributes[type.attribute_index(tok[3])];
        q.add_predicate(*v, tok[3], make_spec(attr, tok[4], {tok.begin() + 5, tok.end()}));
      } else if (tok[0] == "ANY" || tok[0] == "ALL") {
        if (tok.size() != 2) throw ValidationError("expected '" + tok[0] + " <name>'");
        q.vertices.at(q.index_of(tok[1])).combiner = tok[0] == "ANY" ? Combiner::Any : Combiner::All;
      } else if (tok[0] == "QE") {
        if (tok.size() != 3) throw ValidationError("expected 'QE <parent> <child>'");
        q.add_edge(q.index_of(tok[1]), q.index_of(tok[2]));
      } else if (tok[0] == "START") {
        if (tok.size() != 2) throw ValidationError("expected 'START <name>'");
        start = tok[1];
      } else {
        throw ValidationError("unknown record type " + tok[0]);
      }
    } catch (const ValidationError& e) {
      throw ValidationError("query line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (q.vertices.empty()) throw ValidationError("query has no vertices");
  if (start) {
    q.root = q.index_of(*start);
  } else {
    std::vector<bool> has_parent(q.vertices.size(), false);
    for (auto [p, c] : q.edges) has_parent[c] = true;
    auto it = std::find(has_parent.begin(), has_parent.end(), false);
    q.root = static_cast<std::size_t>(it - has_parent.begin());
  }
  q.validate(schema);
  return q;
}

QueryGraph load_query(const std::string& path, const Schema& schema) {
  auto bytes = read_file(path);
  return parse_query(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), schema);
}

std::uint64_t schema_fingerprint(const Schema& schema) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : schema.to_json()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::size_t> PartyToken::children(std::size_t v) const {
  std::vector<std::size_t> out;
  for (auto [p, c] : edges)
    if (p == v) out.push_back(c);
  return out;
}

std::vector<std::size_t> PartyToken::bfs_order() const {
  return bfs(root, [this](std::size_t v) { return children(v); });
}

std::array<PartyToken, 3> gen_token(const QueryGraph& query, const Schema& schema, Prg& rng) {
  QueryGraph q = query;
  q.validate(schema);
  std::array<PartyToken, 3> out;
  const Block nonce = rng.next_block();
  for (int p = 0; p < 3; ++p) {
    out[p].party = p + 1;
    out[p].nonce = nonce;
    out[p].schema_id = schema_fingerprint(schema);
    out[p].root = static_cast<std::uint32_t>(q.root);
    for (auto [a, b] : q.edges) out[p].edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
  }
  for (const auto& v : q.vertices) {
    const auto& type = schema.types[v.type_index];
    bool unique_fetch = false;
    if (v.combiner == Combiner::All || v.predicates.size() == 1) {
      for (const auto& p : v.predicates)
        unique_fetch |= p.spec.kind == PredicateKind::Equal && type.attributes[p.attr_index].unique;
    }
    std::array<TokenVertex, 3> tv;
    for (auto& t : tv) {
      t.name = v.name;
      t.type_index = static_cast<std::uint32_t>(v.type_index);
      t.combiner = v.combiner;
      t.unique_fetch = unique_fetch;
    }
    for (const auto& p : v.predicates) {
      const auto domain = type.attributes[p.attr_index].size();
      auto parts = split_bundle(fss::gen_bundle(p.spec, domain, rng), static_cast<std::uint32_t>(p.attr_index),
                                static_cast<std::uint32_t>(domain));
      for (int i = 0; i < 3; ++i) tv[i].predicates.push_back(std::move(parts[i]));
    }
    for (int i = 0; i < 3; ++i) out[i].vertices.push_back(std::move(tv[i]));
  }
  return out;
}

std::array<TokenPredicate, 3> split_bundle(fss::FssKeyBundle bundle, std::uint32_t attr_index,
                                           std::uint32_t domain_size) {
  auto& [k11, k21] = bundle.pairs[0];
  auto& [k12, k22] = bundle.pairs[1];
  auto& [k13, k23] = bundle.pairs[2];
  const std::array<std::pair<fss::FssKey*, fss::FssKey*>, 3> split{{{&k11, &k12}, {&k22, &k13}, {&k23, &k21}}};
  std::array<TokenPredicate, 3> out;
  for (int i = 0; i < 3; ++i)
    out[i] = TokenPredicate{attr_index, bundle.kind, domain_size, std::move(*split[i].first),
                            std::move(*split[i].second)};
  return out;
}

fss::FssKeyBundle recombine_bundle(std::span<const PartyToken, 3> tokens, std::size_t v, std::size_t p) {
  const auto& t1 = tokens[0].vertices.at(v).predicates.at(p);
  const auto& t2 = tokens[1].vertices.at(v).predicates.at(p);
  const auto& t3 = tokens[2].vertices.at(v).predicates.at(p);
  fss::FssKeyBundle b;
  b.kind = t1.kind;
  b.pairs[0] = {t1.first, t3.second};
  b.pairs[1] = {t1.second, t2.first};
  b.pairs[2] = {t2.second, t3.first};
  return b;
}

namespace {
constexpr std::uint16_t kTokenVersion = 1;
}

Bytes serialize_token(const PartyToken& token) {
  ByteWriter w;
  w.raw("OGMT");
  w.u16(kTokenVersion);
  w.u8(static_cast<std::uint8_t>(token.party));
  w.u64(token.nonce.lo);
  w.u64(token.nonce.hi);
  w.u64(token.schema_id);
  w.u32(static_cast<std::uint32_t>(token.vertices.size()));
  for (const auto& v : token.vertices) {
    w.str(v.name);
    w.u32(v.type_index);
    w.u8(static_cast<std::uint8_t>(v.combiner));
    w.u8(v.unique_fetch ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(v.predicates.size()));
    for (const auto& p : v.predicates) {
      w.u32(p.attr_index);
      w.u8(static_cast<std::uint8_t>(p.kind));
      w.u32(p.domain_size);
      fss::write_key(w, p.first);
      fss::write_key(w, p.second);
    }
  }
  w.u32(static_cast<std::uint32_t>(token.edges.size()));
  for (auto [p, c] : token.edges) {
    w.u32(p);
    w.u32(c);
  }
  w.u32(token.root);
  return std::move(w).take();
}

PartyToken parse_token(std::span<const std::uint8_t> bytes, std::optional<int> expected_party) {
  ByteReader r(bytes);
  r.expect_magic("OGMT");
  if (r.u16() != kTokenVersion) throw ValidationError("unsupported token version");
  PartyToken t;
  t.party = r.u8();
  if (t.party < 1 || t.party > 3) throw ValidationError("bad party index in token");
  if (expected_party && *expected_party != t.party)
    throw ValidationError("token belongs to party " + std::to_string(t.party) + ", not party " +
                          std::to_string(*expected_party));
  t.nonce.lo = r.u64();
  t.nonce.hi = r.u64();
  t.schema_id = r.u64();
  auto nverts = r.u32();
  for (std::uint32_t i = 0; i < nverts; ++i) {
    TokenVertex v;
    v.name = r.str();
    v.type_index = r.u32();
    auto comb = r.u8();
    if (comb > 1) throw ValidationError("bad combiner in token");
    v.combiner = static_cast<Combiner>(comb);
    v.unique_fetch = r.u8() != 0;
    auto npred = r.u32();
    if (npred == 0) throw ValidationError("token vertex without predicates");
    for (std::uint32_t j = 0; j < npred; ++j) {
      TokenPredicate p;
      p.attr_index = r.u32();
      auto kind = r.u8();
      if (kind > static_cast<std::uint8_t>(PredicateKind::Interval)) throw ValidationError("bad predicate kind in token");
      p.kind = static_cast<PredicateKind>(kind);
      p.domain_size = r.u32();
      p.first = fss::read_key(r);
      p.second = fss::read_key(r);
      v.predicates.push_back(std::move(p));
    }
    t.vertices.push_back(std::move(v));
  }
  auto nedges = r.u32();
  for (std::uint32_t i = 0; i < nedges; ++i) {
    auto p = r.u32();
    auto c = r.u32();
    if (p >= nverts || c >= nverts) throw ValidationError("token edge out of range");
    t.edges.emplace_back(p, c);
  }
  t.root = r.u32();
  if (t.root >= nverts) throw ValidationError("token root out of range");
  r.expect_done();
  return t;
}

}  // namespace oblivgm
