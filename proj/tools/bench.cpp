#include "bench.hpp"

#include <chrono>
#include <functional>
#include <iomanip>
#include <map>

#include "oblivgm/engine.hpp"
#include "oblivgm/errors.hpp"
#include "oblivgm/party.hpp"
#include "oblivgm/rss.hpp"
#include "oblivgm/service.hpp"
#include "oblivgm/shuffle.hpp"
#include "oblivgm/synth.hpp"

using namespace oblivgm;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

CommStats sum_parties(const Trio& trio) {
  CommStats s;
  for (const auto& p : trio) {
    auto t = p->total_stats();
    s.bytes_sent += t.bytes_sent;
    s.messages += t.messages;
    s.rounds = std::max(s.rounds, t.rounds);
  }
  return s;
}

struct Table {
  std::ostream& out;
  void header(std::initializer_list<const char*> cols) {
    bool first = true;
    for (auto c : cols) out << (first ? "" : "\t") << c, first = false;
    out << '\n';
  }
  template <typename... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((out << (first ? "" : "\t") << cells, first = false), ...);
    out << '\n';
  }
};

std::array<std::vector<SharedBitVector>, 3> random_column(std::size_t rows, std::size_t domain, Prg& rng) {
  std::array<std::vector<SharedBitVector>, 3> col;
  for (std::size_t r = 0; r < rows; ++r) {
    auto sh = share(encode_one_hot(rng.uniform(domain), domain), rng);
    for (int i = 0; i < 3; ++i) col[i].push_back(std::move(sh[i]));
  }
  return col;
}

std::array<SharedBitVector, 3> random_shared(std::size_t bits, Prg& rng) {
  BitVector v(bits);
  for (std::size_t i = 0; i < bits; ++i) v.set(i, rng.next_bit());
  return share(v, rng);
}

// ---- subprotocols ----

int bench_subprotocols(const BenchArgs& a, Prg& rng, Table& t) {
  const std::size_t c = a.candidates;
  const std::size_t domain = 256;
  std::array<PartyConfig, 3> cfg;
  for (int i = 0; i < 3; ++i) cfg[i] = PartyConfig{i + 1, 1, rng.next_block()};
  auto trio = setup_session(cfg);

  t.header({"op", "candidates", "phase", "ms", "bytes", "messages", "rounds"});
  auto measure = [&](const std::string& name, const std::string& phase, const std::function<void(Party&)>& fn) {
    for (auto& p : trio) p->reset_stats();
    auto t0 = Clock::now();
    run_trio(trio, fn);
    auto ms = ms_since(t0);
    auto s = sum_parties(trio);
    t.row(name, c, phase, ms, s.bytes_sent, s.messages, s.rounds);
    return s;
  };

  auto column = random_column(c, domain, rng);
  std::array<std::vector<const SharedBitVector*>, 3> ptrs;
  for (int i = 0; i < 3; ++i)
    for (const auto& v : column[i]) ptrs[i].push_back(&v);

  auto eval_kind = [&](const std::string& name, const PredicateSpec& spec) {
    auto preds = split_bundle(fss::gen_bundle(spec, domain, rng), 0, domain);
    return measure(name, "eval", [&](Party& p) { sec_eval(p, ptrs[p.index() - 1], preds[p.index() - 1]); });
  };
  auto eq = eval_kind("sec_eval[=]", PredicateSpec::equal(17));
  eval_kind("sec_eval[<]", PredicateSpec::less(100));
  eval_kind("sec_eval[>=]", PredicateSpec::greater_eq(100));
  auto iv = eval_kind("sec_eval[in]", PredicateSpec::interval(40, 90));

  auto x = random_shared(c, rng);
  auto y = random_shared(c, rng);
  measure("and_gate", "combine", [&](Party& p) { p.and_gate(x[p.index() - 1], y[p.index() - 1]); });

  const std::size_t width = 64;
  std::array<std::vector<SharedBitVector>, 3> records;
  for (std::size_t r = 0; r < c; ++r) {
    auto sh = random_shared(width, rng);
    for (int i = 0; i < 3; ++i) records[i].push_back(std::move(sh[i]));
  }
  auto bits = random_shared(c, rng);
  measure("sec_fetch_unique", "fetch", [&](Party& p) {
    const int i = p.index() - 1;
    sec_fetch_unique(p, {{bits[i], records[i]}});
  });
  measure("sec_fetch_multi", "fetch", [&](Party& p) {
    const int i = p.index() - 1;
    sec_fetch_multi(p, {{bits[i], records[i]}});
  });
  measure("sec_shuffle", "fetch", [&](Party& p) { sec_shuffle(p, MatchTable{records[p.index() - 1]}); });

  t.row("ratio[in/=]", c, "eval",
        static_cast<double>(iv.bytes_sent) / static_cast<double>(eq.bytes_sent), "", "", "");
  return 0;
}

// ---- tokens ----

int bench_tokens(Prg& rng, Table& t) {
  SynthGraphParams gp;
  gp.vertices = 64;
  gp.types = 2;
  gp.min_dict = gp.max_dict = 256;
  gp.unique_attribute = false;
  auto graph = random_graph(gp, rng);

  t.header({"q", "kind", "token_bytes", "ratio_to_eq"});
  for (std::size_t q = 2; q <= 4; ++q) {
    std::size_t eq_bytes = 0;
    const std::pair<const char*, PredicateSpec> kinds[] = {{"=", PredicateSpec::equal(20)},
                                                           {"<", PredicateSpec::less(20)},
                                                           {"in", PredicateSpec::interval(10, 30)}};
    for (const auto& [name, spec] : kinds) {
      QueryGraph query;
      for (std::size_t v = 0; v < q; ++v) {
        query.add_vertex("q" + std::to_string(v), "T" + std::to_string(v % 2));
        query.add_predicate(v, "a0", spec);
        if (v) query.add_edge(v - 1, v);
      }
      query.validate(graph.schema);
      auto tokens = gen_token(query, graph.schema, rng);
      const auto bytes = serialize_token(tokens[0]).size();
      if (eq_bytes == 0) eq_bytes = bytes;
      t.row(q, name, bytes,
            static_cast<double>(bytes) / static_cast<double>(eq_bytes));
    }
  }
  return 0;
}

// ---- query ----

std::size_t depth_of(const QueryGraph& q) {
  std::vector<std::size_t> depth(q.vertices.size(), 0);
  std::size_t best = 0;
  for (auto v : q.bfs_order())
    if (auto p = q.parent(v)) best = std::max(best, depth[v] = depth[*p] + 1);
  return best;
}

int bench_query(const BenchArgs& a, Prg& rng, Table& t) {
  SynthGraphParams gp;
  gp.vertices = a.vertices;
  auto graph = random_graph(gp, rng);
  SynthQueryParams qp;
  qp.min_vertices = qp.max_vertices = 4;
  qp.max_depth = 2;
  qp.blind = 0;
  QueryGraph query;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 200) throw ValidationError("could not draw a 2-hop query on this graph");
    query = random_query(graph, qp, rng);
    if (query.vertices.size() == 4 && depth_of(query) == 2) break;
  }

  auto t0 = Clock::now();
  auto padded = pad_k_groups(graph, 2);
  auto shares = encrypt_graph(padded, rng);
  const auto encrypt_ms = ms_since(t0);
  t0 = Clock::now();
  auto tokens = gen_token(query, graph.schema, rng);
  const auto token_ms = ms_since(t0);

  SessionOptions opt;
  opt.seed = rng.next_block();
  t0 = Clock::now();
  auto run = run_local_trio(shares, tokens, opt);
  const auto total_ms = ms_since(t0);

  t.header({"phase", "ms", "bytes", "messages", "rounds"});
  t.row("encrypt", encrypt_ms, 0, 0, 0);
  t.row("tokenize", token_ms, serialize_token(tokens[0]).size() * 3, 0, 0);
  std::map<std::string, CommStats> phases;
  for (const auto& per_party : run.stats) {
    for (const auto& [name, s] : per_party) {
      auto& d = phases[name];
      d.bytes_sent += s.bytes_sent;
      d.messages += s.messages;
      d.rounds = std::max(d.rounds, s.rounds);
      d.nanos = std::max(d.nanos, s.nanos);
    }
  }
  for (const char* name : {"setup", "eval", "combine", "fetch", "access"}) {
    const auto& s = phases[name];
    t.row(name, static_cast<double>(s.nanos) / 1e6, s.bytes_sent, s.messages, s.rounds);
  }
  CommStats all;
  for (const auto& [_, s] : phases) {
    all.bytes_sent += s.bytes_sent;
    all.messages += s.messages;
    all.rounds += s.rounds;
  }
  t.row("query_total", total_ms, all.bytes_sent, all.messages, all.rounds);
  t.out << "# vertices=" << graph.vertex_count() << " edges=" << graph.edge_count()
        << " matches=" << run.matches[0].subgraphs.size() << '\n';
  return 0;
}

}  // namespace

int run_bench(const BenchArgs& a, std::ostream& out) {
  Prg rng = a.seed.empty() ? Prg::from_os() : Prg(Block::from_hex(a.seed));
  out << std::fixed << std::setprecision(3);
  Table t{out};
  if (a.candidates == 0) throw ValidationError("--candidates must be positive");
  if (a.suite == "subprotocols") return bench_subprotocols(a, rng, t);
  if (a.suite == "tokens") return bench_tokens(rng, t);
  if (a.suite == "query") return bench_query(a, rng, t);
  throw ValidationError("unknown suite '" + a.suite + "' (subprotocols | tokens | query)");
}
