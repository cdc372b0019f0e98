#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "bench.hpp"
#include "oblivgm/errors.hpp"
#include "oblivgm/graph.hpp"
#include "oblivgm/oracle.hpp"
#include "oblivgm/query.hpp"
#include "oblivgm/results.hpp"
#include "oblivgm/service.hpp"

namespace fs = std::filesystem;
using namespace oblivgm;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitProtocol = 3;

Prg make_rng(const std::string& seed_hex) {
  return seed_hex.empty() ? Prg::from_os() : Prg(Block::from_hex(seed_hex));
}

std::optional<Block> optional_seed(const std::string& hex) {
  if (hex.empty()) return std::nullopt;
  return Block::from_hex(hex);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::array<std::string, 3> three_endpoints(const std::string& list, const char* what) {
  auto items = split_list(list);
  if (items.size() != 3) throw ValidationError(std::string(what) + " must list exactly three host:port endpoints");
  return {items[0], items[1], items[2]};
}

AnyMode parse_any_mode(const std::string& s) {
  if (s == "or") return AnyMode::LogicalOr;
  if (s == "xor") return AnyMode::Xor;
  throw ValidationError("--any-mode must be 'or' or 'xor'");
}

std::string share_path(const fs::path& dir, int party) { return (dir / ("party" + std::to_string(party) + ".ogmg")).string(); }
std::string token_path(const fs::path& dir, int party) { return (dir / ("token" + std::to_string(party) + ".ogmt")).string(); }
std::string result_path(const fs::path& dir, int party) { return (dir / ("result" + std::to_string(party) + ".ogmr")).string(); }

void write_text(const fs::path& path, const std::string& text) {
  write_file(path.string(), std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void print_sorted(std::vector<PlainSubgraph> subgraphs) {
  std::sort(subgraphs.begin(), subgraphs.end(), [](const PlainSubgraph& x, const PlainSubgraph& y) {
    return id_tuples({x}) < id_tuples({y});
  });
  std::cout << "matches: " << subgraphs.size() << '\n' << format_subgraphs(subgraphs);
}

// ---- encrypt ----
struct EncryptArgs {
  std::string graph, out_dir, seed;
  std::size_t k = 2;
  bool verify = false;
};

int cmd_encrypt(const EncryptArgs& a) {
  auto graph = load_graph(a.graph);
  auto padded = pad_k_groups(graph, a.k);
  auto rng = make_rng(a.seed);
  auto shares = encrypt_graph(padded, rng);
  fs::create_directories(a.out_dir);
  std::size_t total = 0;
  for (const auto& s : shares) {
    auto bytes = serialize_graph_share(s);
    total += bytes.size();
    write_file(share_path(a.out_dir, s.party), bytes);
  }
  write_text(fs::path(a.out_dir) / "sidecar.json", make_sidecar(padded).to_json());

  std::cout << "[encrypt] vertices=" << graph.vertex_count() << " edges=" << graph.edge_count() << " k=" << a.k
            << " dummies=" << padded.stats.dummies << " share_bytes=" << total << '\n';
  for (std::size_t t = 0; t < graph.schema.types.size(); ++t) {
    std::cout << "[encrypt] type " << graph.schema.types[t].name << " groups=";
    const auto& sizes = padded.stats.group_sizes[t];
    for (std::size_t g = 0; g < sizes.size(); ++g) std::cout << (g ? "," : "") << sizes[g];
    std::cout << '\n';
  }
  if (a.verify) {
    std::vector<EncryptedGraphShare> loaded;
    for (int p = 1; p <= 3; ++p) loaded.push_back(parse_graph_share(read_file(share_path(a.out_dir, p))));
    auto back = reconstruct_graph(loaded);
    for (std::size_t t = 0; t < back.vertices.size(); ++t)
      for (std::size_t i = 0; i < back.vertices[t].size(); ++i)
        if (back.vertices[t][i].attrs != padded.graph.vertices[t][i].attrs ||
            back.vertices[t][i].postings != padded.graph.vertices[t][i].postings)
          throw ValidationError("reconstruction check failed");
    std::cout << "[encrypt] reconstruction check passed\n";
  }
  return 0;
}

// ---- tokenize ----
struct TokenizeArgs {
  std::string query, schema, out_dir, seed;
};

int cmd_tokenize(const TokenizeArgs& a) {
  auto sidecar = GraphSidecar::load(a.schema);
  auto q = load_query(a.query, sidecar.schema);
  auto rng = make_rng(a.seed);
  auto tokens = gen_token(q, sidecar.schema, rng);
  fs::create_directories(a.out_dir);
  for (const auto& t : tokens) {
    auto bytes = serialize_token(t);
    write_file(token_path(a.out_dir, t.party), bytes);
    std::cout << "[tokenize] party " << t.party << " token_bytes=" << bytes.size() << '\n';
  }
  return 0;
}

// ---- serve ----
struct ServeArgs {
  int party = 0;
  std::string graph_share, bind, client_bind, peers, seed, any_mode = "or";
  std::size_t max_queries = 0;
  bool local_trio = false;
  std::string share_dir, host = "127.0.0.1";
  int base_port = 7700;
};

std::string env_or(const std::string& v, const char* name) {
  if (!v.empty()) return v;
  const char* e = std::getenv(name);
  return e ? e : "";
}

int cmd_serve(const ServeArgs& a) {
  EngineOptions engine;
  engine.any_mode = parse_any_mode(a.any_mode);
  engine.progress = [](const std::string& line) { std::cerr << line << '\n'; };

  if (a.local_trio) {
    if (a.share_dir.empty()) throw ValidationError("--local-trio needs --share-dir");
    std::array<std::string, 3> peers;
    for (int i = 0; i < 3; ++i) peers[i] = a.host + ":" + std::to_string(a.base_port + i);
    std::vector<std::unique_ptr<Server>> servers;
    for (int i = 1; i <= 3; ++i) {
      ServerConfig cfg{i, peers[i - 1], a.host + ":" + std::to_string(a.base_port + 10 + i - 1), peers,
                       optional_seed(a.seed), engine, a.max_queries};
      servers.push_back(std::make_unique<Server>(cfg, parse_graph_share(read_file(share_path(a.share_dir, i)))));
      std::cerr << "[party-" << i << "] peers on " << peers[i - 1] << ", clients on " << cfg.client_bind << '\n';
    }
    std::vector<std::thread> threads;
    for (auto& s : servers) threads.emplace_back([&s] { s->serve(); });
    for (auto& t : threads) t.join();
    return 0;
  }

  if (a.party < 1 || a.party > 3) throw ValidationError("--party must be 1, 2 or 3");
  if (a.graph_share.empty()) throw ValidationError("--graph-share is required");
  const auto peers = three_endpoints(env_or(a.peers, "OBLIVGM_PEERS"), "--peers / OBLIVGM_PEERS");
  auto bind = env_or(a.bind, "OBLIVGM_BIND");
  if (bind.empty()) bind = peers[a.party - 1];
  auto client_bind = a.client_bind;
  if (client_bind.empty()) {
    auto [host, port] = parse_endpoint(bind);
    client_bind = host + ":" + std::to_string(port + 10);
  }
  auto graph = parse_graph_share(read_file(a.graph_share));
  Server server(ServerConfig{a.party, bind, client_bind, peers, optional_seed(a.seed), engine, a.max_queries},
                std::move(graph));
  std::cerr << "[party-" << a.party << "] peers on " << bind << ", clients on " << client_bind << '\n';
  server.serve();
  return 0;
}

// ---- query ----
struct QueryArgs {
  std::string token_dir, servers, share_dir, out_dir, seed, any_mode = "or";
  bool local_trio = false;
  bool tcp = false;
};

int cmd_query(const QueryArgs& a) {
  std::array<PartyToken, 3> tokens;
  for (int p = 1; p <= 3; ++p) tokens[p - 1] = parse_token(read_file(token_path(a.token_dir, p)), p);
  std::array<ResultShare, 3> results;
  if (a.local_trio) {
    if (a.share_dir.empty()) throw ValidationError("--local-trio needs --share-dir");
    std::array<EncryptedGraphShare, 3> graph;
    for (int p = 1; p <= 3; ++p) graph[p - 1] = parse_graph_share(read_file(share_path(a.share_dir, p)));
    SessionOptions opt;
    opt.engine.any_mode = parse_any_mode(a.any_mode);
    opt.engine.progress = [](const std::string& line) {
      if (line.rfind("[party-1]", 0) == 0) std::cerr << line << '\n';
    };
    opt.seed = optional_seed(a.seed);
    opt.transport = a.tcp ? Transport::Tcp : Transport::Memory;
    auto run = run_local_trio(graph, tokens, opt);
    results = std::move(run.results);
    for (const auto& [phase, s] : run.stats[0])
      std::cerr << "[party-1] phase " << phase << " bytes=" << s.bytes_sent << " rounds=" << s.rounds << '\n';
  } else {
    if (a.servers.empty()) throw ValidationError("give --servers or --local-trio");
    results = submit_query(three_endpoints(a.servers, "--servers"), tokens);
  }
  fs::create_directories(a.out_dir);
  for (const auto& r : results) write_file(result_path(a.out_dir, r.party), serialize_result(r));
  std::cout << "[query] subgraph records per party: " << results[0].subgraphs.size() << '\n';
  return 0;
}

// ---- open ----
int cmd_open(const std::vector<std::string>& files, const std::string& sidecar_path) {
  std::vector<ResultShare> shares;
  for (const auto& f : files)
    for (const auto& item : split_list(f)) shares.push_back(parse_result(read_file(item)));
  print_sorted(open_results(shares, GraphSidecar::load(sidecar_path)));
  return 0;
}

// ---- oracle ----
int cmd_oracle(const std::string& graph_path, const std::string& query_path) {
  auto graph = load_graph(graph_path);
  auto q = load_query(query_path, graph.schema);
  print_sorted(oracle_subgraphs(graph, q));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oblivgm: oblivious attributed subgraph matching across three servers"};
  app.require_subcommand(1);

  EncryptArgs enc;
  auto* encrypt = app.add_subcommand("encrypt", "Pad and secret-share a plaintext graph");
  encrypt->add_option("--graph", enc.graph, "plaintext graph file")->required();
  encrypt->add_option("--k", enc.k, "group size for degree padding")->check(CLI::Range(2, 1 << 20));
  encrypt->add_option("--out-dir", enc.out_dir, "directory for party shares and sidecar")->required();
  encrypt->add_option("--seed", enc.seed, "hex seed for deterministic output");
  encrypt->add_flag("--verify", enc.verify, "reconstruct the written shares and compare");

  TokenizeArgs tok;
  auto* tokenize = app.add_subcommand("tokenize", "Generate the three per-party query tokens");
  tokenize->add_option("--query", tok.query, "query file")->required();
  tokenize->add_option("--schema", tok.schema, "sidecar written by encrypt")->required();
  tokenize->add_option("--out-dir", tok.out_dir, "directory for token files")->required();
  tokenize->add_option("--seed", tok.seed, "hex seed for deterministic keys");

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Run one party (or all three with --local-trio)");
  serve->add_option("--party", srv.party, "party index 1..3");
  serve->add_option("--graph-share", srv.graph_share, "this party's graph share");
  serve->add_option("--bind", srv.bind, "peer listener host:port (default OBLIVGM_BIND)");
  serve->add_option("--client-bind", srv.client_bind, "query listener host:port (default: peer port + 10)");
  serve->add_option("--peers", srv.peers, "peer listeners of parties 1,2,3 (default OBLIVGM_PEERS)");
  serve->add_option("--seed", srv.seed, "hex seed for session randomness");
  serve->add_option("--any-mode", srv.any_mode, "ANY combiner: or | xor");
  serve->add_option("--max-queries", srv.max_queries, "exit after this many queries (0: never)");
  serve->add_flag("--local-trio", srv.local_trio, "host all three parties in this process");
  serve->add_option("--share-dir", srv.share_dir, "share directory for --local-trio");
  serve->add_option("--host", srv.host, "host for --local-trio listeners");
  serve->add_option("--base-port", srv.base_port, "first peer port for --local-trio; client ports start at +10");

  QueryArgs qa;
  auto* query = app.add_subcommand(
      "query",
      "Run a query. Progress lines report per-vertex candidate and match counts, which the servers observe anyway.");
  query->add_option("--token-dir", qa.token_dir, "directory with token1..3.ogmt")->required();
  query->add_option("--servers", qa.servers, "client endpoints of parties 1,2,3");
  query->add_flag("--local-trio", qa.local_trio, "run all three parties in this process");
  query->add_option("--share-dir", qa.share_dir, "share directory for --local-trio");
  query->add_flag("--tcp", qa.tcp, "use loopback TCP between the local parties");
  query->add_option("--seed", qa.seed, "hex seed for session randomness (--local-trio)");
  query->add_option("--any-mode", qa.any_mode, "ANY combiner: or | xor (--local-trio)");
  query->add_option("--out-dir", qa.out_dir, "directory for result1..3.ogmr")->required();

  std::vector<std::string> result_files;
  std::string sidecar;
  auto* open = app.add_subcommand("open", "Merge result shares and print the matches");
  open->add_option("--results", result_files, "two or three result files (comma or space separated)")->required();
  open->add_option("--sidecar", sidecar, "sidecar written by encrypt")->required();

  std::string oracle_graph, oracle_query;
  auto* oracle = app.add_subcommand("oracle", "Plaintext matching for comparison");
  oracle->add_option("--graph", oracle_graph, "plaintext graph file")->required();
  oracle->add_option("--query", oracle_query, "query file")->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Latency and bytes on wire per phase, as TSV");
  bench->add_option("--suite", ba.suite, "subprotocols | tokens | query")->required();
  bench->add_option("--seed", ba.seed, "hex seed");
  bench->add_option("--vertices", ba.vertices, "graph size for the query suite");
  bench->add_option("--candidates", ba.candidates, "candidate count for the subprotocols suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*encrypt) return cmd_encrypt(enc);
    if (*tokenize) return cmd_tokenize(tok);
    if (*serve) return cmd_serve(srv);
    if (*query) return cmd_query(qa);
    if (*open) return cmd_open(result_files, sidecar);
    if (*oracle) return cmd_oracle(oracle_graph, oracle_query);
    if (*bench) return run_bench(ba, std::cout);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << '\n';
    return kExitProtocol;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "protocol error: " << e.what() << '\n';
    return kExitProtocol;
  }
  return 0;
}
