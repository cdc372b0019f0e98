#include "oblivgm/service.hpp"

#include <thread>

#include "oblivgm/errors.hpp"

namespace oblivgm {

std::uint32_t session_id(const Block& nonce) { return static_cast<std::uint32_t>(nonce.lo ^ (nonce.lo >> 32)); }

Block party_seed(const std::optional<Block>& seed, const Block& nonce, int party) {
  if (!seed) return os_random_block();
  Aes128 aes(*seed);
  return aes.encrypt(nonce ^ Block{static_cast<std::uint64_t>(party), 0x5eed});
}

TrioRun run_local_trio(const std::array<EncryptedGraphShare, 3>& graph, const std::array<PartyToken, 3>& tokens,
                       const SessionOptions& options) {
  const auto nonce = tokens[0].nonce;
  for (const auto& t : tokens)
    if (t.nonce != nonce) throw ValidationError("tokens come from different queries");
  const auto session = session_id(nonce);

  Trio trio;
  if (options.transport == Transport::Memory) {
    trio = make_local_trio(session);
  } else {
    std::array<std::unique_ptr<TcpListener>, 3> listeners;
    std::array<std::string, 3> peers;
    for (int i = 0; i < 3; ++i) {
      listeners[i] = std::make_unique<TcpListener>("127.0.0.1:0");
      peers[i] = "127.0.0.1:" + std::to_string(listeners[i]->port());
    }
    std::array<std::exception_ptr, 3> errors;
    std::array<std::thread, 3> threads;
    for (int i = 0; i < 3; ++i) {
      threads[i] = std::thread([&, i] {
        try {
          trio[i] = std::make_unique<Party>(i + 1, connect_tcp_ring(i + 1, *listeners[i], peers), session);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  auto matches = run_trio(trio, [&](Party& p) {
    const int i = p.index();
    p.record_transcript(options.record_transcripts);
    Prg rng(party_seed(options.seed, nonce, i));
    p.setup(rng);
    return sec_match(p, tokens[i - 1], graph[i - 1], options.engine);
  });

  TrioRun run;
  for (int i = 0; i < 3; ++i) {
    run.results[i] = make_result_share(tokens[i], matches[i]);
    run.stats[i] = trio[i]->stats();
    run.transcripts[i] = trio[i]->transcript();
    run.opened[i] = trio[i]->open_log();
  }
  run.matches = std::move(matches);
  return run;
}

Server::Server(ServerConfig config, EncryptedGraphShare graph) : config_(std::move(config)), graph_(std::move(graph)) {
  if (config_.party < 1 || config_.party > 3) throw ValidationError("party index must be 1, 2 or 3");
  if (graph_.party != config_.party) throw ValidationError("graph share belongs to another party");
  peers_ = std::make_unique<TcpListener>(config_.bind);
  clients_ = std::make_unique<TcpListener>(config_.client_bind);
}

Server::~Server() = default;

std::uint16_t Server::client_port() const { return clients_->port(); }
std::uint16_t Server::peer_port() const { return peers_->port(); }

Bytes Server::handle(const Bytes& token_bytes) {
  auto token = parse_token(token_bytes, config_.party);
  Party party(config_.party, connect_tcp_ring(config_.party, *peers_, config_.peers), session_id(token.nonce));
  try {
    Prg rng(party_seed(config_.seed, token.nonce, config_.party));
    party.setup(rng);
    auto match = sec_match(party, token, graph_, config_.engine);
    return serialize_result(make_result_share(token, match));
  } catch (...) {
    party.abort();
    throw;
  }
}

void Server::serve() {
  for (std::size_t served = 0; config_.max_queries == 0 || served < config_.max_queries; ++served) {
    auto client = clients_->accept();
    Frame reply{0, 0, OpTag::Result, {}};
    try {
      auto f = decode_frame(client->recv());
      if (f.op != OpTag::Query) throw ProtocolError("expected a QUERY frame");
      reply.payload = handle(f.payload);
    } catch (const ValidationError& e) {
      reply.op = OpTag::Error;
      std::string msg = std::string("V") + e.what();
      reply.payload.assign(msg.begin(), msg.end());
    } catch (const std::exception& e) {
      reply.op = OpTag::Error;
      std::string msg = std::string("P") + e.what();
      reply.payload.assign(msg.begin(), msg.end());
    }
    try {
      client->send(encode_frame(reply));
    } catch (const ProtocolError&) {
    }
  }
}

std::array<ResultShare, 3> submit_query(const std::array<std::string, 3>& servers,
                                        const std::array<PartyToken, 3>& tokens) {
  std::array<LinkPtr, 3> links;
  for (int i = 0; i < 3; ++i) {
    links[i] = tcp_connect(servers[i]);
    links[i]->send(encode_frame(Frame{0, 0, OpTag::Query, serialize_token(tokens[i])}));
  }
  std::array<ResultShare, 3> out;
  for (int i = 0; i < 3; ++i) {
    auto f = decode_frame(links[i]->recv());
    if (f.op == OpTag::Error) {
      std::string msg(f.payload.begin(), f.payload.end());
      auto text = "server " + std::to_string(i + 1) + ": " + (msg.empty() ? msg : msg.substr(1));
      if (!msg.empty() && msg[0] == 'V') throw ValidationError(text);
      throw ProtocolError(text);
    }
    if (f.op != OpTag::Result) throw ProtocolError("unexpected reply from server " + std::to_string(i + 1));
    out[i] = parse_result(f.payload);
    if (out[i].party != i + 1) throw ProtocolError("server " + std::to_string(i + 1) + " answered for another party");
  }
  return out;
}

}  // namespace oblivgm
