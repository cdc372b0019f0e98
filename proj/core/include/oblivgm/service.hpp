#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "oblivgm/engine.hpp"
#include "oblivgm/graph.hpp"
#include "oblivgm/net.hpp"
#include "oblivgm/query.hpp"
#include "oblivgm/results.hpp"

namespace oblivgm {

enum class Transport { Memory, Tcp };

struct SessionOptions {
  EngineOptions engine;
  /// Fixes every party's session randomness; OS randomness when absent.
  std::optional<Block> seed;
  Transport transport = Transport::Memory;
  bool record_transcripts = false;
};

struct TrioRun {
  std::array<ResultShare, 3> results;
  std::array<MatchResultSet, 3> matches;
  std::array<std::map<std::string, CommStats>, 3> stats;
  std::array<std::vector<Bytes>, 3> transcripts;
  std::array<std::vector<BitVector>, 3> opened;
};

/// Session id derived from the token nonce.
std::uint32_t session_id(const Block& nonce);

/// Session randomness of one party: from the fixed seed and the token nonce, or from the OS.
Block party_seed(const std::optional<Block>& seed, const Block& nonce, int party);

/// Runs one query with all three parties in this process.
TrioRun run_local_trio(const std::array<EncryptedGraphShare, 3>& graph, const std::array<PartyToken, 3>& tokens,
                       const SessionOptions& options = {});

struct ServerConfig {
  int party = 1;
  std::string bind;                   // peer listener
  std::string client_bind;            // query listener
  std::array<std::string, 3> peers;   // peer listener of each party
  std::optional<Block> seed;
  EngineOptions engine;
  std::size_t max_queries = 0;        // 0: serve forever
};

/// Long-running party: accepts a token from a client, runs the query with its
/// two peers over TCP and answers with its result share.
class Server {
 public:
  Server(ServerConfig config, EncryptedGraphShare graph);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t client_port() const;
  std::uint16_t peer_port() const;
  void serve();

 private:
  Bytes handle(const Bytes& token_bytes);

  ServerConfig config_;
  EncryptedGraphShare graph_;
  std::unique_ptr<TcpListener> peers_;
  std::unique_ptr<TcpListener> clients_;
};

/// Sends token i to server i and collects the three result shares.
std::array<ResultShare, 3> submit_query(const std::array<std::string, 3>& servers,
                                        const std::array<PartyToken, 3>& tokens);

}  // namespace oblivgm
