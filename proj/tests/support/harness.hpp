#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "oblivgm/engine.hpp"
#include "oblivgm/graph.hpp"
#include "oblivgm/oracle.hpp"
#include "oblivgm/party.hpp"
#include "oblivgm/query.hpp"
#include "oblivgm/rss.hpp"
#include "oblivgm/service.hpp"

namespace oblivgm::testing {

Prg seeded(std::uint64_t seed);

BitVector random_bits(std::size_t n, Prg& rng);

/// Three in-process parties after key setup, all randomness derived from `seed`.
Trio make_session(std::uint64_t seed);

/// Column of shared values, indexed [party][row].
using SharedColumn = std::array<std::vector<SharedBitVector>, 3>;
SharedColumn share_column(const std::vector<BitVector>& rows, Prg& rng);

BitVector open3(const std::array<SharedBitVector, 3>& parts);
BitVector open3(const SharedBitVector& p1, const SharedBitVector& p2, const SharedBitVector& p3);

struct EncryptedFixture {
  AttributedGraph graph;
  PaddedGraph padded;
  std::array<EncryptedGraphShare, 3> shares;
  GraphSidecar sidecar;
};

EncryptedFixture encrypt_fixture(const AttributedGraph& graph, std::size_t k, Prg& rng);

struct SecureRun {
  TrioRun run;
  std::array<PartyToken, 3> tokens;
  std::set<std::vector<std::string>> ids;
};

/// Tokenizes, runs the three parties in process and opens the result.
SecureRun run_secure(const EncryptedFixture& fx, const QueryGraph& query, Prg& rng, SessionOptions options = {});

std::set<std::vector<std::string>> oracle_ids(const AttributedGraph& graph, const QueryGraph& query);

AttributedGraph social_graph();
QueryGraph social_query(const Schema& schema);
std::set<std::vector<std::string>> social_expected();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct CommandResult {
  int exit_code = -1;
  std::string out;  // stdout only
};

bool cli_available();
std::string cli_path();
/// Runs the CLI with the given argument string; stderr is discarded.
CommandResult run_cli(const std::string& args);

/// Parses `name=id(...)` lines from open/oracle output into ID tuples.
std::set<std::vector<std::string>> parse_match_lines(const std::string& text);

}  // namespace oblivgm::testing
