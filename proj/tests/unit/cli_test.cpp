#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "harness.hpp"

namespace oblivgm {
namespace {

using testing::run_cli;

#define REQUIRE_CLI() \
  if (!testing::cli_available()) GTEST_SKIP() << "oblivgm CLI not built"

std::string data(const std::string& name) { return std::string(OBLIVGM_DATA_DIR) + "/" + name; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Pipeline {
  testing::TempDir dir;
  std::string shares() const { return (dir.path() / "shares").string(); }
  std::string tokens() const { return (dir.path() / "tokens").string(); }
  std::string results() const { return (dir.path() / "results").string(); }

  void encrypt(const std::string& seed) {
    ASSERT_EQ(run_cli("encrypt --graph " + data("social_graph.txt") + " --k 2 --out-dir " + shares() + " --seed " +
                      seed + " --verify")
                  .exit_code,
              0);
  }
  void tokenize(const std::string& seed) {
    ASSERT_EQ(run_cli("tokenize --query " + data("social_query.txt") + " --schema " + shares() +
                      "/sidecar.json --out-dir " + tokens() + " --seed " + seed)
                  .exit_code,
              0);
  }
  testing::CommandResult query(const std::string& extra) {
    return run_cli("query --token-dir " + tokens() + " --local-trio --share-dir " + shares() + " --out-dir " +
                   results() + " " + extra);
  }
  testing::CommandResult open() {
    return run_cli("open --results " + results() + "/result1.ogmr," + results() + "/result2.ogmr," + results() +
                   "/result3.ogmr --sidecar " + shares() + "/sidecar.json");
  }
};

TEST(Cli, PipelineMatchesOracle) {
  REQUIRE_CLI();
  Pipeline p;
  p.encrypt("1");
  p.tokenize("2");
  ASSERT_EQ(p.query("--tcp --seed 3").exit_code, 0);
  auto opened = p.open();
  ASSERT_EQ(opened.exit_code, 0);
  auto oracle = run_cli("oracle --graph " + data("social_graph.txt") + " --query " + data("social_query.txt"));
  ASSERT_EQ(oracle.exit_code, 0);
  EXPECT_EQ(opened.out, oracle.out);
  EXPECT_EQ(testing::parse_match_lines(opened.out), testing::social_expected());
  EXPECT_EQ(opened.out.rfind("matches: 2", 0), 0u);
}

TEST(Cli, SeededRunsAreByteIdentical) {
  REQUIRE_CLI();
  Pipeline a, b;
  for (auto* p : {&a, &b}) {
    p->encrypt("aa");
    p->tokenize("bb");
    ASSERT_EQ(p->query("--seed cc").exit_code, 0);
  }
  for (int i = 1; i <= 3; ++i) {
    const auto n = std::to_string(i);
    EXPECT_EQ(slurp(a.dir.path() / "shares" / ("party" + n + ".ogmg")),
              slurp(b.dir.path() / "shares" / ("party" + n + ".ogmg")));
    EXPECT_EQ(slurp(a.dir.path() / "tokens" / ("token" + n + ".ogmt")),
              slurp(b.dir.path() / "tokens" / ("token" + n + ".ogmt")));
    EXPECT_EQ(slurp(a.dir.path() / "results" / ("result" + n + ".ogmr")),
              slurp(b.dir.path() / "results" / ("result" + n + ".ogmr")));
  }
}

TEST(Cli, ValidationFailuresExitWithTwo) {
  REQUIRE_CLI();
  testing::TempDir dir;
  const auto out = dir.path().string();
  EXPECT_EQ(run_cli("").exit_code, 2);
  EXPECT_EQ(run_cli("nosuchcommand").exit_code, 2);
  EXPECT_EQ(run_cli("encrypt --graph " + data("social_graph.txt") + " --k 1 --out-dir " + out).exit_code, 2);
  EXPECT_EQ(run_cli("encrypt --graph /nonexistent/graph.txt --k 2 --out-dir " + out).exit_code, 2);
  {
    std::ofstream bad(dir.path() / "bad.txt");
    bad << "V Nope x1 a=1\n";
  }
  EXPECT_EQ(run_cli("encrypt --graph " + (dir.path() / "bad.txt").string() + " --k 2 --out-dir " + out).exit_code, 2);
  ASSERT_EQ(run_cli("encrypt --graph " + data("social_graph.txt") + " --k 2 --out-dir " + out).exit_code, 0);
  {
    std::ofstream bad(dir.path() / "q.txt");
    bad << "Q u User place = Tokyo\n";
  }
  EXPECT_EQ(run_cli("tokenize --query " + (dir.path() / "q.txt").string() + " --schema " + out +
                    "/sidecar.json --out-dir " + out)
                .exit_code,
            2);
}

TEST(Cli, UnreachableServersExitWithThree) {
  REQUIRE_CLI();
  Pipeline p;
  p.encrypt("1");
  p.tokenize("2");
  auto r = run_cli("query --token-dir " + p.tokens() + " --servers 127.0.0.1:1,127.0.0.1:1,127.0.0.1:1 --out-dir " +
                   p.results());
  EXPECT_EQ(r.exit_code, 3);
}

TEST(Cli, MismatchedTokenExitsWithTwo) {
  REQUIRE_CLI();
  Pipeline p;
  p.encrypt("1");
  p.tokenize("2");
  std::filesystem::rename(p.dir.path() / "tokens" / "token1.ogmt", p.dir.path() / "tokens" / "tmp");
  std::filesystem::rename(p.dir.path() / "tokens" / "token2.ogmt", p.dir.path() / "tokens" / "token1.ogmt");
  std::filesystem::rename(p.dir.path() / "tokens" / "tmp", p.dir.path() / "tokens" / "token2.ogmt");
  EXPECT_EQ(p.query("").exit_code, 2);
}

TEST(Cli, BenchReportsTwiceTheBytesForIntervals) {
  REQUIRE_CLI();
  auto r = run_cli("bench --suite subprotocols --candidates 64");
  ASSERT_EQ(r.exit_code, 0);
  std::istringstream in(r.out);
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.rfind("ratio[in/=]", 0) == 0) {
      found = true;
      EXPECT_NE(line.find("2.000"), std::string::npos) << line;
    }
  }
  EXPECT_TRUE(found) << r.out;
}

}  // namespace
}  // namespace oblivgm
