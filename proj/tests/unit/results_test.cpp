#include <gtest/gtest.h>

#include "harness.hpp"
#include "oblivgm/errors.hpp"

namespace oblivgm {
namespace {

using testing::seeded;

struct SocialRun {
  testing::EncryptedFixture fx;
  QueryGraph q;
  testing::SecureRun run;
};

SocialRun social_run(std::uint64_t seed) {
  auto rng = seeded(seed);
  SocialRun r;
  r.fx = testing::encrypt_fixture(testing::social_graph(), 2, rng);
  r.q = testing::social_query(r.fx.graph.schema);
  r.run = testing::run_secure(r.fx, r.q, rng);
  return r;
}

TEST(Results, OpenMatchesOracleRendering) {
  auto r = social_run(1);
  auto opened = open_results(r.run.run.results, r.fx.sidecar);
  EXPECT_EQ(format_subgraphs(opened), format_subgraphs(oracle_subgraphs(r.fx.graph, r.q)));
  EXPECT_NE(format_subgraphs(opened).find("pa=P1(age=30)"), std::string::npos);
}

TEST(Results, AnyTwoSharesSuffice) {
  auto r = social_run(2);
  const auto& s = r.run.run.results;
  for (auto [i, j] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{0, 2}}) {
    std::array<ResultShare, 2> two{s[i], s[j]};
    EXPECT_EQ(id_tuples(open_results(two, r.fx.sidecar)), testing::social_expected());
  }
  std::array<ResultShare, 1> one{s[0]};
  EXPECT_THROW(open_results(one, r.fx.sidecar), ValidationError);
}

TEST(Results, SerializationRoundTrip) {
  auto r = social_run(3);
  for (const auto& share : r.run.run.results) {
    auto bytes = serialize_result(share);
    auto back = parse_result(bytes);
    EXPECT_EQ(back.party, share.party);
    EXPECT_EQ(back.names, share.names);
    EXPECT_EQ(back.edges, share.edges);
    EXPECT_EQ(back.subgraphs, share.subgraphs);
    bytes.resize(bytes.size() / 2);
    EXPECT_ANY_THROW(parse_result(bytes));
  }
  auto bad = serialize_result(r.run.run.results[0]);
  bad[0] = 'X';
  EXPECT_ANY_THROW(parse_result(bad));
}

TEST(Results, EmptyResultOpensToNothing) {
  auto rng = seeded(4);
  auto fx = testing::encrypt_fixture(testing::social_graph(), 2, rng);
  auto q = parse_query("Q u User place = Beijing\nQ p Person age = 25\nQE u p\n", fx.graph.schema);
  auto run = testing::run_secure(fx, q, rng);
  auto opened = open_results(run.run.results, fx.sidecar);
  EXPECT_TRUE(opened.empty());
  EXPECT_EQ(format_subgraphs(opened), "");
}

TEST(Results, CorruptedRecordIsRejected) {
  auto r = social_run(5);
  auto shares = r.run.run.results;
  ASSERT_FALSE(shares[0].subgraphs.empty());
  // flipping one bit of the shared ID in both holders of that share index
  // turns a one-hot ID into a weight-two vector
  auto& id1 = shares[0].subgraphs[0][0];
  auto& id3 = shares[2].subgraphs[0][0];
  std::size_t hot = 0;
  auto plain = testing::open3(shares[0].subgraphs[0][0], shares[1].subgraphs[0][0], shares[2].subgraphs[0][0]);
  while (plain.get(hot)) ++hot;  // a zero position inside the ID field
  id1.a.set(hot, !id1.a.get(hot));
  id3.b.set(hot, !id3.b.get(hot));
  EXPECT_THROW(open_results(shares, r.fx.sidecar), ValidationError);
}

TEST(Results, InconsistentSharesAreRejected) {
  auto r = social_run(6);
  auto shares = r.run.run.results;
  shares[1].names[0] = "zz";
  EXPECT_THROW(open_results(shares, r.fx.sidecar), ValidationError);
}

}  // namespace
}  // namespace oblivgm
