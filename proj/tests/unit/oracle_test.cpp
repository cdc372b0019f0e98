#include <gtest/gtest.h>

#include "harness.hpp"
#include "oblivgm/synth.hpp"

namespace oblivgm {
namespace {

using testing::seeded;

TEST(Oracle, SocialNetworkExample) {
  auto g = testing::social_graph();
  auto q = testing::social_query(g.schema);
  EXPECT_EQ(testing::oracle_ids(g, q), testing::social_expected());
  for (const auto& m : oracle_match(g, q)) EXPECT_EQ(check_match(g, q, m), "");
}

TEST(Oracle, SubgraphsCarryNeededAttributes) {
  auto g = testing::social_graph();
  auto q = testing::social_query(g.schema);
  auto subs = oracle_subgraphs(g, q);
  ASSERT_EQ(subs.size(), 2u);
  EXPECT_EQ(subs[0][0].name, "u");
  EXPECT_EQ(subs[0][0].type, "User");
  EXPECT_EQ(subs[0][0].attrs, (std::vector<std::pair<std::string, std::string>>{{"place", "Harbin"}}));
  EXPECT_EQ(id_tuples(subs), testing::social_expected());
}

TEST(Oracle, ValidatorCatchesBrokenMatches) {
  auto g = testing::social_graph();
  auto q = testing::social_query(g.schema);
  EXPECT_NE(check_match(g, q, {"U1", "P1", "C1"}), "");
  EXPECT_NE(check_match(g, q, {"U2", "P1", "C1", "P3", "C2"}), "");  // U2 is in Beijing
  EXPECT_NE(check_match(g, q, {"U1", "P4", "C2", "P3", "C2"}), "");  // P4 is 25
  EXPECT_NE(check_match(g, q, {"U1", "P1", "C2", "P3", "C2"}), "");  // P1 does not work at C2
  EXPECT_NE(check_match(g, q, {"U1", "C1", "C1", "P3", "C2"}), "");
  EXPECT_NE(check_match(g, q, {"U1", "P1", "C9", "P3", "C2"}), "");
}

TEST(Oracle, SiblingsMayShareAVertex) {
  auto g = testing::social_graph();
  auto q = parse_query("Q u User place = Harbin\nQ a Person age >= 30\nQ b Person age >= 30\nQE u a\nQE u b\n",
                       g.schema);
  auto ids = testing::oracle_ids(g, q);
  EXPECT_EQ(ids.size(), 9u);
  EXPECT_TRUE(ids.count({"U1", "P1", "P1"}));
}

TEST(Oracle, SingleVertexUniqueQuery) {
  auto rng = seeded(1);
  auto g = random_graph(SynthGraphParams{}, rng);
  const auto& dict = g.schema.types[0].attributes[0];
  ASSERT_TRUE(dict.unique);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& v = g.vertex(0, i);
    auto q = parse_query("Q r " + g.schema.types[0].name + " " + dict.name + " = " + dict.values[v.attrs[0]], g.schema);
    EXPECT_EQ(testing::oracle_ids(g, q), (std::set<std::vector<std::string>>{{v.ext_id}}));
  }
}

TEST(Oracle, AddingAPredicateNeverAddsMatches) {
  auto rng = seeded(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_graph(SynthGraphParams{}, rng);
    SynthQueryParams qp;
    qp.second_predicate = 0;
    auto q = random_query(g, qp, rng);
    auto base = testing::oracle_ids(g, q);
    for (const auto& m : base) ASSERT_EQ(check_match(g, q, m), "");
    auto tighter = q;
    auto& v = tighter.vertices[rng.uniform(tighter.vertices.size())];
    v.combiner = Combiner::All;
    const auto& attr = g.schema.attribute(v.type_index, 0);
    tighter.add_predicate(static_cast<std::size_t>(&v - tighter.vertices.data()), attr.name,
                          PredicateSpec::less(1 + rng.uniform(attr.size() - 1)));
    tighter.validate(g.schema);
    auto narrowed = testing::oracle_ids(g, tighter);
    for (const auto& m : narrowed) EXPECT_TRUE(base.count(m));
  }
}

TEST(Oracle, MatchesAreExhaustiveOnSmallGraphs) {
  // brute force over every assignment on a tiny graph
  auto rng = seeded(3);
  SynthGraphParams gp;
  gp.vertices = 12;
  gp.types = 2;
  gp.min_dict = 3;
  gp.max_dict = 4;
  gp.unique_attribute = false;
  for (int trial = 0; trial < 10; ++trial) {
    auto g = random_graph(gp, rng);
    SynthQueryParams qp;
    qp.max_vertices = 3;
    auto q = random_query(g, qp, rng);
    std::set<std::vector<std::string>> brute;
    std::vector<std::string> cur(q.vertices.size());
    std::function<void(std::size_t)> rec = [&](std::size_t v) {
      if (v == q.vertices.size()) {
        if (check_match(g, q, cur).empty()) brute.insert(cur);
        return;
      }
      for (const auto& r : g.vertices[q.vertices[v].type_index]) {
        cur[v] = r.ext_id;
        rec(v + 1);
      }
    };
    rec(0);
    ASSERT_EQ(testing::oracle_ids(g, q), brute) << format_query(q, g.schema);
  }
}

}  // namespace
}  // namespace oblivgm
