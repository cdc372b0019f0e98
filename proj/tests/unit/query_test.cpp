#include <gtest/gtest.h>

#include "harness.hpp"
#include "oblivgm/errors.hpp"
#include "oblivgm/query.hpp"
#include "oblivgm/synth.hpp"

namespace oblivgm {
namespace {

using testing::seeded;

Schema people_schema() {
  return parse_graph(
             "A P age ordinal\nA P city categorical values=x,y,z\nA C field categorical values=a,b\n"
             "V P p1 age=20 city=x\nV P p2 age=30 city=y\nV P p3 age=40 city=z\nV C c1 field=a\n")
      .schema;
}

BitVector indicator(const fss::FssKeyBundle& b, std::size_t pair, std::uint64_t n) {
  return fss::full_domain_eval(b.pairs[pair].first, n) ^ fss::full_domain_eval(b.pairs[pair].second, n);
}

BitVector plain(const PredicateSpec& s, std::uint64_t n) {
  BitVector out(n);
  for (std::uint64_t x = 0; x < n; ++x) out.set(x, s.matches(x));
  return out;
}

TEST(PredicateSpec, NormalisesToIndexBounds) {
  EXPECT_TRUE(PredicateSpec::equal(3).matches(3));
  EXPECT_FALSE(PredicateSpec::equal(3).matches(4));
  EXPECT_TRUE(PredicateSpec::less(3).matches(2));
  EXPECT_FALSE(PredicateSpec::less(3).matches(3));
  EXPECT_TRUE(PredicateSpec::less_eq(3).matches(3));
  EXPECT_FALSE(PredicateSpec::greater(3).matches(3));
  EXPECT_TRUE(PredicateSpec::greater(3).matches(4));
  EXPECT_TRUE(PredicateSpec::greater_eq(3).matches(3));
  auto open = PredicateSpec::interval(2, 5, false, false);
  for (std::uint64_t x = 0; x < 8; ++x) EXPECT_EQ(open.matches(x), x > 2 && x < 5);
  EXPECT_THROW(PredicateSpec::interval(5, 2), ValidationError);
  EXPECT_THROW(PredicateSpec::equal(8).validate(8), ValidationError);
  EXPECT_NO_THROW(PredicateSpec::less_eq(7).validate(8));
}

TEST(QueryText, ParsesOperatorsOnOrdinalDictionary) {
  auto s = people_schema();
  auto q = parse_query(
      "Q a P age >= 25\nQ a P age < 40\nALL a\n"
      "Q b P age in 20 30\nQ b P city = z\nANY b\n"
      "Q c C field <= a\n"
      "QE a b\nQE b c\nSTART a\n",
      s);
  ASSERT_EQ(q.vertices.size(), 3u);
  EXPECT_EQ(q.root, 0u);
  const auto& a = q.vertices[0].predicates;
  // dictionary 20,30,40
  EXPECT_EQ(a[0].spec.kind, PredicateKind::GreaterEq);
  EXPECT_EQ(a[0].spec.lo, 1u);
  EXPECT_EQ(a[1].spec.kind, PredicateKind::Less);
  EXPECT_EQ(a[1].spec.hi, 2u);
  EXPECT_EQ(q.vertices[1].combiner, Combiner::Any);
  EXPECT_EQ(q.vertices[1].predicates[0].spec.lo, 0u);
  EXPECT_EQ(q.vertices[1].predicates[0].spec.hi, 2u);
  EXPECT_EQ(q.vertices[2].predicates[0].spec.hi, 1u);
  EXPECT_EQ(q.bfs_order(), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(q.parent(2), 1u);
}

TEST(QueryText, RootInferredWithoutStart) {
  auto s = people_schema();
  auto q = parse_query("Q c C field = b\nQ a P age = 20\nQE a c\n", s);
  EXPECT_EQ(q.vertices[q.root].name, "a");
}

TEST(QueryText, RejectsBadQueries) {
  auto s = people_schema();
  const char* bad[] = {
      "Q a P age = 21\n",                          // not in dictionary
      "Q a P height = 20\n",                       // unknown attribute
      "Q a X age = 20\n",                          // unknown type
      "Q a P age in 40 20\n",                      // inverted
      "Q a P age ~ 20\n",                          // unknown op
      "Q a P age = 20\nQ b P age = 20\nQE a b\nQE b a\n",  // cycle
      "Q a P age = 20\nQ b P age = 20\n",          // disconnected
      "Q a P age = 20\nQE a a\n",                  // self-loop
      "Q a P age = 20\nQ b P age = 30\nQ c P age = 40\nQE a c\nQE b c\n",  // two parents
      "",                                          // empty
      "QE a b\n",                                  // unknown vertices
  };
  for (const char* text : bad) EXPECT_THROW(parse_query(text, s), ValidationError) << text;

  QueryGraph q;
  q.add_vertex("a", "P");
  EXPECT_THROW(q.validate(s), ValidationError);  // no target attributes
}

TEST(Token, SplitFollowsPairRule) {
  auto s = people_schema();
  auto rng = seeded(1);
  auto q = parse_query("Q a P age in 20 30\nQ c C field = a\nQE a c\n", s);
  auto tok = gen_token(q, s, rng);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(tok[i].party, i + 1);
  for (std::size_t v = 0; v < 2; ++v) {
    auto b = recombine_bundle(tok, v, 0);
    const auto& p = q.vertices[v].predicates[0];
    const auto n = s.types[q.vertices[v].type_index].attributes[p.attr_index].size();
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(indicator(b, j, n), plain(p.spec, n));
  }
}

TEST(Token, PublicPartsAgreeAcrossParties) {
  auto s = people_schema();
  auto rng = seeded(2);
  auto q = parse_query("Q a P age in 20 30\nQ a P city = y\nANY a\nQ c C field = a\nQE a c\n", s);
  auto tok = gen_token(q, s, rng);
  for (int i = 1; i < 3; ++i) {
    EXPECT_EQ(tok[i].nonce, tok[0].nonce);
    EXPECT_EQ(tok[i].schema_id, tok[0].schema_id);
    EXPECT_EQ(tok[i].edges, tok[0].edges);
    EXPECT_EQ(tok[i].root, tok[0].root);
    ASSERT_EQ(tok[i].vertices.size(), tok[0].vertices.size());
    for (std::size_t v = 0; v < tok[0].vertices.size(); ++v) {
      EXPECT_EQ(tok[i].vertices[v].combiner, tok[0].vertices[v].combiner);
      EXPECT_EQ(tok[i].vertices[v].predicates.size(), tok[0].vertices[v].predicates.size());
    }
  }
  EXPECT_EQ(tok[0].schema_id, schema_fingerprint(s));
}

TEST(Token, UniqueFetchFlag) {
  auto s = parse_graph("A U id ordinal unique\nA U g categorical values=a\nV U u1 id=1 g=a\nV U u2 id=2 g=a\n").schema;
  auto rng = seeded(3);
  auto tok = gen_token(parse_query("Q u U id = 1\n", s), s, rng);
  EXPECT_TRUE(tok[0].vertices[0].unique_fetch);
  tok = gen_token(parse_query("Q u U id = 1\nQ u U g = a\nANY u\n", s), s, rng);
  EXPECT_FALSE(tok[0].vertices[0].unique_fetch);
  tok = gen_token(parse_query("Q u U id = 1\nQ u U g = a\n", s), s, rng);
  EXPECT_TRUE(tok[0].vertices[0].unique_fetch);
  tok = gen_token(parse_query("Q u U id <= 1\n", s), s, rng);
  EXPECT_FALSE(tok[0].vertices[0].unique_fetch);
}

TEST(Token, SocialExampleTokenShape) {
  auto g = testing::social_graph();
  auto q = testing::social_query(g.schema);
  auto rng = seeded(4);
  auto tok = gen_token(q, g.schema, rng);
  ASSERT_EQ(tok[0].vertices.size(), 5u);
  const PredicateKind kinds[] = {PredicateKind::Equal, PredicateKind::Interval, PredicateKind::Equal,
                                 PredicateKind::Interval, PredicateKind::Equal};
  for (std::size_t v = 0; v < 5; ++v) {
    ASSERT_EQ(tok[0].vertices[v].predicates.size(), 1u);
    EXPECT_EQ(tok[0].vertices[v].predicates[0].kind, kinds[v]);
  }
  EXPECT_EQ(tok[0].edges.size(), 4u);
}

TEST(Token, SerializationRoundTrip) {
  auto rng = seeded(5);
  auto g = random_graph(SynthGraphParams{}, rng);
  SynthQueryParams qp;
  qp.min_vertices = qp.max_vertices = 5;
  auto tok = gen_token(random_query(g, qp, rng), g.schema, rng);
  for (const auto& t : tok) {
    auto bytes = serialize_token(t);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "OGMT");
    EXPECT_EQ(serialize_token(parse_token(bytes, t.party)), bytes);
  }
  auto two = serialize_token(tok[1]);
  EXPECT_THROW(parse_token(two, 1), ValidationError);
  two.resize(two.size() - 3);
  EXPECT_ANY_THROW(parse_token(two));
}

TEST(Token, HidesOperandsInShapeAndSize) {
  auto s = people_schema();
  auto rng = seeded(6);
  auto t1 = gen_token(parse_query("Q a P age in 20 30\nQ c C field = a\nQE a c\n", s), s, rng);
  auto t2 = gen_token(parse_query("Q a P age in 30 40\nQ c C field = b\nQE a c\n", s), s, rng);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(serialize_token(t1[i]).size(), serialize_token(t2[i]).size());
}

TEST(Token, FreshRandomnessPerGeneration) {
  auto s = people_schema();
  auto rng = seeded(7);
  auto q = parse_query("Q a P age = 20\n", s);
  auto t1 = gen_token(q, s, rng);
  auto t2 = gen_token(q, s, rng);
  EXPECT_NE(serialize_token(t1[0]), serialize_token(t2[0]));
  EXPECT_NE(t1[0].vertices[0].predicates[0].first, t2[0].vertices[0].predicates[0].first);
}

TEST(Token, IntervalRoughlyTwiceEquality) {
  auto s = people_schema();
  auto rng = seeded(8);
  auto eq = gen_token(parse_query("Q a P age = 20\nQ b P age = 30\nQE a b\n", s), s, rng);
  auto lt = gen_token(parse_query("Q a P age < 30\nQ b P age > 20\nQE a b\n", s), s, rng);
  auto in = gen_token(parse_query("Q a P age in 20 30\nQ b P age in 20 40\nQE a b\n", s), s, rng);
  const auto e = static_cast<double>(serialize_token(eq[0]).size());
  EXPECT_EQ(serialize_token(lt[0]).size(), serialize_token(eq[0]).size());
  const double ratio = static_cast<double>(serialize_token(in[0]).size()) / e;
  EXPECT_GT(ratio, 1.7);
  EXPECT_LT(ratio, 2.3);
}

TEST(Schema, FingerprintTracksSchema) {
  auto s = people_schema();
  auto t = s;
  t.types[0].attributes[1].values.push_back("w");
  EXPECT_NE(schema_fingerprint(s), schema_fingerprint(t));
  EXPECT_EQ(schema_fingerprint(s), schema_fingerprint(Schema::from_json(s.to_json())));
}

TEST(Synth, FormattedQueryParsesBack) {
  auto rng = seeded(9);
  auto g = random_graph(SynthGraphParams{}, rng);
  for (int trial = 0; trial < 40; ++trial) {
    auto q = random_query(g, SynthQueryParams{}, rng);
    auto back = parse_query(format_query(q, g.schema), g.schema);
    ASSERT_EQ(back.vertices.size(), q.vertices.size());
    ASSERT_EQ(back.edges, q.edges);
    ASSERT_EQ(back.root, q.root);
    for (std::size_t v = 0; v < q.vertices.size(); ++v) {
      ASSERT_EQ(back.vertices[v].combiner, q.vertices[v].combiner);
      ASSERT_EQ(back.vertices[v].predicates.size(), q.vertices[v].predicates.size());
      const auto& type = g.schema.types[q.vertices[v].type_index];
      for (std::size_t p = 0; p < q.vertices[v].predicates.size(); ++p)
        for (std::uint64_t x = 0; x < type.attributes[q.vertices[v].predicates[p].attr_index].size(); ++x)
          ASSERT_EQ(back.vertices[v].predicates[p].spec.matches(x), q.vertices[v].predicates[p].spec.matches(x));
    }
  }
}

}  // namespace
}  // namespace oblivgm
