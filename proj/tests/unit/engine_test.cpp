#include <gtest/gtest.h>

#include <map>

#include "harness.hpp"
#include "oblivgm/errors.hpp"
#include "oblivgm/synth.hpp"

namespace oblivgm {
namespace {

using testing::open3;
using testing::seeded;

std::array<SharedBitVector, 3> share_bits(const std::vector<bool>& bits, Prg& rng) {
  if (bits.empty()) return {SharedBitVector::zeros(1, 0), SharedBitVector::zeros(2, 0), SharedBitVector::zeros(3, 0)};
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) v.set(i, bits[i]);
  return share(v, rng);
}

TEST(SecEval, AgesInThirtyToForty) {
  auto rng = seeded(1);
  auto trio = testing::make_session(1);
  std::vector<std::uint64_t> ages;
  std::vector<BitVector> rows;
  for (int i = 0; i < 100; ++i) {
    ages.push_back(rng.uniform(128));
    rows.push_back(encode_one_hot(ages.back(), 128));
  }
  auto col = testing::share_column(rows, rng);
  auto parts = split_bundle(fss::gen_bundle(PredicateSpec::interval(30, 40), 128, rng), 0, 128);
  auto out = run_trio(trio, [&](Party& p) {
    const int i = p.index() - 1;
    std::vector<const SharedBitVector*> attrs;
    for (const auto& a : col[i]) attrs.push_back(&a);
    return sec_eval(p, attrs, parts[i]);
  });
  auto bits = open3(out[0], out[1], out[2]);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(bits.get(i), ages[i] >= 30 && ages[i] <= 40) << "age " << ages[i];
}

TEST(SecEval, EveryKindAgainstPlaintext) {
  auto rng = seeded(2);
  auto trio = testing::make_session(2);
  const std::uint64_t n = 37;
  std::vector<BitVector> rows;
  for (std::uint64_t x = 0; x < n; ++x) rows.push_back(encode_one_hot(x, n));
  auto col = testing::share_column(rows, rng);
  for (auto spec : {PredicateSpec::equal(0), PredicateSpec::equal(36), PredicateSpec::less(12),
                    PredicateSpec::less_eq(12), PredicateSpec::greater(20), PredicateSpec::greater_eq(0),
                    PredicateSpec::interval(5, 30, false, true)}) {
    auto parts = split_bundle(fss::gen_bundle(spec, n, rng), 0, n);
    auto out = run_trio(trio, [&](Party& p) {
      std::vector<const SharedBitVector*> attrs;
      for (const auto& a : col[p.index() - 1]) attrs.push_back(&a);
      return sec_eval(p, attrs, parts[p.index() - 1]);
    });
    auto bits = open3(out[0], out[1], out[2]);
    for (std::uint64_t x = 0; x < n; ++x) ASSERT_EQ(bits.get(x), spec.matches(x)) << to_string(spec.kind) << " x=" << x;
  }
}

TEST(SecEval, ReshareCountFollowsKeyComponents) {
  auto rng = seeded(3);
  auto trio = testing::make_session(3);
  auto col = testing::share_column({encode_one_hot(1, 64), encode_one_hot(9, 64)}, rng);
  auto messages = [&](PredicateSpec spec) {
    auto parts = split_bundle(fss::gen_bundle(spec, 64, rng), 0, 64);
    for (auto& p : trio) p->reset_stats();
    run_trio(trio, [&](Party& p) {
      std::vector<const SharedBitVector*> attrs;
      for (const auto& a : col[p.index() - 1]) attrs.push_back(&a);
      sec_eval(p, attrs, parts[p.index() - 1]);
    });
    return trio[0]->stats().at("eval").messages;
  };
  EXPECT_EQ(messages(PredicateSpec::equal(3)), 1u);
  EXPECT_EQ(messages(PredicateSpec::less(3)), 1u);
  EXPECT_EQ(messages(PredicateSpec::interval(3, 8)), 2u);
}

TEST(SecEval, RejectsWidthMismatch) {
  auto rng = seeded(4);
  auto trio = testing::make_session(4);
  auto col = testing::share_column({encode_one_hot(1, 16)}, rng);
  auto parts = split_bundle(fss::gen_bundle(PredicateSpec::equal(1), 32, rng), 0, 32);
  EXPECT_THROW(run_trio(trio,
                        [&](Party& p) {
                          std::vector<const SharedBitVector*> attrs{&col[p.index() - 1][0]};
                          sec_eval(p, attrs, parts[p.index() - 1]);
                        }),
               ValidationError);
}

TEST(Combine, TruthTables) {
  auto rng = seeded(5);
  auto trio = testing::make_session(5);
  auto x = share_bits({false, false, true, true}, rng);
  auto y = share_bits({false, true, false, true}, rng);
  auto z = share_bits({true, false, false, true}, rng);
  auto run = [&](Combiner c, AnyMode m, bool three) {
    auto out = run_trio(trio, [&](Party& p) {
      const int i = p.index() - 1;
      std::vector<SharedBitVector> bits{x[i], y[i]};
      if (three) bits.push_back(z[i]);
      return combine_predicates(p, bits, c, m);
    });
    return open3(out[0], out[1], out[2]).to_string();
  };
  EXPECT_EQ(run(Combiner::All, AnyMode::LogicalOr, false), "0001");
  EXPECT_EQ(run(Combiner::Any, AnyMode::LogicalOr, false), "0111");
  EXPECT_EQ(run(Combiner::Any, AnyMode::Xor, false), "0110");
  EXPECT_EQ(run(Combiner::All, AnyMode::LogicalOr, true), "0001");
  EXPECT_EQ(run(Combiner::Any, AnyMode::LogicalOr, true), "1111");
  EXPECT_EQ(run(Combiner::Any, AnyMode::Xor, true), "1111");
}

TEST(Combine, SinglePredicateCostsNothing) {
  auto rng = seeded(6);
  auto trio = testing::make_session(6);
  auto x = share_bits({true, false, true}, rng);
  for (auto& p : trio) p->reset_stats();
  auto out = run_trio(trio, [&](Party& p) {
    return combine_predicates(p, {x[p.index() - 1]}, Combiner::All);
  });
  EXPECT_EQ(open3(out[0], out[1], out[2]).to_string(), "101");
  EXPECT_EQ(trio[0]->total_stats().messages, 0u);
}

struct FetchInput {
  std::vector<BitVector> records;
  std::vector<bool> bits;
};

using Groups = std::vector<std::pair<SharedBitVector, std::vector<SharedBitVector>>>;

std::array<Groups, 3> share_groups(const std::vector<FetchInput>& in, Prg& rng) {
  std::array<Groups, 3> out;
  for (const auto& g : in) {
    auto b = share_bits(g.bits, rng);
    auto col = testing::share_column(g.records, rng);
    for (int i = 0; i < 3; ++i) out[i].emplace_back(b[i], col[i]);
  }
  return out;
}

TEST(Fetch, UniqueSelectsTheFlaggedRecordOrZero) {
  auto rng = seeded(7);
  auto trio = testing::make_session(7);
  FetchInput a{{rng.random_bits(20), rng.random_bits(20), rng.random_bits(20)}, {false, true, false}};
  FetchInput b{{rng.random_bits(9), rng.random_bits(9)}, {false, false}};
  auto shared = share_groups({a, b}, rng);
  for (auto& p : trio) p->reset_stats();
  auto out = run_trio(trio, [&](Party& p) { return sec_fetch_unique(p, shared[p.index() - 1]); });
  EXPECT_EQ(open3(out[0][0], out[1][0], out[2][0]), a.records[1]);
  EXPECT_TRUE(open3(out[0][1], out[1][1], out[2][1]).is_zero());
  EXPECT_EQ(trio[0]->total_stats().messages, 1u);
}

TEST(Fetch, MultiKeepsExactlyTheFlaggedRecords) {
  auto rng = seeded(8);
  auto trio = testing::make_session(8);
  std::vector<FetchInput> in;
  for (std::size_t g = 0; g < 3; ++g) {
    FetchInput f;
    for (std::size_t c = 0; c < 6 + g; ++c) {
      f.records.push_back(rng.random_bits(30));
      f.bits.push_back(rng.next_bit());
    }
    in.push_back(std::move(f));
  }
  in.push_back(FetchInput{});
  auto shared = share_groups(in, rng);
  auto out = run_trio(trio, [&](Party& p) { return sec_fetch_multi(p, shared[p.index() - 1]); });
  ASSERT_EQ(out[0].size(), in.size());
  for (std::size_t g = 0; g < in.size(); ++g) {
    std::multiset<std::string> want, got;
    for (std::size_t c = 0; c < in[g].records.size(); ++c)
      if (in[g].bits[c]) want.insert(in[g].records[c].to_string());
    for (std::size_t r = 0; r < out[0][g].size(); ++r)
      got.insert(open3(out[0][g][r], out[1][g][r], out[2][g][r]).to_string());
    EXPECT_EQ(got, want) << "group " << g;
  }
  std::size_t flagged = 0;
  for (const auto& f : in)
    for (bool b : f.bits) flagged += b;
  ASSERT_EQ(trio[0]->open_log().size(), 1u);
  EXPECT_EQ(trio[0]->open_log()[0].popcount(), flagged);
  EXPECT_EQ(trio[0]->open_log()[0].size(), 6u + 7u + 8u);
}

std::map<std::string, std::size_t> index_of_ids(const GraphSidecar& sidecar, std::size_t type) {
  std::map<std::string, std::size_t> m;
  for (std::size_t i = 0; i < sidecar.external_ids[type].size(); ++i) m[sidecar.external_ids[type][i]] = i;
  return m;
}

TEST(SecAccess, FetchesExactlyTheTrueNeighbours) {
  auto rng = seeded(9);
  auto fx = testing::encrypt_fixture(testing::social_graph(), 2, rng);
  const auto& schema = fx.graph.schema;
  const auto user = schema.type_index("User");
  const auto person = schema.type_index("Person");
  const auto age = schema.types[person].attribute_index("age");
  auto users = index_of_ids(fx.sidecar, user);
  const auto& person_ids = fx.sidecar.external_ids[person];
  const auto pop_user = schema.types[user].population;
  const auto pop_person = schema.types[person].population;

  auto ids = testing::share_column({encode_one_hot(users.at("U1"), pop_user), encode_one_hot(users.at("U2"), pop_user)}, rng);
  auto trio = testing::make_session(9);
  auto out = run_trio(trio, [&](Party& p) {
    const int i = p.index() - 1;
    return sec_access(p, fx.shares[i], ids[i], user, person, {static_cast<std::uint32_t>(age)});
  });
  ASSERT_EQ(out[0].size(), 2u);
  const std::vector<std::set<std::string>> expect{{"P1", "P2", "P3", "P4"}, {"P5"}};
  for (std::size_t m = 0; m < 2; ++m) {
    EXPECT_EQ(out[0][m].parent_slot, m);
    std::set<std::string> got;
    for (std::size_t c = 0; c < out[0][m].size(); ++c) {
      auto id = decode_one_hot(open3(out[0][m].ids[c], out[1][m].ids[c], out[2][m].ids[c]));
      ASSERT_TRUE(id.has_value());
      ASSERT_LT(*id, pop_person);
      got.insert(person_ids[*id]);
      auto a = decode_one_hot(open3(out[0][m].attrs[c][0], out[1][m].attrs[c][0], out[2][m].attrs[c][0]));
      ASSERT_TRUE(a.has_value());
      EXPECT_EQ(*a, fx.padded.graph.vertex(person, *id).attrs[age]);
    }
    EXPECT_EQ(got, expect[m]);
  }
  // one validity bit per padded posting slot, ones only for real neighbours
  const auto lmax = fx.shares[0].max_posting_length(user, person);
  ASSERT_EQ(trio[0]->open_log().size(), 1u);
  EXPECT_EQ(trio[0]->open_log()[0].size(), 2 * lmax);
  EXPECT_EQ(trio[0]->open_log()[0].popcount(), 5u);
}

TEST(SecAccess, ZeroIdYieldsNoCandidates) {
  auto rng = seeded(10);
  auto fx = testing::encrypt_fixture(testing::social_graph(), 2, rng);
  const auto user = fx.graph.schema.type_index("User");
  const auto person = fx.graph.schema.type_index("Person");
  auto ids = testing::share_column({BitVector(fx.graph.schema.types[user].population)}, rng);
  auto trio = testing::make_session(10);
  auto out = run_trio(trio, [&](Party& p) {
    const int i = p.index() - 1;
    return sec_access(p, fx.shares[i], ids[i], user, person, {});
  });
  EXPECT_EQ(out[0][0].size(), 0u);
}

TEST(SecMatch, SocialNetworkExample) {
  auto rng = seeded(11);
  auto g = testing::social_graph();
  auto fx = testing::encrypt_fixture(g, 2, rng);
  auto q = testing::social_query(g.schema);
  EXPECT_EQ(testing::oracle_ids(g, q), testing::social_expected());
  auto run = testing::run_secure(fx, q, rng);
  EXPECT_EQ(run.ids, testing::social_expected());
  EXPECT_TRUE(run.run.matches[0].trace[0].unique_fetch == false);
}

TEST(SecMatch, EmptyResults) {
  auto rng = seeded(12);
  auto g = testing::social_graph();
  auto fx = testing::encrypt_fixture(g, 2, rng);
  for (const char* text : {"Q u User place = Beijing\nQ p Person age = 25\nQE u p\n",
                           "Q p Person age = 25\nQ c Company field = finance\nQE p c\n"}) {
    auto q = parse_query(text, g.schema);
    EXPECT_TRUE(testing::oracle_ids(g, q).empty());
    EXPECT_TRUE(testing::run_secure(fx, q, rng).ids.empty()) << text;
  }
}

TEST(SecMatch, UniqueFetchOnUniqueAttribute) {
  auto rng = seeded(13);
  SynthGraphParams gp;
  gp.vertices = 120;
  auto g = random_graph(gp, rng);
  ASSERT_TRUE(g.schema.types[0].attributes[0].unique);
  auto fx = testing::encrypt_fixture(g, 2, rng);
  const auto& dict = g.schema.types[0].attributes[0];
  const auto& v = g.vertex(0, 3);
  auto q = parse_query("Q r " + g.schema.types[0].name + " " + dict.name + " = " + dict.values[v.attrs[0]] + "\n",
                       g.schema);
  auto run = testing::run_secure(fx, q, rng);
  EXPECT_TRUE(run.tokens[0].vertices[0].unique_fetch);
  EXPECT_EQ(run.ids, (std::set<std::vector<std::string>>{{v.ext_id}}));
  // nothing is opened for a unique root
  EXPECT_TRUE(run.run.opened[0].empty());
}

TEST(SecMatch, OpenedBitsAccountForEveryHop) {
  auto rng = seeded(14);
  for (int trial = 0; trial < 4; ++trial) {
    auto g = random_graph(SynthGraphParams{}, rng);
    auto fx = testing::encrypt_fixture(g, 2, rng);
    SynthQueryParams qp;
    qp.blind = 0;
    auto q = random_query(g, qp, rng);
    auto run = testing::run_secure(fx, q, rng);
    for (int i = 1; i < 3; ++i) EXPECT_EQ(run.run.opened[i], run.run.opened[0]);
    std::size_t ones = 0;
    for (const auto& o : run.run.opened[0]) ones += o.popcount();
    std::size_t expected = 0;
    for (const auto& hop : run.run.matches[0].trace) {
      if (!hop.unique_fetch) expected += hop.matched;
      if (hop.vertex != run.tokens[0].root) expected += hop.candidates;
    }
    EXPECT_EQ(ones, expected) << "trial " << trial;
  }
}

TEST(SecMatch, RandomCorpusAgreesWithOracle) {
  auto rng = seeded(15);
  for (int trial = 0; trial < 8; ++trial) {
    SynthGraphParams gp;
    gp.vertices = 80 + rng.uniform(80);
    gp.types = 2 + rng.uniform(2);
    gp.max_dict = 64;
    auto g = random_graph(gp, rng);
    auto fx = testing::encrypt_fixture(g, 2 + rng.uniform(2), rng);
    for (int qi = 0; qi < 3; ++qi) {
      auto q = random_query(g, SynthQueryParams{}, rng);
      auto expect = testing::oracle_ids(g, q);
      auto got = testing::run_secure(fx, q, rng).ids;
      ASSERT_EQ(got, expect) << format_query(q, g.schema);
    }
  }
}

TEST(SecMatch, XorModeMatchesOrOnDisjointPredicates) {
  auto rng = seeded(16);
  auto g = testing::social_graph();
  auto fx = testing::encrypt_fixture(g, 2, rng);
  auto q = parse_query("Q p Person age < 30\nQ p Person age > 35\nANY p\n", g.schema);
  auto expect = testing::oracle_ids(g, q);
  EXPECT_EQ(expect, (std::set<std::vector<std::string>>{{"P3"}, {"P4"}}));
  SessionOptions opt;
  opt.engine.any_mode = AnyMode::Xor;
  EXPECT_EQ(testing::run_secure(fx, q, rng, opt).ids, expect);
  EXPECT_EQ(testing::run_secure(fx, q, rng).ids, expect);
}

TEST(SecMatch, RejectsMismatchedInputs) {
  auto rng = seeded(17);
  auto g = testing::social_graph();
  auto fx = testing::encrypt_fixture(g, 2, rng);
  auto tokens = gen_token(testing::social_query(g.schema), g.schema, rng);
  auto swapped = tokens;
  std::swap(swapped[0], swapped[1]);
  EXPECT_THROW(run_local_trio(fx.shares, swapped), ValidationError);
  auto other = tokens;
  for (auto& t : other) t.schema_id ^= 1;
  EXPECT_THROW(run_local_trio(fx.shares, other), ValidationError);
}

TEST(Assembly, DropsIncompleteSubgraphs) {
  PartyToken t;
  t.vertices.resize(3);
  t.edges = {{0, 1}, {0, 2}};
  std::vector<std::vector<MatchedSlot>> slots(3);
  slots[0].resize(2);
  slots[1].push_back(MatchedSlot{0, {}, {}});
  slots[1].push_back(MatchedSlot{1, {}, {}});
  slots[1].push_back(MatchedSlot{1, {}, {}});
  slots[2].push_back(MatchedSlot{1, {}, {}});
  auto out = assemble_subgraphs(t, slots);
  std::set<std::vector<std::size_t>> got(out.begin(), out.end());
  EXPECT_EQ(got, (std::set<std::vector<std::size_t>>{{1, 1, 0}, {1, 2, 0}}));
}

}  // namespace
}  // namespace oblivgm
