#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace shapdb;

namespace {

const char* kRunning = "endo R(a)\nendo S(a)\nendo R(b)";

UCQ rs() { return parse_query("q() :- R(x), S(x)."); }

std::vector<char> assignment_of(std::uint32_t mask, const std::vector<std::size_t>& vars, std::size_t size) {
  std::vector<char> a(size, 0);
  for (std::size_t j = 0; j < vars.size(); ++j) a[vars[j]] = (mask >> j) & 1;
  return a;
}

}  // namespace

TEST(Lineage, DnfCases) {
  const auto db = parse_database(kRunning);
  EXPECT_EQ(lineage_dnf(rs(), db), (LineageDNF{{0, 1}}));
  EXPECT_TRUE(lineage_dnf(rs(), parse_database("endo R(a)")).empty());
  const auto one = lineage_dnf(rs(), parse_database("exo R(a)\nexo S(a)"));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_TRUE(one[0].empty());
  std::vector<char> none(2, 0);
  EXPECT_TRUE(evaluate(one, none));
}

TEST(Lineage, RunningExampleCircuit) {
  const auto db = parse_database(kRunning);
  const auto c = factorize_read_once(rs().disjuncts[0], db);
  EXPECT_TRUE(c.read_once());
  const auto dnf = lineage_dnf(rs(), db);
  for (std::uint32_t m = 0; m < 8; ++m) {
    const auto a = assignment_of(m, {0, 1, 2}, 3);
    EXPECT_EQ(c.evaluate(a), evaluate(dnf, a));
  }
}

TEST(Lineage, SingleAtomAndExogenousAbsorption) {
  auto db = parse_database("endo R(a)\nendo R(b)");
  auto c = factorize_read_once(parse_query("q() :- R(x)").disjuncts[0], db);
  EXPECT_EQ(c.node(c.root()).kind, LineageCircuit::Kind::disjunction);
  EXPECT_EQ(c.variables(), (std::vector<std::size_t>{0, 1}));

  db = parse_database("endo R(a)\nexo S(a)");
  c = factorize_read_once(rs().disjuncts[0], db);
  EXPECT_EQ(c.node(c.root()).kind, LineageCircuit::Kind::variable);
  EXPECT_EQ(c.node(c.root()).fact, 0u);
}

TEST(Lineage, RejectsNonHierarchical) {
  const auto db = parse_database("endo R(1)\nendo T(1,2)\nendo S(2)");
  EXPECT_THROW(factorize_read_once(parse_query("q() :- R(x), T(x,y), S(y)").disjuncts[0], db), PreconditionError);
  EXPECT_THROW(factorize_read_once(parse_query("q() :- R(x,y), R(y,x)").disjuncts[0], db), PreconditionError);
}

TEST(Lineage, CircuitEquivalentToDnfOnRandomInstances) {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 80; ++round) {
    const auto cq = testing_support::random_hierarchical_query(rng);
    const auto db = testing_support::random_database_for(rng, cq, 14, 3);
    const UCQ q{{cq}};
    const auto c = factorize_read_once(cq, db);
    ASSERT_TRUE(c.read_once());
    const auto dnf = lineage_dnf(q, db);
    const auto endo = db.endogenous_indices();
    for (std::uint32_t m = 0; m < (1u << endo.size()); ++m) {
      const auto a = assignment_of(m, endo, db.size());
      ASSERT_EQ(c.evaluate(a), evaluate(dnf, a)) << to_string(cq);
    }
  }
}

TEST(SizeCounts, SmallCircuits) {
  LineageCircuit c;
  const auto x1 = c.variable(0), x2 = c.variable(1);
  const std::vector<std::size_t> scope2{0, 1}, scope3{0, 1, 2};

  LineageCircuit conj = c;
  conj.set_root(conj.gate(LineageCircuit::Kind::conjunction, {x1, x2}));
  ASSERT_TRUE(conj.verify_read_once());
  EXPECT_EQ(size_stratified_counts(conj, scope2).counts, (std::vector<Integer>{0, 0, 1}));

  LineageCircuit disj = c;
  disj.set_root(disj.gate(LineageCircuit::Kind::disjunction, {x1, x2}));
  ASSERT_TRUE(disj.verify_read_once());
  EXPECT_EQ(size_stratified_counts(disj, scope2).counts, (std::vector<Integer>{0, 2, 1}));

  LineageCircuit one;
  one.set_root(one.constant(true));
  ASSERT_TRUE(one.verify_read_once());
  EXPECT_EQ(size_stratified_counts(one, scope3).counts, (std::vector<Integer>{1, 3, 3, 1}));

  LineageCircuit unverified = c;
  unverified.set_root(x1);
  EXPECT_THROW(size_stratified_counts(unverified, scope2), PreconditionError);
  EXPECT_THROW(size_stratified_counts(disj, std::vector<std::size_t>{0}), PreconditionError);
}

TEST(SizeCounts, MatchEnumeration) {
  std::mt19937_64 rng(22);
  for (int round = 0; round < 50; ++round) {
    const auto cq = testing_support::random_hierarchical_query(rng);
    const auto db = testing_support::random_database_for(rng, cq, 10, 2);
    const auto c = factorize_read_once(cq, db);
    const auto endo = db.endogenous_indices();
    std::vector<Integer> expected(endo.size() + 1, 0);
    for (std::uint32_t m = 0; m < (1u << endo.size()); ++m)
      if (c.evaluate(assignment_of(m, endo, db.size()))) expected[__builtin_popcount(m)] += 1;
    const auto counts = size_stratified_counts(c, endo).counts;
    for (std::size_t k = 0; k < counts.size(); ++k) ASSERT_LE(counts[k], binomial(endo.size(), k));
    ASSERT_EQ(counts, expected);
  }
}

TEST(ShapqGame, Utility) {
  auto g = shapq_game(rs(), parse_database("endo R(a)\nendo S(a)"));
  ASSERT_EQ(g.size(), 2u);
  for (std::uint32_t m = 0; m < 4; ++m) {
    std::vector<char> c{static_cast<char>(m & 1), static_cast<char>(m >> 1 & 1)};
    EXPECT_EQ(g.utility(c), m == 3 ? 1 : 0);
  }
  g = shapq_game(rs(), parse_database("exo R(a)\nexo S(a)\nendo R(b)\nendo S(b)"));
  EXPECT_EQ(shapley_exact_subsets(g).values, std::vector<Rational>(2, 0));
  EXPECT_EQ(shapq_game(rs(), parse_database("exo R(a)")).size(), 0u);
}

TEST(Hierarchical, SpecCases) {
  const auto db = parse_database(kRunning);
  EXPECT_EQ(shapq_exact_hierarchical(rs(), db, 1), Rational(1, 2));
  EXPECT_EQ(shapq_exact_hierarchical(rs(), db, 2), Rational(1, 2));
  EXPECT_EQ(shapq_exact_hierarchical(rs(), db, 3), 0);
  EXPECT_EQ(shapq_exact_hierarchical(rs(), parse_database("endo R(a)\nexo S(a)"), 1), 1);
  EXPECT_THROW(shapq_exact_hierarchical(rs(), parse_database("exo R(a)\nendo S(a)"), 1), PreconditionError);
}

TEST(Hierarchical, UnionOfDisjointRelations) {
  const auto q = parse_query("q() :- R(x), S(x).\nq() :- T(y).");
  const auto db = parse_database("endo R(a)\nendo S(a)\nendo T(c)\nendo T(d)");
  const auto naive = testing_support::naive_shapley(4, testing_support::naive_query_utility(q, db));
  for (FactId f = 1; f <= 4; ++f) EXPECT_EQ(shapq_exact_hierarchical(q, db, f), naive[f - 1]);
}

TEST(Hierarchical, AgreesWithOracle) {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 40; ++round) {
    const auto cq = testing_support::random_hierarchical_query(rng);
    const auto db = testing_support::random_database_for(rng, cq, 9, 3);
    const UCQ q{{cq}};
    const auto endo = db.endogenous_indices();
    const auto naive = testing_support::naive_shapley_subsets(endo.size(), testing_support::naive_query_utility(q, db));
    for (std::size_t j = 0; j < endo.size(); ++j)
      ASSERT_EQ(shapq_exact_hierarchical(q, db, db.facts()[endo[j]].id), naive[j]) << to_string(cq);
  }
}

TEST(NullPlayer, Cases) {
  const auto db = parse_database(kRunning);
  EXPECT_TRUE(null_player(rs(), db, 3));
  EXPECT_FALSE(null_player(rs(), db, 1));
  const auto sat = parse_database("exo R(a)\nexo S(a)\nendo R(b)");
  EXPECT_TRUE(null_player(rs(), sat, 3));
}

TEST(NullPlayer, ZeroIffNull) {
  std::mt19937_64 rng(24);
  for (int round = 0; round < 40; ++round) {
    const auto cq = testing_support::random_hierarchical_query(rng);
    const auto db = testing_support::random_database_for(rng, cq, 8, 2);
    const UCQ q{{cq}};
    const auto s = shapley_exact_subsets(shapq_game(q, db));
    for (std::size_t j = 0; j < s.players.size(); ++j) {
      ASSERT_GE(s.values[j], 0);
      ASSERT_EQ(s.values[j] == 0, null_player(q, db, s.players[j]));
    }
  }
}

TEST(Dispatch, AutoPicksHierarchical) {
  const auto db = parse_database(kRunning);
  const auto r = shapq_dispatch(rs(), db, std::span<const FactId>{}, AttributionConfig{});
  EXPECT_EQ(r.engine, "hierarchical");
  ASSERT_EQ(r.values.size(), 3u);
  EXPECT_EQ(std::get<Rational>(r.values[0].value), Rational(1, 2));
  EXPECT_EQ(std::get<Rational>(r.values[2].value), 0);
  EXPECT_TRUE(r.query_true);
  EXPECT_FALSE(r.query_true_on_exogenous);
}

TEST(Dispatch, NonHierarchicalUsesSubsets) {
  const auto q = parse_query("q() :- R(x), T(x,y), S(y)");
  Database db;
  for (int i = 1; i <= 3; ++i) {
    db.add("R", {std::to_string(i)}, Provenance::endogenous);
    db.add("S", {std::to_string(i)}, Provenance::endogenous);
  }
  db.add("T", {"1", "2"}, Provenance::endogenous);
  db.add("T", {"2", "3"}, Provenance::endogenous);
  db.add("T", {"3", "1"}, Provenance::endogenous);
  db.add("T", {"1", "1"}, Provenance::endogenous);
  ASSERT_EQ(db.endogenous_indices().size(), 10u);
  const auto r = shapq_dispatch(q, db, std::span<const FactId>{}, AttributionConfig{});
  EXPECT_EQ(r.engine, "brute-subset");
  EXPECT_NE(r.classification.exact_complexity.find("FP^#P-hard family"), std::string::npos);
  const auto naive = testing_support::naive_shapley_subsets(10, testing_support::naive_query_utility(q, db));
  Rational sum = 0;
  for (std::size_t j = 0; j < 10; ++j) {
    EXPECT_EQ(std::get<Rational>(r.values[j].value), naive[j]);
    sum += naive[j];
  }
  EXPECT_EQ(sum, 1);
}

TEST(Dispatch, LargeInstanceSamples) {
  const auto q = parse_query("q() :- R(x), T(x,y), S(y)");
  Database db;
  for (int i = 0; i < 14; ++i) {
    db.add("R", {std::to_string(i)}, Provenance::endogenous);
    db.add("S", {std::to_string(i)}, Provenance::endogenous);
  }
  for (int i = 0; i < 12; ++i) db.add("T", {std::to_string(i), std::to_string(i + 1)}, Provenance::endogenous);
  ASSERT_EQ(db.endogenous_indices().size(), 40u);
  AttributionConfig cfg;
  cfg.workers = 4;
  const std::vector<FactId> some{1, 29, 2};
  const auto r = shapq_dispatch(q, db, some, cfg);
  EXPECT_EQ(r.engine, "sample");
  for (const auto& a : r.values) {
    if (a.certified_zero) continue;
    const auto& e = std::get<Estimate>(a.value);
    EXPECT_EQ(e.samples, sample_size(0.05, 0.1, 1));
  }
  cfg.workers = 1;
  const auto again = shapq_dispatch(q, db, some, cfg);
  for (std::size_t i = 0; i < some.size(); ++i) EXPECT_EQ(again.values[i].approx(), r.values[i].approx());
}

TEST(Dispatch, QueryTrueOnExogenousGivesZeros) {
  const auto db = parse_database("exo R(a)\nexo S(a)\nendo R(b)\nendo S(b)");
  const auto r = shapq_dispatch(rs(), db, std::span<const FactId>{}, AttributionConfig{});
  for (const auto& a : r.values) {
    EXPECT_TRUE(a.certified_zero);
    EXPECT_EQ(std::get<Rational>(a.value), 0);
  }
}

TEST(Dispatch, MultiplicativeMode) {
  const auto q = parse_query("q() :- R(x), T(x,y), S(y)");
  const auto db = parse_database("endo R(1)\nendo T(1,2)\nendo S(2)\nendo S(3)");
  AttributionConfig cfg;
  cfg.engine = Engine::sample;
  cfg.approx = ApproxMode::multiplicative;
  cfg.epsilon = 0.2;
  auto r = shapq_dispatch(q, db, std::span<const FactId>{}, cfg);
  ASSERT_TRUE(r.gap.has_value());
  EXPECT_TRUE(r.gap_is_default);
  EXPECT_EQ(*r.gap, Rational(1, 12));
  EXPECT_TRUE(r.values[3].certified_zero);
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = r.values[i].approx();
    EXPECT_NEAR(v, 1.0 / 3, 0.2 / 3 + 1e-9);
  }
  cfg.zero_certification = false;
  EXPECT_THROW(shapq_dispatch(q, db, std::span<const FactId>{}, cfg), PreconditionError);
  cfg.gap = Rational(1, 3);
  EXPECT_NO_THROW(shapq_dispatch(q, db, std::span<const FactId>{}, cfg));
}

TEST(Dispatch, EngineErrors) {
  const auto q = parse_query("q() :- R(x), T(x,y), S(y)");
  const auto db = parse_database("endo R(1)\nendo T(1,2)\nendo S(2)");
  AttributionConfig cfg;
  cfg.engine = Engine::hierarchical;
  EXPECT_THROW(shapq_dispatch(q, db, std::span<const FactId>{}, cfg), PreconditionError);
  cfg.engine = Engine::closed_form;
  EXPECT_THROW(shapq_dispatch(q, db, std::span<const FactId>{}, cfg), PreconditionError);
  cfg.engine = Engine::brute_perm;
  EXPECT_EQ(std::get<Rational>(shapq_dispatch(q, db, std::span<const FactId>{}, cfg).values[0].value), Rational(1, 3));
  const std::vector<FactId> missing{9};
  cfg.engine = Engine::automatic;
  EXPECT_THROW(shapq_dispatch(q, db, missing, cfg), PreconditionError);
  const auto exo = parse_database("exo R(1)\nendo S(2)");
  const std::vector<FactId> exo_fact{1};
  EXPECT_THROW(shapq_dispatch(q, exo, exo_fact, cfg), PreconditionError);
}
