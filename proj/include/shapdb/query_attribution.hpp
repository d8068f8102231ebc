#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shapdb/database.hpp"
#include "shapdb/error.hpp"
#include "shapdb/evaluate.hpp"
#include "shapdb/lineage.hpp"
#include "shapdb/numeric.hpp"
#include "shapdb/query.hpp"
#include "shapdb/sampling.hpp"
#include "shapdb/shapley.hpp"

namespace shapdb {

// The game on D_n with utility E ↦ q(E ∪ D_x) − q(D_x). Players are the
// endogenous fact ids in database order. The database must outlive the game.
inline CoalitionGame shapq_game(const UCQ& q, const Database& db) {
  check_query_schema(q, db.schema());
  auto eval = std::make_shared<QueryEvaluator>(q, db);
  auto endo = std::make_shared<std::vector<std::size_t>>(db.endogenous_indices());
  auto base = std::make_shared<std::vector<char>>(db.size(), 0);
  for (auto i : db.exogenous_indices()) (*base)[i] = 1;
  const int offset = eval->evaluate(*base) ? 1 : 0;

  CoalitionGame g;
  for (auto i : *endo) g.players.push_back(db.facts()[i].id);
  g.utility = [eval, endo, base, offset](std::span<const char> members) {
    std::vector<char> present = *base;
    for (std::size_t k = 0; k < endo->size(); ++k)
      if (members[k]) present[(*endo)[k]] = 1;
    return Rational((eval->evaluate(present) ? 1 : 0) - offset);
  };
  return g;
}

// Exact value for a UCQ on the read-once path (one hierarchical self-join-free
// CQ, or relation-disjoint ones): Σ_k k!(n−k−1)!/n! · (C1_k − C0_k), where C1
// and C0 count size-k subsets of D_n∖{f} satisfying the lineage with f set to
// 1 and to 0.
inline Rational shapq_exact_hierarchical(const UCQ& q, const Database& db, FactId f) {
  const std::size_t fi = db.index_of(f);
  if (!db.facts()[fi].endogenous()) throw PreconditionError("fact " + std::to_string(f) + " is exogenous");
  check_query_schema(q, db.schema());
  const LineageCircuit circuit = factorize_read_once(q, db);

  std::vector<std::size_t> scope;
  for (auto i : db.endogenous_indices())
    if (i != fi) scope.push_back(i);
  const std::size_t n = scope.size() + 1;

  const auto with = size_stratified_counts(circuit.condition(fi, true), scope).counts;
  const auto without = size_stratified_counts(circuit.condition(fi, false), scope).counts;

  // weight_k = k!(n−1−k)!, built incrementally from (n−1)!.
  Integer weight = factorial(n - 1);
  Integer sum = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Integer diff = with[k] - without[k];
    if (!diff.is_zero()) sum += weight * diff;
    if (k + 1 < n) weight = weight * (k + 1) / (n - 1 - k);
  }
  return Rational(sum, factorial(n));
}

inline Rational shapq_exact_hierarchical(const CQ& q, const Database& db, FactId f) {
  return shapq_exact_hierarchical(UCQ{{q}}, db, f);
}

// For a monotone query the value of f is 0 exactly when f is in no minimal witness.
inline bool null_player(const std::vector<std::vector<std::size_t>>& minimal_witnesses, std::size_t fact_index) {
  return std::none_of(minimal_witnesses.begin(), minimal_witnesses.end(), [&](const auto& w) {
    return std::binary_search(w.begin(), w.end(), fact_index);
  });
}

inline bool null_player(const UCQ& q, const Database& db, FactId f) {
  const std::size_t fi = db.index_of(f);
  if (!db.facts()[fi].endogenous()) throw PreconditionError("fact " + std::to_string(f) + " is exogenous");
  return null_player(witnesses(q, db), fi);
}

enum class Engine { automatic, brute_perm, brute_subset, hierarchical, closed_form, sample };
enum class ApproxMode { additive, multiplicative };

inline std::string to_string(Engine e) {
  switch (e) {
    case Engine::automatic: return "auto";
    case Engine::brute_perm: return "brute-perm";
    case Engine::brute_subset: return "brute-subset";
    case Engine::hierarchical: return "hierarchical";
    case Engine::closed_form: return "closed-form";
    case Engine::sample: return "sample";
  }
  return "?";
}

inline std::string to_string(ApproxMode m) { return m == ApproxMode::additive ? "additive" : "multiplicative"; }

struct AttributionConfig {
  Engine engine = Engine::automatic;
  ApproxMode approx = ApproxMode::additive;
  double epsilon = 0.05;
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::optional<Rational> gap;      // multiplicative mode; a documented default applies when unset
  bool zero_certification = true;   // certify zeros exactly before sampling (ShapQ)
  std::optional<double> range;      // width of the marginal-contribution interval
  std::size_t permutation_cap = 9;
  std::size_t subset_cap = 20;
  std::uint64_t budget = 50'000'000;  // work units for exact graph measures
  std::size_t workers = 1;
};

// One attributed value: exact, or an estimate with its guarantee.
struct Attribution {
  FactId fact = 0;
  std::variant<Rational, Estimate, MultiplicativeEstimate> value;
  std::string engine;
  bool certified_zero = false;

  bool exact() const noexcept { return std::holds_alternative<Rational>(value); }
  double approx() const {
    if (auto* r = std::get_if<Rational>(&value)) return to_double(*r);
    if (auto* e = std::get_if<Estimate>(&value)) return e->value;
    return std::get<MultiplicativeEstimate>(value).value;
  }
};

struct QueryClassification {
  std::vector<QueryClass> disjuncts;
  bool read_once_path = false;
  std::string exact_complexity;
  std::string approximation;
};

inline QueryClassification classify_ucq(const UCQ& q) {
  QueryClassification c;
  for (const auto& d : q.disjuncts) c.disjuncts.push_back(classify_query(d));
  c.read_once_path = read_once_applicable(q);
  if (q.disjuncts.size() == 1) {
    const auto& k = c.disjuncts.front();
    if (k.self_join_free && k.hierarchical) c.exact_complexity = "FP (hierarchical self-join-free CQ)";
    else if (k.self_join_free) c.exact_complexity = "FP^#P-hard family (non-hierarchical self-join-free CQ)";
    else c.exact_complexity = "unknown (CQ with self-joins)";
  } else {
    c.exact_complexity = c.read_once_path ? "FP (relation-disjoint hierarchical self-join-free disjuncts)"
                                          : "unknown (general UCQ)";
  }
  c.approximation = "additive FPRAS; multiplicative FPRAS (UCQ gap property)";
  return c;
}

struct ShapqReport {
  QueryClassification classification;
  std::string engine;
  bool query_true_on_exogenous = false;
  bool query_true = false;
  std::optional<Rational> gap;
  bool gap_is_default = false;
  std::vector<Attribution> values;
};

// Shapley values of the requested endogenous facts (all when `facts` is empty).
// `auto` picks the read-once path when the query allows it, the subset engine
// up to `subset_cap` players, and sampling otherwise.
inline ShapqReport shapq_dispatch(const UCQ& q, const Database& db, std::span<const FactId> facts,
                                  const AttributionConfig& config) {
  check_query_schema(q, db.schema());
  ShapqReport report;
  report.classification = classify_ucq(q);

  std::vector<FactId> targets(facts.begin(), facts.end());
  if (targets.empty())
    for (auto i : db.endogenous_indices()) targets.push_back(db.facts()[i].id);
  for (auto f : targets)
    if (!db.facts()[db.index_of(f)].endogenous())
      throw PreconditionError("fact " + std::to_string(f) + " is exogenous");

  QueryEvaluator eval(q, db);
  std::vector<char> present(db.size(), 0);
  for (auto i : db.exogenous_indices()) present[i] = 1;
  report.query_true_on_exogenous = eval.evaluate(present);
  report.query_true = eval.evaluate_all();
  const std::size_t n = db.endogenous_indices().size();

  Engine engine = config.engine;
  if (engine == Engine::automatic) {
    if (report.classification.read_once_path) engine = Engine::hierarchical;
    else if (n <= config.subset_cap) engine = Engine::brute_subset;
    else engine = Engine::sample;
  }
  if (engine == Engine::closed_form) throw PreconditionError("closed-form engine applies to inconsistency measures only");
  report.engine = to_string(engine);

  if (engine == Engine::sample && config.approx == ApproxMode::multiplicative) {
    if (!config.gap && !config.zero_certification)
      throw PreconditionError("multiplicative estimation needs a gap or zero certification");
    if (config.gap) {
      if (*config.gap <= 0) throw PreconditionError("gap must be positive");
      report.gap = config.gap;
    } else {
      report.gap = n >= 2 ? Rational(1, n * (n - 1)) : Rational(1);
      report.gap_is_default = true;
    }
  }

  // q(D_x) = 1: every value is 0.
  if (report.query_true_on_exogenous) {
    for (auto f : targets) report.values.push_back(Attribution{f, Rational(0), report.engine, true});
    return report;
  }

  switch (engine) {
    case Engine::hierarchical:
      for (auto f : targets) report.values.push_back(Attribution{f, shapq_exact_hierarchical(q, db, f), report.engine});
      break;
    case Engine::brute_perm:
    case Engine::brute_subset: {
      const auto game = shapq_game(q, db);
      const auto vec = engine == Engine::brute_perm ? shapley_exact_permutations(game, config.permutation_cap)
                                                    : shapley_exact_subsets(game, config.subset_cap);
      for (auto f : targets) report.values.push_back(Attribution{f, vec.value_of(f), report.engine});
      break;
    }
    case Engine::sample: {
      const auto game = shapq_game(q, db);
      const double range = config.range.value_or(1.0);
      std::vector<std::vector<std::size_t>> minimal;
      const bool certify = config.zero_certification;
      if (certify) minimal = witnesses(eval, db);
      report.values.resize(targets.size());
      parallel_for(targets.size(), config.workers, [&](std::size_t t) {
        const FactId f = targets[t];
        Attribution& out = report.values[t];
        out.fact = f;
        out.engine = report.engine;
        if (certify && null_player(minimal, db.index_of(f))) {
          out.value = Rational(0);
          out.certified_zero = true;
        } else if (config.approx == ApproxMode::additive) {
          out.value = estimate_additive(game, f, config.epsilon, config.delta, config.seed, range);
        } else {
          out.value = estimate_multiplicative(game, f, config.epsilon, config.delta, to_double(*report.gap),
                                              config.seed, range);
        }
      });
      break;
    }
    default:
      break;
  }
  return report;
}

inline Attribution shapq_dispatch(const UCQ& q, const Database& db, FactId f, const AttributionConfig& config) {
  return shapq_dispatch(q, db, std::span<const FactId>(&f, 1), config).values.front();
}

}  // namespace shapdb
