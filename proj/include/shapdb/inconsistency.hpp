#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapdb/database.hpp"
#include "shapdb/error.hpp"
#include "shapdb/fd.hpp"
#include "shapdb/graph.hpp"
#include "shapdb/numeric.hpp"
#include "shapdb/query_attribution.hpp"
#include "shapdb/sampling.hpp"
#include "shapdb/shapley.hpp"

namespace shapdb {

enum class MeasureKind { drastic, MI, P, R, MC };

inline std::string to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::drastic: return "drastic";
    case MeasureKind::MI: return "MI";
    case MeasureKind::P: return "P";
    case MeasureKind::R: return "R";
    case MeasureKind::MC: return "MC";
  }
  return "?";
}

inline std::optional<MeasureKind> parse_measure(std::string_view s) {
  if (s == "drastic" || s == "d") return MeasureKind::drastic;
  if (s == "MI") return MeasureKind::MI;
  if (s == "P") return MeasureKind::P;
  if (s == "R") return MeasureKind::R;
  if (s == "MC") return MeasureKind::MC;
  return std::nullopt;
}

// Measure of the sub-database induced by `active` over a prebuilt conflict graph.
inline Rational inconsistency_measure(const ConflictGraph& g, std::span<const char> active, MeasureKind kind,
                                      std::uint64_t budget = kDefaultBudget) {
  std::size_t edges = 0, problematic = 0, present = 0;
  for (std::size_t u = 0; u < g.vertex_count(); ++u) {
    if (!active[u]) continue;
    ++present;
    bool conflicted = false;
    for (auto v : g.neighbors(u))
      if (active[v]) {
        conflicted = true;
        if (u < v) ++edges;
      }
    if (conflicted) ++problematic;
  }
  switch (kind) {
    case MeasureKind::drastic: return edges > 0 ? 1 : 0;
    case MeasureKind::MI: return edges;
    case MeasureKind::P: return problematic;
    case MeasureKind::R: return edges == 0 ? 0 : min_vertex_cover(g, active, budget);
    case MeasureKind::MC:
      if (present == 0) return 0;  // I(∅) = 0 by convention
      return Rational(count_maximal_independent_sets(g, active, budget));
  }
  return 0;
}

inline Rational inconsistency_measure(const Database& db, const std::vector<FD>& fds, MeasureKind kind,
                                      std::uint64_t budget = kDefaultBudget) {
  const auto g = conflict_graph(db, fds);
  std::vector<char> all(db.size(), 1);
  return inconsistency_measure(g, all, kind, budget);
}

// Minimum number of facts to delete so the rest satisfies the FDs.
inline std::size_t cardinality_repair_cost(const Database& db, const std::vector<FD>& fds,
                                           std::uint64_t budget = kDefaultBudget) {
  const auto g = conflict_graph(db, fds);
  std::vector<char> all(db.size(), 1);
  return min_vertex_cover(g, all, budget);
}

// Number of maximal consistent subsets (subset repairs). The empty database has one.
inline Integer count_maximal_consistent(const Database& db, const std::vector<FD>& fds,
                                        std::uint64_t budget = kDefaultBudget) {
  const auto g = conflict_graph(db, fds);
  std::vector<char> all(db.size(), 1);
  return count_maximal_independent_sets(g, all, budget);
}

// Game over all facts with utility E ↦ I(E, Δ). The conflict graph is built once.
inline CoalitionGame shapi_game(const Database& db, const std::vector<FD>& fds, MeasureKind kind,
                                std::uint64_t budget = kDefaultBudget) {
  auto g = std::make_shared<const ConflictGraph>(conflict_graph(db, fds));
  CoalitionGame game;
  for (const auto& f : db.facts()) game.players.push_back(f.id);
  game.utility = [g, kind, budget](std::span<const char> members) {
    return inconsistency_measure(*g, members, kind, budget);
  };
  return game;
}

// Polynomial formulas over conflict-graph degrees:
//   MI: d_f / 2
//   P:  d_f/(d_f+1) + Σ_{g ∈ N(f)} 1/(d_g(d_g+1))
inline Rational shapi_closed_form(const ConflictGraph& g, MeasureKind kind, std::size_t fact_index) {
  const std::size_t d = g.degree(fact_index);
  switch (kind) {
    case MeasureKind::MI:
      return Rational(d, 2);
    case MeasureKind::P: {
      if (d == 0) return 0;
      Rational v(d, d + 1);
      for (auto nb : g.neighbors(fact_index)) {
        const std::size_t dn = g.degree(nb);
        v += Rational(1, dn * (dn + 1));
      }
      return v;
    }
    default:
      throw PreconditionError("closed form exists only for the MI and P measures");
  }
}

inline Rational shapi_closed_form(const Database& db, const std::vector<FD>& fds, MeasureKind kind, FactId f) {
  return shapi_closed_form(conflict_graph(db, fds), kind, db.index_of(f));
}

struct ShapiReport {
  MeasureKind measure = MeasureKind::drastic;
  Rational measure_value = 0;
  bool measure_known = true;
  std::string engine;
  std::optional<Rational> gap;
  std::vector<Attribution> values;
};

// Shapley values of the requested facts (all when `facts` is empty).
// `auto`: closed form for MI/P, subset engine for drastic/R/MC up to
// `subset_cap` facts, sampling beyond.
inline ShapiReport shapi_dispatch(const Database& db, const std::vector<FD>& fds, MeasureKind kind,
                                  std::span<const FactId> facts, const AttributionConfig& config) {
  ShapiReport report;
  report.measure = kind;
  const auto graph = conflict_graph(db, fds);

  std::vector<FactId> targets(facts.begin(), facts.end());
  if (targets.empty())
    for (const auto& f : db.facts()) targets.push_back(f.id);
  for (auto f : targets) db.index_of(f);

  Engine engine = config.engine;
  if (engine == Engine::automatic) {
    if (kind == MeasureKind::MI || kind == MeasureKind::P) engine = Engine::closed_form;
    else if (db.size() <= config.subset_cap) engine = Engine::brute_subset;
    else engine = Engine::sample;
  }
  if (engine == Engine::hierarchical) throw PreconditionError("hierarchical engine applies to queries only");
  if (engine == Engine::closed_form && kind != MeasureKind::MI && kind != MeasureKind::P)
    throw PreconditionError("closed form exists only for the MI and P measures");
  report.engine = to_string(engine);

  const bool multiplicative = engine == Engine::sample && config.approx == ApproxMode::multiplicative;
  if (multiplicative) {
    if (kind == MeasureKind::MC)
      throw PreconditionError(
          "multiplicative estimation for MC is refused: no multiplicative approximation is known for FD sets "
          "without an lhs chain, and none exists for {A->B, C->D} unless NP = RP");
    if (kind != MeasureKind::drastic && kind != MeasureKind::R)
      throw PreconditionError("multiplicative estimation is offered for the drastic and R measures");
    const std::size_t n = db.size();
    report.gap = config.gap ? *config.gap : (n >= 2 ? Rational(1, n * (n - 1)) : Rational(1));
    if (*report.gap <= 0) throw PreconditionError("gap must be positive");
  }

  std::vector<char> all(db.size(), 1);
  try {
    report.measure_value = inconsistency_measure(graph, all, kind, config.budget);
  } catch (const BudgetExceeded&) {
    if (engine != Engine::sample) throw;
    report.measure_known = false;
  }

  switch (engine) {
    case Engine::closed_form:
      for (auto f : targets)
        report.values.push_back(Attribution{f, shapi_closed_form(graph, kind, db.index_of(f)), report.engine});
      break;
    case Engine::brute_perm:
    case Engine::brute_subset: {
      const auto game = shapi_game(db, fds, kind, config.budget);
      const auto vec = engine == Engine::brute_perm ? shapley_exact_permutations(game, config.permutation_cap)
                                                    : shapley_exact_subsets(game, config.subset_cap);
      for (auto f : targets) report.values.push_back(Attribution{f, vec.value_of(f), report.engine});
      break;
    }
    case Engine::sample: {
      const auto game = shapi_game(db, fds, kind, config.budget);
      report.values.resize(targets.size());
      parallel_for(targets.size(), config.workers, [&](std::size_t t) {
        const FactId f = targets[t];
        const std::size_t fi = db.index_of(f);
        Attribution& out = report.values[t];
        out.fact = f;
        out.engine = report.engine;
        // An isolated fact never changes drastic, MI, P or R.
        if (graph.degree(fi) == 0 && kind != MeasureKind::MC) {
          out.value = Rational(0);
          out.certified_zero = true;
          return;
        }
        double range = 1.0;
        switch (kind) {
          case MeasureKind::MI: range = static_cast<double>(graph.degree(fi)); break;
          case MeasureKind::P: range = static_cast<double>(graph.degree(fi) + 1); break;
          case MeasureKind::MC:
            if (!report.measure_known) throw BudgetExceeded("I_MC of the full database exceeded the work budget");
            range = to_double(report.measure_value);
            break;
          default: break;
        }
        if (config.range) range = *config.range;
        if (multiplicative)
          out.value = estimate_multiplicative(game, f, config.epsilon, config.delta, to_double(*report.gap),
                                              config.seed, range);
        else
          out.value = estimate_additive(game, f, config.epsilon, config.delta, config.seed, range);
      });
      break;
    }
    default:
      break;
  }
  return report;
}

inline Attribution shapi_dispatch(const Database& db, const std::vector<FD>& fds, MeasureKind kind, FactId f,
                                  const AttributionConfig& config) {
  return shapi_dispatch(db, fds, kind, std::span<const FactId>(&f, 1), config).values.front();
}

}  // namespace shapdb
