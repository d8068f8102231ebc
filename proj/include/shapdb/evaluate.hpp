#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "shapdb/database.hpp"
#include "shapdb/error.hpp"
#include "shapdb/query.hpp"

namespace shapdb {

// Checks the query's relation arities against a database schema. Relations
// absent from the schema are allowed (they evaluate as empty).
inline void check_query_schema(const UCQ& q, const Schema& schema) {
  for (const auto& d : q.disjuncts)
    for (const auto& a : d.atoms)
      if (const auto* rel = schema.find(a.relation); rel && rel->arity != a.terms.size())
        throw PreconditionError("relation " + a.relation + " has arity " + std::to_string(rel->arity) +
                                " in the database but " + std::to_string(a.terms.size()) + " in the query");
}

// Evaluates a UCQ over subsets of a database. The database is indexed once;
// each evaluation takes a membership mask over fact indices.
class QueryEvaluator {
 public:
  QueryEvaluator(const UCQ& q, const Database& db) : db_(&db) {
    std::unordered_map<Value, int> value_ids;
    auto intern = [&](const Value& v) {
      auto [it, inserted] = value_ids.try_emplace(v, static_cast<int>(value_ids.size()));
      return it->second;
    };
    fact_values_.resize(db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
      const Fact& f = db.facts()[i];
      for (const auto& v : f.values) fact_values_[i].push_back(intern(v));
      auto& rel = relations_[f.relation];
      rel.facts.push_back(i);
      rel.by_position.resize(f.values.size());
      for (std::size_t p = 0; p < f.values.size(); ++p) rel.by_position[p][fact_values_[i][p]].push_back(i);
    }

    for (const auto& cq : q.disjuncts) {
      Disjunct d;
      std::map<std::string, int> vars;
      std::vector<std::vector<int>> atom_vars;
      for (const auto& a : cq.atoms) {
        CompiledAtom ca;
        auto it = relations_.find(a.relation);
        ca.relation = it == relations_.end() ? nullptr : &it->second;
        for (const auto& t : a.terms) {
          if (t.is_variable()) {
            auto [vit, inserted] = vars.try_emplace(t.text, static_cast<int>(vars.size()));
            ca.var.push_back(vit->second);
            ca.constant.push_back(-1);
          } else {
            auto vit = value_ids.find(t.text);
            ca.var.push_back(-1);
            ca.constant.push_back(vit == value_ids.end() ? kMissing : vit->second);
          }
        }
        d.atoms.push_back(std::move(ca));
      }
      d.variable_count = vars.size();
      order_atoms(d);
      disjuncts_.push_back(std::move(d));
    }
  }

  // q over the facts i with present[i] != 0.
  bool evaluate(std::span<const char> present) const {
    for (const auto& d : disjuncts_) {
      std::vector<int> binding(d.variable_count, -1);
      bool found = false;
      match(d, 0, binding, present, nullptr, [&] {
        found = true;
        return false;
      });
      if (found) return true;
    }
    return false;
  }

  bool evaluate_all() const {
    std::vector<char> all(db_->size(), 1);
    return evaluate(all);
  }

  // Calls visit(chosen) for every homomorphism of every disjunct into the
  // present facts; `chosen` holds the fact index used by each atom. Stops
  // early when visit returns false.
  template <class Visit>
  void for_each_match(std::span<const char> present, Visit&& visit) const {
    for (const auto& d : disjuncts_) {
      std::vector<int> binding(d.variable_count, -1);
      std::vector<std::size_t> chosen(d.atoms.size());
      bool go_on = true;
      match(d, 0, binding, present, &chosen, [&] {
        go_on = visit(std::as_const(chosen));
        return go_on;
      });
      if (!go_on) return;
    }
  }

 private:
  static constexpr int kMissing = -2;

  struct RelationIndex {
    std::vector<std::size_t> facts;
    std::vector<std::unordered_map<int, std::vector<std::size_t>>> by_position;
  };

  struct CompiledAtom {
    const RelationIndex* relation = nullptr;
    std::vector<int> var;       // variable slot per position, -1 for constants
    std::vector<int> constant;  // value id per position, -1 for variables, kMissing if absent from the data
  };

  struct Disjunct {
    std::vector<CompiledAtom> atoms;
    std::vector<std::size_t> order;
    std::size_t variable_count = 0;
  };

  // Greedy join order: prefer atoms with the most bound positions.
  static void order_atoms(Disjunct& d) {
    std::vector<bool> bound(d.variable_count, false), used(d.atoms.size(), false);
    for (std::size_t step = 0; step < d.atoms.size(); ++step) {
      std::size_t best = 0;
      long best_score = -1;
      for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        if (used[i]) continue;
        long score = 0;
        for (std::size_t p = 0; p < d.atoms[i].var.size(); ++p)
          if (d.atoms[i].var[p] < 0 || bound[d.atoms[i].var[p]]) ++score;
        if (score > best_score) best = i, best_score = score;
      }
      used[best] = true;
      d.order.push_back(best);
      for (int v : d.atoms[best].var)
        if (v >= 0) bound[v] = true;
    }
  }

  template <class OnMatch>
  bool match(const Disjunct& d, std::size_t depth, std::vector<int>& binding, std::span<const char> present,
             std::vector<std::size_t>* chosen, OnMatch&& on_match) const {
    if (depth == d.order.size()) return on_match();
    const std::size_t ai = d.order[depth];
    const CompiledAtom& atom = d.atoms[ai];
    if (!atom.relation) return true;

    // Candidate list: the smallest index bucket among bound positions.
    const std::vector<std::size_t>* candidates = &atom.relation->facts;
    static const std::vector<std::size_t> kNone;
    for (std::size_t p = 0; p < atom.var.size(); ++p) {
      int want = atom.var[p] >= 0 ? binding[atom.var[p]] : atom.constant[p];
      if (want == kMissing) return true;
      if (want < 0) continue;
      const auto& index = atom.relation->by_position[p];
      auto it = index.find(want);
      const auto* bucket = it == index.end() ? &kNone : &it->second;
      if (bucket->size() < candidates->size()) candidates = bucket;
    }

    std::vector<int> newly_bound;
    for (std::size_t fi : *candidates) {
      if (!present[fi]) continue;
      const auto& vals = fact_values_[fi];
      newly_bound.clear();
      bool ok = true;
      for (std::size_t p = 0; p < atom.var.size() && ok; ++p) {
        if (atom.var[p] < 0) {
          ok = vals[p] == atom.constant[p];
        } else if (binding[atom.var[p]] < 0) {
          binding[atom.var[p]] = vals[p];
          newly_bound.push_back(atom.var[p]);
        } else {
          ok = binding[atom.var[p]] == vals[p];
        }
      }
      bool go_on = true;
      if (ok) {
        if (chosen) (*chosen)[ai] = fi;
        go_on = match(d, depth + 1, binding, present, chosen, on_match);
      }
      for (int v : newly_bound) binding[v] = -1;
      if (!go_on) return false;
    }
    return true;
  }

  const Database* db_;
  std::vector<std::vector<int>> fact_values_;
  std::map<std::string, RelationIndex> relations_;
  std::vector<Disjunct> disjuncts_;
};

inline bool eval_boolean(const UCQ& q, const Database& db) { return QueryEvaluator(q, db).evaluate_all(); }

// The ⊆-minimal sets W of endogenous facts with q(W ∪ D_x) = 1, as sorted
// vectors of fact indices, ordered by (size, lexicographic). Empty iff
// q(D) = 0; equals {∅} iff q(D_x) = 1.
inline std::vector<std::vector<std::size_t>> witnesses(const QueryEvaluator& eval, const Database& db) {
  std::vector<char> all(db.size(), 1);
  std::vector<std::vector<std::size_t>> supports;
  eval.for_each_match(all, [&](const std::vector<std::size_t>& chosen) {
    std::vector<std::size_t> w;
    for (auto fi : chosen)
      if (db.facts()[fi].endogenous()) w.push_back(fi);
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
    supports.push_back(std::move(w));
    return !supports.back().empty();  // an exogenous-only match makes ∅ the sole minimal witness
  });
  std::sort(supports.begin(), supports.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  supports.erase(std::unique(supports.begin(), supports.end()), supports.end());

  std::vector<std::vector<std::size_t>> minimal;
  for (auto& s : supports) {
    bool dominated = std::any_of(minimal.begin(), minimal.end(), [&](const auto& m) {
      return std::includes(s.begin(), s.end(), m.begin(), m.end());
    });
    if (!dominated) minimal.push_back(std::move(s));
  }
  return minimal;
}

inline std::vector<std::vector<std::size_t>> witnesses(const UCQ& q, const Database& db) {
  return witnesses(QueryEvaluator(q, db), db);
}

}  // namespace shapdb
