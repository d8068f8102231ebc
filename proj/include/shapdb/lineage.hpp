#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "shapdb/database.hpp"
#include "shapdb/error.hpp"
#include "shapdb/evaluate.hpp"
#include "shapdb/numeric.hpp"
#include "shapdb/query.hpp"

namespace shapdb {

// Monotone DNF over endogenous fact indices; each term is a sorted conjunction.
// An empty term list is false; a list holding the empty term is true.
using LineageDNF = std::vector<std::vector<std::size_t>>;

inline LineageDNF lineage_dnf(const UCQ& q, const Database& db) { return witnesses(q, db); }

inline bool evaluate(const LineageDNF& dnf, std::span<const char> assignment) {
  return std::any_of(dnf.begin(), dnf.end(), [&](const auto& term) {
    return std::all_of(term.begin(), term.end(), [&](std::size_t v) { return assignment[v] != 0; });
  });
}

// Boolean circuit over fact indices. Gates are built with constant folding,
// so a constant can only appear as the root.
class LineageCircuit {
 public:
  enum class Kind { variable, constant, conjunction, disjunction };

  struct Node {
    Kind kind = Kind::constant;
    bool value = false;             // constants
    std::size_t fact = 0;           // variables
    std::vector<std::size_t> children;
    std::vector<std::size_t> vars;  // sorted fact indices below this node
  };

  LineageCircuit() {
    nodes_.push_back(Node{Kind::constant, false, 0, {}, {}});
    nodes_.push_back(Node{Kind::constant, true, 0, {}, {}});
  }

  std::size_t constant(bool v) const noexcept { return v ? 1 : 0; }

  std::size_t variable(std::size_t fact) {
    nodes_.push_back(Node{Kind::variable, false, fact, {}, {fact}});
    return nodes_.size() - 1;
  }

  std::size_t gate(Kind kind, std::vector<std::size_t> children) {
    const bool conj = kind == Kind::conjunction;
    std::vector<std::size_t> kept;
    for (auto c : children) {
      const Node& n = nodes_[c];
      if (n.kind == Kind::constant) {
        if (n.value != conj) return constant(!conj);  // absorbing element
        continue;                                      // neutral element
      }
      if (n.kind == kind) kept.insert(kept.end(), n.children.begin(), n.children.end());
      else kept.push_back(c);
    }
    if (kept.empty()) return constant(conj);
    if (kept.size() == 1) return kept.front();
    Node node{kind, false, 0, std::move(kept), {}};
    for (auto c : node.children) {
      const auto& cv = nodes_[c].vars;
      std::vector<std::size_t> merged;
      merged.reserve(node.vars.size() + cv.size());
      std::merge(node.vars.begin(), node.vars.end(), cv.begin(), cv.end(), std::back_inserter(merged));
      node.vars = std::move(merged);
    }
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  void set_root(std::size_t r) {
    root_ = r;
    read_once_ = false;
  }
  std::size_t root() const noexcept { return root_; }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const std::vector<std::size_t>& variables() const { return nodes_[root_].vars; }
  bool read_once() const noexcept { return read_once_; }

  // Checks that the children of every gate reachable from the root have
  // pairwise disjoint variables, which makes every variable occur once.
  bool verify_read_once() {
    read_once_ = check(root_);
    return read_once_;
  }

  bool evaluate(std::span<const char> assignment) const { return eval(root_, assignment); }

  // Copy with `fact` fixed to `value`.
  LineageCircuit condition(std::size_t fact, bool value) const {
    LineageCircuit out;
    std::function<std::size_t(std::size_t)> copy = [&](std::size_t i) -> std::size_t {
      const Node& n = nodes_[i];
      switch (n.kind) {
        case Kind::constant:
          return out.constant(n.value);
        case Kind::variable:
          return n.fact == fact ? out.constant(value) : out.variable(n.fact);
        default: {
          if (!std::binary_search(n.vars.begin(), n.vars.end(), fact)) return out.copy_subtree(*this, i);
          std::vector<std::size_t> kids;
          for (auto c : n.children) kids.push_back(copy(c));
          return out.gate(n.kind, std::move(kids));
        }
      }
    };
    out.set_root(copy(root_));
    if (read_once_) out.read_once_ = true;
    return out;
  }

 private:
  std::size_t copy_subtree(const LineageCircuit& from, std::size_t i) {
    const Node& n = from.nodes_[i];
    if (n.kind == Kind::constant) return constant(n.value);
    if (n.kind == Kind::variable) return variable(n.fact);
    std::vector<std::size_t> kids;
    for (auto c : n.children) kids.push_back(copy_subtree(from, c));
    return gate(n.kind, std::move(kids));
  }

  bool check(std::size_t i) const {
    const Node& n = nodes_[i];
    if (n.kind == Kind::constant || n.kind == Kind::variable) return true;
    std::size_t total = 0;
    for (auto c : n.children) {
      if (!check(c)) return false;
      total += nodes_[c].vars.size();
    }
    // vars is the sorted merge of the children's vars; duplicates reveal sharing
    if (total != n.vars.size()) return false;
    return std::adjacent_find(n.vars.begin(), n.vars.end()) == n.vars.end();
  }

  bool eval(std::size_t i, std::span<const char> assignment) const {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case Kind::constant:
        return n.value;
      case Kind::variable:
        return assignment[n.fact] != 0;
      case Kind::conjunction:
        return std::all_of(n.children.begin(), n.children.end(), [&](auto c) { return eval(c, assignment); });
      case Kind::disjunction:
        return std::any_of(n.children.begin(), n.children.end(), [&](auto c) { return eval(c, assignment); });
    }
    return false;
  }

  std::vector<Node> nodes_;
  std::size_t root_ = 0;
  bool read_once_ = false;
};

namespace detail {

// Read-once factorization of one hierarchical self-join-free CQ. Each atom
// carries the candidate facts consistent with the variables bound so far.
class ReadOnceBuilder {
 public:
  ReadOnceBuilder(const CQ& q, const Database& db, LineageCircuit& out) : q_(q), db_(db), out_(out) {
    std::unordered_map<Value, int> ids;
    values_.resize(db.size());
    for (std::size_t i = 0; i < db.size(); ++i)
      for (const auto& v : db.facts()[i].values)
        values_[i].push_back(ids.try_emplace(v, static_cast<int>(ids.size())).first->second);
    for (const auto& a : q.atoms) {
      std::vector<int> consts;
      for (const auto& t : a.terms) {
        if (t.is_variable()) consts.push_back(-1);
        else if (auto it = ids.find(t.text); it != ids.end()) consts.push_back(it->second);
        else consts.push_back(-2);
      }
      constants_.push_back(std::move(consts));
    }
  }

  std::size_t build() {
    std::vector<std::size_t> atoms(q_.atoms.size());
    std::vector<std::vector<std::size_t>> candidates(q_.atoms.size());
    for (std::size_t ai = 0; ai < q_.atoms.size(); ++ai) {
      atoms[ai] = ai;
      const Atom& atom = q_.atoms[ai];
      for (std::size_t fi = 0; fi < db_.size(); ++fi) {
        const Fact& f = db_.facts()[fi];
        if (f.relation != atom.relation || f.values.size() != atom.terms.size()) continue;
        if (consistent(ai, fi)) candidates[ai].push_back(fi);
      }
    }
    return build(atoms, candidates, std::vector<std::string>{});
  }

 private:
  // Constants match and repeated variables agree.
  bool consistent(std::size_t ai, std::size_t fi) const {
    const Atom& atom = q_.atoms[ai];
    std::map<std::string, int> seen;
    for (std::size_t p = 0; p < atom.terms.size(); ++p) {
      if (!atom.terms[p].is_variable()) {
        if (values_[fi][p] != constants_[ai][p]) return false;
      } else if (auto [it, inserted] = seen.try_emplace(atom.terms[p].text, values_[fi][p]);
                 !inserted && it->second != values_[fi][p]) {
        return false;
      }
    }
    return true;
  }

  std::vector<std::string> free_vars(std::size_t ai, const std::vector<std::string>& bound) const {
    std::vector<std::string> out;
    for (const auto& t : q_.atoms[ai].terms)
      if (t.is_variable() && std::find(bound.begin(), bound.end(), t.text) == bound.end() &&
          std::find(out.begin(), out.end(), t.text) == out.end())
        out.push_back(t.text);
    return out;
  }

  // `atoms` are indices into q_.atoms; candidates is indexed like q_.atoms.
  std::size_t build(const std::vector<std::size_t>& atoms, const std::vector<std::vector<std::size_t>>& candidates,
                    const std::vector<std::string>& bound) {
    for (auto ai : atoms)
      if (candidates[ai].empty()) return out_.constant(false);

    if (atoms.size() == 1) {
      std::vector<std::size_t> kids;
      for (auto fi : candidates[atoms[0]]) {
        if (!db_.facts()[fi].endogenous()) return out_.constant(true);
        kids.push_back(out_.variable(fi));
      }
      return out_.gate(LineageCircuit::Kind::disjunction, std::move(kids));
    }

    // Connected components of the atoms under shared free variables.
    std::vector<std::vector<std::string>> fv;
    for (auto ai : atoms) fv.push_back(free_vars(ai, bound));
    std::vector<std::size_t> comp(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) comp[i] = i;
    std::function<std::size_t(std::size_t)> root = [&](std::size_t i) { return comp[i] == i ? i : comp[i] = root(comp[i]); };
    for (std::size_t i = 0; i < atoms.size(); ++i)
      for (std::size_t j = i + 1; j < atoms.size(); ++j)
        for (const auto& v : fv[i])
          if (std::find(fv[j].begin(), fv[j].end(), v) != fv[j].end()) {
            comp[root(i)] = root(j);
            break;
          }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < atoms.size(); ++i) groups[root(i)].push_back(atoms[i]);
    if (groups.size() > 1) {
      std::vector<std::size_t> kids;
      for (const auto& [r, members] : groups) {
        kids.push_back(build(members, candidates, bound));
        if (out_.node(kids.back()).kind == LineageCircuit::Kind::constant && !out_.node(kids.back()).value)
          return out_.constant(false);
      }
      return out_.gate(LineageCircuit::Kind::conjunction, std::move(kids));
    }

    // Connected: a hierarchical query has a variable shared by all atoms here.
    std::string pivot;
    for (const auto& v : fv[0]) {
      bool everywhere = std::all_of(fv.begin(), fv.end(),
                                    [&](const auto& vars) { return std::find(vars.begin(), vars.end(), v) != vars.end(); });
      if (everywhere && (pivot.empty() || v < pivot)) pivot = v;
    }
    if (pivot.empty()) throw PreconditionError("query is not hierarchical: no variable is shared by all atoms");

    // Split every atom's candidates by the pivot's value.
    std::map<int, std::vector<std::vector<std::size_t>>> branches;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const auto ai = atoms[i];
      std::size_t pos = 0;
      while (q_.atoms[ai].terms[pos].text != pivot || !q_.atoms[ai].terms[pos].is_variable()) ++pos;
      for (auto fi : candidates[ai]) {
        auto& per_atom = branches[values_[fi][pos]];
        if (per_atom.size() < atoms.size()) per_atom.resize(atoms.size());
        per_atom[i].push_back(fi);
      }
    }
    auto next_bound = bound;
    next_bound.push_back(pivot);
    std::vector<std::size_t> kids;
    std::vector<std::vector<std::size_t>> scoped(q_.atoms.size());
    for (auto& [value, per_atom] : branches) {
      per_atom.resize(atoms.size());
      if (std::any_of(per_atom.begin(), per_atom.end(), [](const auto& c) { return c.empty(); })) continue;
      for (std::size_t i = 0; i < atoms.size(); ++i) scoped[atoms[i]] = std::move(per_atom[i]);
      kids.push_back(build(atoms, scoped, next_bound));
      if (out_.node(kids.back()).kind == LineageCircuit::Kind::constant && out_.node(kids.back()).value)
        return out_.constant(true);
    }
    return out_.gate(LineageCircuit::Kind::disjunction, std::move(kids));
  }

  const CQ& q_;
  const Database& db_;
  LineageCircuit& out_;
  std::vector<std::vector<int>> values_;
  std::vector<std::vector<int>> constants_;
};

}  // namespace detail

// Read-once lineage of a UCQ whose disjuncts are hierarchical, self-join-free
// and relation-disjoint. The circuit over endogenous fact indices evaluates
// to q(E ∪ D_x) for every assignment E; exogenous facts fold into constant 1.
inline LineageCircuit factorize_read_once(const UCQ& q, const Database& db) {
  if (!read_once_applicable(q))
    throw PreconditionError("read-once factorization needs hierarchical, self-join-free, relation-disjoint disjuncts");
  LineageCircuit c;
  std::vector<std::size_t> parts;
  for (const auto& d : q.disjuncts) parts.push_back(detail::ReadOnceBuilder(d, db, c).build());
  c.set_root(c.gate(LineageCircuit::Kind::disjunction, std::move(parts)));
  if (!c.verify_read_once()) throw Error("internal error: factorized lineage is not read-once");
  return c;
}

inline LineageCircuit factorize_read_once(const CQ& q, const Database& db) {
  return factorize_read_once(UCQ{{q}}, db);
}

// counts[k] = number of assignments to `scope` with exactly k true variables
// that satisfy the circuit.
struct SizeCountVector {
  std::vector<Integer> counts;

  std::size_t scope_size() const noexcept { return counts.empty() ? 0 : counts.size() - 1; }
};

namespace detail {

inline bool fits_limb(const Integer& z) { return z >= 0 && z <= std::numeric_limits<std::uint64_t>::max(); }

inline std::vector<Integer> convolve(const std::vector<Integer>& a, const std::vector<Integer>& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  std::vector<Integer> out(a.size() + b.size() - 1);
  if (std::all_of(small.begin(), small.end(), fits_limb)) {
    for (std::size_t i = 0; i < small.size(); ++i) {
      const auto s = small[i].convert_to<std::uint64_t>();
      if (s == 0) continue;
      for (std::size_t j = 0; j < large.size(); ++j)
        if (!large[j].is_zero()) out[i + j] += large[j] * s;
    }
  } else {
    for (std::size_t i = 0; i < small.size(); ++i)
      for (std::size_t j = 0; j < large.size(); ++j) out[i + j] += small[i] * large[j];
  }
  return out;
}

// Model counts by size for the node's own variables.
inline std::vector<Integer> model_counts(const LineageCircuit& c, std::size_t i) {
  const auto& n = c.node(i);
  switch (n.kind) {
    case LineageCircuit::Kind::constant:
      return {Integer(n.value ? 1 : 0)};
    case LineageCircuit::Kind::variable:
      return {Integer(0), Integer(1)};
    case LineageCircuit::Kind::conjunction: {
      std::vector<Integer> acc{Integer(1)};
      for (auto ch : n.children) acc = convolve(acc, model_counts(c, ch));
      return acc;
    }
    case LineageCircuit::Kind::disjunction: {
      // An OR fails exactly when all its independent children fail.
      std::vector<Integer> fail{Integer(1)};
      for (auto ch : n.children) {
        auto m = model_counts(c, ch);
        auto binom = binomial_row(m.size() - 1);
        for (std::size_t k = 0; k < m.size(); ++k) m[k] = binom[k] - m[k];
        fail = convolve(fail, m);
      }
      auto binom = binomial_row(fail.size() - 1);
      for (std::size_t k = 0; k < fail.size(); ++k) fail[k] = binom[k] - fail[k];
      return fail;
    }
  }
  return {};
}

}  // namespace detail

inline SizeCountVector size_stratified_counts(const LineageCircuit& c, std::span<const std::size_t> scope) {
  if (!c.read_once()) throw PreconditionError("size-stratified counting requires a verified read-once circuit");
  std::vector<std::size_t> sorted_scope(scope.begin(), scope.end());
  std::sort(sorted_scope.begin(), sorted_scope.end());
  const auto& vars = c.variables();
  if (!std::includes(sorted_scope.begin(), sorted_scope.end(), vars.begin(), vars.end()))
    throw PreconditionError("scope must contain every circuit variable");

  SizeCountVector out{detail::model_counts(c, c.root())};
  // Variables outside the circuit are free: multiply by (1 + x) once per variable.
  const std::size_t free = sorted_scope.size() - vars.size();
  for (std::size_t r = 0; r < free; ++r) {
    out.counts.emplace_back(0);
    for (std::size_t k = out.counts.size() - 1; k > 0; --k) out.counts[k] += out.counts[k - 1];
  }
  return out;
}

}  // namespace shapdb
