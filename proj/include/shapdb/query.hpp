#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "shapdb/error.hpp"

namespace shapdb {

struct Term {
  enum class Kind { variable, constant };

  Kind kind = Kind::variable;
  std::string text;

  static Term variable(std::string name) { return {Kind::variable, std::move(name)}; }
  static Term constant(std::string value) { return {Kind::constant, std::move(value)}; }

  bool is_variable() const noexcept { return kind == Kind::variable; }
  bool operator==(const Term&) const = default;
};

struct Atom {
  std::string relation;
  std::vector<Term> terms;
};

// Boolean conjunctive query: an existentially quantified conjunction of atoms.
struct CQ {
  std::vector<Atom> atoms;

  // Distinct variable names in sorted order.
  std::vector<std::string> variables() const {
    std::set<std::string> vars;
    for (const auto& a : atoms)
      for (const auto& t : a.terms)
        if (t.is_variable()) vars.insert(t.text);
    return {vars.begin(), vars.end()};
  }

  std::set<std::string> relations() const {
    std::set<std::string> rels;
    for (const auto& a : atoms) rels.insert(a.relation);
    return rels;
  }
};

// Boolean union of conjunctive queries.
struct UCQ {
  std::vector<CQ> disjuncts;
};

inline std::string to_string(const Atom& a) {
  std::string s = a.relation + "(";
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    if (i) s += ",";
    s += a.terms[i].is_variable() ? a.terms[i].text : "'" + a.terms[i].text + "'";
  }
  return s + ")";
}

inline std::string to_string(const CQ& q) {
  std::string s = "q() :- ";
  for (std::size_t i = 0; i < q.atoms.size(); ++i) {
    if (i) s += ", ";
    s += to_string(q.atoms[i]);
  }
  return s;
}

struct QueryClass {
  bool self_join_free = true;
  bool hierarchical = true;
};

// A_y for every variable y: the indices of the atoms that use y.
inline std::map<std::string, std::set<std::size_t>> atoms_by_variable(const CQ& q) {
  std::map<std::string, std::set<std::size_t>> occ;
  for (std::size_t i = 0; i < q.atoms.size(); ++i)
    for (const auto& t : q.atoms[i].terms)
      if (t.is_variable()) occ[t.text].insert(i);
  return occ;
}

inline QueryClass classify_query(const CQ& q) {
  QueryClass c;
  std::set<std::string> seen;
  for (const auto& a : q.atoms)
    if (!seen.insert(a.relation).second) c.self_join_free = false;

  const auto occ = atoms_by_variable(q);
  for (auto i = occ.begin(); i != occ.end() && c.hierarchical; ++i) {
    for (auto j = std::next(i); j != occ.end(); ++j) {
      const auto& a = i->second;
      const auto& b = j->second;
      bool a_in_b = std::includes(b.begin(), b.end(), a.begin(), a.end());
      bool b_in_a = std::includes(a.begin(), a.end(), b.begin(), b.end());
      bool disjoint = std::none_of(a.begin(), a.end(), [&](std::size_t x) { return b.count(x) > 0; });
      if (!a_in_b && !b_in_a && !disjoint) {
        c.hierarchical = false;
        break;
      }
    }
  }
  return c;
}

// True when no relation symbol is shared between two different disjuncts.
inline bool relation_disjoint(const UCQ& q) {
  std::set<std::string> used;
  for (const auto& d : q.disjuncts) {
    for (const auto& r : d.relations())
      if (used.count(r)) return false;
    for (const auto& r : d.relations()) used.insert(r);
  }
  return true;
}

// The polynomial lineage path applies when every disjunct is hierarchical and
// self-join-free and the disjuncts use pairwise disjoint relations.
inline bool read_once_applicable(const UCQ& q) {
  if (q.disjuncts.empty() || !relation_disjoint(q)) return false;
  return std::all_of(q.disjuncts.begin(), q.disjuncts.end(), [](const CQ& d) {
    auto c = classify_query(d);
    return c.self_join_free && c.hierarchical;
  });
}

}  // namespace shapdb
