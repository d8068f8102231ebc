#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "shapdb/database.hpp"

namespace shapdb {

// R: X -> Y with attributes stored as 0-based column positions (sorted, unique).
struct FD {
  std::string relation;
  std::vector<std::size_t> lhs;
  std::vector<std::size_t> rhs;

  bool operator==(const FD&) const = default;
};

inline std::string to_string(const FD& fd) {
  std::string s = fd.relation + ":";
  for (auto a : fd.lhs) s += " " + default_attribute_name(a);
  s += " ->";
  for (auto a : fd.rhs) s += " " + default_attribute_name(a);
  return s;
}

// f and g jointly violate fd: both are fd.relation facts agreeing on lhs and
// differing on some rhs attribute.
inline bool violates(const Fact& f, const Fact& g, const FD& fd) {
  if (f.relation != fd.relation || g.relation != fd.relation) return false;
  for (auto a : fd.lhs)
    if (f.values[a] != g.values[a]) return false;
  for (auto a : fd.rhs)
    if (f.values[a] != g.values[a]) return true;
  return false;
}

inline bool violates(const Fact& f, const Fact& g, const std::vector<FD>& fds) {
  return std::any_of(fds.begin(), fds.end(), [&](const FD& fd) { return violates(f, g, fd); });
}

// Pairwise FD-violation structure over the facts of a database. Vertices are
// fact indices of the database the graph was built from.
class ConflictGraph {
 public:
  ConflictGraph() = default;
  explicit ConflictGraph(std::size_t vertices) : adjacency_(vertices) {}

  void add_edge(std::size_t u, std::size_t v) {
    if (u == v) return;
    auto e = std::minmax(u, v);
    if (!edge_set_.insert(e).second) return;
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }

  std::size_t vertex_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_set_.size(); }
  bool has_edge(std::size_t u, std::size_t v) const { return edge_set_.count(std::minmax(u, v)) > 0; }
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return adjacency_[v]; }
  std::size_t degree(std::size_t v) const { return adjacency_[v].size(); }
  const std::set<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edge_set_; }

 private:
  std::vector<std::vector<std::size_t>> adjacency_;
  std::set<std::pair<std::size_t, std::size_t>> edge_set_;
};

inline ConflictGraph conflict_graph(const Database& db, const std::vector<FD>& fds) {
  ConflictGraph g(db.size());
  const auto& facts = db.facts();
  for (const auto& fd : fds) {
    if (const auto* rel = db.schema().find(fd.relation)) {
      for (auto a : fd.lhs)
        if (a >= rel->arity) throw PreconditionError("FD attribute out of range: " + to_string(fd));
      for (auto a : fd.rhs)
        if (a >= rel->arity) throw PreconditionError("FD attribute out of range: " + to_string(fd));
    }
    // lhs projection -> rhs projection -> facts
    std::map<std::vector<Value>, std::map<std::vector<Value>, std::vector<std::size_t>>> groups;
    for (std::size_t i = 0; i < facts.size(); ++i) {
      const Fact& f = facts[i];
      if (f.relation != fd.relation) continue;
      std::vector<Value> key, val;
      for (auto a : fd.lhs) key.push_back(f.values[a]);
      for (auto a : fd.rhs) val.push_back(f.values[a]);
      groups[key][val].push_back(i);
    }
    for (const auto& [key, by_rhs] : groups)
      for (auto a = by_rhs.begin(); a != by_rhs.end(); ++a)
        for (auto b = std::next(a); b != by_rhs.end(); ++b)
          for (auto u : a->second)
            for (auto v : b->second) g.add_edge(u, v);
  }
  return g;
}

}  // namespace shapdb
