#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shapdb/error.hpp"
#include "shapdb/fd.hpp"
#include "shapdb/numeric.hpp"

namespace shapdb {

namespace detail {

class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t n) : words_((n + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool none() const {
    return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
  }
  std::size_t count_and(const Bitset& o) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) c += static_cast<std::size_t>(std::popcount(words_[i] & o.words_[i]));
    return c;
  }
  Bitset operator&(const Bitset& o) const {
    Bitset r = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] &= o.words_[i];
    return r;
  }
  Bitset operator|(const Bitset& o) const {
    Bitset r = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] |= o.words_[i];
    return r;
  }
  Bitset minus(const Bitset& o) const {
    Bitset r = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] &= ~o.words_[i];
    return r;
  }
  bool subset_of(const Bitset& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      for (auto w = words_[i]; w; w &= w - 1) f(i * 64 + static_cast<std::size_t>(std::countr_zero(w)));
  }

 private:
  std::vector<std::uint64_t> words_;
};

// Dense induced subgraph on vertices 0..k-1.
struct DenseGraph {
  std::size_t size = 0;
  std::vector<Bitset> adj;
};

// Connected components of the conflict graph induced by `active`, with at
// least one edge each, relabelled densely. Isolated vertices are dropped.
inline std::vector<DenseGraph> conflict_components(const ConflictGraph& g, std::span<const char> active) {
  const std::size_t n = g.vertex_count();
  std::vector<int> comp(n, -1);
  std::vector<DenseGraph> out;
  std::vector<std::size_t> stack, members;
  std::vector<std::size_t> local(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (!active[s] || comp[s] >= 0) continue;
    bool has_edge = false;
    for (auto v : g.neighbors(s))
      if (active[v]) has_edge = true;
    if (!has_edge) continue;
    members.clear();
    stack.assign(1, s);
    comp[s] = static_cast<int>(out.size());
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      local[u] = members.size();
      members.push_back(u);
      for (auto v : g.neighbors(u))
        if (active[v] && comp[v] < 0) {
          comp[v] = comp[s];
          stack.push_back(v);
        }
    }
    DenseGraph d{members.size(), std::vector<Bitset>(members.size(), Bitset(members.size()))};
    for (auto u : members)
      for (auto v : g.neighbors(u))
        if (active[v]) d.adj[local[u]].set(local[v]);
    out.push_back(std::move(d));
  }
  return out;
}

class WorkBudget {
 public:
  explicit WorkBudget(std::uint64_t limit) : limit_(limit) {}
  void spend(const char* what) {
    if (++used_ > limit_)
      throw BudgetExceeded(std::string(what) + " exceeded the work budget of " + std::to_string(limit_));
  }

 private:
  std::uint64_t limit_;
  std::uint64_t used_ = 0;
};

class VertexCoverSolver {
 public:
  VertexCoverSolver(const DenseGraph& g, WorkBudget& budget) : g_(g), budget_(budget) {}

  std::size_t solve() {
    Bitset alive(g_.size);
    for (std::size_t i = 0; i < g_.size; ++i) alive.set(i);
    best_ = g_.size;  // every vertex is a cover
    search(alive, 0);
    return best_;
  }

 private:
  void search(Bitset alive, std::size_t taken) {
    budget_.spend("minimum vertex cover");
    // degree-0, degree-1 and dominance reductions until fixpoint
    bool changed = true;
    while (changed) {
      changed = false;
      alive.for_each([&](std::size_t v) {
        if (!alive.test(v)) return;
        const Bitset nv = g_.adj[v] & alive;
        const std::size_t deg = nv.count();
        if (deg == 0) {
          alive.reset(v);
          changed = true;
        } else if (deg == 1) {
          nv.for_each([&](std::size_t u) { alive.reset(u); });
          alive.reset(v);
          ++taken;
          changed = true;
        } else {
          // N[v] ⊆ N[u] for a neighbour u: some minimum cover contains u.
          Bitset closed_v = nv;
          closed_v.set(v);
          std::size_t dominator = g_.size;
          nv.for_each([&](std::size_t u) {
            if (dominator != g_.size) return;
            Bitset closed_u = g_.adj[u] & alive;
            closed_u.set(u);
            if (closed_v.subset_of(closed_u)) dominator = u;
          });
          if (dominator != g_.size) {
            alive.reset(dominator);
            ++taken;
            changed = true;
          }
        }
      });
    }
    if (taken >= best_) return;

    // Lower bound from a greedy maximal matching.
    std::size_t matching = 0, branch = g_.size, branch_deg = 0;
    Bitset free = alive;
    alive.for_each([&](std::size_t v) {
      const std::size_t deg = g_.adj[v].count_and(alive);
      if (deg > branch_deg) branch = v, branch_deg = deg;
      if (!free.test(v)) return;
      const Bitset nv = g_.adj[v] & free;
      std::size_t mate = g_.size;
      nv.for_each([&](std::size_t u) {
        if (mate == g_.size) mate = u;
      });
      if (mate != g_.size) {
        free.reset(v);
        free.reset(mate);
        ++matching;
      }
    });
    if (branch_deg == 0) {
      best_ = std::min(best_, taken);
      return;
    }
    if (taken + matching >= best_) return;

    // Either the branching vertex is in the cover, or all its neighbours are.
    Bitset without_v = alive;
    without_v.reset(branch);
    search(without_v, taken + 1);
    const Bitset nv = g_.adj[branch] & alive;
    search(alive.minus(nv).minus([&] {
      Bitset b(g_.size);
      b.set(branch);
      return b;
    }()),
           taken + nv.count());
  }

  const DenseGraph& g_;
  WorkBudget& budget_;
  std::size_t best_ = 0;
};

// Counts maximal independent sets via Bron–Kerbosch on the complement graph
// with Tomita-style pivoting.
class MaximalIndependentSetCounter {
 public:
  MaximalIndependentSetCounter(const DenseGraph& g, WorkBudget& budget) : g_(g), budget_(budget) {}

  Integer count() {
    Bitset p(g_.size), x(g_.size);
    for (std::size_t i = 0; i < g_.size; ++i) p.set(i);
    return expand(p, x);
  }

 private:
  Integer expand(Bitset p, Bitset x) {
    budget_.spend("maximal consistent subset enumeration");
    if (p.none() && x.none()) return 1;
    if (p.none()) return 0;

    // Pivot u minimises |P ∩ N[u]|, the number of branches.
    std::size_t pivot = g_.size, fewest = g_.size + 1;
    auto consider = [&](std::size_t u) {
      std::size_t c = g_.adj[u].count_and(p) + (p.test(u) ? 1 : 0);
      if (c < fewest) fewest = c, pivot = u;
    };
    p.for_each(consider);
    x.for_each(consider);

    Bitset candidates = g_.adj[pivot] & p;
    if (p.test(pivot)) candidates.set(pivot);

    Integer total = 0;
    candidates.for_each([&](std::size_t v) {
      Bitset closed = g_.adj[v];
      closed.set(v);
      total += expand(p.minus(closed), x.minus(closed));
      p.reset(v);
      x.set(v);
    });
    return total;
  }

  const DenseGraph& g_;
  WorkBudget& budget_;
};

}  // namespace detail

inline constexpr std::uint64_t kDefaultBudget = 50'000'000;

// Minimum number of active vertices whose removal leaves no conflict.
inline std::size_t min_vertex_cover(const ConflictGraph& g, std::span<const char> active,
                                    std::uint64_t budget = kDefaultBudget) {
  detail::WorkBudget work(budget);
  std::size_t total = 0;
  for (const auto& comp : detail::conflict_components(g, active))
    total += detail::VertexCoverSolver(comp, work).solve();
  return total;
}

// Number of maximal independent sets of the subgraph induced by `active`
// (isolated vertices belong to all of them). The empty graph counts 1.
inline Integer count_maximal_independent_sets(const ConflictGraph& g, std::span<const char> active,
                                              std::uint64_t budget = kDefaultBudget) {
  detail::WorkBudget work(budget);
  Integer total = 1;
  for (const auto& comp : detail::conflict_components(g, active))
    total *= detail::MaximalIndependentSetCounter(comp, work).count();
  return total;
}

}  // namespace shapdb
