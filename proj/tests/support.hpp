#pragma once

// Generators for random instances and brute-force reference implementations.
// The oracles here share no code with the library engines.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "shapdb/shapdb.hpp"

namespace testing_support {

using shapdb::Database;
using shapdb::Integer;
using shapdb::Rational;

// Backtracking homomorphism search over the facts with present[i] != 0.
inline bool naive_match(const shapdb::CQ& q, const Database& db, const std::vector<char>& present, std::size_t atom,
                        std::map<std::string, std::string>& binding) {
  if (atom == q.atoms.size()) return true;
  const auto& a = q.atoms[atom];
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (!present[i]) continue;
    const auto& f = db.facts()[i];
    if (f.relation != a.relation || f.values.size() != a.terms.size()) continue;
    std::vector<std::string> bound_here;
    bool ok = true;
    for (std::size_t k = 0; k < a.terms.size() && ok; ++k) {
      const auto& t = a.terms[k];
      if (!t.is_variable()) {
        ok = t.text == f.values[k];
      } else if (t.text == "_") {
      } else if (auto it = binding.find(t.text); it != binding.end()) {
        ok = it->second == f.values[k];
      } else {
        binding[t.text] = f.values[k];
        bound_here.push_back(t.text);
      }
    }
    if (ok && naive_match(q, db, present, atom + 1, binding)) return true;
    for (const auto& v : bound_here) binding.erase(v);
  }
  return false;
}

inline bool naive_eval(const shapdb::UCQ& q, const Database& db, const std::vector<char>& present) {
  for (const auto& d : q.disjuncts) {
    std::map<std::string, std::string> binding;
    if (naive_match(d, db, present, 0, binding)) return true;
  }
  return false;
}

// Shapley values of players 0..n-1 from a utility over bitmasks, by the
// permutation definition evaluated through prefix sets.
inline std::vector<Rational> naive_shapley(std::size_t n, const std::function<Rational(std::uint32_t)>& v) {
  std::vector<Rational> cache(std::size_t{1} << n);
  for (std::uint32_t m = 0; m < cache.size(); ++m) cache[m] = v(m);
  std::vector<int> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
  std::vector<Rational> phi(n, 0);
  Integer count = 0;
  do {
    std::uint32_t prefix = 0;
    for (int p : perm) {
      phi[p] += cache[prefix | (1u << p)] - cache[prefix];
      prefix |= 1u << p;
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& x : phi) x /= Rational(count);
  return phi;
}

// Same values through the subset formula; usable up to ~16 players.
inline std::vector<Rational> naive_shapley_subsets(std::size_t n, const std::function<Rational(std::uint32_t)>& v) {
  std::vector<Rational> cache(std::size_t{1} << n);
  for (std::uint32_t m = 0; m < cache.size(); ++m) cache[m] = v(m);
  std::vector<Integer> fact(n + 1, 1);
  for (std::size_t i = 1; i <= n; ++i) fact[i] = fact[i - 1] * i;
  std::vector<Rational> phi(n, 0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::uint32_t s = 0; s < cache.size(); ++s) {
      if (s & (1u << a)) continue;
      const auto k = static_cast<std::size_t>(__builtin_popcount(s));
      phi[a] += Rational(fact[k] * fact[n - k - 1], fact[n]) * (cache[s | (1u << a)] - cache[s]);
    }
  return phi;
}

// Endogenous-game utility q(E ∪ D_x) − q(D_x) over a mask of endogenous facts.
inline std::function<Rational(std::uint32_t)> naive_query_utility(const shapdb::UCQ& q, const Database& db) {
  const auto endo = db.endogenous_indices();
  std::vector<char> base(db.size(), 0);
  for (auto i : db.exogenous_indices()) base[i] = 1;
  const int offset = naive_eval(q, db, base) ? 1 : 0;
  return [q, &db, endo, base, offset](std::uint32_t mask) {
    auto present = base;
    for (std::size_t j = 0; j < endo.size(); ++j)
      if (mask & (1u << j)) present[endo[j]] = 1;
    return Rational((naive_eval(q, db, present) ? 1 : 0) - offset);
  };
}

// Minimum vertex cover by exhaustive search over subsets.
inline std::size_t naive_vertex_cover(const shapdb::ConflictGraph& g, std::uint32_t active) {
  std::size_t best = 64;
  const std::size_t n = g.vertex_count();
  for (std::uint32_t c = 0; c < (1u << n); ++c) {
    if ((c & ~active) != 0) continue;
    bool ok = true;
    for (const auto& [u, v] : g.edges())
      if ((active >> u & 1) && (active >> v & 1) && !(c >> u & 1) && !(c >> v & 1)) ok = false;
    if (ok) best = std::min<std::size_t>(best, static_cast<std::size_t>(__builtin_popcount(c)));
  }
  return best;
}

// Number of maximal independent sets of the induced subgraph, exhaustively.
inline std::size_t naive_maximal_independent_sets(const shapdb::ConflictGraph& g, std::uint32_t active) {
  const std::size_t n = g.vertex_count();
  auto independent = [&](std::uint32_t s) {
    for (const auto& [u, v] : g.edges())
      if ((s >> u & 1) && (s >> v & 1)) return false;
    return true;
  };
  std::size_t count = 0;
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    if ((s & ~active) != 0 || !independent(s)) continue;
    bool maximal = true;
    for (std::size_t x = 0; x < n && maximal; ++x)
      if ((active >> x & 1) && !(s >> x & 1) && independent(s | (1u << x))) maximal = false;
    if (maximal) ++count;
  }
  return count;
}

// Measure of the induced subgraph computed from definitions.
inline Rational naive_measure(const shapdb::ConflictGraph& g, std::uint32_t active, shapdb::MeasureKind kind) {
  std::size_t edges = 0;
  std::uint32_t problematic = 0;
  for (const auto& [u, v] : g.edges())
    if ((active >> u & 1) && (active >> v & 1)) {
      ++edges;
      problematic |= (1u << u) | (1u << v);
    }
  switch (kind) {
    case shapdb::MeasureKind::drastic: return edges ? 1 : 0;
    case shapdb::MeasureKind::MI: return edges;
    case shapdb::MeasureKind::P: return __builtin_popcount(problematic);
    case shapdb::MeasureKind::R: return naive_vertex_cover(g, active);
    case shapdb::MeasureKind::MC: return active == 0 ? 0 : naive_maximal_independent_sets(g, active);
  }
  return 0;
}

inline shapdb::ConflictGraph random_graph(std::mt19937_64& rng, std::size_t n, double density) {
  shapdb::ConflictGraph g(n);
  std::bernoulli_distribution edge(density);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (edge(rng)) g.add_edge(u, v);
  return g;
}

inline std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Random database over R(A,B,C) with small domains and a random FD set over it.
struct FdInstance {
  Database db;
  std::vector<shapdb::FD> fds;
};

inline FdInstance random_fd_instance(std::mt19937_64& rng, std::size_t max_facts) {
  FdInstance inst;
  const std::size_t target = uniform(rng, 2, max_facts);
  for (std::size_t tries = 0; inst.db.size() < target && tries < 200; ++tries) {
    std::vector<std::string> v{std::to_string(uniform(rng, 1, 2)), std::string(1, static_cast<char>('a' + uniform(rng, 0, 2))),
                               std::to_string(uniform(rng, 1, 2))};
    if (!inst.db.find("R", v)) inst.db.add("R", v, shapdb::Provenance::endogenous);
  }
  const std::size_t count = uniform(rng, 1, 2);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t l = uniform(rng, 0, 2), r = uniform(rng, 0, 2);
    if (r == l) r = (l + 1) % 3;
    shapdb::FD fd{"R", {l}, {r}};
    if (uniform(rng, 0, 3) == 0) {
      const std::size_t extra = 3 - l - r;
      fd.lhs = {std::min(l, extra), std::max(l, extra)};
    }
    inst.fds.push_back(fd);
  }
  return inst;
}

// Random hierarchical self-join-free CQ. Variables form a forest; every atom
// uses the variables on a root-to-node path, which makes the variable atom
// sets nested or disjoint.
inline shapdb::CQ random_hierarchical_query(std::mt19937_64& rng) {
  const std::size_t vars = uniform(rng, 1, 3);
  std::vector<int> parent(vars, -1);
  for (std::size_t v = 1; v < vars; ++v) parent[v] = uniform(rng, 0, 1) ? static_cast<int>(uniform(rng, 0, v - 1)) : -1;
  const std::size_t atoms = uniform(rng, 1, 4);
  shapdb::CQ q;
  for (std::size_t a = 0; a < atoms; ++a) {
    std::vector<std::string> path;
    for (int v = static_cast<int>(uniform(rng, 0, vars - 1)); v >= 0; v = parent[v])
      path.insert(path.begin(), "x" + std::to_string(v));
    shapdb::Atom atom{"R" + std::to_string(a), {}};
    for (const auto& p : path) atom.terms.push_back(shapdb::Term::variable(p));
    std::shuffle(atom.terms.begin(), atom.terms.end(), rng);
    if (uniform(rng, 0, 4) == 0) atom.terms.push_back(shapdb::Term::constant("a"));
    q.atoms.push_back(std::move(atom));
  }
  return q;
}

// Random facts for the relations of q, values drawn from {a,b,c}.
inline Database random_database_for(std::mt19937_64& rng, const shapdb::CQ& q, std::size_t max_endo,
                                    std::size_t max_exo) {
  Database db;
  const std::size_t endo = uniform(rng, 1, max_endo), exo = uniform(rng, 0, max_exo);
  auto add_random = [&](shapdb::Provenance p) {
    for (int tries = 0; tries < 100; ++tries) {
      const auto& atom = q.atoms[uniform(rng, 0, q.atoms.size() - 1)];
      std::vector<std::string> values;
      for (std::size_t k = 0; k < atom.terms.size(); ++k)
        values.push_back(std::string(1, static_cast<char>('a' + uniform(rng, 0, 2))));
      if (!db.find(atom.relation, values)) {
        db.add(atom.relation, values, p);
        return;
      }
    }
  };
  for (std::size_t i = 0; i < endo; ++i) add_random(shapdb::Provenance::endogenous);
  for (std::size_t i = 0; i < exo; ++i) add_random(shapdb::Provenance::exogenous);
  return db;
}

}  // namespace testing_support
