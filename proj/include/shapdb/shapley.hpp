#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapdb/error.hpp"
#include "shapdb/numeric.hpp"

namespace shapdb {

using PlayerId = std::int64_t;

// Membership vector over a game's player list: coalition[i] != 0 iff players[i] is in.
using Coalition = std::vector<char>;

// A cooperative game over an ordered list of players. The utility must be
// pure, safe to call concurrently, and zero on the empty coalition.
struct CoalitionGame {
  std::vector<PlayerId> players;
  std::function<Rational(std::span<const char>)> utility;

  std::size_t size() const noexcept { return players.size(); }

  std::size_t index_of(PlayerId p) const {
    auto it = std::find(players.begin(), players.end(), p);
    if (it == players.end()) throw PreconditionError("unknown player " + std::to_string(p));
    return static_cast<std::size_t>(it - players.begin());
  }
};

struct ShapleyVector {
  std::string engine;
  std::vector<PlayerId> players;
  std::vector<Rational> values;

  const Rational& value_of(PlayerId p) const {
    auto it = std::find(players.begin(), players.end(), p);
    if (it == players.end()) throw PreconditionError("unknown player " + std::to_string(p));
    return values[static_cast<std::size_t>(it - players.begin())];
  }

  Rational total() const {
    Rational s = 0;
    for (const auto& v : values) s += v;
    return s;
  }
};

namespace detail {

// Sum of rationals that stays in int64 while the terms are small integers.
class Accumulator {
 public:
  void add(const Rational& v) {
    if (denominator(v) == 1 && numerator(v) >= kMin && numerator(v) <= kMax) {
      add(numerator(v).convert_to<std::int64_t>());
    } else {
      big_ += v;
    }
  }
  void add(std::int64_t v) {
    if (__builtin_add_overflow(small_, v, &small_)) big_ += Rational(v);
  }
  void sub(const Rational& v) { add(Rational(-v)); }

  Rational value() const { return big_ + Rational(small_); }

 private:
  static inline const Integer kMin = std::numeric_limits<std::int64_t>::min() / 2;
  static inline const Integer kMax = std::numeric_limits<std::int64_t>::max() / 2;
  std::int64_t small_ = 0;
  Rational big_ = 0;
};

inline Coalition coalition_from_mask(std::uint64_t mask, std::size_t n) {
  Coalition c(n, 0);
  for (std::size_t i = 0; i < n; ++i) c[i] = static_cast<char>((mask >> i) & 1u);
  return c;
}

inline void check_empty_utility(const CoalitionGame& g) {
  Coalition none(g.size(), 0);
  if (g.utility(none) != 0) throw PreconditionError("game utility must be zero on the empty coalition");
}

}  // namespace detail

namespace detail {

// First position changed by the next lexicographic permutation of `a`, or
// a.size() when `a` is the last one.
inline std::size_t permutation_pivot(const std::vector<std::size_t>& a) {
  const std::size_t n = a.size();
  std::size_t i = n < 2 ? 0 : n - 1;
  while (i > 0 && a[i - 1] >= a[i]) --i;
  return i == 0 ? n : i - 1;
}

// Advances `a` to its next permutation given the pivot k < a.size().
inline void advance_permutation(std::vector<std::size_t>& a, std::size_t k) {
  std::size_t j = a.size() - 1;
  while (a[j] <= a[k]) --j;
  std::swap(a[k], a[j]);
  std::reverse(a.begin() + static_cast<std::ptrdiff_t>(k + 1), a.end());
}

inline Integer to_integer(__int128 v) {
  const bool negative = v < 0;
  unsigned __int128 u = negative ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  Integer z = static_cast<std::uint64_t>(u >> 64);
  z <<= 64;
  z += static_cast<std::uint64_t>(u);
  return negative ? Integer(-z) : z;
}

}  // namespace detail

// (1/|L|!) Σ_π [G(π_a ∪ {a}) − G(π_a)], enumerating every permutation.
// Utilities are scaled to a common denominator so each step is an integer
// addition; a position keeps its marginal until the permutation suffix
// containing it changes.
inline ShapleyVector shapley_exact_permutations(const CoalitionGame& g, std::size_t max_players = 9) {
  const std::size_t n = g.size();
  if (n > max_players || n > 20)
    throw PreconditionError("permutation engine limited to " + std::to_string(std::min<std::size_t>(max_players, 20)) +
                            " players, game has " + std::to_string(n));
  detail::check_empty_utility(g);

  const std::size_t masks = std::size_t{1} << n;
  std::vector<Rational> table(masks);
  Integer lcm = 1;
  for (std::size_t m = 0; m < masks; ++m) {
    table[m] = g.utility(detail::coalition_from_mask(m, n));
    lcm = boost::multiprecision::lcm(lcm, denominator(table[m]));
  }
  const Integer limit = Integer(1) << 62;
  std::vector<std::int64_t> scaled(masks);
  bool fits = true;
  for (std::size_t m = 0; m < masks && fits; ++m) {
    const Integer v = numerator(table[m]) * (lcm / denominator(table[m]));
    fits = v < limit && v > -limit;
    if (fits) scaled[m] = v.convert_to<std::int64_t>();
  }

  ShapleyVector out{"brute-perm", g.players, {}};
  const Integer n_fact = factorial(n);
  if (n == 0) return out;

  if (!fits) {
    std::vector<Rational> acc(n, 0);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    do {
      std::size_t mask = 0;
      for (std::size_t a : order) {
        acc[a] += table[mask | (std::size_t{1} << a)] - table[mask];
        mask |= std::size_t{1} << a;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    for (auto& a : acc) out.values.push_back(a / Rational(n_fact));
    return out;
  }

  // marginal[p] is the contribution of the player at position p, credited
  // once per permutation from `since[p]` until position p next changes.
  std::vector<__int128> acc(n, 0);
  std::vector<std::size_t> order(n), prefix(n + 1, 0);
  std::vector<std::int64_t> marginal(n);
  std::vector<std::uint64_t> since(n, 0);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto refresh = [&](std::size_t from, std::uint64_t count) {
    for (std::size_t p = from; p < n; ++p) {
      prefix[p + 1] = prefix[p] | (std::size_t{1} << order[p]);
      marginal[p] = scaled[prefix[p + 1]] - scaled[prefix[p]];
      since[p] = count;
    }
  };
  auto credit = [&](std::size_t from, std::uint64_t count) {
    for (std::size_t p = from; p < n; ++p)
      acc[order[p]] += static_cast<__int128>(marginal[p]) * static_cast<__int128>(count - since[p]);
  };
  refresh(0, 0);
  std::uint64_t count = 1;
  for (;;) {
    const std::size_t k = detail::permutation_pivot(order);
    if (k == n) break;
    credit(k, count);  // the suffix from k is about to change
    detail::advance_permutation(order, k);
    refresh(k, count);
    ++count;
  }
  credit(0, count);

  for (std::size_t a = 0; a < n; ++a) out.values.push_back(Rational(detail::to_integer(acc[a]), n_fact * lcm));
  return out;
}

// Same value via the subset form: Σ_{S ⊆ L∖{a}} |S|!(|L|−|S|−1)!/|L|! ·
// [G(S ∪ {a}) − G(S)]. Coalitions are evaluated once each, by increasing
// size and then lexicographic player order.
inline ShapleyVector shapley_exact_subsets(const CoalitionGame& g, std::size_t max_players = 20) {
  const std::size_t n = g.size();
  if (n > max_players || n > 62)
    throw PreconditionError("subset engine limited to " + std::to_string(std::min<std::size_t>(max_players, 62)) +
                            " players, game has " + std::to_string(n));
  detail::check_empty_utility(g);

  // with_player[a][s] = Σ G(S) over |S| = s, a ∈ S; by_size[s] = Σ G(S) over |S| = s.
  std::vector<std::vector<detail::Accumulator>> with_player(n, std::vector<detail::Accumulator>(n + 1));
  std::vector<detail::Accumulator> by_size(n + 1);

  Coalition members(n, 0);
  std::vector<std::size_t> combo;
  for (std::size_t k = 1; k <= n; ++k) {
    combo.resize(k);
    for (std::size_t i = 0; i < k; ++i) combo[i] = i;
    while (true) {
      std::fill(members.begin(), members.end(), 0);
      for (auto i : combo) members[i] = 1;
      const Rational value = g.utility(members);
      if (value != 0) {
        by_size[k].add(value);
        for (auto i : combo) with_player[i][k].add(value);
      }
      // next k-combination of {0..n-1} in lexicographic order
      std::size_t i = k;
      while (i > 0 && combo[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++combo[i - 1];
      for (std::size_t j = i; j < k; ++j) combo[j] = combo[j - 1] + 1;
    }
  }

  ShapleyVector out{"brute-subset", g.players, {}};
  if (n == 0) return out;
  std::vector<Integer> fact(n + 1);
  fact[0] = 1;
  for (std::size_t i = 1; i <= n; ++i) fact[i] = fact[i - 1] * i;
  std::vector<Rational> totals(n + 1);
  for (std::size_t s = 0; s <= n; ++s) totals[s] = by_size[s].value();

  for (std::size_t a = 0; a < n; ++a) {
    Rational sum = 0;
    for (std::size_t s = 1; s <= n; ++s) {
      const Rational with = with_player[a][s].value();
      sum += Rational(fact[s - 1] * fact[n - s]) * with;
      if (s < n) sum -= Rational(fact[s] * fact[n - s - 1]) * (totals[s] - with);
    }
    out.values.push_back(sum / Rational(fact[n]));
  }
  return out;
}

}  // namespace shapdb
