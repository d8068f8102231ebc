#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "shapdb/error.hpp"
#include "shapdb/shapley.hpp"

namespace shapdb {

// Hoeffding sample count for an additive (ε, δ) estimate of a mean whose
// samples lie in an interval of width `range`: ⌈(range²/(2ε²))·ln(2/δ)⌉.
inline std::uint64_t sample_size(double epsilon, double delta, double range) {
  if (!(epsilon > 0) || !(delta > 0 && delta < 1) || !(range > 0))
    throw PreconditionError("sample_size requires epsilon > 0, 0 < delta < 1, range > 0");
  const double m = std::ceil(range * range / (2.0 * epsilon * epsilon) * std::log(2.0 / delta));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(m));
}

struct Estimate {
  double value = 0;
  double epsilon = 0;
  double delta = 0;
  double range = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

struct MultiplicativeEstimate : Estimate {
  double gap = 0;
  double additive_epsilon = 0;
  double raw = 0;           // the underlying additive estimate
  bool thresholded = false;  // raw fell below gap/2 and was reported as 0
};

// Random stream for one (seed, player) pair. Streams for different players
// are independent, so per-player estimates do not depend on scheduling.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, PlayerId player) {
    const auto p = static_cast<std::uint64_t>(player);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32), 0x5eedu};
    engine_.seed(seq);
  }

  // Uniform integer in [0, bound) by rejection, identical on every platform.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
};

// Mean of m sampled marginal contributions G(π_a ∪ {a}) − G(π_a), with π
// drawn uniformly by Fisher–Yates and m = sample_size(ε, δ, range).
inline Estimate estimate_additive(const CoalitionGame& g, PlayerId player, double epsilon, double delta,
                                  std::uint64_t seed, double range = 1.0) {
  const std::size_t a = g.index_of(player);
  const std::size_t n = g.size();
  const std::uint64_t m = sample_size(epsilon, delta, range);

  SampleStream stream(seed, player);
  std::vector<std::size_t> perm(n);
  Coalition members(n, 0);
  double sum = 0;
  for (std::uint64_t s = 0; s < m; ++s) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[stream.below(i)]);
    std::fill(members.begin(), members.end(), 0);
    for (std::size_t i = 0; i < n && perm[i] != a; ++i) members[perm[i]] = 1;
    const Rational without = g.utility(members);
    members[a] = 1;
    const Rational with = g.utility(members);
    sum += to_double(with - without);
  }
  return Estimate{sum / static_cast<double>(m), epsilon, delta, range, m, seed};
}

// Multiplicative estimate for a player whose marginals are nonnegative and
// whose value is either 0 or at least `gap`. Runs the additive estimator with
// ε_add = min(gap·ε/(1+ε), gap/2) and reports 0 below gap/2.
inline MultiplicativeEstimate estimate_multiplicative(const CoalitionGame& g, PlayerId player, double epsilon,
                                                      double delta, double gap, std::uint64_t seed,
                                                      double range = 1.0) {
  if (!(gap > 0)) throw PreconditionError("multiplicative estimation requires a positive gap");
  const double eps_add = std::min(gap * epsilon / (1.0 + epsilon), gap / 2.0);
  const Estimate raw = estimate_additive(g, player, eps_add, delta, seed, range);

  MultiplicativeEstimate out;
  static_cast<Estimate&>(out) = raw;
  out.epsilon = epsilon;
  out.gap = gap;
  out.additive_epsilon = eps_add;
  out.raw = raw.value;
  out.thresholded = raw.value < gap / 2.0;
  out.value = out.thresholded ? 0.0 : raw.value;
  return out;
}

// Runs `task(i)` for i in [0, count) on up to `workers` threads. Results must
// be written to per-index slots so the outcome is independent of scheduling.
template <class Task>
void parallel_for(std::size_t count, std::size_t workers, Task&& task) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) task(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace shapdb
