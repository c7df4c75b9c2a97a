#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rlin/parallel.hpp"
#include "rlin/rng.hpp"

namespace rlin {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/// Pr[Y_t = q + offset] for the lazy walk Y_1 = q, Y_i = Y_{i-1} + B_i:
/// binom(t-1, offset) / 2^(t-1). Zero outside 0..t-1.
inline BigRational walk_pmf(std::uint64_t t, std::int64_t offset) {
  if (t < 1) throw std::invalid_argument("walk step index starts at 1");
  if (offset < 0 || static_cast<std::uint64_t>(offset) > t - 1) return BigRational(0);
  BigInt c = 1;
  auto n = t - 1;
  auto k = static_cast<std::uint64_t>(offset);
  if (k > n - k) k = n - k;
  for (std::uint64_t i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return BigRational(c, BigInt(1) << static_cast<unsigned>(n));
}

/// All numerators binom(t-1, p), p = 0..t-1 (denominator 2^(t-1)).
inline std::vector<BigInt> walk_pmf_row(std::uint64_t t) {
  if (t < 1) throw std::invalid_argument("walk step index starts at 1");
  std::vector<BigInt> row{1};
  for (std::uint64_t n = 1; n <= t - 1; ++n) {
    std::vector<BigInt> next(n + 1);
    next[0] = next[n] = 1;
    for (std::uint64_t p = 1; p < n; ++p) next[p] = row[p - 1] + row[p];
    row = std::move(next);
  }
  return row;
}

struct WalkBoundReport {
  bool holds = true;
  std::uint64_t first_failure = 0;  // t of the first violation
};

/// Checks Pr[Y_t = p] <= c1 / sqrt(t) with c1 = 1 for all t <= t_max and all
/// offsets. binom(t-1, p) <= binom(t-1, floor((t-1)/2)) is checked through the
/// ratio (t-1-p)/(p+1) of neighbouring coefficients; the central value
/// through binom^2 * t <= 4^(t-1) in exact integers.
inline WalkBoundReport check_walk_bound(std::uint64_t t_max) {
  WalkBoundReport rep;
  BigInt central = 1;  // binom(n, floor(n/2)) for n = t-1
  for (std::uint64_t t = 1; t <= t_max; ++t) {
    std::uint64_t n = t - 1;
    if (n > 0) {
      std::uint64_t m = n - 1;  // update from binom(m, floor(m/2))
      if (m % 2 == 0)
        central = central * (m + 1) / (m / 2 + 1);
      else
        central = central * 2;
    }
    // Coefficients rise strictly while p + 1 <= n - p and fall afterwards, so
    // the maximum over p is at floor(n/2).
    for (std::uint64_t p = 0; p + 1 <= n; ++p) {
      bool rising = (n - p) >= (p + 1);
      bool expected = p < (n + 1) / 2;
      if (rising != expected) {
        rep.holds = false;
        rep.first_failure = t;
        return rep;
      }
    }
    if (central * central * t > (BigInt(1) << static_cast<unsigned>(2 * n))) {
      rep.holds = false;
      rep.first_failure = t;
      return rep;
    }
  }
  return rep;
}

/// Constraint set for the walk: forbidden (index, value) points and points
/// the walk must visit. Indices are 1-based steps, values absolute.
struct WalkConditions {
  std::set<std::pair<std::uint64_t, std::int64_t>> forbidden;
  std::set<std::pair<std::uint64_t, std::int64_t>> visit;

  bool allows(std::uint64_t i, std::int64_t y) const {
    if (forbidden.count({i, y})) return false;
    auto it = visit.lower_bound({i, INT64_MIN});
    if (it != visit.end() && it->first == i && it->second != y) return false;
    return true;
  }
};

/// Exact Pr[Y_k = target | conditions] by dynamic programming over positions,
/// or nullopt when the conditioning event has probability zero.
inline std::optional<double> conditioned_walk_exact(std::uint64_t k, std::int64_t start, const WalkConditions& c, std::int64_t target) {
  std::vector<double> dp(k, 0.0);  // dp[o]: offset o above start
  if (!c.allows(1, start)) return std::nullopt;
  dp[0] = 1.0;
  for (std::uint64_t i = 2; i <= k; ++i) {
    std::vector<double> nx(k, 0.0);
    for (std::uint64_t o = 0; o + 1 < i; ++o) {
      if (dp[o] == 0) continue;
      for (int step = 0; step < 2; ++step) {
        std::uint64_t no = o + static_cast<std::uint64_t>(step);
        if (c.allows(i, start + static_cast<std::int64_t>(no))) nx[no] += dp[o] * 0.5;
      }
    }
    dp = std::move(nx);
  }
  double total = 0;
  for (double x : dp) total += x;
  if (total == 0) return std::nullopt;
  std::int64_t o = target - start;
  if (o < 0 || o >= static_cast<std::int64_t>(k)) return 0.0;
  return dp[static_cast<std::size_t>(o)] / total;
}

struct ConditionedEstimate {
  bool estimable = false;
  std::uint64_t accepted = 0;
  std::uint64_t hits = 0;
  double estimate = 0;
  double stderr_ = 0;
};

/// Rejection sampling of Pr[Y_k = target | conditions]; sample i uses
/// seed ^ i. Zero acceptances leave the estimate unestimable.
inline ConditionedEstimate conditioned_walk_estimate(std::uint64_t k, std::int64_t start, const WalkConditions& c, std::int64_t target,
                                                     std::uint64_t samples, std::uint64_t seed, unsigned jobs = 1) {
  auto r = run_indexed<std::uint8_t>(samples, jobs, [&](std::size_t i) -> std::uint8_t {
    Rng rng(trial_seed(seed, i));
    std::int64_t y = start;
    if (!c.allows(1, y)) return 0;
    for (std::uint64_t s = 2; s <= k; ++s) {
      y += rng.bit() ? 1 : 0;
      if (!c.allows(s, y)) return 0;
    }
    return y == target ? 2 : 1;
  });
  ConditionedEstimate e;
  for (auto x : r) {
    if (x >= 1) ++e.accepted;
    if (x == 2) ++e.hits;
  }
  if (e.accepted == 0) return e;
  e.estimable = true;
  e.estimate = static_cast<double>(e.hits) / static_cast<double>(e.accepted);
  e.stderr_ = std::sqrt(e.estimate * (1 - e.estimate) / static_cast<double>(e.accepted));
  return e;
}

/// c = 4 c1^2 c2^2, the interval length factor for the forbidden-set lemma.
inline double forbidden_gap_constant(double c1, double c2) { return 4 * c1 * c1 * c2 * c2; }

struct GapStructured {
  WalkConditions conditions;
  std::uint64_t left = 0, right = 0;  // the free interval
};

/// Forbidden set with |S| = t split evenly before and after a free interval
/// of length c t^2 centered in [1, k]; points sit near the walk's mean.
inline GapStructured gap_structured(std::uint64_t k, std::size_t t, double c2) {
  auto gap = static_cast<std::uint64_t>(std::ceil(forbidden_gap_constant(1.0, c2) * static_cast<double>(t * t)));
  if (gap + 2 > k) throw std::invalid_argument("k too small for the gap c*t^2");
  GapStructured r;
  r.left = (k - gap) / 2 + 1;
  r.right = r.left + gap - 1;
  for (std::size_t s = 0; s < t; ++s) {
    std::uint64_t i = s % 2 == 0 ? 2 + s / 2 : r.right + 1 + s / 2;
    if (i > k) i = k;
    r.conditions.forbidden.insert({i, static_cast<std::int64_t>((i - 1) / 2)});
  }
  return r;
}

}  // namespace rlin
