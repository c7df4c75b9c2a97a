#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rlin/bits.hpp"
#include "rlin/gadgets.hpp"
#include "rlin/parallel.hpp"
#include "rlin/rng.hpp"

namespace rlin {

struct RankFoolingResult {
  double estimate = 0;
  double stderr_ = 0;
  double bound = 0;  // (1 - eps/2)^floor(r/b)
  Ratio epsilon;
  std::size_t rank = 0;
};

inline void check_rank_inputs(const std::vector<BitVec>& M, const std::vector<bool>& gamma, const std::vector<bool>& z, const Gadget& g) {
  std::size_t n = z.size() * static_cast<std::size_t>(g.arity());
  if (M.size() != gamma.size()) throw std::invalid_argument("matrix and right-hand side differ in length");
  for (const auto& row : M)
    if (row.size() != n) throw std::invalid_argument("matrix row length differs from m*b");
  if (rank(M) != M.size()) throw std::invalid_argument("matrix does not have full row rank");
}

inline bool satisfies(const std::vector<BitVec>& M, const std::vector<bool>& gamma, const BitVec& x) {
  for (std::size_t r = 0; r < M.size(); ++r)
    if (M[r].dot(x) != gamma[r]) return false;
  return true;
}

/// Monte Carlo estimate of Pr[M beta = gamma] for beta uniform on the lifted
/// preimage of z, next to the bound (1 - eps/2)^floor(r/b) with eps the
/// balanced-stifled parameter of g. Sample i uses seed ^ i.
inline RankFoolingResult rank_fooling_estimate(const std::vector<BitVec>& M, const std::vector<bool>& gamma, const std::vector<bool>& z,
                                               const Gadget& g, std::size_t samples, std::uint64_t seed, unsigned jobs = 1) {
  check_rank_inputs(M, gamma, z, g);
  RankFoolingResult r;
  r.rank = M.size();
  r.epsilon = balanced_stifled_epsilon(g).minimum;
  r.bound = std::pow(1.0 - r.epsilon.value() / 2.0, static_cast<double>(M.size() / static_cast<std::size_t>(g.arity())));
  auto e = count_hits(samples, jobs, [&](std::size_t i) { return satisfies(M, gamma, sample_lifted_preimage(g, z, trial_seed(seed, i))); });
  r.estimate = e.mean();
  r.stderr_ = e.stderr_();
  return r;
}

/// Exact Pr[M beta = gamma] by enumerating preimages on the blocks M touches.
/// Refuses when that product exceeds `cap` combinations.
inline Ratio rank_fooling_exact(const std::vector<BitVec>& M, const std::vector<bool>& gamma, const std::vector<bool>& z, const Gadget& g,
                                std::uint64_t cap = 50'000'000) {
  check_rank_inputs(M, gamma, z, g);
  BlockStructure s{z.size(), static_cast<std::size_t>(g.arity())};
  std::vector<std::size_t> blocks;
  for (std::size_t j = 0; j < s.m; ++j) {
    BitVec mask = s.mask({j});
    for (const auto& row : M)
      if (!(row & mask).is_zero()) {
        blocks.push_back(j);
        break;
      }
  }
  std::uint64_t total = 1;
  for (auto j : blocks) {
    total *= g.preimages(z[j]).size();
    if (total > cap) throw std::invalid_argument("too many preimage combinations to enumerate");
  }
  BitVec x(s.length());
  std::uint64_t hits = 0;
  auto rec = [&](auto& self, std::size_t t) -> void {
    if (t == blocks.size()) {
      hits += satisfies(M, gamma, x) ? 1 : 0;
      return;
    }
    for (auto d : g.preimages(z[blocks[t]])) {
      set_block_value(x, s, blocks[t], d);
      self(self, t + 1);
    }
  };
  rec(rec, 0);
  return Ratio{hits, total};
}

/// Random full-rank r x (m*b) matrix; rows are redrawn until independent.
inline std::vector<BitVec> random_full_rank(std::size_t r, std::size_t ncols, Rng& rng) {
  if (r > ncols) throw std::invalid_argument("more rows than columns");
  RowSpace span(ncols);
  std::vector<BitVec> rows;
  while (rows.size() < r) {
    BitVec v(ncols);
    for (std::size_t i = 0; i < ncols; ++i) v.set(i, rng.bit());
    if (span.insert(v, BitVec(0))) rows.push_back(v);
  }
  return rows;
}

}  // namespace rlin
