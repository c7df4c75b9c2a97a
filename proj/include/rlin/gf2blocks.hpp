#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <istream>
#include <iterator>
#include <ostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlin/bits.hpp"
#include "rlin/gadgets.hpp"

namespace rlin {

using Basis = std::vector<BitVec>;

namespace detail {

inline BitVec outside_mask(const std::vector<std::size_t>& T, const BlockStructure& s) {
  BitVec inside = s.mask(T);
  BitVec out(s.length());
  for (std::size_t i = 0; i < s.length(); ++i)
    if (!inside.get(i)) out.set(i);
  return out;
}

/// Calls f on every k-subset of items in lexicographic order until f returns true.
inline bool for_each_subset(const std::vector<std::size_t>& items, std::size_t k,
                            const std::function<bool(const std::vector<std::size_t>&)>& f) {
  if (k > items.size()) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::vector<std::size_t> pick(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) pick[i] = items[idx[i]];
    if (f(pick)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == items.size() - k + (i - 1)) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline std::vector<std::size_t> support_blocks(const Basis& U, const BlockStructure& s) {
  std::vector<bool> seen(s.m, false);
  for (const auto& u : U)
    for (auto j : s.touched_blocks(u)) seen[j] = true;
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < s.m; ++j)
    if (seen[j]) out.push_back(j);
  return out;
}

inline Basis normalize(const Basis& U, std::size_t ncols) {
  RowSpace rs(ncols);
  for (const auto& u : U) rs.insert(u);
  return rs.rows();
}

}  // namespace detail

/// Basis of {u in span(U) : u vanishes on every block outside T}.
inline Basis restrict_to_blocks(const Basis& U, const std::vector<std::size_t>& T, const BlockStructure& s) {
  BitVec outside = detail::outside_mask(T, s);
  RowSpace keyed(s.length());
  RowSpace result(s.length());
  for (const auto& u : U) {
    if (u.size() != s.length()) throw std::invalid_argument("vector length differs from m*b");
    BitVec key = u & outside;
    BitVec tag = u;
    keyed.reduce(key, &tag);
    if (key.is_zero())
      result.insert(tag);
    else
      keyed.insert(key, tag);
  }
  return result.rows();
}

/// Basis of the coordinate projection of span(U) onto the blocks outside T.
/// Vectors keep the ambient length m*b with the blocks of T zeroed.
inline Basis project_away(const Basis& U, const std::vector<std::size_t>& T, const BlockStructure& s) {
  BitVec outside = detail::outside_mask(T, s);
  RowSpace rs(s.length());
  for (const auto& u : U) {
    if (u.size() != s.length()) throw std::invalid_argument("vector length differs from m*b");
    rs.insert(u & outside);
  }
  return rs.rows();
}

namespace detail {

/// Smallest (by size, then lexicographically) block set T with dim(U_T) > |T|.
inline std::optional<std::vector<std::size_t>> violating_set(const Basis& U, const BlockStructure& s) {
  Basis B = normalize(U, s.length());
  std::size_t d = B.size();
  auto support = support_blocks(B, s);
  std::optional<std::vector<std::size_t>> found;
  for (std::size_t k = 1; k < d && !found; ++k) {
    for_each_subset(support, k, [&](const std::vector<std::size_t>& T) {
      if (restrict_to_blocks(B, T, s).size() > T.size()) {
        found = T;
        return true;
      }
      return false;
    });
  }
  return found;
}

}  // namespace detail

/// True iff dim(U_T) <= |T| for every block set T. Exhaustive over the
/// subsets of touched blocks, so exponential in their number.
inline bool is_spread(const Basis& U, const BlockStructure& s) { return !detail::violating_set(U, s).has_value(); }

struct Obstruction {
  std::vector<std::size_t> blocks;
};

inline Obstruction closure_of_subspace(const Basis& U, const BlockStructure& s) {
  std::vector<std::size_t> T;
  while (true) {
    Basis P = project_away(U, T, s);
    auto bad = detail::violating_set(P, s);
    if (!bad) break;
    std::vector<std::size_t> merged;
    std::set_union(T.begin(), T.end(), bad->begin(), bad->end(), std::back_inserter(merged));
    T = std::move(merged);
  }
  for (std::size_t i = 0; i < T.size(); ++i) {
    std::vector<std::size_t> smaller = T;
    smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(i));
    if (is_spread(project_away(U, smaller, s), s)) throw std::logic_error("closure search produced a non-minimal obstruction");
  }
  return Obstruction{T};
}

/// Unique minimal obstruction of the row space of A's system.
inline Obstruction closure(const AffineSpace& A) {
  if (A.empty()) throw std::invalid_argument("closure of an inconsistent system");
  return closure_of_subspace(A.matrix(), A.blocks());
}

/// Coordinates of the blocks of the closure.
inline std::vector<std::size_t> closure_variables(const Obstruction& cl, const BlockStructure& s) {
  std::vector<std::size_t> out;
  for (auto j : cl.blocks)
    for (std::size_t k = 0; k < s.b; ++k) out.push_back(j * s.b + k);
  return out;
}

struct SafeBasis {
  Basis vectors;
  std::vector<std::size_t> pivots;
};

/// Echelon basis of span(U) whose pivots lie in distinct blocks, choosing the
/// lexicographically smallest pivot tuple. Returns nullopt (with a reason)
/// when span(U) is not spread.
inline std::optional<SafeBasis> safe_basis(const Basis& U, const BlockStructure& s, std::string* why = nullptr) {
  Basis B = detail::normalize(U, s.length());
  std::size_t d = B.size();
  if (d > s.m) {
    if (why) *why = "not spread: dimension exceeds block count";
    return std::nullopt;
  }
  if (auto bad = detail::violating_set(B, s)) {
    if (why) {
      std::ostringstream os;
      os << "not spread: blocks {";
      for (std::size_t i = 0; i < bad->size(); ++i) os << (i ? "," : "") << (*bad)[i];
      os << "} carry dimension " << restrict_to_blocks(B, *bad, s).size();
      *why = os.str();
    }
    return std::nullopt;
  }
  std::vector<BitVec> cols(s.length(), BitVec(d));
  for (std::size_t r = 0; r < d; ++r)
    for (auto c : B[r].support()) cols[c].set(r);

  std::vector<std::size_t> chosen;
  std::vector<bool> used(s.m, false);
  std::function<bool(std::size_t, const RowSpace&)> dfs = [&](std::size_t from, const RowSpace& span) -> bool {
    if (chosen.size() == d) return true;
    for (std::size_t c = from; c < s.length(); ++c) {
      std::size_t blk = s.block_of(c);
      if (used[blk]) continue;
      std::size_t free_blocks = 0;
      for (std::size_t j = blk; j < s.m; ++j) free_blocks += used[j] ? 0 : 1;
      if (free_blocks < d - chosen.size()) return false;
      if (span.contains(cols[c])) continue;
      RowSpace next = span;
      next.insert(cols[c]);
      chosen.push_back(c);
      used[blk] = true;
      if (dfs(c + 1, next)) return true;
      chosen.pop_back();
      used[blk] = false;
    }
    return false;
  };
  if (!dfs(0, RowSpace(d))) {
    if (why) *why = "no pivot tuple found";
    return std::nullopt;
  }
  SafeBasis out{B, chosen};
  for (std::size_t j = 0; j < d; ++j) {
    std::size_t a = chosen[j];
    std::size_t r = j;
    while (!out.vectors[r].get(a)) ++r;
    std::swap(out.vectors[r], out.vectors[j]);
    for (std::size_t q = 0; q < d; ++q)
      if (q != j && out.vectors[q].get(a)) out.vectors[q] ^= out.vectors[j];
  }
  return out;
}

class StiflingError : public std::invalid_argument {
 public:
  enum class Kind { BetaNotInSpace, AlphaInconsistent, GadgetNotStifled, BadShape };
  StiflingError(Kind k, const std::string& msg) : std::invalid_argument(msg), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Builds gamma in A with g applied blockwise equal to alpha, given beta in A
/// whose closure blocks already map to alpha. Rows of A are rewritten as a
/// basis of the part supported on the closure plus preimages of a safe basis
/// of the projection; pivots of the latter are then corrected one by one.
inline BitVec stifling_extension(const AffineSpace& A, const BitVec& beta, const std::vector<bool>& alpha, const Gadget& g) {
  const BlockStructure& s = A.blocks();
  if (s.b != static_cast<std::size_t>(g.arity()) || alpha.size() != s.m || beta.size() != s.length())
    throw StiflingError(StiflingError::Kind::BadShape, "shape mismatch between space, beta, alpha and gadget");
  if (!A.contains(beta)) throw StiflingError(StiflingError::Kind::BetaNotInSpace, "beta is not in the affine space");
  if (!is_stifled(g)) throw StiflingError(StiflingError::Kind::GadgetNotStifled, "gadget is not stifled");

  Basis U = A.matrix();
  std::vector<std::size_t> T = closure(A).blocks;
  for (auto j : T)
    if (g(block_value(beta, s, j)) != alpha[j])
      throw StiflingError(StiflingError::Kind::AlphaInconsistent,
                          "alpha disagrees with beta on closure block " + std::to_string(j));

  BitVec outside = detail::outside_mask(T, s);
  RowSpace proj(s.length());
  for (const auto& u : U) proj.insert(u & outside, u);
  auto sb = safe_basis(project_away(U, T, s), s);
  if (!sb) throw std::logic_error("projection away from the closure is not spread");

  std::vector<BitVec> lifted;  // preimages w'_j
  for (const auto& w : sb->vectors) {
    BitVec red = w, tag(s.length());
    proj.reduce(red, &tag);
    if (!red.is_zero()) throw std::logic_error("safe basis vector has no preimage");
    lifted.push_back(tag);
  }

  std::vector<int> role(s.m, -1);  // index of the pivot living in block j
  for (std::size_t j = 0; j < sb->pivots.size(); ++j) role[s.block_of(sb->pivots[j])] = static_cast<int>(j);
  std::vector<bool> in_T(s.m, false);
  for (auto j : T) in_T[j] = true;

  BitVec tilde(s.length());
  for (std::size_t i = 0; i < s.m; ++i) {
    std::uint32_t v;
    if (in_T[i]) {
      v = block_value(beta, s, i);
    } else if (role[i] >= 0) {
      int ell = static_cast<int>(s.offset_in_block(sb->pivots[role[i]])) + 1;
      v = *stifling_assignment(g, ell, alpha[i]);
    } else {
      v = g.preimages(alpha[i]).front();
    }
    set_block_value(tilde, s, i, v);
  }

  BitVec gamma = tilde;
  for (std::size_t j = 0; j < lifted.size(); ++j) {
    bool target = lifted[j].dot(beta);
    if (lifted[j].dot(tilde) != target) gamma.flip(sb->pivots[j]);
  }

  if (!A.contains(gamma)) throw std::logic_error("stifling extension left the affine space");
  auto out = lift_eval(g, gamma, s);
  for (std::size_t i = 0; i < s.m; ++i)
    if (out[i] != static_cast<int>(alpha[i])) throw std::logic_error("stifling extension missed alpha");
  return gamma;
}

/// Fixture format: header "m=<m> b=<b> rows=<r>", then one 0/1 row per line.
struct MatrixFixture {
  BlockStructure blocks;
  Basis rows;
};

inline MatrixFixture read_matrix_fixture(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("line 1: missing header");
  MatrixFixture f;
  std::size_t r = 0;
  if (std::sscanf(header.c_str(), "m=%zu b=%zu rows=%zu", &f.blocks.m, &f.blocks.b, &r) != 3)
    throw std::runtime_error("line 1: expected 'm=<m> b=<b> rows=<r>'");
  for (std::size_t i = 0; i < r; ++i) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("line " + std::to_string(i + 2) + ": missing row");
    if (line.size() != f.blocks.length()) throw std::runtime_error("line " + std::to_string(i + 2) + ": row length is not m*b");
    f.rows.push_back(BitVec::from_string(line));
  }
  return f;
}

inline void write_matrix_fixture(std::ostream& os, const MatrixFixture& f) {
  os << "m=" << f.blocks.m << " b=" << f.blocks.b << " rows=" << f.rows.size() << "\n";
  for (const auto& r : f.rows) os << r.to_string() << "\n";
}

}  // namespace rlin
