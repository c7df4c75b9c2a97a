#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlin/bits.hpp"
#include "rlin/formulas.hpp"
#include "rlin/gadgets.hpp"
#include "rlin/gf2blocks.hpp"
#include "rlin/parallel.hpp"
#include "rlin/rng.hpp"

namespace rlin {

/// Total assignment to Stone(pyramid(n), rho) drawn from the hard
/// distribution with the identity placement: stone s sits on vertex s, the
/// path runs from the root down to level n-1, path vertices are blue and all
/// other stones red.
struct StoneAssignment {
  int n = 0;
  std::size_t N = 0;
  std::vector<int> path;  // path[i-1]: position on level i, i = 1..n-1
  std::uint32_t v = 0;    // endpoint on level n-1
  std::uint32_t u = 0;    // left child of v
  std::uint32_t w = 0;    // right child of v
  std::vector<bool> values;

  bool on_path(std::uint32_t x, const Dag& g) const {
    auto [lvl, pos] = g.coords[x - 1];
    return lvl <= n - 1 && path[static_cast<std::size_t>(lvl - 1)] == pos;
  }
};

/// Assignment with vertex x holding stone stone_of[x-1] and stone s red iff
/// red[s-1]. Placement chains are set to the unique satisfying values.
inline std::vector<bool> stone_assignment_values(std::size_t N, const std::vector<std::size_t>& stone_of, const std::vector<bool>& red) {
  StoneVars V{N};
  std::vector<bool> a(V.count(), false);
  for (std::size_t x = 1; x <= N; ++x) {
    std::size_t s = stone_of[x - 1];
    a[V.P(x, s) - 1] = true;
    for (std::size_t j = 1; j + 1 <= N; ++j) a[V.Z(x, j) - 1] = j >= s;
  }
  for (std::size_t s = 1; s <= N; ++s) a[V.R(s) - 1] = red[s - 1];
  return a;
}

inline StoneAssignment sample_mu(int n, Rng& rng) {
  Dag g = pyramid(n);
  StoneAssignment a;
  a.n = n;
  a.N = g.n_vertices;
  a.path.push_back(1);
  for (int i = 2; i <= n - 1; ++i) a.path.push_back(a.path.back() + (rng.bit() ? 1 : 0));
  int x = a.path.back();
  a.v = pyramid_id(n - 1, x);
  a.u = pyramid_id(n, x);
  a.w = pyramid_id(n, x + 1);
  std::vector<std::size_t> stone_of(a.N);
  std::vector<bool> red(a.N);
  for (std::uint32_t s = 1; s <= a.N; ++s) {
    stone_of[s - 1] = s;
    red[s - 1] = !a.on_path(s, g);
  }
  a.values = stone_assignment_values(a.N, stone_of, red);
  return a;
}

inline StoneAssignment sample_mu(int n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_mu(n, rng);
}

/// The lifted distribution: alpha from sample_mu, then every block uniformly
/// from the gadget preimage of its alpha bit. One generator drives both.
struct LiftedSample {
  StoneAssignment alpha;
  BitVec beta;
};

inline LiftedSample sample_mu_lifted(int n, const Gadget& g, std::uint64_t seed) {
  Rng rng(seed);
  LiftedSample s;
  s.alpha = sample_mu(n, rng);
  s.beta = sample_lifted_preimage(g, s.alpha.values, rng);
  return s;
}

/// Clause id the sample falsifies: the induction clause at the endpoint for
/// stones (u, w, v) whose obfuscation literal is false.
inline std::size_t expected_falsified_clause(const StoneAssignment& a, const ObfuscationMap& rho) {
  Dag g = pyramid(a.n);
  StoneLayout L(g);
  std::uint32_t x = rho(a.u, a.w, a.v);
  bool positive_false = !a.values[x - 1];
  return L.induction_clause(a.v, a.u, a.w, a.v, positive_false);
}

/// Number of clauses of the lift of f falsified by beta, without building the
/// lift: a member is falsified exactly when every literal block maps to the
/// value falsifying its base literal, and then exactly one member matches.
inline std::size_t lifted_falsified_count(const CnfFormula& f, const Gadget& g, const BitVec& beta) {
  BlockStructure s{f.nvars, static_cast<std::size_t>(g.arity())};
  std::vector<bool> z(f.nvars);
  for (std::size_t j = 0; j < f.nvars; ++j) z[j] = g(block_value(beta, s, j));
  return falsified_clauses(f, z).size();
}

/// Same count by streaming every lifted clause; the cross-check oracle.
inline std::size_t lifted_falsified_count_explicit(const CnfFormula& f, const Gadget& g, const BitVec& beta) {
  std::vector<bool> a(beta.size());
  for (std::size_t i = 0; i < beta.size(); ++i) a[i] = beta.get(i);
  std::size_t count = 0;
  for (const auto& c : f.clauses)
    for_each_lifted_clause(c, g, [&](const Clause& d) {
      for (auto l : d)
        if (literal_true(l, a)) return;
      ++count;
    });
  return count;
}

/// Stones mentioned by a set of stone variables under the identity placement:
/// R(s) and P(x,s) mark s, P(x,s) and Z(x,l) also mark the stone of x.
inline std::set<std::size_t> marked_stones(const std::vector<std::uint32_t>& vars, std::size_t N) {
  StoneVars V{N};
  std::set<std::size_t> q;
  for (auto x : vars) {
    auto d = V.decode(x);
    if (d.kind != StoneVars::Kind::R) q.insert(d.v);
    if (d.kind != StoneVars::Kind::Z) q.insert(d.j);
  }
  return q;
}

/// True when vars avoids every P and Z variable of v, u and w.
inline bool avoids_endpoint(const std::vector<std::uint32_t>& vars, const StoneAssignment& a, std::string* why = nullptr) {
  StoneVars V{a.N};
  for (auto x : vars) {
    auto d = V.decode(x);
    if (d.kind == StoneVars::Kind::R) continue;
    if (d.v == a.v || d.v == a.u || d.v == a.w) {
      if (why) *why = "closure contains " + V.name(x);
      return false;
    }
  }
  return true;
}

struct FoolingResult {
  std::vector<bool> gamma;
  std::size_t falsified = 0;  // the single falsified clause id
  std::size_t ell1 = 0;       // blue filler stone
  std::size_t ell2 = 0;       // red filler stone
};

/// Assignment that agrees with alpha on the variables T and falsifies only
/// the induction clause at the endpoint v for stones (i, j, k). Stone i goes
/// on u, j on w, k on v; i and j are red and k blue. Marked stones keep their
/// vertex and color; other path vertices get a blue filler and all remaining
/// vertices a red one. Throws invalid_argument when the preconditions fail.
inline FoolingResult fooling_extension(const StoneAssignment& a, const ObfuscationMap& rho, const std::vector<std::uint32_t>& T,
                                       std::size_t i, std::size_t j, std::size_t k) {
  const std::size_t N = a.N;
  if (i < 1 || i > N || j < 1 || j > N || k < 1 || k > N) throw std::invalid_argument("stone out of range");
  if (k == i || k == j) throw std::invalid_argument("stone k must differ from i and j");
  std::string why;
  if (!avoids_endpoint(T, a, &why)) throw std::invalid_argument("T is not foolable: " + why);
  auto Q = marked_stones(T, N);
  if (2 * Q.size() >= N) throw std::invalid_argument("T marks " + std::to_string(Q.size()) + " stones, need fewer than N/2");
  for (auto s : {i, j, k})
    if (Q.count(s)) throw std::invalid_argument("stone " + std::to_string(s) + " is marked by T");

  Dag g = pyramid(a.n);
  FoolingResult r;
  for (std::size_t s = 1; s <= N && (!r.ell1 || !r.ell2); ++s) {
    if (Q.count(s) || s == i || s == j || s == k) continue;
    (r.ell1 ? r.ell2 : r.ell1) = s;
  }
  if (!r.ell2) throw std::invalid_argument("no free filler stones");

  std::vector<std::size_t> stone_of(N);
  for (std::uint32_t x = 1; x <= N; ++x) {
    if (x == a.v)
      stone_of[x - 1] = k;
    else if (x == a.u)
      stone_of[x - 1] = i;
    else if (x == a.w)
      stone_of[x - 1] = j;
    else if (Q.count(x))
      stone_of[x - 1] = x;
    else
      stone_of[x - 1] = a.on_path(x, g) ? r.ell1 : r.ell2;
  }
  std::vector<bool> red(N, true);
  for (std::size_t s = 1; s <= N; ++s) {
    if (Q.count(s))
      red[s - 1] = !a.on_path(static_cast<std::uint32_t>(s), g);
    else if (s == k || s == r.ell1)
      red[s - 1] = false;
  }
  r.gamma = stone_assignment_values(N, stone_of, red);

  for (auto x : T)
    if (r.gamma[x - 1] != a.values[x - 1]) throw std::logic_error("fooling extension disagrees with alpha on T");
  CnfFormula f = stone_formula(g, rho);
  auto bad = falsified_clauses(f, r.gamma);
  StoneLayout L(g);
  std::uint32_t x = rho(i, j, k);
  std::size_t expect = L.induction_clause(a.v, i, j, k, !r.gamma[x - 1]);
  if (bad.size() != 1 || bad[0] != expect) throw std::logic_error("fooling extension falsifies the wrong clauses");
  r.falsified = expect;
  return r;
}

struct FoolabilityReport {
  bool foolable = false;
  std::string reason;
  std::vector<std::uint32_t> closure_vars;
  std::optional<BitVec> gamma;  // point of A lifting to alpha
};

/// Whether the affine space A (over the lifted stone variables) is
/// alpha-foolable: its closure avoids the P and Z variables of v, u and w, and
/// some point of A maps blockwise to alpha. The witness beta, when given and
/// consistent, seeds the stifling extension; otherwise preimages on the
/// closure blocks are searched.
inline FoolabilityReport is_foolable(const AffineSpace& A, const StoneAssignment& a, const Gadget& g,
                                     const std::optional<BitVec>& witness = std::nullopt) {
  FoolabilityReport rep;
  const BlockStructure& s = A.blocks();
  if (s.m != a.values.size() || s.b != static_cast<std::size_t>(g.arity())) throw std::invalid_argument("space shape differs from lifted stone variables");
  if (A.empty()) {
    rep.reason = "affine space is empty";
    return rep;
  }
  auto cl = closure(A);
  for (auto blk : cl.blocks) rep.closure_vars.push_back(static_cast<std::uint32_t>(blk + 1));
  if (!avoids_endpoint(rep.closure_vars, a, &rep.reason)) return rep;

  std::optional<BitVec> seed;
  if (witness && A.contains(*witness)) {
    bool ok = true;
    for (auto blk : cl.blocks)
      if (g(block_value(*witness, s, blk)) != a.values[blk]) ok = false;
    if (ok) seed = witness;
  }
  if (!seed) {
    auto dfs = [&](auto& self, std::size_t t, const AffineSpace& cur) -> std::optional<BitVec> {
      if (t == cl.blocks.size()) return cur.point();
      std::size_t blk = cl.blocks[t];
      for (auto d : g.preimages(a.values[blk])) {
        AffineSpace next = cur;
        for (std::size_t q = 0; q < s.b && !next.empty(); ++q) next.add(BitVec::unit(s.length(), blk * s.b + q), (d >> (s.b - 1 - q)) & 1u);
        if (next.empty()) continue;
        if (auto p = self(self, t + 1, next)) return p;
      }
      return std::nullopt;
    };
    seed = dfs(dfs, 0, A);
  }
  if (!seed) {
    rep.reason = "no point of the space maps to alpha on the closure";
    return rep;
  }
  rep.gamma = stifling_extension(A, *seed, a.values, g);
  rep.foolable = true;
  return rep;
}

/// A conjunction of base literals; each entry fixes a variable.
using Cube = std::vector<std::pair<std::uint32_t, bool>>;

struct UsefulWitness {
  int L1 = 0, L2 = 0, L3 = 0, L4 = 0;
};

/// Whether a cube over the R variables of Stone(pyramid(n)) is useful for
/// height h: it fixes vertices blue on levels L1 and L4, no vertex on levels
/// L2..L3, L1 <= L2 <= L3 <= L4 and L3 - L2 >= n / (2h).
inline std::optional<UsefulWitness> is_useful_cube(const Cube& c, int n, int h) {
  if (h < 1) throw std::invalid_argument("height must be positive");
  Dag g = pyramid(n);
  StoneVars V{g.n_vertices};
  std::vector<bool> fixed(static_cast<std::size_t>(n) + 1, false), blue(static_cast<std::size_t>(n) + 1, false);
  for (auto [x, val] : c) {
    auto d = V.decode(x);
    if (d.kind != StoneVars::Kind::R) continue;
    int lvl = g.coords[d.j - 1].first;
    fixed[static_cast<std::size_t>(lvl)] = true;
    if (!val) blue[static_cast<std::size_t>(lvl)] = true;
  }
  for (int L2 = 1; L2 <= n; ++L2)
    for (int L3 = L2; L3 <= n; ++L3) {
      bool clear = true;
      for (int l = L2; l <= L3; ++l) clear = clear && !fixed[static_cast<std::size_t>(l)];
      if (!clear) break;
      if (2 * h * (L3 - L2) < n) continue;
      int L1 = 0, L4 = 0;
      for (int l = L2; l >= 1; --l)
        if (blue[static_cast<std::size_t>(l)]) {
          L1 = l;
          break;
        }
      for (int l = L3; l <= n; ++l)
        if (blue[static_cast<std::size_t>(l)]) {
          L4 = l;
          break;
        }
      if (L1 && L4) return UsefulWitness{L1, L2, L3, L4};
    }
  return std::nullopt;
}

/// Decision tree over base variables. Leaves output a clause id, 0 meaning
/// "error". Node 0 is the root.
struct DecisionTree {
  struct Node {
    std::uint32_t var = 0;  // 0 for a leaf
    std::size_t child[2] = {0, 0};
    std::size_t output = 0;
  };
  std::vector<Node> nodes;

  std::size_t add_leaf(std::size_t out) {
    nodes.push_back(Node{0, {0, 0}, out});
    return nodes.size() - 1;
  }
  std::size_t add_query(std::uint32_t var, std::size_t c0, std::size_t c1) {
    nodes.push_back(Node{var, {c0, c1}, 0});
    return nodes.size() - 1;
  }

  std::size_t evaluate(const std::vector<bool>& a, std::size_t root = 0) const {
    std::size_t x = root;
    while (nodes[x].var) x = nodes[x].child[a[nodes[x].var - 1] ? 1 : 0];
    return nodes[x].output;
  }
  int height(std::size_t root = 0) const {
    const auto& n = nodes[root];
    if (!n.var) return 0;
    return 1 + std::max(height(n.child[0]), height(n.child[1]));
  }
};

/// Tree whose root is node 0: copies `t` so node 0 becomes the root.
inline DecisionTree reroot(const DecisionTree& t, std::size_t root) {
  DecisionTree out;
  out.nodes.emplace_back();
  auto copy = [&](auto& self, std::size_t x) -> std::size_t {
    const auto& n = t.nodes[x];
    if (!n.var) return out.add_leaf(n.output);
    std::size_t c0 = self(self, n.child[0]);
    std::size_t c1 = self(self, n.child[1]);
    return out.add_query(n.var, c0, c1);
  };
  std::size_t r = copy(copy, root);
  out.nodes[0] = out.nodes[r];
  return out;
}

/// Canonical form of a color-querying tree: first query the root's color,
/// then run t; an induction clause at x is kept only behind a query showing x
/// blue, everything else becomes an error leaf. Height grows by at most 2.
inline DecisionTree canonicalize_dt(const DecisionTree& t, int n) {
  Dag g = pyramid(n);
  StoneVars V{g.n_vertices};
  StoneLayout L(g);
  for (std::size_t x = 0; x < t.nodes.size(); ++x)
    if (t.nodes[x].var && V.decode(t.nodes[x].var).kind != StoneVars::Kind::R)
      throw std::invalid_argument("node " + std::to_string(x) + " queries " + V.name(t.nodes[x].var) + ", only color variables are allowed");

  DecisionTree out;
  out.nodes.emplace_back();
  auto copy = [&](auto& self, std::size_t x) -> std::size_t {
    const auto& n = t.nodes[x];
    if (n.var) {
      std::size_t c0 = self(self, n.child[0]);
      std::size_t c1 = self(self, n.child[1]);
      return out.add_query(n.var, c0, c1);
    }
    if (n.output == 0 || n.output > L.total()) return out.add_leaf(0);
    auto info = L.classify(n.output);
    if (info.family != StoneLayout::Family::Induction) return out.add_leaf(0);
    std::size_t keep = out.add_leaf(n.output);
    std::size_t err = out.add_leaf(0);
    return out.add_query(V.R(info.vertex), keep, err);
  };
  std::size_t body0 = copy(copy, 0);
  std::size_t body1 = copy(copy, 0);
  out.nodes[0] = DecisionTree::Node{V.R(g.root), {body0, body1}, 0};
  return out;
}

/// Error when the tree answers "error" or names a clause alpha satisfies.
/// Clauses are built on demand, so n is not limited by the formula's size.
inline bool dt_errs(const DecisionTree& t, const Dag& g, const ObfuscationMap& rho, const std::vector<bool>& a) {
  std::size_t out = t.evaluate(a);
  if (out == 0 || out > StoneLayout(g).total()) return true;
  for (auto l : stone_clause(g, rho, out))
    if (literal_true(l, a)) return true;
  return false;
}

inline Estimate dt_error_rate(const DecisionTree& t, int n, const ObfuscationMap& rho, std::size_t trials, std::uint64_t seed, unsigned jobs = 1) {
  Dag g = pyramid(n);
  return count_hits(trials, jobs, [&](std::size_t i) { return dt_errs(t, g, rho, sample_mu(n, trial_seed(seed, i)).values); });
}

namespace detail {

/// Output for a tree that has seen the level n-1 position p blue: the
/// endpoint induction clause whose obfuscation literal is false, querying the
/// literal's variable when it is a color and reading it off the identity
/// placement otherwise.
inline std::size_t endpoint_output(DecisionTree& t, int n, int p, const ObfuscationMap& rho) {
  Dag g = pyramid(n);
  StoneVars V{g.n_vertices};
  StoneLayout L(g);
  std::uint32_t v = pyramid_id(n - 1, p), u = pyramid_id(n, p), w = pyramid_id(n, p + 1);
  std::uint32_t x = rho(u, w, v);
  auto d = V.decode(x);
  if (d.kind == StoneVars::Kind::R) {
    std::size_t pos = t.add_leaf(L.induction_clause(v, u, w, v, true));
    std::size_t neg = t.add_leaf(L.induction_clause(v, u, w, v, false));
    return t.add_query(x, pos, neg);
  }
  bool value = d.kind == StoneVars::Kind::P ? d.v == d.j : d.j >= d.v;
  return t.add_leaf(L.induction_clause(v, u, w, v, !value));
}

}  // namespace detail

/// Queries the colors of `width` consecutive level n-1 vertices around the
/// middle; the first blue one is the endpoint.
inline DecisionTree center_window_tree(int n, const ObfuscationMap& rho, int width) {
  if (n < 3) throw std::invalid_argument("window strategy needs n >= 3");
  width = std::max(1, std::min(width, n - 1));
  int lo = std::max(1, (n + 1) / 2 - width / 2);
  lo = std::min(lo, n - width);
  DecisionTree t;
  t.nodes.emplace_back();
  StoneVars V{pyramid(n).n_vertices};
  std::size_t next = t.add_leaf(0);
  for (int p = lo + width - 1; p >= lo; --p) {
    std::size_t found = detail::endpoint_output(t, n, p, rho);
    next = t.add_query(V.R(pyramid_id(n - 1, p)), found, next);
  }
  t.nodes[0] = t.nodes[next];
  return t;
}

/// Random adaptive tree of the given height: each node queries a level n-1
/// vertex drawn from the endpoint's distribution and stops once it sees blue.
inline DecisionTree random_color_tree(int n, const ObfuscationMap& rho, int height, Rng& rng) {
  StoneVars V{pyramid(n).n_vertices};
  DecisionTree t;
  t.nodes.emplace_back();
  auto build = [&](auto& self, int h) -> std::size_t {
    if (h == 0) return t.add_leaf(0);
    int p = 1;
    for (int i = 2; i <= n - 1; ++i) p += rng.bit() ? 1 : 0;
    std::size_t found = detail::endpoint_output(t, n, p, rho);
    std::size_t miss = self(self, h - 1);
    return t.add_query(V.R(pyramid_id(n - 1, p)), found, miss);
  };
  std::size_t r = build(build, height);
  t.nodes[0] = t.nodes[r];
  return t;
}

/// Random parity queries over the lifted stone variables, answered by beta;
/// used to test foolability along the trace of a random linear program.
inline AffineSpace random_query_space(const LiftedSample& smp, const Gadget& g, std::size_t queries, Rng& rng) {
  BlockStructure s{smp.alpha.values.size(), static_cast<std::size_t>(g.arity())};
  AffineSpace A(s.length(), s);
  for (std::size_t q = 0; q < queries; ++q) {
    BitVec f(s.length());
    std::size_t touched = 1 + rng.below(2);
    for (std::size_t t = 0; t < touched; ++t) {
      std::size_t blk = rng.below(s.m);
      std::uint64_t pat = 1 + rng.below((std::uint64_t{1} << s.b) - 1);
      for (std::size_t k = 0; k < s.b; ++k)
        if ((pat >> k) & 1u) f.flip(blk * s.b + k);
    }
    A.add(f, f.dot(smp.beta));
  }
  return A;
}

}  // namespace rlin
