#pragma once

#include <algorithm>
#include <climits>
#include <array>
#include <cstdint>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rlin/gadgets.hpp"
#include "rlin/rng.hpp"

namespace rlin {

/// Error raised while reading a text format; carries the 1-based line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Directed graph on vertices 1..n_vertices. Each vertex has either no
/// children or exactly two ordered children (u, w).
struct Dag {
  std::size_t n_vertices = 0;
  std::vector<std::array<std::uint32_t, 2>> children;  // index v-1; {0,0} for a sink
  std::uint32_t root = 0;
  std::vector<std::uint32_t> sinks;
  std::vector<std::pair<int, int>> coords;  // (level, position) for pyramids

  bool is_sink(std::uint32_t v) const { return children[v - 1][0] == 0; }

  std::vector<std::uint32_t> internal_vertices() const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t v = 1; v <= n_vertices; ++v)
      if (!is_sink(v)) out.push_back(v);
    return out;
  }

  /// Vertices ordered so that every vertex comes after both of its children.
  std::vector<std::uint32_t> bottom_up_order() const {
    std::vector<int> state(n_vertices + 1, 0);
    std::vector<std::uint32_t> order;
    std::function<void(std::uint32_t)> visit = [&](std::uint32_t v) {
      if (state[v] == 2) return;
      if (state[v] == 1) throw std::invalid_argument("graph has a cycle");
      state[v] = 1;
      if (!is_sink(v))
        for (auto c : children[v - 1]) visit(c);
      state[v] = 2;
      order.push_back(v);
    };
    for (std::uint32_t v = 1; v <= n_vertices; ++v) visit(v);
    return order;
  }

  void validate() const {
    if (children.size() != n_vertices) throw std::invalid_argument("children table has wrong size");
    std::vector<int> indeg(n_vertices + 1, 0);
    for (std::uint32_t v = 1; v <= n_vertices; ++v) {
      auto [a, b] = children[v - 1];
      if ((a == 0) != (b == 0)) throw std::invalid_argument("vertex " + std::to_string(v) + " has outdegree 1");
      if (a == 0) continue;
      if (a > n_vertices || b > n_vertices) throw std::invalid_argument("child out of range");
      ++indeg[a];
      ++indeg[b];
    }
    int roots = 0;
    for (std::uint32_t v = 1; v <= n_vertices; ++v)
      if (indeg[v] == 0) {
        ++roots;
        if (v != root) throw std::invalid_argument("vertex " + std::to_string(v) + " has indegree 0 but is not the root");
      }
    if (roots != 1) throw std::invalid_argument("graph must have exactly one root");
    bottom_up_order();
  }
};

inline std::uint32_t pyramid_id(int level, int pos) { return static_cast<std::uint32_t>(level * (level - 1) / 2 + pos); }

/// Pyramid with n levels; vertex (i,j) gets id i(i-1)/2 + j (row-major).
inline Dag pyramid(int n) {
  if (n < 2) throw std::invalid_argument("pyramid needs at least 2 levels");
  Dag g;
  g.n_vertices = static_cast<std::size_t>(n) * (n + 1) / 2;
  g.children.assign(g.n_vertices, {0, 0});
  g.root = 1;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= i; ++j) {
      g.coords.emplace_back(i, j);
      if (i < n)
        g.children[pyramid_id(i, j) - 1] = {pyramid_id(i + 1, j), pyramid_id(i + 1, j + 1)};
      else
        g.sinks.push_back(pyramid_id(i, j));
    }
  return g;
}

/// Variable ids of the stone formula on N vertices (all 1-based):
/// P(v,j) = (v-1)N + j, R(j) = N^2 + j, Z(v,j) = N^2 + N + (v-1)(N-1) + j.
struct StoneVars {
  std::size_t N = 0;

  std::uint32_t P(std::size_t v, std::size_t j) const { return static_cast<std::uint32_t>((v - 1) * N + j); }
  std::uint32_t R(std::size_t j) const { return static_cast<std::uint32_t>(N * N + j); }
  std::uint32_t Z(std::size_t v, std::size_t j) const { return static_cast<std::uint32_t>(N * N + N + (v - 1) * (N - 1) + j); }
  std::size_t count() const { return 2 * N * N; }

  enum class Kind { P, R, Z };
  struct Decoded {
    Kind kind;
    std::size_t v;  // vertex for P and Z, 0 for R
    std::size_t j;  // stone for P and R, chain index for Z
  };
  Decoded decode(std::uint32_t id) const {
    std::size_t x = id - 1;
    if (x < N * N) return {Kind::P, x / N + 1, x % N + 1};
    x -= N * N;
    if (x < N) return {Kind::R, 0, x + 1};
    x -= N;
    return {Kind::Z, x / (N - 1) + 1, x % (N - 1) + 1};
  }
  std::string name(std::uint32_t id) const {
    auto d = decode(id);
    switch (d.kind) {
      case Kind::P: return "P(" + std::to_string(d.v) + "," + std::to_string(d.j) + ")";
      case Kind::R: return "R(" + std::to_string(d.j) + ")";
      default: return "Z(" + std::to_string(d.v) + "," + std::to_string(d.j) + ")";
    }
  }
};

/// Map [N]^3 -> stone variable ids, stored row-major in (i, j, k).
class ObfuscationMap {
 public:
  ObfuscationMap() = default;
  ObfuscationMap(std::size_t N, std::vector<std::uint32_t> table) : N_(N), table_(std::move(table)) {
    if (table_.size() != N * N * N) throw std::invalid_argument("obfuscation table must have N^3 entries");
    for (auto x : table_)
      if (x < 1 || x > 2 * N * N) throw std::invalid_argument("obfuscation value out of range");
  }
  /// Table-free map for N too large to store N^3 entries: each value is a
  /// hash of (seed, i, j, k). Not interchangeable with random_obfuscation.
  static ObfuscationMap hashed(std::size_t N, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("N must be positive");
    ObfuscationMap m;
    m.N_ = N;
    m.hashed_ = true;
    m.seed_ = seed;
    return m;
  }

  std::size_t N() const { return N_; }
  bool is_hashed() const { return hashed_; }
  std::uint32_t operator()(std::size_t i, std::size_t j, std::size_t k) const {
    std::size_t idx = ((i - 1) * N_ + (j - 1)) * N_ + (k - 1);
    if (!hashed_) return table_[idx];
    auto h = static_cast<unsigned __int128>(mix64(mix64(seed_) ^ idx)) * (2 * N_ * N_);
    return static_cast<std::uint32_t>(h >> 64) + 1;
  }
  const std::vector<std::uint32_t>& table() const { return table_; }
  bool operator==(const ObfuscationMap&) const = default;

 private:
  std::size_t N_ = 0;
  std::vector<std::uint32_t> table_;
  bool hashed_ = false;
  std::uint64_t seed_ = 0;
};

inline ObfuscationMap random_obfuscation(std::size_t N, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("N must be positive");
  Rng rng(seed);
  std::vector<std::uint32_t> t(N * N * N);
  for (auto& x : t) x = static_cast<std::uint32_t>(rng.below(2 * N * N) + 1);
  return ObfuscationMap(N, std::move(t));
}

using Clause = std::vector<std::int32_t>;

struct FormulaMeta {
  std::string kind;  // "stone" or "stone-lifted"; empty for plain CNF
  int n = 0;
  std::size_t N = 0;
  int b = 1;
  std::uint64_t seed = 0;
  std::string gadget;        // gadget name
  std::string gadget_table;  // truth table string
  std::vector<std::pair<int, int>> vertices;
  std::vector<std::uint32_t> rho;
};

struct CnfFormula {
  std::size_t nvars = 0;
  std::vector<Clause> clauses;
  FormulaMeta meta;
};

/// Appends literal unless already present; keeps first-occurrence order.
inline void push_literal(Clause& c, std::int32_t lit) {
  if (std::find(c.begin(), c.end(), lit) == c.end()) c.push_back(lit);
}

/// Clause index arithmetic for stone_formula's canonical order:
/// root, sink, induction (per internal vertex, (i,j,k) lexicographic, the
/// positive obfuscation literal first), placement. Ids are 1-based.
struct StoneLayout {
  std::size_t N = 0;
  std::vector<std::uint32_t> sinks;
  std::vector<std::uint32_t> internal;
  std::vector<std::int64_t> internal_index;  // vertex -> position in internal, or -1
  std::vector<std::int64_t> sink_index;

  explicit StoneLayout(const Dag& g) : N(g.n_vertices), sinks(g.sinks), internal(g.internal_vertices()) {
    internal_index.assign(N + 1, -1);
    sink_index.assign(N + 1, -1);
    for (std::size_t i = 0; i < internal.size(); ++i) internal_index[internal[i]] = static_cast<std::int64_t>(i);
    for (std::size_t i = 0; i < sinks.size(); ++i) sink_index[sinks[i]] = static_cast<std::int64_t>(i);
  }
  StoneLayout() = default;

  std::size_t root_clause(std::size_t j) const { return j; }
  std::size_t sink_clause(std::uint32_t s, std::size_t j) const {
    return N + static_cast<std::size_t>(sink_index[s]) * N + j;
  }
  std::size_t induction_base() const { return N + sinks.size() * N; }
  std::size_t induction_clause(std::uint32_t v, std::size_t i, std::size_t j, std::size_t k, bool positive) const {
    std::size_t t = ((i - 1) * N + (j - 1)) * N + (k - 1);
    return induction_base() + static_cast<std::size_t>(internal_index[v]) * 2 * N * N * N + 2 * t + (positive ? 1 : 2);
  }
  std::size_t placement_base() const { return induction_base() + internal.size() * 2 * N * N * N; }
  std::size_t placement_clause(std::uint32_t v, std::size_t t) const { return placement_base() + (v - 1) * N + t; }
  std::size_t total() const { return placement_base() + N * N; }

  enum class Family { Root, Sink, Induction, Placement };
  struct Info {
    Family family;
    std::uint32_t vertex = 0;  // sink, internal vertex or placement vertex
    std::size_t i = 0, j = 0, k = 0;
    bool positive = false;
  };
  Info classify(std::size_t cid) const {
    if (cid < 1 || cid > total()) throw std::out_of_range("clause id out of range");
    std::size_t x = cid - 1;
    if (x < N) return {Family::Root, 0, x + 1};
    x -= N;
    if (x < sinks.size() * N) return {Family::Sink, sinks[x / N], x % N + 1};
    x -= sinks.size() * N;
    std::size_t per = 2 * N * N * N;
    if (x < internal.size() * per) {
      Info f{Family::Induction, internal[x / per]};
      std::size_t t = (x % per) / 2;
      f.positive = (x % 2) == 0;
      f.i = t / (N * N) + 1;
      f.j = (t / N) % N + 1;
      f.k = t % N + 1;
      return f;
    }
    x -= internal.size() * per;
    return {Family::Placement, static_cast<std::uint32_t>(x / N + 1), x % N + 1};
  }
};

inline std::vector<Clause> stone_induction_pair(const StoneVars& V, std::uint32_t v, std::uint32_t u, std::uint32_t w,
                                                std::size_t i, std::size_t j, std::size_t k, std::uint32_t rho) {
  Clause base;
  push_literal(base, -static_cast<std::int32_t>(V.P(u, i)));
  push_literal(base, -static_cast<std::int32_t>(V.R(i)));
  push_literal(base, -static_cast<std::int32_t>(V.P(w, j)));
  push_literal(base, -static_cast<std::int32_t>(V.R(j)));
  push_literal(base, -static_cast<std::int32_t>(V.P(v, k)));
  push_literal(base, static_cast<std::int32_t>(V.R(k)));
  Clause pos = base, neg = base;
  push_literal(pos, static_cast<std::int32_t>(rho));
  push_literal(neg, -static_cast<std::int32_t>(rho));
  return {pos, neg};
}

/// Stone(G, rho) in canonical clause order (see StoneLayout).
inline CnfFormula stone_formula(const Dag& g, const ObfuscationMap& rho) {
  g.validate();
  const std::size_t N = g.n_vertices;
  if (N < 2) throw std::invalid_argument("stone formula needs at least 2 vertices");
  if (rho.N() != N) throw std::invalid_argument("obfuscation map size differs from vertex count");
  if (rho.is_hashed()) throw std::invalid_argument("stone formulas need a tabulated obfuscation map");
  StoneVars V{N};
  CnfFormula f;
  f.nvars = V.count();
  auto lit = [](std::uint32_t x, bool positive) { return positive ? static_cast<std::int32_t>(x) : -static_cast<std::int32_t>(x); };
  for (std::size_t j = 1; j <= N; ++j) f.clauses.push_back({lit(V.P(g.root, j), false), lit(V.R(j), false)});
  for (auto s : g.sinks)
    for (std::size_t j = 1; j <= N; ++j) f.clauses.push_back({lit(V.P(s, j), false), lit(V.R(j), true)});
  for (auto v : g.internal_vertices()) {
    auto [u, w] = g.children[v - 1];
    for (std::size_t i = 1; i <= N; ++i)
      for (std::size_t j = 1; j <= N; ++j)
        for (std::size_t k = 1; k <= N; ++k) {
          auto pair = stone_induction_pair(V, v, u, w, i, j, k, rho(i, j, k));
          f.clauses.push_back(std::move(pair[0]));
          f.clauses.push_back(std::move(pair[1]));
        }
  }
  for (std::uint32_t v = 1; v <= N; ++v) {
    f.clauses.push_back({lit(V.P(v, 1), true), lit(V.Z(v, 1), false)});
    for (std::size_t j = 1; j + 1 <= N - 1; ++j)
      f.clauses.push_back({lit(V.Z(v, j), true), lit(V.P(v, j + 1), true), lit(V.Z(v, j + 1), false)});
    f.clauses.push_back({lit(V.Z(v, N - 1), true), lit(V.P(v, N), true)});
  }
  f.meta.kind = "stone";
  f.meta.N = N;
  f.meta.vertices = g.coords;
  f.meta.rho = rho.table();
  if (!g.coords.empty()) f.meta.n = g.coords.back().first;
  return f;
}

/// Clause `cid` of stone_formula(g, rho) built on its own, for formulas too
/// large to materialize.
inline Clause stone_clause(const Dag& g, const ObfuscationMap& rho, std::size_t cid) {
  const std::size_t N = g.n_vertices;
  StoneVars V{N};
  auto info = StoneLayout(g).classify(cid);
  auto lit = [](std::uint32_t x, bool positive) { return positive ? static_cast<std::int32_t>(x) : -static_cast<std::int32_t>(x); };
  switch (info.family) {
    case StoneLayout::Family::Root: return {lit(V.P(g.root, info.i), false), lit(V.R(info.i), false)};
    case StoneLayout::Family::Sink: return {lit(V.P(info.vertex, info.i), false), lit(V.R(info.i), true)};
    case StoneLayout::Family::Induction: {
      auto [u, w] = g.children[info.vertex - 1];
      auto pair = stone_induction_pair(V, info.vertex, u, w, info.i, info.j, info.k, rho(info.i, info.j, info.k));
      return info.positive ? pair[0] : pair[1];
    }
    default: break;
  }
  std::uint32_t v = info.vertex;
  std::size_t t = info.i;
  if (t == 1) return {lit(V.P(v, 1), true), lit(V.Z(v, 1), false)};
  if (t == N) return {lit(V.Z(v, N - 1), true), lit(V.P(v, N), true)};
  return {lit(V.Z(v, t - 1), true), lit(V.P(v, t), true), lit(V.Z(v, t), false)};
}

struct ObfuscationReport {
  std::size_t q = 0;
  std::size_t trials = 0;
  std::uint64_t witnessed = 0;  // (Q, X) pairs with a triple outside Q mapping to X
  std::uint64_t total = 0;
  double fraction() const { return total ? static_cast<double>(witnessed) / static_cast<double>(total) : 0.0; }
};

/// For random Q of size q, counts variables X hit by some i<j<k outside Q.
/// With q = 0 a single exact pass is made regardless of trials.
inline ObfuscationReport check_obfuscation(const ObfuscationMap& rho, std::size_t q, std::size_t trials, std::uint64_t seed) {
  const std::size_t N = rho.N();
  if (q >= N) throw std::invalid_argument("q must be smaller than N");
  ObfuscationReport rep{q, q == 0 ? 1 : trials};
  Rng rng(seed);
  for (std::size_t t = 0; t < rep.trials; ++t) {
    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), 1);
    for (std::size_t a = 0; a < q; ++a) std::swap(perm[a], perm[a + rng.below(N - a)]);
    std::vector<bool> inQ(N + 1, false);
    for (std::size_t a = 0; a < q; ++a) inQ[perm[a]] = true;
    std::vector<bool> hit(2 * N * N + 1, false);
    for (std::size_t i = 1; i <= N; ++i) {
      if (inQ[i]) continue;
      for (std::size_t j = i + 1; j <= N; ++j) {
        if (inQ[j]) continue;
        for (std::size_t k = j + 1; k <= N; ++k)
          if (!inQ[k]) hit[rho(i, j, k)] = true;
      }
    }
    for (std::size_t x = 1; x <= 2 * N * N; ++x) rep.witnessed += hit[x];
    rep.total += 2 * N * N;
  }
  return rep;
}

/// Number of lifted clauses C o g for clause C.
inline std::uint64_t lifted_family_size(const Clause& c, const Gadget& g) {
  std::uint64_t n = 1;
  for (auto l : c) n *= g.preimages(l < 0).size();
  return n;
}

/// Enumerates C o g: for every choice of d^i in g^{-1}(1 - c_i) (first literal
/// most significant, preimages ascending) emits the clause OR_k [Y^i_k != d^i_k].
/// Lifted variable for base variable x, bit k is (x-1)b + k.
template <class F>
void for_each_lifted_clause(const Clause& c, const Gadget& g, F&& f) {
  const int b = g.arity();
  std::vector<const std::vector<std::uint32_t>*> choices;
  for (auto l : c) choices.push_back(&g.preimages(l < 0));
  for (const auto* ch : choices)
    if (ch->empty()) return;
  std::vector<std::size_t> idx(c.size(), 0);
  Clause out;
  while (true) {
    out.clear();
    for (std::size_t i = 0; i < c.size(); ++i) {
      std::int32_t x = std::abs(c[i]);
      std::uint32_t d = (*choices[i])[idx[i]];
      for (int k = 1; k <= b; ++k) {
        std::int32_t y = (x - 1) * b + k;
        bool bit = (d >> (b - k)) & 1u;
        push_literal(out, bit ? -y : y);
      }
    }
    f(static_cast<const Clause&>(out));
    std::size_t i = c.size();
    while (i > 0) {
      --i;
      if (++idx[i] < choices[i]->size()) break;
      idx[i] = 0;
      if (i == 0) return;
    }
    if (c.empty()) return;
  }
}

inline std::uint64_t lifted_clause_count(const CnfFormula& f, const Gadget& g) {
  std::uint64_t n = 0;
  for (const auto& c : f.clauses) n += lifted_family_size(c, g);
  return n;
}

inline CnfFormula lift_formula(const CnfFormula& f, const Gadget& g) {
  if (g.is_constant()) throw std::invalid_argument("cannot lift with a constant gadget");
  CnfFormula out;
  out.nvars = f.nvars * static_cast<std::size_t>(g.arity());
  out.clauses.reserve(lifted_clause_count(f, g));
  for (const auto& c : f.clauses) for_each_lifted_clause(c, g, [&](const Clause& d) { out.clauses.push_back(d); });
  out.meta = f.meta;
  out.meta.kind = f.meta.kind.empty() ? "lifted" : f.meta.kind + "-lifted";
  out.meta.b = g.arity();
  out.meta.gadget = g.name();
  out.meta.gadget_table = g.table_string();
  return out;
}

inline void write_dimacs_header(std::ostream& os, std::size_t nvars, std::uint64_t nclauses) {
  os << "p cnf " << nvars << " " << nclauses << "\n";
}

inline void write_clause(std::ostream& os, const Clause& c) {
  for (auto l : c) os << l << " ";
  os << "0\n";
}

inline void write_dimacs(std::ostream& os, const CnfFormula& f) {
  write_dimacs_header(os, f.nvars, f.clauses.size());
  for (const auto& c : f.clauses) write_clause(os, c);
}

inline CnfFormula read_dimacs(std::istream& is) {
  CnfFormula f;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::size_t declared = 0;
  Clause cur;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == 'c') continue;
    if (line[first] == 'p') {
      if (header) throw ParseError(lineno, "duplicate header");
      std::istringstream hs(line.substr(first));
      std::string p, cnf, extra;
      long long nv = -1, nc = -1;
      if (!(hs >> p >> cnf >> nv >> nc) || p != "p" || cnf != "cnf" || nv < 0 || nc < 0 || (hs >> extra))
        throw ParseError(lineno, "malformed header, expected 'p cnf <vars> <clauses>'");
      f.nvars = static_cast<std::size_t>(nv);
      declared = static_cast<std::size_t>(nc);
      header = true;
      continue;
    }
    if (!header) throw ParseError(lineno, "clause before header");
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      long long x;
      std::size_t used = 0;
      try {
        x = std::stoll(tok, &used);
      } catch (const std::exception&) {
        throw ParseError(lineno, "expected an integer literal, got '" + tok + "'");
      }
      if (used != tok.size()) throw ParseError(lineno, "expected an integer literal, got '" + tok + "'");
      if (x == 0) {
        f.clauses.push_back(cur);
        cur.clear();
      } else {
        if (static_cast<std::size_t>(std::llabs(x)) > f.nvars) throw ParseError(lineno, "literal exceeds declared variable count");
        cur.push_back(static_cast<std::int32_t>(x));
      }
    }
  }
  if (!header) throw ParseError(lineno == 0 ? 1 : lineno, "missing header");
  if (!cur.empty()) throw ParseError(lineno, "last clause is not terminated by 0");
  if (f.clauses.size() != declared) throw ParseError(lineno, "clause count differs from header");
  return f;
}

/// Sidecar written next to a DIMACS file: generator parameters as JSON.
inline void write_meta(std::ostream& os, const FormulaMeta& m) {
  nlohmann::json j;
  j["kind"] = m.kind;
  j["n"] = m.n;
  j["N"] = m.N;
  j["b"] = m.b;
  j["seed"] = m.seed;
  j["gadget"] = m.gadget;
  j["gadget_table"] = m.gadget_table;
  nlohmann::json verts = nlohmann::json::array();
  for (auto [i, p] : m.vertices) verts.push_back({i, p});
  j["vertices"] = verts;
  j["rho"] = m.rho;
  os << j.dump(1) << "\n";
}

inline FormulaMeta read_meta(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("metadata is not valid JSON: ") + e.what());
  }
  FormulaMeta m;
  try {
    m.kind = j.at("kind").get<std::string>();
    m.n = j.at("n").get<int>();
    m.N = j.at("N").get<std::size_t>();
    m.b = j.at("b").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.gadget = j.at("gadget").get<std::string>();
    m.gadget_table = j.at("gadget_table").get<std::string>();
    for (const auto& v : j.at("vertices")) m.vertices.emplace_back(v.at(0).get<int>(), v.at(1).get<int>());
    m.rho = j.at("rho").get<std::vector<std::uint32_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("metadata field missing or mistyped: ") + e.what());
  }
  return m;
}

inline bool literal_true(std::int32_t lit, const std::vector<bool>& a) {
  bool v = a[static_cast<std::size_t>(std::abs(lit)) - 1];
  return lit > 0 ? v : !v;
}

/// Ids (1-based, ascending) of clauses falsified by a total assignment,
/// where a[x-1] is the value of variable x.
inline std::vector<std::size_t> falsified_clauses(const CnfFormula& f, const std::vector<bool>& a) {
  if (a.size() != f.nvars) throw std::invalid_argument("assignment length differs from variable count");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < f.clauses.size(); ++i) {
    bool sat = false;
    for (auto l : f.clauses[i])
      if (literal_true(l, a)) {
        sat = true;
        break;
      }
    if (!sat) out.push_back(i + 1);
  }
  return out;
}

/// Plain DPLL with unit propagation; a reference oracle for small formulas.
inline bool is_satisfiable(const CnfFormula& f) {
  std::vector<int> val(f.nvars + 1, -1);
  std::vector<std::int32_t> trail;
  std::function<bool()> solve = [&]() -> bool {
    std::size_t mark = trail.size();
    auto undo = [&]() {
      while (trail.size() > mark) {
        val[static_cast<std::size_t>(std::abs(trail.back()))] = -1;
        trail.pop_back();
      }
    };
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& c : f.clauses) {
        int unassigned = 0;
        std::int32_t last = 0;
        bool sat = false;
        for (auto l : c) {
          int v = val[static_cast<std::size_t>(std::abs(l))];
          if (v < 0) {
            ++unassigned;
            last = l;
          } else if ((v == 1) == (l > 0)) {
            sat = true;
            break;
          }
        }
        if (sat) continue;
        if (unassigned == 0) {
          undo();
          return false;
        }
        if (unassigned == 1) {
          val[static_cast<std::size_t>(std::abs(last))] = last > 0;
          trail.push_back(last);
          changed = true;
        }
      }
    }
    // Branch on a variable of the shortest clause not yet satisfied.
    std::size_t pick = 0;
    int best = INT_MAX;
    for (const auto& c : f.clauses) {
      int unassigned = 0;
      std::size_t var = 0;
      bool sat = false;
      for (auto l : c) {
        int v = val[static_cast<std::size_t>(std::abs(l))];
        if (v < 0) {
          ++unassigned;
          var = static_cast<std::size_t>(std::abs(l));
        } else if ((v == 1) == (l > 0)) {
          sat = true;
          break;
        }
      }
      if (!sat && unassigned < best) {
        best = unassigned;
        pick = var;
      }
    }
    if (pick == 0) return true;
    for (int b = 0; b < 2; ++b) {
      val[pick] = b;
      trail.push_back(b ? static_cast<std::int32_t>(pick) : -static_cast<std::int32_t>(pick));
      if (solve()) return true;
      val[pick] = -1;
      trail.pop_back();
    }
    undo();
    return false;
  };
  return solve();
}

/// Rebuilds the stone formula recorded in a sidecar (pyramid graphs only).
inline std::pair<Dag, ObfuscationMap> stone_instance_from_meta(const FormulaMeta& m) {
  if (m.kind != "stone" && m.kind != "stone-lifted") throw std::invalid_argument("metadata does not describe a stone formula");
  Dag g = pyramid(m.n);
  if (g.n_vertices != m.N) throw std::invalid_argument("metadata N does not match the pyramid");
  return {g, ObfuscationMap(m.N, m.rho)};
}

}  // namespace rlin
