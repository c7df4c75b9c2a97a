#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlin/bits.hpp"
#include "rlin/formulas.hpp"
#include "rlin/linclause.hpp"
#include "rlin/proof.hpp"
#include "rlin/rng.hpp"

namespace rlin {

enum class NodeKind : std::uint8_t { Query, Forget, Sink };

/// Node ids are 1-based. A query node follows child0 when <form, x> = 0.
struct LbpNode {
  NodeKind kind = NodeKind::Sink;
  Form form;
  std::uint32_t child0 = 0;
  std::uint32_t child1 = 0;  // forget nodes use child0 only
  std::uint32_t output = 0;  // sink: clause id
};

struct LinearBranchingProgram {
  std::size_t nvars = 0;
  std::uint32_t source = 0;
  std::vector<LbpNode> nodes;
  std::vector<AffineSpace> labels;  // optional, one per node

  const LbpNode& node(std::uint32_t id) const { return nodes.at(id - 1); }
  std::size_t size() const { return nodes.size(); }

  std::uint32_t add_query(Form f, std::uint32_t c0, std::uint32_t c1) {
    nodes.push_back({NodeKind::Query, normalize_form(std::move(f)), c0, c1, 0});
    return static_cast<std::uint32_t>(nodes.size());
  }
  std::uint32_t add_forget(std::uint32_t c) {
    nodes.push_back({NodeKind::Forget, {}, c, 0, 0});
    return static_cast<std::uint32_t>(nodes.size());
  }
  std::uint32_t add_sink(std::uint32_t out) {
    nodes.push_back({NodeKind::Sink, {}, 0, 0, out});
    return static_cast<std::uint32_t>(nodes.size());
  }

  std::vector<std::uint32_t> children(std::uint32_t id) const {
    const auto& n = node(id);
    switch (n.kind) {
      case NodeKind::Query: return {n.child0, n.child1};
      case NodeKind::Forget: return {n.child0};
      default: return {};
    }
  }

  BitVec form_vec(const Form& f) const {
    BitVec v(nvars);
    for (auto x : f) v.flip(x - 1);
    return v;
  }

  /// Nodes with every parent before its children; throws on a cycle.
  std::vector<std::uint32_t> topological_order() const {
    std::vector<int> state(nodes.size() + 1, 0);
    std::vector<std::uint32_t> post;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack;  // (node, next child)
    for (std::uint32_t s = 1; s <= nodes.size(); ++s) {
      if (state[s]) continue;
      stack.push_back({s, 0});
      state[s] = 1;
      while (!stack.empty()) {
        auto& [v, i] = stack.back();
        auto ch = children(v);
        if (i == ch.size()) {
          state[v] = 2;
          post.push_back(v);
          stack.pop_back();
          continue;
        }
        std::uint32_t c = ch[i++];
        if (c < 1 || c > nodes.size()) throw std::invalid_argument("node reference out of range");
        if (state[c] == 1) throw std::invalid_argument("program has a cycle");
        if (state[c] == 0) {
          state[c] = 1;
          stack.push_back({c, 0});
        }
      }
    }
    std::reverse(post.begin(), post.end());
    return post;
  }
};

/// Reverses a ResLin refutation into a branching program for Search(f):
/// node s is step s, the source is the last step, resolve steps become
/// queries (answer 0 leads to the premise holding form = 1), weakenings
/// become forget nodes and axioms become sinks. Labels are the falsifying
/// spaces of the step clauses when requested.
inline LinearBranchingProgram proof_to_lbp(const CnfFormula& f, const ProofTrace& p, bool with_labels = true) {
  CheckOptions opt;
  opt.mode = CheckMode::ResLin;
  auto chk = check_proof(f, p, opt);
  if (!chk.ok) throw std::invalid_argument("proof rejected: " + chk.message);
  LinearBranchingProgram P;
  P.nvars = p.nvars;
  P.source = static_cast<std::uint32_t>(p.steps.size());
  for (const auto& st : p.steps) {
    switch (st.kind) {
      case StepKind::Axiom: P.add_sink(st.a); break;
      case StepKind::Resolve: P.add_query(st.form, st.b, st.a); break;
      case StepKind::Weaken: P.add_forget(st.a); break;
    }
  }
  if (with_labels) {
    P.labels.reserve(chk.clauses.size());
    for (const auto& c : chk.clauses) {
      AffineSpace a(p.nvars);
      c.for_each([&](EqView e) { a.add(P.form_vec(Form(e.form.begin(), e.form.end())), !e.bit); });
      P.labels.push_back(std::move(a));
    }
  }
  return P;
}

struct PrePost {
  std::vector<RowSpace> pre;   // index id-1
  std::vector<RowSpace> post;  // includes the node's own query
  std::vector<std::size_t> max_queries;  // most queries on a source path; SIZE_MAX if unreachable
};

inline PrePost pre_post_spaces(const LinearBranchingProgram& P) {
  const std::size_t n = P.size();
  PrePost r;
  r.pre.assign(n, RowSpace(P.nvars));
  r.post.assign(n, RowSpace(P.nvars));
  r.max_queries.assign(n, SIZE_MAX);
  auto order = P.topological_order();
  r.max_queries[P.source - 1] = 0;
  for (auto v : order) {
    const auto& nd = P.node(v);
    bool q = nd.kind == NodeKind::Query;
    if (r.max_queries[v - 1] == SIZE_MAX) continue;  // unreachable parents add no paths
    for (auto c : P.children(v)) {
      r.pre[c - 1].insert_all(r.pre[v - 1]);
      if (q) r.pre[c - 1].insert(P.form_vec(nd.form));
      std::size_t t = r.max_queries[v - 1] + (q ? 1 : 0);
      auto& m = r.max_queries[c - 1];
      if (m == SIZE_MAX || t > m) m = t;
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto v = *it;
    const auto& nd = P.node(v);
    if (nd.kind == NodeKind::Query) r.post[v - 1].insert(P.form_vec(nd.form));
    for (auto c : P.children(v)) r.post[v - 1].insert_all(r.post[c - 1]);
  }
  return r;
}

struct RegularityReport {
  bool bottom = true;
  bool top = true;
  bool strong = true;
  std::string bottom_witness;
  std::string top_witness;
  std::string strong_witness;
};

inline RegularityReport regularity_check(const LinearBranchingProgram& P, const PrePost& pp) {
  RegularityReport r;
  for (std::uint32_t v = 1; v <= P.size(); ++v) {
    const auto& nd = P.node(v);
    const auto& pre = pp.pre[v - 1];
    const auto& post = pp.post[v - 1];
    if (nd.kind == NodeKind::Query) {
      BitVec f = P.form_vec(nd.form);
      for (auto c : P.children(v))
        if (r.bottom && pp.post[c - 1].contains(f)) {
          r.bottom = false;
          r.bottom_witness = "edge " + std::to_string(v) + "->" + std::to_string(c) + ": query " + LinearClause::form_string(nd.form) +
                             " lies in Post(" + std::to_string(c) + ")";
        }
      if (r.top && pre.contains(f)) {
        r.top = false;
        r.top_witness = "node " + std::to_string(v) + ": query " + LinearClause::form_string(nd.form) + " lies in Pre(" + std::to_string(v) + ")";
      }
    }
    if (r.strong) {
      RowSpace sum = pre;
      sum.insert_all(post);
      if (sum.dim() != pre.dim() + post.dim()) {
        r.strong = false;
        r.strong_witness = "node " + std::to_string(v) + ": Pre and Post intersect nontrivially";
      }
    }
  }
  return r;
}

inline RegularityReport regularity_check(const LinearBranchingProgram& P) { return regularity_check(P, pre_post_spaces(P)); }

struct TraceResult {
  std::uint32_t node = 0;
  std::size_t queries = 0;               // answers consumed
  std::vector<std::uint32_t> path;       // visited nodes, source first
  std::vector<std::pair<Form, bool>> answers;
};

/// Follows beta from the source. Forget nodes cost nothing; stops right after
/// the t-th query answer or at a sink.
inline TraceResult trace(const LinearBranchingProgram& P, const BitVec& beta, std::size_t t) {
  if (beta.size() != P.nvars) throw std::invalid_argument("input length differs from variable count");
  TraceResult r;
  std::uint32_t v = P.source;
  r.path.push_back(v);
  while (true) {
    const auto& nd = P.node(v);
    if (nd.kind == NodeKind::Sink) break;
    if (nd.kind == NodeKind::Forget) {
      v = nd.child0;
    } else {
      if (r.queries == t) break;
      bool a = P.form_vec(nd.form).dot(beta);
      r.answers.push_back({nd.form, a});
      ++r.queries;
      v = a ? nd.child1 : nd.child0;
    }
    r.path.push_back(v);
  }
  r.node = v;
  return r;
}

/// Whether dim Post(v) <= nvars - t holds for every reachable node, with t
/// the largest number of queries on a source path to v.
inline std::optional<std::uint32_t> post_dimension_violation(const LinearBranchingProgram& P, const PrePost& pp) {
  for (std::uint32_t v = 1; v <= P.size(); ++v) {
    std::size_t t = pp.max_queries[v - 1];
    if (t == SIZE_MAX) continue;
    if (t > P.nvars || pp.post[v - 1].dim() > P.nvars - t) return v;
  }
  return std::nullopt;
}

/// Checks A_u ∩ A ⊆ A_v for every pair u, v on a traced path, where A is the
/// solution space of the answers given between them. Needs labels.
inline bool path_containment_holds(const LinearBranchingProgram& P, const TraceResult& tr) {
  if (P.labels.size() != P.size()) throw std::invalid_argument("program has no labels");
  for (std::size_t a = 0; a < tr.path.size(); ++a) {
    AffineSpace acc = P.labels[tr.path[a] - 1];
    std::size_t qi = 0;
    for (std::size_t k = 0; k < a; ++k)
      if (P.node(tr.path[k]).kind == NodeKind::Query) ++qi;
    for (std::size_t b = a + 1; b < tr.path.size(); ++b) {
      const auto& prev = P.node(tr.path[b - 1]);
      if (prev.kind == NodeKind::Query) {
        const auto& [f, ans] = tr.answers[qi++];
        acc.add(P.form_vec(f), ans);
      }
      if (!acc.subset_of(P.labels[tr.path[b] - 1])) return false;
    }
  }
  return true;
}

inline void write_lbp(std::ostream& os, const LinearBranchingProgram& P) {
  os << "lbp " << P.nvars << " " << P.size() << " " << P.source << "\n";
  for (const auto& n : P.nodes) {
    switch (n.kind) {
      case NodeKind::Query: os << "q " << LinearClause::form_string(n.form) << " " << n.child0 << " " << n.child1 << "\n"; break;
      case NodeKind::Forget: os << "f " << n.child0 << "\n"; break;
      case NodeKind::Sink: os << "s " << n.output << "\n"; break;
    }
  }
}

inline LinearBranchingProgram read_lbp(std::istream& is) {
  LinearBranchingProgram P;
  std::string line;
  std::size_t lineno = 0, declared = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string k;
    ls >> k;
    if (!header) {
      if (k != "lbp" || !(ls >> P.nvars >> declared >> P.source)) throw ParseError(lineno, "expected header 'lbp <nvars> <nodes> <source>'");
      header = true;
      continue;
    }
    try {
      if (k == "q") {
        std::string f;
        std::uint32_t a, b;
        if (!(ls >> f >> a >> b)) throw ParseError(lineno, "query needs a form and two children");
        P.add_query(LinearClause::parse_form(f), a, b);
      } else if (k == "f") {
        std::uint32_t a;
        if (!(ls >> a)) throw ParseError(lineno, "forget needs a child");
        P.add_forget(a);
      } else if (k == "s") {
        std::uint32_t a;
        if (!(ls >> a)) throw ParseError(lineno, "sink needs a clause id");
        P.add_sink(a);
      } else {
        throw ParseError(lineno, "unknown node kind '" + k + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!header) throw ParseError(1, "missing header");
  if (P.size() != declared) throw ParseError(lineno, "node count differs from header");
  if (P.source < 1 || P.source > P.size()) throw ParseError(1, "source out of range");
  return P;
}

/// Random parity decision tree of the given depth whose depth-d queries come
/// from the d-th summand of a random direct-sum decomposition of the forms,
/// so every root-to-leaf path queries independent forms and Pre and Post never
/// meet. Labels are the solution spaces of the answers leading to each node.
inline LinearBranchingProgram layered_random_pdt(std::size_t nvars, std::size_t depth, Rng& rng) {
  if (depth == 0 || depth > nvars) throw std::invalid_argument("depth must be in 1..nvars");
  // Random invertible change of basis: rows of an independent family.
  std::vector<BitVec> basis;
  RowSpace span(nvars);
  while (basis.size() < nvars) {
    BitVec v(nvars);
    for (std::size_t i = 0; i < nvars; ++i) v.set(i, rng.bit());
    if (span.insert(v)) basis.push_back(v);
  }
  // Layer d owns basis vectors [cut[d], cut[d+1]).
  std::vector<std::size_t> cut(depth + 1, 0);
  for (std::size_t d = 1; d < depth; ++d) cut[d] = d * nvars / depth;
  cut[depth] = nvars;
  auto form_of = [&](const BitVec& v) {
    Form f;
    for (auto i : v.support()) f.push_back(static_cast<std::uint32_t>(i + 1));
    return f;
  };
  LinearBranchingProgram P;
  P.nvars = nvars;
  std::uint32_t leaves = 0;
  auto build = [&](auto& self, std::size_t d, const AffineSpace& here) -> std::uint32_t {
    std::uint32_t id;
    if (d == depth) {
      id = P.add_sink(++leaves);
    } else {
      BitVec q(nvars);
      while (q.is_zero())
        for (std::size_t i = cut[d]; i < cut[d + 1]; ++i)
          if (rng.bit()) q ^= basis[i];
      AffineSpace a0 = here, a1 = here;
      a0.add(q, false);
      a1.add(q, true);
      std::uint32_t c0 = self(self, d + 1, a0);
      std::uint32_t c1 = self(self, d + 1, a1);
      id = P.add_query(form_of(q), c0, c1);
    }
    if (P.labels.size() < id) P.labels.resize(id);
    P.labels[id - 1] = here;
    return id;
  };
  P.source = build(build, 0, AffineSpace(nvars));
  return P;
}

}  // namespace rlin
