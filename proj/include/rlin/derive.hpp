#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "rlin/formulas.hpp"
#include "rlin/proof.hpp"

namespace rlin {

class ImplicationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Largest variable count accepted by derive_semantic.
inline constexpr std::size_t kMaxDeriveVariables = 24;

/// Tree-like resolution derivation of `target` from `premises`. Axiom steps of
/// the fragment name premises by 1-based index. Target literals are fixed to
/// false, the remaining variables are queried in ascending order, and the
/// decision tree is turned into resolution steps; branches whose clause does
/// not mention the queried variable are skipped. A final weakening step is
/// added when the derived clause is a proper subclause of the target.
inline ProofTrace derive_semantic(const std::vector<Clause>& premises, const Clause& target) {
  std::vector<std::uint32_t> vars;
  auto note = [&](const Clause& c) {
    for (auto l : c) vars.push_back(static_cast<std::uint32_t>(std::abs(l)));
  };
  for (const auto& c : premises) note(c);
  note(target);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  if (vars.size() > kMaxDeriveVariables) throw std::invalid_argument("derive_semantic: more than 24 variables");

  ProofTrace out;
  out.nvars = vars.empty() ? 0 : vars.back();
  LinearClause tgt = LinearClause::from_literals(target);

  auto pos = [&](std::int32_t l) {
    return static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), static_cast<std::uint32_t>(std::abs(l))) - vars.begin());
  };
  // val: -1 unassigned, else 0/1.
  std::vector<int> val(vars.size(), -1);
  for (auto l : target) {
    int want = l > 0 ? 0 : 1;
    int& v = val[pos(l)];
    if (v >= 0 && v != want) {
      // Tautological target: anything implies it.
      if (premises.empty()) throw ImplicationError("derive_semantic: no premise to weaken");
      out.weaken(out.axiom(1), tgt);
      return out;
    }
    v = want;
  }
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (val[i] < 0) free.push_back(i);

  auto falsified = [&](const Clause& c) {
    for (auto l : c) {
      int v = val[pos(l)];
      if (v < 0 || (v == 1) == (l > 0)) return false;
    }
    return true;
  };

  struct Node {
    std::size_t premise = 0;  // leaf: 1-based premise index
    std::uint32_t var = 0;
    std::unique_ptr<Node> child[2];
    Clause clause;  // sorted literals
  };
  auto sorted = [](Clause c) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
  };
  auto has = [](const Clause& c, std::int32_t l) { return std::binary_search(c.begin(), c.end(), l); };

  auto build = [&](auto& self, std::size_t depth) -> std::unique_ptr<Node> {
    for (std::size_t p = 0; p < premises.size(); ++p)
      if (falsified(premises[p])) {
        auto n = std::make_unique<Node>();
        n->premise = p + 1;
        n->clause = sorted(premises[p]);
        return n;
      }
    if (depth == free.size()) throw ImplicationError("derive_semantic: premises do not imply the target");
    std::size_t i = free[depth];
    auto y = static_cast<std::int32_t>(vars[i]);
    std::unique_ptr<Node> ch[2];
    for (int b = 0; b < 2; ++b) {
      val[i] = b;
      ch[b] = self(self, depth + 1);
      val[i] = -1;
      // Branch y=b falsifies its clause, so it can mention y only as the
      // literal made false by b; without it the subtree already suffices.
      if (!has(ch[b]->clause, b ? -y : y)) return std::move(ch[b]);
    }
    auto n = std::make_unique<Node>();
    n->var = vars[i];
    Clause merged;
    for (auto l : ch[1]->clause)
      if (l != -y) merged.push_back(l);
    for (auto l : ch[0]->clause)
      if (l != y) merged.push_back(l);
    n->clause = sorted(std::move(merged));
    n->child[0] = std::move(ch[0]);
    n->child[1] = std::move(ch[1]);
    return n;
  };
  auto root = build(build, 0);

  auto emit = [&](auto& self, const Node& n) -> std::uint32_t {
    if (n.premise) return out.axiom(static_cast<std::uint32_t>(n.premise));
    std::uint32_t s1 = self(self, *n.child[1]);
    std::uint32_t s0 = self(self, *n.child[0]);
    return out.resolve(s1, s0, n.var);
  };
  emit(emit, *root);
  if (!(LinearClause::from_literals(root->clause) == tgt)) out.weaken(static_cast<std::uint32_t>(out.steps.size()), tgt);
  return out;
}

/// Appends a derive_semantic fragment to `proof`, mapping fragment axiom i to
/// the existing step premise_steps[i-1]. Returns the step of the last clause.
inline std::uint32_t embed_fragment(ProofTrace& proof, const ProofTrace& frag, const std::vector<std::uint32_t>& premise_steps) {
  std::vector<std::uint32_t> map(frag.steps.size() + 1, 0);
  std::uint32_t last = 0;
  for (std::size_t s = 0; s < frag.steps.size(); ++s) {
    const auto& st = frag.steps[s];
    switch (st.kind) {
      case StepKind::Axiom: last = premise_steps.at(st.a - 1); break;
      case StepKind::Resolve: last = proof.resolve(map[st.a], map[st.b], st.form); break;
      case StepKind::Weaken: last = proof.weaken(map[st.a], st.target); break;
    }
    map[s + 1] = last;
  }
  return last;
}

}  // namespace rlin
