#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlin/derive.hpp"
#include "rlin/formulas.hpp"
#include "rlin/gadgets.hpp"
#include "rlin/proof.hpp"

namespace rlin {

/// Constant-width resolution refutation of Stone(G, rho). The obfuscation
/// literal of every induction pair is resolved away, S(v) = {-P(v,j) v R(j)}
/// is propagated from the sinks to the root, and the root clauses finish the
/// refutation through the placement chains.
inline ProofTrace refute_stone(const Dag& g, const ObfuscationMap& rho) {
  g.validate();
  const std::size_t N = g.n_vertices;
  if (N < 2) throw std::invalid_argument("refute_stone needs at least 2 vertices");
  if (rho.N() != N) throw std::invalid_argument("obfuscation map size differs from vertex count");
  StoneVars V{N};
  StoneLayout L(g);
  ProofTrace p;
  p.nvars = V.count();

  std::map<std::size_t, std::uint32_t> axiom_step;
  auto ax = [&](std::size_t cid) {
    auto [it, fresh] = axiom_step.emplace(cid, 0);
    if (fresh) it->second = p.axiom(static_cast<std::uint32_t>(cid));
    return it->second;
  };

  // Derives C from {C v -P(x,j)}_j (steps d[j-1]) through x's placement chain.
  auto resolve_p = [&](const std::vector<std::uint32_t>& d, std::uint32_t x) {
    std::uint32_t cur = p.resolve(d[0], ax(L.placement_clause(x, 1)), V.P(x, 1));
    for (std::size_t t = 1; t + 1 <= N - 1; ++t) {
      std::uint32_t c = p.resolve(cur, ax(L.placement_clause(x, t + 1)), V.Z(x, t));
      cur = p.resolve(d[t], c, V.P(x, t + 1));
    }
    std::uint32_t c = p.resolve(cur, ax(L.placement_clause(x, N)), V.Z(x, N - 1));
    return p.resolve(d[N - 1], c, V.P(x, N));
  };

  // S[v][j-1] is the step holding -P(v,j) v R(j).
  std::vector<std::vector<std::uint32_t>> S(N + 1);
  for (auto s : g.sinks)
    for (std::size_t j = 1; j <= N; ++j) S[s].push_back(ax(L.sink_clause(s, j)));

  auto order = g.bottom_up_order();
  for (auto v : order) {
    if (g.is_sink(v)) continue;
    auto [u, w] = g.children[v - 1];
    // D[(i,k)][j-1]: -P(u,i) v -P(w,j) v -P(v,k) v R(k).
    std::vector<std::vector<std::uint32_t>> D(N * N, std::vector<std::uint32_t>(N));
    for (std::size_t i = 1; i <= N; ++i)
      for (std::size_t j = 1; j <= N; ++j)
        for (std::size_t k = 1; k <= N; ++k) {
          std::uint32_t pos = ax(L.induction_clause(v, i, j, k, true));
          std::uint32_t neg = ax(L.induction_clause(v, i, j, k, false));
          std::uint32_t base = p.resolve(neg, pos, rho(i, j, k));
          std::uint32_t t = p.resolve(base, S[u][i - 1], V.R(i));
          if (j != i) t = p.resolve(t, S[w][j - 1], V.R(j));
          D[(i - 1) * N + (k - 1)][j - 1] = t;
        }
    std::vector<std::vector<std::uint32_t>> E(N, std::vector<std::uint32_t>(N));
    for (std::size_t i = 1; i <= N; ++i)
      for (std::size_t k = 1; k <= N; ++k) E[k - 1][i - 1] = resolve_p(D[(i - 1) * N + (k - 1)], w);
    for (std::size_t k = 1; k <= N; ++k) S[v].push_back(resolve_p(E[k - 1], u));
  }

  std::vector<std::uint32_t> unit(N);
  for (std::size_t j = 1; j <= N; ++j) unit[j - 1] = p.resolve(ax(L.root_clause(j)), S[g.root][j - 1], V.R(j));
  resolve_p(unit, g.root);
  return p;
}

namespace detail {

/// Lifted clause for canonical base literals `lits` and per-literal block
/// values `choice` (same encoding as for_each_lifted_clause).
inline Clause lifted_member(const Clause& lits, const std::vector<std::uint32_t>& choice, int b) {
  Clause out;
  for (std::size_t i = 0; i < lits.size(); ++i) {
    std::int32_t x = std::abs(lits[i]);
    for (int k = 1; k <= b; ++k) {
      std::int32_t y = (x - 1) * b + k;
      bool bit = (choice[i] >> (b - k)) & 1u;
      push_literal(out, bit ? -y : y);
    }
  }
  return out;
}

/// Mixed-radix enumeration of member choices, first literal most significant.
struct Family {
  Clause lits;
  std::vector<const std::vector<std::uint32_t>*> options;
  std::vector<std::uint32_t> steps;

  Family(Clause l, const Gadget& g) : lits(std::move(l)) {
    for (auto x : lits) options.push_back(&g.preimages(x < 0));
  }
  std::size_t size() const {
    std::size_t n = 1;
    for (auto* o : options) n *= o->size();
    return n;
  }
  std::vector<std::uint32_t> choice(std::size_t idx) const {
    std::vector<std::uint32_t> c(lits.size());
    for (std::size_t i = lits.size(); i-- > 0;) {
      c[i] = (*options[i])[idx % options[i]->size()];
      idx /= options[i]->size();
    }
    return c;
  }
  std::size_t index(const std::vector<std::uint32_t>& c) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      const auto& o = *options[i];
      auto it = std::lower_bound(o.begin(), o.end(), c[i]);
      idx = idx * o.size() + static_cast<std::size_t>(it - o.begin());
    }
    return idx;
  }
  std::ptrdiff_t position(std::int32_t lit) const {
    for (std::size_t i = 0; i < lits.size(); ++i)
      if (lits[i] == lit) return static_cast<std::ptrdiff_t>(i);
    return -1;
  }
};

inline bool has_complementary(const Clause& c) {
  for (auto l : c)
    if (std::find(c.begin(), c.end(), -l) != c.end()) return true;
  return false;
}

}  // namespace detail

/// Largest (width + 1) * b for which refute_lifted builds sub-derivations.
inline constexpr std::size_t kMaxLiftedVariables = 24;

/// Refutation of lift_formula(f, g) that follows a resolution refutation of
/// f step by step. For every base clause C the steps deriving all of C o g are
/// kept; each resolution (A v x), (B v -x) -> A v B is simulated by one
/// derive_semantic fragment per member of (A v B) o g.
inline ProofTrace refute_lifted(const CnfFormula& f, const ProofTrace& base, const Gadget& g) {
  if (g.is_constant()) throw std::invalid_argument("cannot lift with a constant gadget");
  CheckOptions opt;
  opt.mode = CheckMode::Resolution;
  auto chk = check_proof(f, base, opt);
  if (!chk.ok) throw std::invalid_argument("base proof rejected: " + chk.message);
  const auto b = static_cast<std::size_t>(g.arity());
  if ((chk.stats.width + 1) * b > kMaxLiftedVariables)
    throw std::invalid_argument("width too large: (" + std::to_string(chk.stats.width) + " + 1) * " + std::to_string(b) +
                                " lifted variables exceed the cap of 24");

  std::vector<std::uint64_t> offset(f.clauses.size() + 1, 0);
  for (std::size_t c = 0; c < f.clauses.size(); ++c) offset[c + 1] = offset[c] + lifted_family_size(f.clauses[c], g);

  ProofTrace out;
  out.nvars = f.nvars * b;
  const int bi = g.arity();
  std::vector<detail::Family> fam;
  fam.reserve(base.steps.size());

  for (std::size_t s = 0; s < base.steps.size(); ++s) {
    const auto& st = base.steps[s];
    Clause lits = *chk.clauses[s].to_literals();
    fam.emplace_back(lits, g);
    auto& F = fam.back();
    const std::size_t size = F.size();
    F.steps.resize(size);

    if (st.kind == StepKind::Axiom) {
      const Clause& orig = f.clauses[st.a - 1];
      // CNF literal position -> canonical position.
      std::vector<std::size_t> where(orig.size());
      for (std::size_t q = 0; q < orig.size(); ++q) where[q] = static_cast<std::size_t>(F.position(orig[q]));
      for (std::size_t idx = 0; idx < size; ++idx) {
        auto c = F.choice(idx);
        std::uint64_t cnf_idx = 0;
        for (std::size_t q = 0; q < orig.size(); ++q) {
          const auto& o = *F.options[where[q]];
          cnf_idx = cnf_idx * o.size() + static_cast<std::uint64_t>(std::lower_bound(o.begin(), o.end(), c[where[q]]) - o.begin());
        }
        F.steps[idx] = out.axiom(static_cast<std::uint32_t>(offset[st.a - 1] + cnf_idx + 1));
      }
      continue;
    }

    if (st.kind == StepKind::Weaken) {
      const auto& P = fam[st.a - 1];
      for (std::size_t idx = 0; idx < size; ++idx) {
        auto c = F.choice(idx);
        LinearClause target = LinearClause::from_literals(detail::lifted_member(F.lits, c, bi));
        std::uint32_t from = P.steps[0];
        if (!detail::has_complementary(F.lits)) {
          std::vector<std::uint32_t> pc(P.lits.size());
          for (std::size_t q = 0; q < P.lits.size(); ++q) {
            auto at = F.position(P.lits[q]);
            if (at < 0) throw std::invalid_argument("refute_lifted supports only subclause weakening");
            pc[q] = c[static_cast<std::size_t>(at)];
          }
          from = P.steps[P.index(pc)];
        }
        F.steps[idx] = out.weaken(from, std::move(target));
      }
      continue;
    }

    const auto x = static_cast<std::int32_t>(st.form[0]);
    const auto& P1 = fam[st.a - 1];  // contains -x
    const auto& P2 = fam[st.b - 1];  // contains x
    if (detail::has_complementary(F.lits)) {
      for (std::size_t idx = 0; idx < size; ++idx)
        F.steps[idx] = out.weaken(P1.steps[0], LinearClause::from_literals(detail::lifted_member(F.lits, F.choice(idx), bi)));
      continue;
    }
    for (std::size_t idx = 0; idx < size; ++idx) {
      auto c = F.choice(idx);
      Clause target = detail::lifted_member(F.lits, c, bi);
      std::vector<Clause> premises;
      std::vector<std::uint32_t> pstep;
      for (const auto* P : {&P1, &P2}) {
        const std::int32_t pivot = P == &P1 ? -x : x;
        auto pp = P->position(pivot);
        std::vector<std::uint32_t> pc(P->lits.size());
        for (std::size_t q = 0; q < P->lits.size(); ++q)
          if (static_cast<std::ptrdiff_t>(q) != pp) pc[q] = c[static_cast<std::size_t>(F.position(P->lits[q]))];
        for (auto d : *P->options[static_cast<std::size_t>(pp)]) {
          pc[static_cast<std::size_t>(pp)] = d;
          premises.push_back(detail::lifted_member(P->lits, pc, bi));
          pstep.push_back(P->steps[P->index(pc)]);
        }
      }
      auto frag = derive_semantic(premises, target);
      F.steps[idx] = embed_fragment(out, frag, pstep);
    }
  }
  if (!chk.clauses.back().empty()) throw std::invalid_argument("base proof does not end in the empty clause");
  return prune_unused(out);
}

}  // namespace rlin
