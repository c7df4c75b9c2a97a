#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rlin/formulas.hpp"
#include "rlin/linclause.hpp"
#include "rlin/rng.hpp"

namespace rlin {

enum class StepKind : std::uint8_t { Axiom, Resolve, Weaken };

/// Premise ids are 1-based step indices; an axiom's `a` is a 1-based clause id.
struct ProofStep {
  StepKind kind = StepKind::Axiom;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  Form form;            // resolved form
  LinearClause target;  // weakening target
};

struct ProofTrace {
  std::size_t nvars = 0;
  std::vector<ProofStep> steps;

  std::uint32_t axiom(std::uint32_t cid) {
    steps.push_back({StepKind::Axiom, cid, 0, {}, {}});
    return static_cast<std::uint32_t>(steps.size());
  }
  std::uint32_t resolve(std::uint32_t s1, std::uint32_t s2, Form form) {
    steps.push_back({StepKind::Resolve, s1, s2, std::move(form), {}});
    return static_cast<std::uint32_t>(steps.size());
  }
  std::uint32_t resolve(std::uint32_t s1, std::uint32_t s2, std::uint32_t var) { return resolve(s1, s2, Form{var}); }
  std::uint32_t weaken(std::uint32_t s, LinearClause target) {
    steps.push_back({StepKind::Weaken, s, 0, {}, std::move(target)});
    return static_cast<std::uint32_t>(steps.size());
  }
  std::size_t length() const { return steps.size(); }
};

enum class CheckMode { Resolution, ResLin, TreeLike };

inline std::optional<CheckMode> parse_mode(const std::string& s) {
  if (s == "resolution") return CheckMode::Resolution;
  if (s == "reslin") return CheckMode::ResLin;
  if (s == "tree-like" || s == "treelike") return CheckMode::TreeLike;
  return std::nullopt;
}

struct CheckOptions {
  CheckMode mode = CheckMode::ResLin;
  bool require_refutation = true;
  bool compute_regularity = false;
  unsigned jobs = 1;
  /// Regularity needs one nvars-bit set per step; skipped above this size.
  std::size_t regularity_memory_limit = std::size_t{1} << 30;
};

struct ProofStats {
  std::size_t length = 0;
  std::size_t width = 0;
  std::optional<bool> regular;  // resolution mode only, when requested
};

struct CheckResult {
  bool ok = false;
  std::size_t failed_step = 0;  // 1-based, 0 when the failure is not tied to a step
  std::string message;
  ProofStats stats;
  std::vector<LinearClause> clauses;  // derived clause of every step when ok
};

namespace detail {

inline bool all_single_variable(const LinearClause& c) { return c.is_ordinary(); }

}  // namespace detail

/// Verifies a trace against a formula. Steps are computed in order; semantic
/// weakening checks run on `jobs` threads afterwards. The reported failure
/// is always the lowest failing step, so the verdict does not depend on jobs.
inline CheckResult check_proof(const CnfFormula& f, const ProofTrace& p, const CheckOptions& opt = {}) {
  CheckResult res;
  const auto& steps = p.steps;
  res.stats.length = steps.size();
  if (steps.empty()) {
    res.message = "proof has no steps";
    return res;
  }
  std::vector<LinearClause> cl(steps.size());
  std::vector<std::uint32_t> uses(steps.size(), 0);
  std::size_t first_bad = steps.size() + 1;
  std::string bad_msg;
  auto fail = [&](std::size_t s, std::string m) {
    if (s < first_bad) {
      first_bad = s;
      bad_msg = std::move(m);
    }
  };
  auto ref_ok = [&](std::size_t s, std::uint32_t r) {
    if (r < 1 || r >= s) {
      fail(s, "step " + std::to_string(s) + ": premise " + std::to_string(r) + " does not refer to an earlier step");
      return false;
    }
    if (opt.mode == CheckMode::TreeLike && ++uses[r - 1] > 1) {
      fail(s, "step " + std::to_string(s) + ": premise " + std::to_string(r) + " used twice in a tree-like proof");
      return false;
    }
    return true;
  };
  auto var_ok = [&](std::span<const std::uint32_t> form) {
    return std::all_of(form.begin(), form.end(), [&](std::uint32_t x) { return x >= 1 && x <= p.nvars; });
  };
  if (p.nvars != f.nvars) fail(1, "trace declares " + std::to_string(p.nvars) + " variables, formula has " + std::to_string(f.nvars));

  for (std::size_t s = 1; s <= steps.size() && s < first_bad; ++s) {
    const auto& st = steps[s - 1];
    const std::string at = "step " + std::to_string(s) + ": ";
    switch (st.kind) {
      case StepKind::Axiom:
        if (st.a < 1 || st.a > f.clauses.size()) {
          fail(s, at + "axiom " + std::to_string(st.a) + " is not a clause of the formula");
          break;
        }
        cl[s - 1] = LinearClause::from_literals(f.clauses[st.a - 1]);
        break;
      case StepKind::Resolve: {
        if (!ref_ok(s, st.a) || !ref_ok(s, st.b)) break;
        if (opt.mode == CheckMode::Resolution && st.form.size() != 1) {
          fail(s, at + "resolution mode needs a single-variable pivot");
          break;
        }
        if (st.form.empty() || !var_ok(st.form) || normalize_form(st.form) != st.form) {
          fail(s, at + "pivot form is empty, out of range or not canonical");
          break;
        }
        auto r = resolve(cl[st.a - 1], cl[st.b - 1], st.form);
        if (!r) {
          fail(s, at + "invalid resolvent: premise " + std::to_string(st.a) + " needs " + LinearClause::form_string(st.form) +
                      "=0 and premise " + std::to_string(st.b) + " needs " + LinearClause::form_string(st.form) + "=1");
          break;
        }
        cl[s - 1] = std::move(*r);
        break;
      }
      case StepKind::Weaken:
        if (!ref_ok(s, st.a)) break;
        if (opt.mode == CheckMode::Resolution && !st.target.empty() && !detail::all_single_variable(st.target)) {
          fail(s, at + "resolution mode needs an ordinary weakening target");
          break;
        }
        if (st.target.max_variable() > p.nvars) {
          fail(s, at + "weakening target mentions an unknown variable");
          break;
        }
        cl[s - 1] = st.target;  // soundness verified below
        break;
    }
  }

  // Semantic weakening checks for steps below the first structural failure.
  std::vector<std::size_t> wk;
  for (std::size_t s = 1; s < first_bad && s <= steps.size(); ++s)
    if (steps[s - 1].kind == StepKind::Weaken) wk.push_back(s);
  std::vector<std::uint8_t> wk_bad(wk.size(), 0);
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      const auto& st = steps[wk[t] - 1];
      if (!entails(cl[st.a - 1], st.target)) wk_bad[t] = 1;
    }
  };
  unsigned jobs = std::max(1u, opt.jobs);
  if (jobs == 1 || wk.size() < 64) {
    run(0, wk.size());
  } else {
    std::vector<std::thread> th;
    std::size_t chunk = (wk.size() + jobs - 1) / jobs;
    for (unsigned j = 0; j < jobs; ++j) {
      std::size_t lo = j * chunk, hi = std::min(wk.size(), lo + chunk);
      if (lo < hi) th.emplace_back(run, lo, hi);
    }
    for (auto& t : th) t.join();
  }
  for (std::size_t t = 0; t < wk.size(); ++t)
    if (wk_bad[t]) {
      fail(wk[t], "step " + std::to_string(wk[t]) + ": unsound weakening, target not implied by step " + std::to_string(steps[wk[t] - 1].a));
      break;
    }

  if (first_bad <= steps.size()) {
    res.failed_step = first_bad;
    res.message = bad_msg;
    return res;
  }
  if (opt.require_refutation && !cl.back().empty()) {
    res.failed_step = steps.size();
    res.message = "step " + std::to_string(steps.size()) + ": last clause is " + cl.back().to_string() + ", not the empty clause";
    return res;
  }
  for (const auto& c : cl) res.stats.width = std::max(res.stats.width, c.width());

  if (opt.compute_regularity && opt.mode != CheckMode::ResLin) {
    std::size_t bytes = steps.size() * ((p.nvars + 64) / 64) * 8;
    if (bytes <= opt.regularity_memory_limit) {
      // below[s]: variables resolved anywhere in the derivation of step s.
      std::vector<BitVec> below(steps.size());
      bool regular = true;
      for (std::size_t s = 0; s < steps.size() && regular; ++s) {
        const auto& st = steps[s];
        below[s] = BitVec(p.nvars + 1);
        if (st.kind == StepKind::Axiom) continue;
        below[s] |= below[st.a - 1];
        if (st.kind == StepKind::Resolve) {
          below[s] |= below[st.b - 1];
          std::uint32_t x = st.form[0];
          if (below[s].get(x)) regular = false;
          below[s].set(x);
        }
      }
      res.stats.regular = regular;
    }
  }
  res.ok = true;
  res.clauses = std::move(cl);
  return res;
}

inline void write_rlin(std::ostream& os, const ProofTrace& p) {
  os << "p rlin " << p.nvars << " " << p.steps.size() << "\n";
  for (const auto& st : p.steps) {
    switch (st.kind) {
      case StepKind::Axiom: os << "a " << st.a << "\n"; break;
      case StepKind::Resolve: os << "r " << st.a << " " << st.b << " " << LinearClause::form_string(st.form) << "\n"; break;
      case StepKind::Weaken: os << "w " << st.a << " " << st.target.to_string() << "\n"; break;
    }
  }
}

inline ProofTrace read_rlin(std::istream& is) {
  ProofTrace p;
  std::string line;
  std::size_t lineno = 0, declared = 0;
  bool header = false;
  auto num = [&](const std::string& tok) -> std::uint32_t {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos || tok.size() > 10)
      throw ParseError(lineno, "expected a number, got '" + tok + "'");
    unsigned long long v = std::stoull(tok);
    if (v > UINT32_MAX) throw ParseError(lineno, "number too large");
    return static_cast<std::uint32_t>(v);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ls(line);
    std::string kind, t1, t2, t3, extra;
    ls >> kind;
    if (!header) {
      if (kind != "p" || !(ls >> t1 >> t2 >> t3) || t1 != "rlin" || (ls >> extra))
        throw ParseError(lineno, "expected header 'p rlin <nvars> <nsteps>'");
      p.nvars = num(t2);
      declared = num(t3);
      header = true;
      continue;
    }
    try {
      if (kind == "a") {
        if (!(ls >> t1) || (ls >> extra)) throw ParseError(lineno, "axiom step needs exactly one clause id");
        p.axiom(num(t1));
      } else if (kind == "r") {
        if (!(ls >> t1 >> t2 >> t3) || (ls >> extra)) throw ParseError(lineno, "resolve step needs two premises and a form");
        Form f = LinearClause::parse_form(t3);
        p.resolve(num(t1), num(t2), std::move(f));
      } else if (kind == "w") {
        if (!(ls >> t1 >> t2) || (ls >> extra)) throw ParseError(lineno, "weaken step needs a premise and a clause");
        p.weaken(num(t1), LinearClause::parse(t2));
      } else {
        throw ParseError(lineno, "unknown step kind '" + kind + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!header) throw ParseError(lineno == 0 ? 1 : lineno, "missing header");
  if (p.steps.size() != declared) throw ParseError(lineno, "step count differs from header");
  return p;
}

/// Drops steps the last step does not depend on and renumbers the rest.
inline ProofTrace prune_unused(const ProofTrace& p) {
  std::vector<bool> live(p.steps.size(), false);
  if (!p.steps.empty()) live.back() = true;
  for (std::size_t s = p.steps.size(); s-- > 0;) {
    if (!live[s]) continue;
    const auto& st = p.steps[s];
    if (st.kind == StepKind::Axiom) continue;
    live[st.a - 1] = true;
    if (st.kind == StepKind::Resolve) live[st.b - 1] = true;
  }
  ProofTrace out;
  out.nvars = p.nvars;
  std::vector<std::uint32_t> id(p.steps.size(), 0);
  for (std::size_t s = 0; s < p.steps.size(); ++s) {
    if (!live[s]) continue;
    ProofStep st = p.steps[s];
    if (st.kind != StepKind::Axiom) st.a = id[st.a - 1];
    if (st.kind == StepKind::Resolve) st.b = id[st.b - 1];
    out.steps.push_back(std::move(st));
    id[s] = static_cast<std::uint32_t>(out.steps.size());
  }
  return out;
}

struct Mutation {
  std::size_t step = 0;  // 1-based
  std::string description;
};

/// Applies one random local change to a trace: a different pivot variable,
/// swapped premises, a different axiom, or a flipped bit in a weakening
/// target. Returns where and what was changed.
inline Mutation mutate_trace(ProofTrace& p, Rng& rng) {
  if (p.steps.empty()) throw std::invalid_argument("cannot mutate an empty trace");
  while (true) {
    std::size_t s = rng.below(p.steps.size());
    auto& st = p.steps[s];
    Mutation m{s + 1, ""};
    switch (st.kind) {
      case StepKind::Axiom: {
        if (p.steps.size() < 2) continue;
        std::uint32_t old = st.a;
        st.a = st.a > 1 && rng.bit() ? st.a - 1 : st.a + 1;
        m.description = "axiom " + std::to_string(old) + " -> " + std::to_string(st.a);
        return m;
      }
      case StepKind::Resolve: {
        if (rng.bit()) {
          std::swap(st.a, st.b);
          m.description = "premises swapped";
        } else {
          std::uint32_t old = st.form[0];
          std::uint32_t nv = static_cast<std::uint32_t>(1 + rng.below(p.nvars));
          if (nv == old) nv = old % static_cast<std::uint32_t>(p.nvars) + 1;
          st.form[0] = nv;
          std::sort(st.form.begin(), st.form.end());
          st.form = normalize_form(st.form);
          if (st.form.empty()) st.form = {nv};
          m.description = "pivot variable " + std::to_string(old) + " -> " + std::to_string(nv);
        }
        return m;
      }
      case StepKind::Weaken: {
        auto eqs = st.target.views();
        if (eqs.empty()) continue;
        std::size_t e = rng.below(eqs.size());
        std::vector<std::pair<Form, bool>> out;
        for (std::size_t i = 0; i < eqs.size(); ++i)
          out.push_back({Form(eqs[i].form.begin(), eqs[i].form.end()), i == e ? !eqs[i].bit : eqs[i].bit});
        st.target = LinearClause::from_equations(std::move(out));
        m.description = "weakening target equation " + std::to_string(e + 1) + " flipped";
        return m;
      }
    }
  }
}

}  // namespace rlin
