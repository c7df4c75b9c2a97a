// Acceptance run: one PASS/FAIL line per criterion, each against a pinned
// runtime budget. Criteria with a documented honest failure are marked
// "known"; the exit code is nonzero only when a result differs from what is
// expected (an unexpected failure, or a known failure that now passes).
//
// Usage: acceptance [c1 c2 ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "rlin/gf2blocks.hpp"
#include "rlin/hard_distribution.hpp"
#include "rlin/lbp.hpp"
#include "rlin/random_walk.hpp"
#include "rlin/rank_fooling.hpp"
#include "rlin/refute.hpp"

using namespace rlin;
using oracle::Word;

namespace {

// Frozen from measurement: clause width of refute_stone on n = 2..6, and the
// per-bit exponent of the XOR2 lift (measured 2.56 at n=2, 3.05 at n=3).
constexpr std::size_t kStoneWidth = 7;
constexpr double kKappa = 3.1;
constexpr double kMaxSlope = 4.2;

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a failed check; failures are listed before the notes.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    detail = pass ? what + (detail.empty() ? "" : "; " + detail) : detail + "; " + what;
    pass = false;
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

CheckResult check_resolution(const CnfFormula& f, const ProofTrace& p) {
  CheckOptions o;
  o.mode = CheckMode::Resolution;
  o.jobs = jobs();
  return check_proof(f, p, o);
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

Outcome c1() {
  Outcome o;
  std::vector<double> logN, logLen;
  std::string lens;
  for (int n = 2; n <= 6; ++n) {
    auto g = pyramid(n);
    auto rho = random_obfuscation(g.n_vertices, 1);
    auto proof = refute_stone(g, rho);
    auto r = check_resolution(stone_formula(g, rho), proof);
    o.require(r.ok, "n=" + std::to_string(n) + " rejected: " + r.message);
    o.require(r.stats.width == kStoneWidth, "n=" + std::to_string(n) + " width " + std::to_string(r.stats.width));
    logN.push_back(std::log(static_cast<double>(g.n_vertices)));
    logLen.push_back(std::log(static_cast<double>(proof.length())));
    lens += (lens.empty() ? "" : ",") + std::to_string(proof.length());
  }
  double slope = lsq_slope(logN, logLen);
  o.require(slope <= kMaxSlope, "slope " + fmt("%.3f", slope) + " > " + fmt("%.1f", kMaxSlope));
  o.note("width=" + std::to_string(kStoneWidth) + " lengths=" + lens + " slope=" + fmt("%.3f", slope));
  return o;
}

Outcome c2() {
  Outcome o;
  for (const Gadget& gad : {make_xor(2), make_ip(4)}) {
    std::string name = gad.arity() == 2 ? "xor2" : "ip4";
    for (int n = 2; n <= 3; ++n) {
      std::string tag = name + " n=" + std::to_string(n);
      auto g = pyramid(n);
      auto rho = random_obfuscation(g.n_vertices, 1);
      auto f = stone_formula(g, rho);
      auto base = refute_stone(g, rho);
      ProofTrace proof;
      try {
        proof = refute_lifted(f, base, gad);
      } catch (const std::invalid_argument& e) {
        o.require(false, tag + ": " + e.what());
        continue;
      }
      auto r = check_resolution(lift_formula(f, gad), proof);
      o.require(r.ok, tag + " rejected: " + r.message);
      double limit = static_cast<double>(base.length()) * std::exp2(kKappa * gad.arity());
      o.require(static_cast<double>(proof.length()) <= limit, tag + " length over 2^(kappa*b)");
      o.note(tag + " length=" + std::to_string(proof.length()) + " ratio=" +
             fmt("%.1f", static_cast<double>(proof.length()) / static_cast<double>(base.length())));
    }
  }
  o.note("kappa=" + fmt("%.1f", kKappa));
  return o;
}

struct Instance {
  BlockStructure s;
  std::vector<Word> gens;
};

Instance random_instance(Rng& rng) {
  Instance in;
  in.s.m = 1 + rng.below(6);
  in.s.b = 1 + rng.below(3);
  in.gens = oracle::random_block_gens(rng, in.s.m, in.s.b, rng.below(in.s.m + 2));
  return in;
}

Outcome c3() {
  Outcome o;
  Rng rng(301);
  constexpr int kInstances = 1000;
  int spread = 0;
  for (int it = 0; it < kInstances; ++it) {
    auto in = random_instance(rng);
    const std::size_t n = in.s.length();
    const std::string at = " at instance " + std::to_string(it);
    auto U = oracle::to_basis(in.gens, n);
    auto sp = oracle::span(in.gens);
    bool is_sp = oracle::spread(sp, in.s.m, in.s.b);
    o.require(is_spread(U, in.s) == is_sp, "is_spread" + at);

    auto sb = safe_basis(U, in.s);
    o.require(sb.has_value() == is_sp, "safe_basis existence" + at);
    if (sb && is_sp) {
      ++spread;
      std::vector<Word> words, got;
      for (const auto& v : detail::normalize(U, n)) words.push_back(oracle::to_word(v));
      o.require(sb->pivots == oracle::smallest_pivot_tuple(words, in.s.m, in.s.b), "safe_basis pivots" + at);
      for (const auto& v : sb->vectors) got.push_back(oracle::to_word(v));
      o.require(oracle::span(got) == sp, "safe_basis span" + at);
    }

    // A point x of the space keeps both systems consistent.
    Word x = rng.next() & ((Word{1} << n) - 1);
    auto xv = oracle::from_word(x, n);
    AffineSpace big(n, in.s), small(n, in.s);
    for (Word w : in.gens) {
      auto v = oracle::from_word(w, n);
      big.add(v, v.dot(xv));
      small.add(v, v.dot(xv));
    }
    auto mins = oracle::minimal_obstructions(sp, in.s.m, in.s.b);
    auto cb = closure(big).blocks;
    o.require(mins.size() == 1, "closure not unique" + at);
    o.require(!mins.empty() && oracle::blocks_to_mask(cb) == mins[0], "closure differs from oracle" + at);

    for (auto w : oracle::random_block_gens(rng, in.s.m, in.s.b, 1 + rng.below(2))) {
      auto v = oracle::from_word(w, n);
      small.add(v, v.dot(xv));
    }
    auto cs = closure(small).blocks;
    o.require(std::includes(cs.begin(), cs.end(), cb.begin(), cb.end()), "closure not monotone" + at);
  }
  o.require(spread >= 100, "too few spread instances");
  o.note(std::to_string(kInstances) + " instances, " + std::to_string(spread) + " spread");
  return o;
}

Outcome c4() {
  Outcome o;
  o.require(is_stifled(make_ip(4)), "IP4 not stifled");
  o.require(!is_stifled(make_and(2)), "AND2 stifled");
  o.require(!is_stifled(make_xor(2)), "XOR2 stifled");
  auto eps = balanced_stifled_epsilon(make_ip(8)).minimum;
  o.require(Ratio{7, 18} <= eps, "eps(IP8) below 7/18");
  auto d = std::gcd(eps.num, eps.den);
  o.note("eps(IP8)=" + std::to_string(eps.num / d) + "/" + std::to_string(eps.den / d));

  Gadget ip4 = make_ip(4);
  Rng rng(401);
  for (int it = 0; it < 100; ++it) {
    BlockStructure s{1 + rng.below(4), 4};
    const std::size_t n = s.length();
    BitVec beta(n);
    for (std::size_t i = 0; i < n; ++i) beta.set(i, rng.bit());
    AffineSpace A(n, s);
    for (Word w : oracle::random_block_gens(rng, s.m, s.b, rng.below(s.m + 2))) {
      auto v = oracle::from_word(w, n);
      A.add(v, v.dot(beta));
    }
    std::vector<bool> alpha(s.m);
    for (std::size_t j = 0; j < s.m; ++j) alpha[j] = rng.bit();
    for (auto j : closure(A).blocks) alpha[j] = ip4(block_value(beta, s, j));
    auto gamma = stifling_extension(A, beta, alpha, ip4);
    auto out = lift_eval(ip4, gamma, s);
    bool match = true;
    for (std::size_t j = 0; j < s.m; ++j) match &= out[j] == static_cast<int>(alpha[j]);
    o.require(A.contains(gamma) && match, "stifling_extension postcondition at case " + std::to_string(it));
  }
  o.note("100 stifling extensions");
  return o;
}

Outcome c5() {
  Outcome o;
  Gadget g = make_ip(8);
  BitVec row(16);
  row.set(0);
  auto exact = rank_fooling_exact({row}, {false}, {false, false}, g);
  o.require(exact == Ratio{9, 17}, "r=1 exact " + std::to_string(exact.num) + "/" + std::to_string(exact.den));

  Rng rng(501);
  auto M = random_full_rank(32, 64, rng);
  std::vector<bool> z(8), gamma(32);
  for (std::size_t j = 0; j < 8; ++j) z[j] = rng.bit();
  for (std::size_t i = 0; i < 32; ++i) gamma[i] = rng.bit();
  auto r = rank_fooling_estimate(M, gamma, z, g, 100000, 502, jobs());
  o.require(r.estimate <= r.bound + 3 * r.stderr_, "estimate over bound + 3 sigma");
  o.note("exact=9/17 estimate=" + fmt("%.6f", r.estimate) + " stderr=" + fmt("%.2g", r.stderr_) + " bound=" + fmt("%.6f", r.bound));
  return o;
}

Outcome c6() {
  Outcome o;
  constexpr std::uint64_t kT = 1000;
  std::vector<BigInt> pascal{1};
  for (std::uint64_t t = 1; t <= kT; ++t) {
    if (t > 1) {
      std::vector<BigInt> next(pascal.size() + 1, 0);
      for (std::size_t p = 0; p < pascal.size(); ++p) {
        next[p] += pascal[p];
        next[p + 1] += pascal[p];
      }
      pascal = std::move(next);
    }
    const BigInt den = BigInt(1) << static_cast<unsigned>(t - 1);
    BigInt sum = 0;
    for (const auto& c : pascal) sum += c;
    o.require(sum == den, "binomial row sum at t=" + std::to_string(t));
    o.require(walk_pmf_row(t) == pascal, "walk_pmf_row differs at t=" + std::to_string(t));
    // Point queries: both ends, the centre, and one position past the support.
    const auto last = static_cast<std::int64_t>(t) - 1;
    for (std::int64_t p : {std::int64_t{0}, last / 2, last})
      o.require(walk_pmf(t, p) == BigRational(pascal[static_cast<std::size_t>(p)], den), "walk_pmf at t=" + std::to_string(t));
    o.require(walk_pmf(t, last + 1) == BigRational(0), "walk_pmf outside support at t=" + std::to_string(t));
  }
  auto b = check_walk_bound(10000);
  o.require(b.holds, "Pr[Y_t=p] <= 1/sqrt(t) fails");
  o.note("pmf exact for t<=1000, bound holds for t<=10000 with c1=1");
  return o;
}

Outcome c7() {
  Outcome o;
  constexpr std::size_t kSamples = 100000;
  for (int n = 3; n <= 5; ++n) {
    Dag g = pyramid(n);
    auto rho = random_obfuscation(g.n_vertices, 700 + static_cast<std::uint64_t>(n));
    CnfFormula f = stone_formula(g, rho);
    StoneLayout L(g);
    auto e = count_hits(kSamples, jobs(), [&](std::size_t i) {
      auto a = sample_mu(n, trial_seed(7000 + static_cast<std::uint64_t>(n), i));
      auto bad = falsified_clauses(f, a.values);
      if (bad.size() != 1 || bad[0] != expected_falsified_clause(a, rho)) return false;
      auto info = L.classify(bad[0]);
      return info.family == StoneLayout::Family::Induction && info.vertex == a.v;
    });
    o.require(e.hits == e.trials, "n=" + std::to_string(n) + ": " + std::to_string(e.trials - e.hits) + " samples not falsifying exactly the endpoint clause");
  }
  o.note("3x" + std::to_string(kSamples) + " base samples");

  // Lifted: implicit count over all lifted clauses, cross-checked against the
  // explicit expansion where it is small enough.
  std::size_t lifted = 0;
  for (const Gadget& gad : {make_ip(4), make_xor(2)}) {
    for (int n = 2; n <= 3; ++n) {
      Dag g = pyramid(n);
      CnfFormula f = stone_formula(g, random_obfuscation(g.n_vertices, 1));
      std::size_t count = n == 2 ? 1000 : 200;
      auto e = count_hits(count, jobs(), [&](std::size_t i) {
        auto smp = sample_mu_lifted(n, gad, trial_seed(7100, i));
        return lifted_falsified_count(f, gad, smp.beta) == 1;
      });
      o.require(e.hits == e.trials, "lifted n=" + std::to_string(n) + " sample falsifies != 1 clause");
      lifted += count;
    }
  }
  {
    CnfFormula f = stone_formula(pyramid(2), random_obfuscation(3, 1));
    Gadget x2 = make_xor(2);
    for (std::uint64_t s = 0; s < 20; ++s)
      o.require(lifted_falsified_count_explicit(f, x2, sample_mu_lifted(2, x2, s).beta) == 1, "explicit lifted count != 1");
  }
  o.note(std::to_string(lifted) + " lifted samples (ip4, xor2)");
  return o;
}

Outcome c8() {
  Outcome o;
  std::vector<std::pair<std::string, std::pair<CnfFormula, ProofTrace>>> traces;
  {
    auto g = pyramid(3);
    auto rho = random_obfuscation(6, 2);
    traces.push_back({"stone n=3", {stone_formula(g, rho), refute_stone(g, rho)}});
    auto rho2 = random_obfuscation(3, 3);
    auto f2 = stone_formula(pyramid(2), rho2);
    auto base2 = refute_stone(pyramid(2), rho2);
    traces.push_back({"xor2 n=2", {lift_formula(f2, make_xor(2)), refute_lifted(f2, base2, make_xor(2))}});
  }
  Rng rng(801);
  CheckOptions opt;
  opt.jobs = jobs();
  for (auto& [name, fp] : traces) {
    auto& [f, proof] = fp;
    o.require(check_proof(f, proof, opt).ok, name + " not accepted");
    int rejected = 0;
    for (int it = 0; it < 100; ++it) {
      ProofTrace m = proof;
      auto mut = mutate_trace(m, rng);
      auto r = check_proof(f, m, opt);
      rejected += !r.ok;
      o.require(!r.ok, name + " mutation survived: " + mut.description);
    }
    o.note(name + " " + std::to_string(rejected) + "/100 rejected");
  }

  int agree = 0, positives = 0;
  for (int it = 0; it < 10000; ++it) {
    std::size_t n = 1 + rng.below(12);
    auto a = oracle::random_linear_clause(rng, n, 4);
    auto b = oracle::random_linear_clause(rng, n, 4);
    if (it % 3 == 0) {
      std::vector<std::pair<Form, bool>> eqs;
      for (auto e : a.views()) eqs.push_back({Form(e.form.begin(), e.form.end()), e.bit});
      for (auto e : b.views()) eqs.push_back({Form(e.form.begin(), e.form.end()), e.bit});
      b = LinearClause::from_equations(eqs);
    }
    bool expect = oracle::implies(a, b, n);
    positives += expect;
    agree += entails(a, b) == expect;
  }
  o.require(agree == 10000, "entails disagrees on " + std::to_string(10000 - agree) + " pairs");
  o.note("entails 10000/10000 (" + std::to_string(positives) + " implied)");
  return o;
}

Outcome c9() {
  Outcome o;
  Rng rng(901);
  for (int n = 2; n <= 3; ++n) {
    auto g = pyramid(n);
    auto rho = random_obfuscation(g.n_vertices, 1);
    auto f = stone_formula(g, rho);
    auto proof = refute_stone(g, rho);
    auto P = proof_to_lbp(f, proof);
    o.require(P.size() == proof.length(), "node count differs from trace length at n=" + std::to_string(n));
    for (int it = 0; it < 200; ++it) {
      BitVec beta(P.nvars);
      for (std::size_t i = 0; i < P.nvars; ++i) beta.set(i, rng.bit());
      o.require(path_containment_holds(P, trace(P, beta, rng.below(16))), "path containment on stone program");
    }
  }
  constexpr int kPrograms = 200;
  for (int it = 0; it < kPrograms; ++it) {
    std::size_t nvars = 2 + rng.below(9);
    auto P = layered_random_pdt(nvars, 1 + rng.below(nvars), rng);
    auto pp = pre_post_spaces(P);
    auto r = regularity_check(P, pp);
    o.require(r.bottom && r.top && r.strong, "PDT not read-once: " + r.bottom_witness + r.top_witness + r.strong_witness);
    o.require(!post_dimension_violation(P, pp), "dim Post > nvars - t on PDT " + std::to_string(it));
    // Every node lies on some trace; walk each input to a sink.
    for (int k = 0; k < 8; ++k) {
      BitVec beta(nvars);
      for (std::size_t i = 0; i < nvars; ++i) beta.set(i, rng.bit());
      o.require(path_containment_holds(P, trace(P, beta, SIZE_MAX)), "path containment on PDT " + std::to_string(it));
    }
  }
  o.note("stone n=2,3 programs; " + std::to_string(kPrograms) + " PDT programs");
  return o;
}

struct Criterion {
  std::string id;
  double budget_s;
  bool known_failure;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> all{
      {"c1", 300, true, c1}, {"c2", 600, true, c2}, {"c3", 300, false, c3}, {"c4", 120, false, c4}, {"c5", 180, false, c5},
      {"c6", 60, false, c6}, {"c7", 180, false, c7}, {"c8", 180, false, c8}, {"c9", 120, false, c9},
  };
  std::set<std::string> pick(argv + 1, argv + argc);
  int unexpected = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs <= c.budget_s, "over budget");
    bool surprise = o.pass == c.known_failure;
    unexpected += surprise;
    std::printf("%s %s [%.1fs/%.0fs] %s%s\n", c.id.c_str(), o.pass ? "PASS" : "FAIL", secs, c.budget_s, o.detail.c_str(),
                c.known_failure ? (o.pass ? " [known failure now passes]" : " [known failure, see README]") : "");
    std::fflush(stdout);
  }
  if (pick.empty() || pick.count("c10"))
    std::printf("c10 NOT-REPRODUCIBLE exponential lower bound and asymptotic lemmas; covered by property suites and CSV experiments\n");
  std::printf("%s: %d unexpected result(s)\n", unexpected ? "ACCEPTANCE MISMATCH" : "acceptance as expected", unexpected);
  return unexpected ? 1 : 0;
}
