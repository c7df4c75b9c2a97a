#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "rlin/derive.hpp"
#include "rlin/proof.hpp"
#include "rlin/refute.hpp"

using namespace rlin;

namespace {

LinearClause lc(const std::string& s) { return LinearClause::parse(s); }

CnfFormula cnf(std::size_t nvars, std::vector<Clause> clauses) {
  CnfFormula f;
  f.nvars = nvars;
  f.clauses = std::move(clauses);
  return f;
}

CheckOptions mode(CheckMode m) {
  CheckOptions o;
  o.mode = m;
  return o;
}

// Brute-force implication of clauses over variables 1..n.
bool clause_implies(const std::vector<Clause>& premises, const Clause& target, std::size_t n) {
  std::vector<bool> a(n);
  for (std::uint32_t x = 0; x < (1u << n); ++x) {
    for (std::size_t i = 0; i < n; ++i) a[i] = (x >> i) & 1u;
    bool all = std::all_of(premises.begin(), premises.end(), [&](const Clause& c) { return !oracle::falsifies(c, a); });
    if (all && oracle::falsifies(target, a)) return false;
  }
  return true;
}

}  // namespace

TEST(LinearClause, CanonicalForm) {
  auto a = LinearClause::from_equations({{{3, 1}, true}, {{2}, false}, {{1, 3}, true}, {{4, 4}, false}});
  EXPECT_EQ(a.to_string(), "0=0;1+3=1;2=0");
  EXPECT_TRUE(is_tautology(a));
  EXPECT_EQ(LinearClause::from_equations({{{}, true}}).to_string(), "-");
  EXPECT_EQ(lc("2=1;1=0"), lc("1=0;2=1"));
  EXPECT_EQ(LinearClause::from_literals({-1, 2}).to_literals(), (Clause{-1, 2}));
  EXPECT_FALSE(lc("1+2=1").to_literals());
  EXPECT_THROW(lc("1=2"), std::invalid_argument);
  EXPECT_THROW(lc("x=1"), std::invalid_argument);
  EXPECT_THROW(lc("1+0=1"), std::invalid_argument);
}

TEST(LinearClause, StringRoundTrip) {
  Rng rng(41);
  for (int it = 0; it < 500; ++it) {
    auto c = oracle::random_linear_clause(rng, 9, 5);
    EXPECT_EQ(LinearClause::parse(c.to_string()), c);
  }
}

TEST(Entails, Examples) {
  EXPECT_TRUE(entails(lc("1=1"), lc("1=1;2=0")));
  EXPECT_FALSE(entails(lc("1=1"), lc("2=1")));
  EXPECT_TRUE(entails(lc("3=1"), lc("1+2=0;1+2=1")));
  EXPECT_TRUE(entails(lc("1=1;2=1"), lc("1+2=1;1=1")));
  EXPECT_FALSE(entails(lc("1=1;2=1"), lc("1+2=0;1=1")));
  EXPECT_FALSE(entails(lc("1=1;2=1"), lc("1+2=0")));
}

TEST(Entails, MatchesTruthTable) {
  Rng rng(42);
  int positives = 0;
  for (int it = 0; it < 10000; ++it) {
    std::size_t n = 1 + rng.below(12);
    auto a = oracle::random_linear_clause(rng, n, 4);
    auto b = oracle::random_linear_clause(rng, n, 4);
    if (it % 3 == 0) {
      // Superset of a's equations, so implication holds.
      std::vector<std::pair<Form, bool>> eqs;
      for (auto e : a.views()) eqs.push_back({Form(e.form.begin(), e.form.end()), e.bit});
      for (auto e : b.views()) eqs.push_back({Form(e.form.begin(), e.form.end()), e.bit});
      b = LinearClause::from_equations(eqs);
    }
    bool expect = oracle::implies(a, b, n);
    positives += expect;
    ASSERT_EQ(entails(a, b), expect) << a.to_string() << " |= " << b.to_string();
  }
  EXPECT_GT(positives, 3000);
  EXPECT_LT(positives, 9000);
}

TEST(Resolve, NeedsBothPolarities) {
  auto r = resolve(lc("1+2=0;3=1"), lc("1+2=1;4=0"), Form{1, 2});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->to_string(), "3=1;4=0");
  EXPECT_FALSE(resolve(lc("1+2=1"), lc("1+2=1"), Form{1, 2}));
  EXPECT_FALSE(resolve(lc("1=0"), lc("2=1"), Form{1}));
}

TEST(CheckProof, SmallRefutation) {
  auto f = cnf(1, {{1}, {-1}});
  ProofTrace p;
  p.nvars = 1;
  p.resolve(p.axiom(2), p.axiom(1), 1);
  auto r = check_proof(f, p, mode(CheckMode::Resolution));
  EXPECT_TRUE(r.ok) << r.message;
  EXPECT_EQ(r.stats.length, 3u);
  EXPECT_EQ(r.stats.width, 1u);

  ProofTrace swapped = p;
  std::swap(swapped.steps[2].a, swapped.steps[2].b);
  auto bad = check_proof(f, swapped);
  EXPECT_FALSE(bad.ok);
  EXPECT_EQ(bad.failed_step, 3u);
  EXPECT_NE(bad.message.find("invalid resolvent"), std::string::npos);
}

TEST(CheckProof, RejectsMalformedTraces) {
  auto f = cnf(2, {{1, 2}, {-1}, {-2}});
  ProofTrace empty;
  empty.nvars = 2;
  EXPECT_FALSE(check_proof(f, empty).ok);
  EXPECT_FALSE(check_proof(cnf(2, {}), [] {
                 ProofTrace p;
                 p.nvars = 2;
                 p.axiom(1);
                 return p;
               }()).ok);

  ProofTrace p;
  p.nvars = 2;
  auto s1 = p.axiom(1);
  auto s2 = p.axiom(2);
  auto s3 = p.resolve(s2, s1, 1);  // 2=1
  auto s4 = p.axiom(3);
  p.resolve(s4, s3, 2);
  EXPECT_TRUE(check_proof(f, p, mode(CheckMode::Resolution)).ok);

  auto fails_at = [&](ProofTrace q) { return check_proof(f, q).failed_step; };
  ProofTrace fwd = p;
  fwd.steps[2].a = 4;
  EXPECT_EQ(fails_at(fwd), 3u);
  ProofTrace axiom = p;
  axiom.steps[0].a = 9;
  EXPECT_EQ(fails_at(axiom), 1u);
  ProofTrace pivot = p;
  pivot.steps[2].form = {3};
  EXPECT_EQ(fails_at(pivot), 3u);
  ProofTrace unfinished = p;
  unfinished.steps.pop_back();
  EXPECT_EQ(fails_at(unfinished), 4u);
  ProofTrace wrong_nvars = p;
  wrong_nvars.nvars = 3;
  EXPECT_EQ(fails_at(wrong_nvars), 1u);
}

TEST(CheckProof, WeakeningMustBeImplied) {
  auto f = cnf(2, {{1}, {-1}});
  ProofTrace p;
  p.nvars = 2;
  auto s1 = p.axiom(1);
  auto s2 = p.weaken(s1, lc("1=1;2=0"));
  auto s3 = p.axiom(2);
  auto s4 = p.weaken(s3, lc("1=0;2=1"));
  auto s5 = p.resolve(s4, s2, 1);  // 2=0;2=1 is a tautology, not the goal
  (void)s5;
  auto r = check_proof(f, p, mode(CheckMode::ResLin));
  EXPECT_FALSE(r.ok);
  EXPECT_NE(r.message.find("not the empty clause"), std::string::npos);

  ProofTrace bad;
  bad.nvars = 2;
  bad.weaken(bad.axiom(1), lc("2=1"));
  auto rb = check_proof(f, bad, mode(CheckMode::ResLin));
  EXPECT_EQ(rb.failed_step, 2u);
  EXPECT_NE(rb.message.find("unsound weakening"), std::string::npos);
}

TEST(CheckProof, ResolutionModeRejectsLinearSteps) {
  auto f = cnf(2, {{1, 2}, {-1, 2}, {-2}});
  ProofTrace p;
  p.nvars = 2;
  auto a = p.weaken(p.axiom(1), lc("1+2=1;2=1"));
  (void)a;
  EXPECT_FALSE(check_proof(f, p, mode(CheckMode::Resolution)).ok);
}

TEST(CheckProof, TreeLikeModeRejectsReuse) {
  auto f = cnf(1, {{1}, {-1}});
  ProofTrace p;
  p.nvars = 1;
  auto s1 = p.axiom(1);
  auto s2 = p.axiom(2);
  p.resolve(s2, s1, 1);
  EXPECT_TRUE(check_proof(f, p, mode(CheckMode::TreeLike)).ok);
  ProofTrace q;
  q.nvars = 1;
  auto t1 = q.axiom(1);
  auto t2 = q.weaken(t1, lc("1=1"));
  auto t3 = q.axiom(2);
  q.resolve(t3, t1, 1);
  (void)t2;
  auto r = check_proof(f, q, mode(CheckMode::TreeLike));
  EXPECT_FALSE(r.ok);
  EXPECT_NE(r.message.find("used twice"), std::string::npos);
  EXPECT_TRUE(check_proof(f, q, mode(CheckMode::ResLin)).ok);
}

TEST(CheckProof, RegularityOnSmallTraces) {
  auto f = cnf(1, {{1}, {-1}});
  ProofTrace p;
  p.nvars = 1;
  p.resolve(p.axiom(2), p.axiom(1), 1);
  CheckOptions o = mode(CheckMode::Resolution);
  o.compute_regularity = true;
  auto r = check_proof(f, p, o);
  ASSERT_TRUE(r.stats.regular);
  EXPECT_TRUE(*r.stats.regular);
  // Resolving x1 twice on one path.
  auto g = cnf(2, {{-1, 2}, {1, 2}, {-1, -2}, {1, -2}});
  ProofTrace q;
  q.nvars = 2;
  auto c1 = q.resolve(q.axiom(1), q.axiom(2), 1);  // 2=1
  auto c2 = q.resolve(q.axiom(3), q.axiom(4), 1);  // 2=0
  q.resolve(c2, c1, 2);
  auto rq = check_proof(g, q, o);
  EXPECT_TRUE(rq.ok) << rq.message;
  EXPECT_TRUE(*rq.stats.regular);
  ProofTrace irregular;
  irregular.nvars = 2;
  auto w = irregular.resolve(irregular.axiom(1), irregular.axiom(2), 1);  // 2=1
  auto x = irregular.resolve(irregular.axiom(3), w, 2);                     // 1=0
  auto y = irregular.axiom(4);                                              // 1=1;2=0
  auto z = irregular.resolve(x, y, 1);                                      // 2=0
  irregular.resolve(z, w, 2);
  auto ri = check_proof(g, irregular, o);
  ASSERT_TRUE(ri.ok) << ri.message;
  EXPECT_FALSE(*ri.stats.regular);
}

TEST(Rlin, RoundTripAndParseErrors) {
  auto f = stone_formula(pyramid(2), random_obfuscation(3, 1));
  auto p = refute_stone(pyramid(2), random_obfuscation(3, 1));
  p.weaken(static_cast<std::uint32_t>(p.steps.size()), lc("1+2=1;3=0"));
  std::stringstream ss;
  write_rlin(ss, p);
  auto q = read_rlin(ss);
  std::stringstream again;
  write_rlin(again, q);
  EXPECT_EQ(again.str(), ss.str());

  auto line_of = [](const std::string& text) -> std::size_t {
    std::stringstream in(text);
    try {
      read_rlin(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("p rlin 3\n"), 1u);
  EXPECT_EQ(line_of("p rlin 3 2\na 1\nq 1\n"), 3u);
  EXPECT_EQ(line_of("p rlin 3 2\na 1\nr 1 1 x\n"), 3u);
  EXPECT_EQ(line_of("p rlin 3 2\na 1\nw 1 1=3\n"), 3u);
  EXPECT_EQ(line_of("p rlin 3 3\na 1\na 2\n"), 3u);
  EXPECT_EQ(line_of("c x\np rlin 3 1\na 1\n"), 0u);
}

TEST(PruneUnused, KeepsOnlyTheDerivationOfTheLastStep) {
  auto f = cnf(1, {{1}, {-1}});
  ProofTrace p;
  p.nvars = 1;
  auto s1 = p.axiom(1);
  p.axiom(1);
  auto s3 = p.axiom(2);
  p.resolve(s3, s1, 1);
  auto q = prune_unused(p);
  EXPECT_EQ(q.steps.size(), 3u);
  EXPECT_TRUE(check_proof(f, q).ok);
}

TEST(DeriveSemantic, Examples) {
  auto frag = derive_semantic({{1}}, {1, 2});
  auto f = cnf(2, {{1}});
  CheckOptions o = mode(CheckMode::Resolution);
  o.require_refutation = false;
  auto r = check_proof(f, frag, o);
  ASSERT_TRUE(r.ok) << r.message;
  EXPECT_TRUE(entails(r.clauses.back(), LinearClause::from_literals({1, 2})));
  EXPECT_EQ(r.clauses.back(), LinearClause::from_literals({1, 2}));

  // (x) o XOR2 and (-x) o XOR2 give the empty clause.
  CnfFormula base = cnf(1, {{1}, {-1}});
  auto lifted = lift_formula(base, make_xor(2));
  auto bot = derive_semantic(lifted.clauses, {});
  auto rb = check_proof(lifted, bot, mode(CheckMode::TreeLike));
  EXPECT_TRUE(rb.ok) << rb.message;

  EXPECT_THROW(derive_semantic({{1}}, {2}), ImplicationError);
}

TEST(DeriveSemantic, RandomImplicationsAreDerivedTreeLike) {
  Rng rng(43);
  int derived = 0;
  for (int it = 0; it < 400; ++it) {
    std::vector<Clause> premises;
    for (std::size_t c = 1 + rng.below(5); c > 0; --c) {
      Clause cl;
      for (std::size_t k = 1 + rng.below(3); k > 0; --k) {
        auto x = static_cast<std::int32_t>(1 + rng.below(4));
        push_literal(cl, rng.bit() ? x : -x);
      }
      premises.push_back(cl);
    }
    Clause target;
    for (std::size_t k = rng.below(3); k > 0; --k) {
      auto x = static_cast<std::int32_t>(1 + rng.below(4));
      push_literal(target, rng.bit() ? x : -x);
    }
    if (!clause_implies(premises, target, 4)) {
      EXPECT_THROW(derive_semantic(premises, target), ImplicationError);
      continue;
    }
    ++derived;
    auto frag = derive_semantic(premises, target);
    frag.nvars = 4;  // fragments declare only the largest variable they use
    CheckOptions o = mode(CheckMode::TreeLike);
    o.require_refutation = false;
    auto r = check_proof(cnf(4, premises), frag, o);
    ASSERT_TRUE(r.ok) << r.message;
    EXPECT_EQ(r.clauses.back(), LinearClause::from_literals(target));
    EXPECT_LE(frag.steps.size(), std::size_t{1} << 5);
  }
  EXPECT_GT(derived, 50);
}

TEST(DeriveSemantic, RefusesTooManyVariables) {
  Clause wide;
  for (int x = 1; x <= 25; ++x) wide.push_back(x);
  EXPECT_THROW(derive_semantic({wide}, wide), std::invalid_argument);
}

TEST(Mutation, EveryMutationIsRejected) {
  auto g = pyramid(3);
  auto rho = random_obfuscation(6, 2);
  auto f = stone_formula(g, rho);
  std::vector<std::pair<CnfFormula, ProofTrace>> traces;
  traces.push_back({f, refute_stone(g, rho)});
  auto f2 = stone_formula(pyramid(2), random_obfuscation(3, 3));
  auto base2 = refute_stone(pyramid(2), random_obfuscation(3, 3));
  auto lifted = lift_formula(f2, make_xor(2));
  traces.push_back({lifted, refute_lifted(f2, base2, make_xor(2))});
  for (auto& [formula, trace] : traces) {
    ASSERT_TRUE(check_proof(formula, trace).ok);
    Rng rng(44);
    for (int it = 0; it < 100; ++it) {
      ProofTrace m = trace;
      auto mut = mutate_trace(m, rng);
      auto r = check_proof(formula, m);
      EXPECT_FALSE(r.ok) << "survived: step " << mut.step << " " << mut.description;
      if (!r.ok) {
        EXPECT_GE(r.failed_step, mut.step) << mut.description;
      }
    }
  }
}

TEST(CheckProof, VerdictIndependentOfJobs) {
  auto f2 = stone_formula(pyramid(2), random_obfuscation(3, 5));
  auto lifted = lift_formula(f2, make_xor(2));
  auto proof = refute_lifted(f2, refute_stone(pyramid(2), random_obfuscation(3, 5)), make_xor(2));
  Rng rng(45);
  for (int it = 0; it < 20; ++it) {
    ProofTrace m = proof;
    if (it > 0) mutate_trace(m, rng);
    CheckOptions one, many;
    many.jobs = 4;
    auto a = check_proof(lifted, m, one), b = check_proof(lifted, m, many);
    EXPECT_EQ(a.ok, b.ok);
    EXPECT_EQ(a.failed_step, b.failed_step);
    EXPECT_EQ(a.message, b.message);
  }
}
