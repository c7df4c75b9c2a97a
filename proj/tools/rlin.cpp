// Command-line front end: formula generation, proof search and checking,
// branching-program analysis and the Monte Carlo experiments.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "rlin/formulas.hpp"
#include "rlin/gadgets.hpp"
#include "rlin/hard_distribution.hpp"
#include "rlin/lbp.hpp"
#include "rlin/parallel.hpp"
#include "rlin/proof.hpp"
#include "rlin/random_walk.hpp"
#include "rlin/rank_fooling.hpp"
#include "rlin/refute.hpp"

using namespace rlin;

namespace {

/// Semantic failure (exit 1) as opposed to a usage error (exit 2).
struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Failure("cannot open " + path);
  return is;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Failure("cannot write " + path);
  return os;
}

template <class F>
auto parse_file(const std::string& path, F&& f) {
  auto is = open_in(path);
  try {
    return f(is);
  } catch (const ParseError& e) {
    throw Failure(path + ":" + std::to_string(e.line()) + ": " + e.what());
  }
}

/// Reads f.cnf and, when present, the sidecar f.meta (or an explicit path).
CnfFormula load_formula(const std::string& cnf, std::string meta) {
  CnfFormula f = parse_file(cnf, [](std::istream& is) { return read_dimacs(is); });
  if (meta.empty()) {
    auto dot = cnf.rfind(".cnf");
    std::string guess = (dot != std::string::npos ? cnf.substr(0, dot) : cnf) + ".meta";
    if (std::ifstream(guess)) meta = guess;
  }
  if (!meta.empty()) f.meta = parse_file(meta, [](std::istream& is) { return read_meta(is); });
  return f;
}

ProofTrace load_proof(const std::string& path) {
  return parse_file(path, [](std::istream& is) { return read_rlin(is); });
}

/// Output stream: a file when a path is given, stdout otherwise.
struct Sink {
  std::unique_ptr<std::ofstream> file;
  std::ostream& get() { return file ? *file : std::cout; }
  explicit Sink(const std::string& path) {
    if (!path.empty()) file = std::make_unique<std::ofstream>(open_out(path));
  }
};

// ---- gen ----

struct GenArgs {
  bool stone = false;
  int n = 2;
  std::uint64_t seed = 1;
  std::string out;
  std::string lift;
  std::uint64_t max_clauses = 20'000'000;
  bool header_only = false;
};

int cmd_gen(const GenArgs& a) {
  if (!a.stone) throw CLI::ValidationError("gen", "only --stone formulas are generated");
  Dag g = pyramid(a.n);
  auto rho = random_obfuscation(g.n_vertices, a.seed);
  CnfFormula f = stone_formula(g, rho);
  f.meta.seed = a.seed;
  std::size_t nvars = f.nvars;
  std::uint64_t nclauses = f.clauses.size();
  std::optional<Gadget> gad;
  FormulaMeta meta = f.meta;
  if (!a.lift.empty()) {
    try {
      gad = gadget_by_name(a.lift);
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError("--lift", e.what());
    }
    if (gad->is_constant()) throw Failure("gadget " + a.lift + " is constant");
    nvars *= static_cast<std::size_t>(gad->arity());
    nclauses = lifted_clause_count(f, *gad);
    meta.kind = "stone-lifted";
    meta.b = gad->arity();
    meta.gadget = gad->name();
    meta.gadget_table = gad->table_string();
  }
  if (a.header_only) {
    write_dimacs_header(std::cout, nvars, nclauses);
    return 0;
  }
  if (nclauses > a.max_clauses)
    throw Failure("formula has " + std::to_string(nclauses) + " clauses over " + std::to_string(nvars) +
                  " variables, above --max-clauses " + std::to_string(a.max_clauses) + " (use --header-only to inspect)");
  Sink cnf(a.out.empty() ? "" : a.out + ".cnf");
  auto& os = cnf.get();
  write_dimacs_header(os, nvars, nclauses);
  for (const auto& c : f.clauses) {
    if (gad)
      for_each_lifted_clause(c, *gad, [&](const Clause& d) { write_clause(os, d); });
    else
      write_clause(os, c);
  }
  if (!a.out.empty()) {
    auto ms = open_out(a.out + ".meta");
    write_meta(ms, meta);
  }
  return 0;
}

// ---- prove / check / lbp ----

struct ProveArgs {
  std::string formula, meta, out;
};

int cmd_prove(const ProveArgs& a) {
  CnfFormula f = load_formula(a.formula, a.meta);
  if (f.meta.kind != "stone" && f.meta.kind != "stone-lifted") throw Failure("prove needs stone metadata (run gen with -o)");
  auto [g, rho] = stone_instance_from_meta(f.meta);
  ProofTrace p = refute_stone(g, rho);
  if (f.meta.kind == "stone-lifted") {
    Gadget gad = Gadget::from_table_string(f.meta.b, f.meta.gadget_table, f.meta.gadget);
    CnfFormula base = stone_formula(g, rho);
    try {
      p = refute_lifted(base, p, gad);
    } catch (const std::invalid_argument& e) {
      throw Failure(e.what());
    }
  }
  Sink out(a.out);
  write_rlin(out.get(), p);
  std::cerr << "proof: " << p.length() << " steps\n";
  return 0;
}

struct CheckArgs {
  std::string formula, meta, proof, mode = "reslin";
  bool regularity = false;
  unsigned jobs = 1;
};

int cmd_check(const CheckArgs& a) {
  auto mode = parse_mode(a.mode);
  if (!mode) throw CLI::ValidationError("--mode", "expected resolution, reslin or tree-like");
  CnfFormula f = load_formula(a.formula, a.meta);
  ProofTrace p = load_proof(a.proof);
  CheckOptions opt;
  opt.mode = *mode;
  opt.jobs = a.jobs;
  opt.compute_regularity = a.regularity;
  auto r = check_proof(f, p, opt);
  if (!r.ok) {
    std::cerr << "rejected";
    if (r.failed_step) std::cerr << " at step " << r.failed_step;
    std::cerr << ": " << r.message << "\n";
    return 1;
  }
  std::cout << "accepted length=" << r.stats.length << " width=" << r.stats.width;
  if (r.stats.regular) std::cout << " regular=" << (*r.stats.regular ? "yes" : "no");
  std::cout << "\n";
  return 0;
}

struct LbpArgs {
  std::string formula, meta, proof, out;
};

int cmd_lbp(const LbpArgs& a) {
  CnfFormula f = load_formula(a.formula, a.meta);
  ProofTrace p = load_proof(a.proof);
  LinearBranchingProgram P;
  try {
    P = proof_to_lbp(f, p, false);
  } catch (const std::invalid_argument& e) {
    throw Failure(e.what());
  }
  if (!a.out.empty()) {
    auto os = open_out(a.out);
    write_lbp(os, P);
  }
  auto pp = pre_post_spaces(P);
  auto rep = regularity_check(P, pp);
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  std::cout << "nodes " << P.size() << "\n";
  std::cout << "bottom-regular " << yn(rep.bottom) << (rep.bottom ? "" : "  " + rep.bottom_witness) << "\n";
  std::cout << "top-regular " << yn(rep.top) << (rep.top ? "" : "  " + rep.top_witness) << "\n";
  std::cout << "strongly-regular " << yn(rep.strong) << (rep.strong ? "" : "  " + rep.strong_witness) << "\n";
  // The dimension bound is a property of bottom-read-once programs only.
  if (rep.bottom) {
    auto bad = post_dimension_violation(P, pp);
    std::cout << "post-dimension " << (bad ? "violated at node " + std::to_string(*bad) : std::string("holds")) << "\n";
  } else {
    std::cout << "post-dimension n/a (not bottom-read-once)\n";
  }
  return 0;
}

// ---- experiments ----

struct ExpArgs {
  std::string out;
  std::uint64_t seed = 1;
  std::size_t samples = 100000;
  unsigned jobs = 1;
  // rank-fooling
  std::size_t r = 32, b = 8, m = 0;
  // walk
  std::uint64_t tmax = 10000;
  // conditioned-walk
  std::uint64_t k = 200;
  std::size_t t = 5;
  double c2 = 1.0;
  // stone experiments
  std::vector<int> ns{3, 4, 5};
  std::string strategy = "window";
  int height = 0;
  std::size_t candidates = 20;
  std::string gadget = "ip4";
  std::size_t queries = 8;
  std::size_t q = 0;
};

using Config = std::vector<std::pair<std::string, std::string>>;

void emit(const ExpArgs& a, const std::string& name, Config cfg, const std::vector<CsvRow>& rows) {
  cfg.insert(cfg.begin(), {"experiment", name});
  cfg.push_back({"seed", std::to_string(a.seed)});
  Sink out(a.out);
  write_csv(out.get(), cfg, rows);
}

int exp_rank_fooling(const ExpArgs& a) {
  Gadget g = make_ip(static_cast<int>(a.b));
  if (a.r % a.b != 0) throw CLI::ValidationError("--r", "r must be a multiple of b");
  std::size_t m = a.m ? a.m : 2 * a.r / a.b;
  Rng rng(a.seed);
  auto M = random_full_rank(a.r, m * a.b, rng);
  std::vector<bool> z(m), gamma(a.r);
  for (std::size_t j = 0; j < m; ++j) z[j] = rng.bit();
  for (std::size_t i = 0; i < a.r; ++i) gamma[i] = rng.bit();
  auto res = rank_fooling_estimate(M, gamma, z, g, a.samples, a.seed, a.jobs);
  std::ostringstream eps;
  auto d = std::gcd(res.epsilon.num, res.epsilon.den);
  eps << res.epsilon.num / d << "/" << res.epsilon.den / d;
  emit(a, "rank-fooling",
       {{"columns", "n=rank r; estimate=Pr[M beta=gamma]; bound=(1-eps/2)^floor(r/b)"},
        {"gadget", g.name()},
        {"blocks", std::to_string(m)},
        {"samples", std::to_string(a.samples)},
        {"epsilon", eps.str()}},
       {{static_cast<long long>(a.r), static_cast<long long>(a.b), a.seed, res.estimate, res.stderr_, res.bound}});
  return 0;
}

int exp_walk(const ExpArgs& a) {
  auto rep = check_walk_bound(a.tmax);
  std::vector<CsvRow> rows;
  for (std::uint64_t t = 1; t <= a.tmax; t = t < 10 ? t + 1 : t * 2) {
    BigRational p = walk_pmf(t, static_cast<std::int64_t>((t - 1) / 2));
    rows.push_back({static_cast<long long>(t), 1, a.seed, static_cast<double>(p), 0.0, 1.0 / std::sqrt(static_cast<double>(t))});
  }
  emit(a, "walk",
       {{"columns", "n=t; estimate=max_p Pr[Y_t=p] (exact); bound=1/sqrt(t)"},
        {"tmax", std::to_string(a.tmax)},
        {"bound_holds_for_all_t", rep.holds ? "yes" : "no (t=" + std::to_string(rep.first_failure) + ")"}},
       rows);
  return rep.holds ? 0 : 1;
}

int exp_conditioned_walk(const ExpArgs& a) {
  GapStructured gs;
  try {
    gs = gap_structured(a.k, a.t, a.c2);
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError("--k", e.what());
  }
  const WalkConditions& c = gs.conditions;
  std::int64_t best = 0;
  double best_p = -1;
  for (std::int64_t z = 0; z < static_cast<std::int64_t>(a.k); ++z) {
    auto p = conditioned_walk_exact(a.k, 0, c, z);
    if (p && *p > best_p) {
      best_p = *p;
      best = z;
    }
  }
  auto e = conditioned_walk_estimate(a.k, 0, c, best, a.samples, a.seed, a.jobs);
  emit(a, "conditioned-walk",
       {{"columns", "n=k; estimate=Pr[Y_k=z*|avoid S] (Monte Carlo); bound=1/(c2 t)"},
        {"t", std::to_string(a.t)},
        {"c2", std::to_string(a.c2)},
        {"interval", std::to_string(gs.left) + ".." + std::to_string(gs.right)},
        {"target", std::to_string(best)},
        {"exact", std::to_string(best_p)},
        {"accepted", std::to_string(e.accepted)}},
       {{static_cast<long long>(a.k), 1, a.seed, e.estimate, e.stderr_, 1.0 / (a.c2 * static_cast<double>(a.t))}});
  return e.estimable ? 0 : 1;
}

int exp_mu(const ExpArgs& a) {
  std::vector<CsvRow> rows;
  for (int n : a.ns) {
    Dag g = pyramid(n);
    auto rho = random_obfuscation(g.n_vertices, a.seed);
    CnfFormula f = stone_formula(g, rho);
    auto e = count_hits(a.samples, a.jobs, [&](std::size_t i) {
      auto s = sample_mu(n, trial_seed(a.seed, i));
      auto bad = falsified_clauses(f, s.values);
      return bad.size() == 1 && bad[0] == expected_falsified_clause(s, rho);
    });
    rows.push_back({n, 1, a.seed, e.mean(), e.stderr_(), 1.0});
  }
  emit(a, "mu", {{"columns", "estimate=fraction of samples falsifying exactly the endpoint clause; bound=1"}}, rows);
  return 0;
}

int exp_dt_error(const ExpArgs& a) {
  std::vector<CsvRow> rows;
  for (int n : a.ns) {
    Dag g = pyramid(n);
    // Past 2^26 table entries the map is hashed instead of stored.
    const std::size_t N = g.n_vertices;
    auto rho = N * N * N <= (std::size_t{1} << 26) ? random_obfuscation(N, a.seed) : ObfuscationMap::hashed(N, a.seed);
    int h = a.height ? a.height : static_cast<int>(std::floor(std::cbrt(static_cast<double>(n))));
    DecisionTree best;
    Estimate best_e;
    if (a.strategy == "window") {
      best = center_window_tree(n, rho, h);
      best_e = dt_error_rate(best, n, rho, a.samples, a.seed, a.jobs);
    } else if (a.strategy == "random") {
      Rng rng(a.seed);
      bool first = true;
      for (std::size_t c = 0; c < a.candidates; ++c) {
        auto t = random_color_tree(n, rho, h, rng);
        auto e = dt_error_rate(t, n, rho, a.samples, a.seed, a.jobs);
        if (first || e.hits < best_e.hits) {
          best = t;
          best_e = e;
          first = false;
        }
      }
    } else {
      throw CLI::ValidationError("--strategy", "expected window or random");
    }
    auto canon = canonicalize_dt(best, n);
    auto ce = dt_error_rate(canon, n, rho, a.samples, a.seed, a.jobs);
    rows.push_back({n, h, a.seed, ce.mean(), ce.stderr_(), 0.5});
  }
  emit(a, "dt-error",
       {{"columns", "b=tree height; estimate=error of the canonical tree under mu; bound=1/2 reference"},
        {"strategy", a.strategy},
        {"samples", std::to_string(a.samples)}},
       rows);
  return 0;
}

int exp_foolability(const ExpArgs& a) {
  Gadget g = gadget_by_name(a.gadget);
  std::vector<CsvRow> rows;
  for (int n : a.ns) {
    auto e = count_hits(a.samples, a.jobs, [&](std::size_t i) {
      auto smp = sample_mu_lifted(n, g, trial_seed(a.seed, i));
      Rng rng(trial_seed(a.seed, i) + 0x9e3779b97f4a7c15ULL);
      auto A = random_query_space(smp, g, a.queries, rng);
      return is_foolable(A, smp.alpha, g, smp.beta).foolable;
    });
    rows.push_back({n, g.arity(), a.seed, e.mean(), e.stderr_(), 0.6});
  }
  emit(a, "foolability",
       {{"columns", "estimate=fraction of traced nodes that are alpha-foolable; bound=3/5 reference"},
        {"gadget", g.name()},
        {"queries", std::to_string(a.queries)},
        {"samples", std::to_string(a.samples)}},
       rows);
  return 0;
}

int exp_obfuscation(const ExpArgs& a) {
  std::vector<CsvRow> rows;
  for (int n : a.ns) {
    std::size_t N = pyramid(n).n_vertices;
    auto rho = random_obfuscation(N, a.seed);
    std::size_t q = a.q ? a.q : std::max<std::size_t>(1, N / 4);
    auto rep = check_obfuscation(rho, q, a.samples, a.seed);
    double p = rep.fraction();
    double se = rep.total ? std::sqrt(p * (1 - p) / static_cast<double>(rep.total)) : 0.0;
    rows.push_back({n, static_cast<long long>(q), a.seed, p, se, 1.0});
  }
  emit(a, "obfuscation", {{"columns", "b=|Q|; estimate=fraction of variables hit by some triple outside Q; bound=1"}}, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stone formulas, ResLin proofs and linear branching programs"};
  app.require_subcommand(1);

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "generate a stone formula (DIMACS plus .meta sidecar)");
  gen->add_flag("--stone", ga.stone, "stone formula over the pyramid");
  gen->add_option("--n", ga.n, "pyramid height")->check(CLI::Range(2, 64));
  gen->add_option("--seed", ga.seed, "seed of the obfuscation map");
  gen->add_option("-o,--output", ga.out, "output prefix; writes PREFIX.cnf and PREFIX.meta");
  gen->add_option("--lift", ga.lift, "lift with a gadget: xor<b>, and<b>, ip<b>");
  gen->add_option("--max-clauses", ga.max_clauses, "refuse to write formulas with more clauses");
  gen->add_flag("--header-only", ga.header_only, "print only the DIMACS header");

  ProveArgs pa;
  auto* prove = app.add_subcommand("prove", "refute a generated stone formula (plain or lifted)");
  prove->add_option("formula", pa.formula, "DIMACS file")->required();
  prove->add_option("--meta", pa.meta, "metadata sidecar (default: alongside the formula)");
  prove->add_option("-o,--output", pa.out, "RLIN output (default stdout)");

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "verify an RLIN trace");
  check->add_option("formula", ca.formula, "DIMACS file")->required();
  check->add_option("proof", ca.proof, "RLIN trace")->required();
  check->add_option("--meta", ca.meta, "metadata sidecar");
  check->add_option("--mode", ca.mode, "resolution, reslin or tree-like");
  check->add_flag("--regularity", ca.regularity, "report regularity (resolution mode)");
  check->add_option("--jobs", ca.jobs, "worker threads")->check(CLI::Range(1u, 256u));

  LbpArgs la;
  auto* lbp = app.add_subcommand("lbp", "convert a trace to a branching program and report regularity");
  lbp->add_option("formula", la.formula, "DIMACS file")->required();
  lbp->add_option("proof", la.proof, "RLIN trace")->required();
  lbp->add_option("--meta", la.meta, "metadata sidecar");
  lbp->add_option("-o,--output", la.out, "write the program in lbp format");

  ExpArgs ea;
  auto* exp = app.add_subcommand("experiment", "run a seeded experiment and print CSV");
  exp->require_subcommand(1);
  auto common = [&](CLI::App* s) {
    s->add_option("--seed", ea.seed, "base seed; trial i uses seed XOR i");
    s->add_option("--samples,--trials", ea.samples, "Monte Carlo trials");
    s->add_option("--jobs", ea.jobs, "worker threads (output does not depend on it)")->check(CLI::Range(1u, 256u));
    s->add_option("-o,--output", ea.out, "CSV output (default stdout)");
  };
  auto* rf = exp->add_subcommand("rank-fooling", "Pr[M beta = gamma] against (1-eps/2)^floor(r/b)");
  common(rf);
  rf->add_option("--r", ea.r, "rank");
  rf->add_option("--b", ea.b, "inner-product gadget size");
  rf->add_option("--m", ea.m, "number of blocks (default 2r/b)");
  auto* wk = exp->add_subcommand("walk", "exact walk probabilities and the 1/sqrt(t) bound");
  common(wk);
  wk->add_option("--tmax", ea.tmax, "largest step checked");
  auto* cw = exp->add_subcommand("conditioned-walk", "walk conditioned to avoid a gap-structured set");
  common(cw);
  cw->add_option("--k", ea.k, "walk length");
  cw->add_option("--t", ea.t, "number of forbidden points");
  cw->add_option("--c2", ea.c2, "constant c2 >= 1")->check(CLI::Range(1.0, 1e6));
  auto* mu = exp->add_subcommand("mu", "falsified clauses under the hard distribution");
  common(mu);
  mu->add_option("--n", ea.ns, "pyramid heights");
  auto* dt = exp->add_subcommand("dt-error", "error of canonical color-querying decision trees");
  common(dt);
  dt->add_option("--n", ea.ns, "pyramid heights");
  dt->add_option("--strategy", ea.strategy, "window or random");
  dt->add_option("--height", ea.height, "tree height (default floor(n^(1/3)))");
  dt->add_option("--candidates", ea.candidates, "random trees tried");
  auto* fo = exp->add_subcommand("foolability", "foolability of nodes after random parity queries");
  common(fo);
  fo->add_option("--n", ea.ns, "pyramid heights");
  fo->add_option("--gadget", ea.gadget, "stifled gadget, e.g. ip4");
  fo->add_option("--queries", ea.queries, "queries answered before the node");
  auto* ob = exp->add_subcommand("obfuscation", "coverage of the obfuscation map outside a random set Q");
  common(ob);
  ob->add_option("--n", ea.ns, "pyramid heights");
  ob->add_option("--q", ea.q, "size of Q (default N/4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) return cmd_gen(ga);
    if (*prove) return cmd_prove(pa);
    if (*check) return cmd_check(ca);
    if (*lbp) return cmd_lbp(la);
    if (*rf) return exp_rank_fooling(ea);
    if (*wk) return exp_walk(ea);
    if (*cw) return exp_conditioned_walk(ea);
    if (*mu) return exp_mu(ea);
    if (*dt) return exp_dt_error(ea);
    if (*fo) return exp_foolability(ea);
    if (*ob) return exp_obfuscation(ea);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
