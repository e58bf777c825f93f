#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sys/stat.h>

#include "dfvalid/smtlib.hpp"
#include "dfvalid/solver.hpp"

using namespace dfv;

namespace {

BackendConfig internal_only() { return BackendConfig{}; }

Term x4() { return t_var("x", 4); }
Term y4() { return t_var("y", 4); }

// Full enumeration over scalars and complete memory maps, for differential
// checks against the solver's lazier search.
bool brute_force_sat(const Formula& f, unsigned addr_width) {
  std::map<std::string, unsigned> vars, mems;
  collect_vars(f, vars, mems);
  std::vector<std::pair<std::string, unsigned>> vlist(vars.begin(), vars.end());
  std::vector<std::string> mlist;
  for (auto& [name, w] : mems) {
    (void)w;
    mlist.push_back(name);
  }
  word cell_count = word(1) << addr_width;
  word cell_values = word(1) << addr_width;  // value width == addr width here
  unsigned bits = 0;
  for (auto& [n, w] : vlist) {
    (void)n;
    bits += w;
  }
  word mem_states = 1;
  for (std::size_t i = 0; i < mlist.size() * cell_count; ++i)
    mem_states *= cell_values;
  for (word vi = 0; vi < (word(1) << bits); ++vi) {
    VarEnv env;
    word rest = vi;
    for (auto& [name, w] : vlist) {
      env[name] = rest & mask_of(w);
      rest >>= w;
    }
    for (word mi = 0; mi < mem_states; ++mi) {
      MemEnv mem;
      word mrest = mi;
      for (const auto& name : mlist) {
        MemMap map;
        for (word a = 0; a < cell_count; ++a) {
          map[a] = mrest % cell_values;
          mrest /= cell_values;
        }
        mem[name] = std::move(map);
      }
      if (eval_formula(f, env, mem, addr_width)) return true;
    }
  }
  return false;
}

std::string write_fake_solver(const std::string& name, const std::string& body) {
  std::string path = "/tmp/" + name;
  {
    std::ofstream out(path);
    out << "#!/bin/sh\n" << body;
  }
  chmod(path.c_str(), 0755);
  return path;
}

}  // namespace

TEST_CASE("unique model of a linear equation") {
  // 3x = 6 mod 16 has the single solution x = 2 (3 * 11 = 33 = 1 mod 16).
  Formula f = f_eq(t_bin(BinOp::Mul, x4(), t_const(3, 4)), t_const(6, 4));
  SolverResult r = check_sat(f, internal_only());
  REQUIRE(r.verdict == Verdict::Sat);
  REQUIRE(r.model.has_value());
  CHECK(r.model->vars.at("x") == 2);
}

TEST_CASE("signed comparisons find wraparound counterexamples") {
  // "0 <= x" signed is falsified by any x with the sign bit set.
  ValidityResult r =
      check_valid(f_cmp(BinOp::Sle, t_const(0, 4), x4()), internal_only());
  REQUIRE(r.verdict == Validity::Invalid);
  REQUIRE(r.counter_model.has_value());
  CHECK(signed_of(r.counter_model->vars.at("x"), 4) < 0);
  // Unsigned, the same statement is a tautology.
  CHECK(check_valid(f_cmp(BinOp::Ule, t_const(0, 4), x4()), internal_only())
            .verdict == Validity::Valid);
}

TEST_CASE("basic unsat and tautologies") {
  Formula f = f_eq(t_bin(BinOp::Add, x4(), t_const(1, 4)), x4());
  CHECK(check_sat(f, internal_only()).verdict == Verdict::Unsat);
  CHECK(check_sat(f_cmp(BinOp::Ult, x4(), x4()), internal_only()).verdict ==
        Verdict::Unsat);
  CHECK(check_valid(f_eq(x4(), x4()), internal_only()).verdict ==
        Validity::Valid);
  Formula a = f_atom(t_var("a", 1));
  Formula b = f_atom(t_var("b", 1));
  Formula demorgan =
      f_and(f_implies(f_not(f_and(a, b)), f_or(f_not(a), f_not(b))),
            f_implies(f_or(f_not(a), f_not(b)), f_not(f_and(a, b))));
  CHECK(check_valid(demorgan, internal_only()).verdict == Validity::Valid);
}

TEST_CASE("equality elimination admits wide bound variables") {
  // x and y are 32-bit, far over the enumeration budget, but both are bound.
  Term x = t_var("wx", 32);
  Term y = t_var("wy", 32);
  Formula f = f_and({f_eq(x, t_const(7, 32)),
                     f_eq(y, t_bin(BinOp::Add, x, t_const(1, 32))),
                     f_cmp(BinOp::Ult, y, t_const(100, 32))});
  SolverResult r = check_sat_internal(f, internal_only());
  REQUIRE(r.verdict == Verdict::Sat);
  CHECK(r.model->vars.at("wx") == 7);
  CHECK(r.model->vars.at("wy") == 8);
}

TEST_CASE("budget enforcement") {
  Formula f = f_and(f_cmp(BinOp::Ult, t_var("p", 8), t_var("q", 8)),
                    f_cmp(BinOp::Ult, t_var("q", 8), t_var("r", 8)));
  CHECK_THROWS_AS(check_sat(f, internal_only()), CapabilityError);
  BackendConfig wide;
  wide.budget_bits = 24;
  SolverResult r = check_sat(f, wide);
  REQUIRE(r.verdict == Verdict::Sat);
  word p = r.model->vars.at("p"), q = r.model->vars.at("q"),
       rr = r.model->vars.at("r");
  CHECK(p < q);
  CHECK(q < rr);
}

TEST_CASE("address width limit") {
  Formula f = f_eq(t_memread(m_base("Big", 9), t_const(0, 9)), t_const(1, 9));
  CHECK_THROWS_AS(check_sat(f, internal_only()), CapabilityError);
}

TEST_CASE("memory equality across distinct bases") {
  Mem M = m_base("M", 3);
  Mem N = m_base("N", 3);
  Formula eq = f_mem_eq(m_update(M, t_const(0, 3), t_const(5, 3)),
                        m_update(N, t_const(0, 3), t_const(5, 3)));
  SolverResult r = check_sat(eq, internal_only());
  CHECK(r.verdict == Verdict::Sat);
  // And the two bases really can differ elsewhere.
  CHECK(check_sat(f_not(eq), internal_only()).verdict == Verdict::Sat);
}

TEST_CASE("commuting writes to distinct addresses") {
  Mem M = m_base("M", 2);
  Term x = t_var("x", 2);
  Term y = t_var("y", 2);
  Mem left = m_update(m_update(M, x, t_const(1, 2)), y, t_const(2, 2));
  Mem right = m_update(m_update(M, y, t_const(2, 2)), x, t_const(1, 2));
  Formula claim = f_implies(f_cmp(BinOp::Ne, x, y), mem_equal(left, right));
  CHECK(check_valid(claim, internal_only()).verdict == Validity::Valid);
  // Without the disjointness premise the writes collide at x = y.
  ValidityResult bare = check_valid(mem_equal(left, right), internal_only());
  REQUIRE(bare.verdict == Validity::Invalid);
  CHECK(bare.counter_model->vars.at("x") == bare.counter_model->vars.at("y"));
}

TEST_CASE("differential against full enumeration") {
  Mem M = m_base("M", 1);
  Mem N = m_base("N", 1);
  Term x1 = t_var("x", 1);
  std::vector<Formula> cases = {
      f_eq(t_memread(M, x1), t_bin(BinOp::Xor, x1, t_const(1, 1))),
      f_and(f_mem_eq(M, N),
            f_cmp(BinOp::Ne, t_memread(M, t_const(0, 1)),
                  t_memread(N, t_const(0, 1)))),
      f_not(f_mem_eq(M, m_update(N, t_const(0, 1), t_const(1, 1)))),
      f_and(f_mem_eq(m_update(M, x1, t_const(1, 1)), N),
            f_eq(t_memread(N, t_const(0, 1)), t_const(0, 1))),
      f_mem_eq(m_update(M, t_const(0, 1), t_memread(N, t_const(1, 1))), N),
  };
  for (const auto& f : cases) {
    CAPTURE(formula_str(f));
    SolverResult r = check_sat(f, internal_only());
    REQUIRE(r.verdict != Verdict::Unknown);
    CHECK((r.verdict == Verdict::Sat) == brute_force_sat(f, 1));
    if (r.verdict == Verdict::Sat)
      CHECK(eval_formula(f, r.model->vars, r.model->mems, 1));
  }
}

TEST_CASE("models always satisfy the formula they came from") {
  std::vector<Formula> sats = {
      f_cmp(BinOp::Slt, x4(), t_bin(BinOp::Sub, t_const(0, 4), x4())),
      f_and(f_cmp(BinOp::Ult, x4(), y4()),
            f_eq(t_bin(BinOp::And, x4(), y4()), t_const(4, 4))),
      f_eq(t_memread(m_base("M", 4), x4()), t_const(3, 4)),
  };
  for (const auto& f : sats) {
    CAPTURE(formula_str(f));
    SolverResult r = check_sat(f, internal_only());
    REQUIRE(r.verdict == Verdict::Sat);
    CHECK(eval_formula(f, r.model->vars, r.model->mems, 4));
  }
}

TEST_CASE("cell branching limit reports unknown") {
  BackendConfig tight;
  tight.max_cells = 0;
  Formula f = f_eq(t_memread(m_base("M", 2), t_var("a", 2)), t_const(1, 2));
  SolverResult r = check_sat_internal(f, tight);
  CHECK(r.verdict == Verdict::Unknown);
  CHECK(!r.reason.empty());
}

TEST_CASE("script emission shapes") {
  CHECK(smtlib_term(t_const(7, 4)) == "#b0111");
  CHECK(smtlib_term(t_var("x", 4)) == "|x|");
  CHECK(smtlib_term(t_bin(BinOp::Slt, t_var("a", 4), t_var("b", 4))) ==
        "(ite (bvslt |a| |b|) #b1 #b0)");
  CHECK(smtlib_term(t_zext(t_var("a", 4), 8)) == "((_ zero_extend 4) |a|)");
  CHECK(smtlib_term(t_trunc(t_var("w", 8), 3)) == "((_ extract 2 0) |w|)");
  CHECK(smtlib_term(t_memread(m_base("M", 4), t_var("x", 4))) ==
        "(select |M| |x|)");
  CHECK(smtlib_mem(m_update(m_base("M", 4), t_var("x", 4), t_const(1, 4))) ==
        "(store |M| |x| #b0001)");
  CHECK(smtlib_formula(f_mem_eq(m_base("M", 4), m_base("N", 4))) ==
        "(= |M| |N|)");

  Formula f = f_eq(t_var("x", 4), t_const(7, 4));
  std::string script = smtlib_script(f);
  CHECK(script.find("(set-logic QF_ABV)") != std::string::npos);
  CHECK(script.find("(declare-fun |x| () (_ BitVec 4))") != std::string::npos);
  CHECK(script.find("(check-sat)") != std::string::npos);
  CHECK(script.find("(get-value (|x|))") != std::string::npos);

  Formula fm = f_eq(t_memread(m_base("M", 4), t_var("x", 4)), t_const(7, 4));
  std::string ms = smtlib_script(fm);
  CHECK(ms.find("(declare-fun |M| () (Array (_ BitVec 4) (_ BitVec 4)))") !=
        std::string::npos);
  CHECK(ms.find("(get-value ((select |M| |x|)))") != std::string::npos);
}

TEST_CASE("response parsing") {
  Formula f = f_eq(t_var("x", 4), t_const(7, 4));
  SmtResponse r = parse_smtlib_response("sat\n((|x| #b0111))\n", f);
  CHECK(r.verdict == Verdict::Sat);
  CHECK(r.model.vars.at("x") == 7);

  CHECK(parse_smtlib_response("unsat\n", f).verdict == Verdict::Unsat);
  CHECK(parse_smtlib_response("unknown\n", f).verdict == Verdict::Unknown);
  CHECK_THROWS(parse_smtlib_response("flubber\n", f));
  CHECK_THROWS(parse_smtlib_response("sat\n((|x| #b0111) (|y| #b1))\n", f));

  // Hex and (_ bvN w) literal forms, and memory map reconstruction.
  Formula fm = f_eq(t_memread(m_base("M", 4), t_var("x", 4)), t_const(7, 4));
  std::string text =
      "sat\n"
      "((|x| (_ bv3 4)))\n"
      "((|x| #x3))\n"
      "(((select |M| |x|) #x7))\n";
  SmtResponse rm = parse_smtlib_response(text, fm);
  CHECK(rm.model.vars.at("x") == 3);
  CHECK(rm.model.mems.at("M").at(3) == 7);
}

TEST_CASE("external solver pipeline with a scripted stand-in") {
  Formula f = f_eq(t_var("x", 4), t_const(7, 4));
  BackendConfig cfg;

  cfg.solver_path =
      write_fake_solver("dfv-fake-sat.sh", "echo sat\necho '((|x| #b0111))'\n");
  SolverResult good = check_sat_external(f, cfg);
  REQUIRE(good.verdict == Verdict::Sat);
  CHECK(good.model->vars.at("x") == 7);

  // A wrong model is caught by verification and degraded to unknown.
  cfg.solver_path =
      write_fake_solver("dfv-fake-lie.sh", "echo sat\necho '((|x| #b0011))'\n");
  SolverResult lie = check_sat_external(f, cfg);
  CHECK(lie.verdict == Verdict::Unknown);

  cfg.solver_path = write_fake_solver("dfv-fake-unsat.sh", "echo unsat\n");
  CHECK(check_sat_external(f, cfg).verdict == Verdict::Unsat);

  cfg.solver_path = write_fake_solver("dfv-fake-junk.sh", "echo segfault\n");
  SolverResult junk = check_sat_external(f, cfg);
  CHECK(junk.verdict == Verdict::Unknown);
  CHECK(!junk.reason.empty());
}

TEST_CASE("dispatcher falls back to the external solver over budget") {
  Formula f = f_and(f_cmp(BinOp::Ult, t_var("p", 8), t_var("q", 8)),
                    f_cmp(BinOp::Ult, t_var("q", 8), t_var("r", 8)));
  BackendConfig cfg;
  cfg.solver_path = write_fake_solver(
      "dfv-fake-chain.sh",
      "echo sat\necho '((|p| #b00000000))'\necho '((|q| #b00000001))'\n"
      "echo '((|r| #b00000010))'\n");
  SolverResult r = check_sat(f, cfg);
  REQUIRE(r.verdict == Verdict::Sat);
  CHECK(r.model->vars.at("q") == 1);
}
