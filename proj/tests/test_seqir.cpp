#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "dfvalid/seq.hpp"
#include "dfvalid/solver.hpp"

using namespace dfv;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

SeqProgram fixture(const std::string& name) {
  return parse_seq(slurp(std::string(DFVALID_FIXTURE_DIR) + "/" + name));
}

const char* kDiamond = R"(
func @pick(%sel) {
entry:
  %c = icmp eq %sel, 1
  br %c, label %l, label %r
l:
  br label %join
r:
  br label %join
join:
  %x = phi [10, l], [20, r]
  store %x, 0
  ret
}
)";

}  // namespace

TEST_CASE("parses the increment-copy loop") {
  SeqProgram p = fixture("incr_copy.seq");
  CHECK(p.name == "incr_copy");
  REQUIRE(p.params.size() == 3);
  CHECK(p.params[0].is_ptr);
  CHECK(!p.params[2].is_ptr);
  CHECK(p.noalias == std::vector<std::string>{"A", "B"});
  REQUIRE(p.blocks.size() == 4);
  CHECK(p.blocks[0].label == "entry");
  CHECK(p.block("body")->instrs.size() == 6);
  CHECK(p.block("header")->instrs[0].kind == SeqInstr::Kind::Phi);
}

TEST_CASE("printer round-trips") {
  for (const char* name : {"incr_copy.seq", "nested_copy.seq", "straight_store.seq"}) {
    SeqProgram p = fixture(name);
    std::string once = print_seq(p);
    std::string twice = print_seq(parse_seq(once));
    CHECK(once == twice);
  }
}

TEST_CASE("single-block program") {
  SeqProgram p = parse_seq("func @nop() {\ns:\n  ret\n}\n");
  CHECK(p.blocks.size() == 1);
  CHECK(p.params.empty());
}

TEST_CASE("parse and validation errors") {
  CHECK_THROWS_AS(parse_seq("func @f() {\ne:\n  br label %nowhere\n}\n"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_seq("func @f(%a) {\ne:\n  %x = add %a, 1\n  %x = add %a, 2\n  ret\n}\n"),
      ParseError);
  CHECK_THROWS_AS(parse_seq("func @f(%a) {\ne:\n  %x = frob %a, 1\n  ret\n}\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_seq("func @f() {\ne:\n  %x = add 1, 2\n}\n"), ParseError);
  CHECK_THROWS_AS(parse_seq("func @f(%a) {\n  %x = add %a, 1\ne:\n  ret\n}\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_seq("func @f(%a) {\ne:\n  %x = add %missing, 1\n  ret\n}\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_seq("func @f(%a) {\ne:\n  noalias(%a)\n  ret\n}\n"),
                  ParseError);
  // Phi listing a non-predecessor.
  CHECK_THROWS_AS(parse_seq(R"(
func @f(%a) {
e:
  br label %j
j:
  %x = phi [1, e], [2, nowhere]
  ret
}
)"),
                  ParseError);
  // Entry with a predecessor.
  CHECK_THROWS_AS(parse_seq("func @f(%c) {\ne:\n  br %c, label %e, label %x\nx:\n  ret\n}\n"),
                  ParseError);
}

TEST_CASE("register widths") {
  SeqProgram p = parse_seq(R"(
func @w(%a) {
e:
  %t = trunc %a to 4
  %s = sext %t to 8
  %z = zext %t to 8
  %q = add %s, %z
  %c = icmp ult %t, 3
  %v = select %c, %q, %z
  ret
}
)");
  auto w = reg_widths(p, 8);
  CHECK(w.at("a") == 8);
  CHECK(w.at("t") == 4);
  CHECK(w.at("s") == 8);
  CHECK(w.at("c") == 1);
  CHECK(w.at("v") == 8);
  // The same program at word width 4 would need casts to 8.
  CHECK_THROWS_AS(reg_widths(p, 4), TypeError);

  SeqProgram bad = parse_seq(R"(
func @w(%a) {
e:
  %t = trunc %a to 4
  %q = add %t, %a
  ret
}
)");
  CHECK_THROWS_AS(reg_widths(bad, 8), TypeError);
}

TEST_CASE("concrete run of the increment-copy loop") {
  SeqProgram p = fixture("incr_copy.seq");
  // A at [0,1] = {3,4}, B at 16. Source-level loop gives B = {4,5}.
  MemMap mem{{0, 3}, {1, 4}};
  VarEnv args{{"A", 0}, {"B", 16}, {"len", 2}};
  SeqRunResult r = run_concrete(p, args, mem, 8, 1000);
  REQUIRE(!r.exhausted);
  CHECK(r.config.final);
  CHECK(r.config.mem.at(16) == 4);
  CHECK(r.config.mem.at(17) == 5);
  CHECK(r.config.mem.at(0) == 3);
  // entry br, then 2 iterations of (3 header + 7 body) plus the final
  // header check and ret.
  CHECK(r.steps == 1 + 2 * 10 + 3 + 1);
  CHECK(r.trace.front() == "entry:0");
  CHECK(r.trace.back() == "end:0");

  SeqRunResult again = run_concrete(p, args, mem, 8, 1000);
  CHECK(again.trace == r.trace);
  CHECK(again.config.mem == r.config.mem);

  SeqRunResult tiny = run_concrete(p, args, mem, 8, 1);
  CHECK(tiny.exhausted);
  CHECK(tiny.steps == 1);
}

TEST_CASE("store writes the addressed word") {
  SeqProgram p = fixture("straight_store.seq");
  SeqRunResult r = run_concrete(p, {{"B", 9}}, {}, 8, 10);
  CHECK(r.config.mem.at(9) == 5);
}

TEST_CASE("condbr picks the false target on zero") {
  SeqProgram p = parse_seq(kDiamond);
  SeqRunResult r = run_concrete(p, {{"sel", 0}}, {}, 8, 100);
  CHECK(r.config.mem.at(0) == 20);
  SeqRunResult t = run_concrete(p, {{"sel", 1}}, {}, 8, 100);
  CHECK(t.config.mem.at(0) == 10);
}

TEST_CASE("phi respects arrival order") {
  // Same diamond, but phi operands swapped between predecessors.
  SeqProgram p = parse_seq(R"(
func @pick(%sel) {
entry:
  %c = icmp eq %sel, 1
  br %c, label %l, label %r
l:
  br label %join
r:
  br label %join
join:
  %x = phi [20, r], [10, l]
  store %x, 0
  ret
}
)");
  CHECK(run_concrete(p, {{"sel", 1}}, {}, 8, 100).config.mem.at(0) == 10);
  CHECK(run_concrete(p, {{"sel", 0}}, {}, 8, 100).config.mem.at(0) == 20);
}

TEST_CASE("same-block phis read pre-jump values") {
  // After one trip around the loop, %a and %b must swap, not collapse.
  SeqProgram p = parse_seq(R"(
func @swap(%n) {
entry:
  br label %loop
loop:
  %a = phi [1, entry], [%b, loop2]
  %b = phi [2, entry], [%a, loop2]
  %k = phi [0, entry], [%knext, loop2]
  %c = icmp slt %k, %n
  br %c, label %loop2, label %out
loop2:
  %knext = add %k, 1
  br label %loop
out:
  store %a, 0
  store %b, 1
  ret
}
)");
  SeqRunResult r = run_concrete(p, {{"n", 1}}, {}, 8, 100);
  CHECK(r.config.mem.at(0) == 2);
  CHECK(r.config.mem.at(1) == 1);
}

TEST_CASE("cut points follow loop structure") {
  CutSet c1 = place_cutpoints(fixture("incr_copy.seq"));
  REQUIRE(c1.cuts.size() == 3);
  CHECK(c1.cuts[0].kind == CutPoint::Kind::Entry);
  CHECK(c1.cuts[1].kind == CutPoint::Kind::BackEdge);
  CHECK(c1.cuts[1].header == "header");
  CHECK(c1.cuts[1].latch == "body");
  CHECK(c1.cuts[2].kind == CutPoint::Kind::Exit);
  CHECK(c1.of_header("header") == 1);

  CutSet c2 = place_cutpoints(fixture("straight_store.seq"));
  CHECK(c2.cuts.size() == 2);

  CutSet c3 = place_cutpoints(fixture("nested_copy.seq"));
  REQUIRE(c3.cuts.size() == 4);
  CHECK(c3.cuts[1].header == "outer");
  CHECK(c3.cuts[2].header == "inner");
  CHECK(c3.cuts[2].latch == "ibody");
}

TEST_CASE("analysis rejects unsupported shapes") {
  // Two latches for one header.
  CHECK_THROWS_AS(analyze_seq(parse_seq(R"(
func @f(%c) {
e:
  br label %h
h:
  %x = phi [0, e], [1, a], [2, b]
  br %c, label %a, label %b
a:
  br label %h
b:
  br label %h
}
)")),
                  ParseError);
  // Irreducible: jump into the middle of a cycle.
  CHECK_THROWS_AS(analyze_seq(parse_seq(R"(
func @f(%c) {
e:
  br %c, label %u, label %v
u:
  %x = phi [0, e], [1, v]
  br label %v
v:
  %y = phi [0, e], [1, u]
  br %c, label %u, label %done
done:
  ret
}
)")),
                  ParseError);
  // Unreachable block.
  CHECK_THROWS_AS(analyze_seq(parse_seq(
                      "func @f() {\ne:\n  ret\nords:\n  ret\n}\n")),
                  ParseError);
}

TEST_CASE("loop analysis identifies shape and liveness") {
  SeqProgram p = fixture("nested_copy.seq");
  SeqAnalysis a = analyze_seq(p);
  REQUIRE(a.loops.count("outer"));
  REQUIRE(a.loops.count("inner"));
  const LoopInfo& outer = a.loops.at("outer");
  const LoopInfo& inner = a.loops.at("inner");
  CHECK(outer.depth == 1);
  CHECK(inner.depth == 2);
  CHECK(inner.parent == "outer");
  CHECK(outer.parent.empty());
  CHECK(outer.while_shape);
  CHECK(inner.while_shape);
  CHECK(outer.body_target == "inner");
  CHECK(outer.exit_target == "end");
  CHECK(outer.blocks.count("ibody"));
  CHECK(!outer.blocks.count("end"));
  CHECK(inner.blocks == std::set<std::string>{"inner", "ibody"});
  CHECK(a.dominates("outer", "olatch"));
  CHECK(!a.dominates("inner", "olatch"));

  SeqProgram q = fixture("incr_copy.seq");
  SeqAnalysis aq = analyze_seq(q);
  CHECK(aq.live_out.at("body") ==
        std::set<std::string>{"A", "B", "len", "inext"});
}

TEST_CASE("symbolic execution from the entry cut") {
  SeqProgram p = fixture("incr_copy.seq");
  CutSet cuts = place_cutpoints(p);
  SymSeqState st = entry_state(p, 8, "Mem");
  auto branches = sym_run_to_cutpoints(p, st, 8, cuts);
  REQUIRE(branches.size() == 2);

  // True arm first: one full iteration to the back edge.
  CHECK(branches[0].end_cut == 1);
  CHECK(branches[1].end_cut == cuts.exit_idx());
  CHECK(branches[0].steps.back().id == "body:6");
  CHECK(branches[1].steps.back().id == "end:0");
  CHECK(branches[0].end.block == "header");
  CHECK(branches[0].end.prev == "body");
  CHECK(branches[0].end.regs.at("inext").get() ==
        t_const(1, 8).get());

  // psi for the loop arm is 0 <s len; for the exit arm its negation.
  Formula expect_t = f_atom(t_bin(BinOp::Slt, t_const(0, 8), t_var("%len", 8)));
  BackendConfig cfg;
  CHECK(check_valid(f_implies(branches[0].psi, expect_t), cfg).verdict ==
        Validity::Valid);
  CHECK(check_valid(f_implies(expect_t, branches[0].psi), cfg).verdict ==
        Validity::Valid);

  // Coverage and pairwise disjointness.
  CHECK(check_valid(f_or(branches[0].psi, branches[1].psi), cfg).verdict ==
        Validity::Valid);
  CHECK(check_sat(f_and(branches[0].psi, branches[1].psi), cfg).verdict ==
        Verdict::Unsat);

  // Resuming from the back-edge state yields loop-again and exit branches.
  auto more = sym_run_to_cutpoints(p, branches[0].end, 8, cuts);
  REQUIRE(more.size() == 2);
  CHECK(more[0].end_cut == 1);
  CHECK(more[1].end_cut == cuts.exit_idx());
}

TEST_CASE("symbolic and concrete execution agree branch by branch") {
  SeqProgram p = fixture("incr_copy.seq");
  CutSet cuts = place_cutpoints(p);
  auto branches = sym_run_to_cutpoints(p, entry_state(p, 4, "Mem"), 4, cuts);
  MemMap mem{{0, 3}, {1, 4}};
  MemEnv mem_env{{"Mem", {{0, 3}, {1, 4}}}};
  for (word len = 0; len < 16; ++len) {
    VarEnv env{{"%A", 0}, {"%B", 8}, {"%len", len}};
    int hits = 0;
    for (const auto& br : branches) {
      if (!eval_formula(br.psi, env, mem_env, 4)) continue;
      ++hits;
      SeqRunResult run =
          run_concrete(p, {{"A", 0}, {"B", 8}, {"len", len}}, mem, 4, 1000);
      REQUIRE(run.trace.size() >= br.steps.size());
      for (std::size_t i = 0; i < br.steps.size(); ++i)
        CHECK(run.trace[i] == br.steps[i].id);
    }
    CHECK(hits == 1);  // partition
  }
}

TEST_CASE("branch cap reports divergence") {
  std::ostringstream os;
  os << "func @wide(%a) {\nentry:\n  br label %b0\n";
  int n = 8;
  for (int i = 0; i < n; ++i) {
    os << "b" << i << ":\n";
    os << "  %c" << i << " = icmp eq %a, " << i << "\n";
    os << "  br %c" << i << ", label %t" << i << ", label %f" << i << "\n";
    os << "t" << i << ":\n  br label %b" << i + 1 << "\n";
    os << "f" << i << ":\n  br label %b" << i + 1 << "\n";
  }
  os << "b" << n << ":\n  ret\n}\n";
  SeqProgram p = parse_seq(os.str());
  CutSet cuts = place_cutpoints(p);
  CHECK_THROWS_AS(sym_run_to_cutpoints(p, entry_state(p, 8, "Mem"), 8, cuts),
                  CapabilityError);
  auto ok = sym_run_to_cutpoints(p, entry_state(p, 8, "Mem"), 8, cuts, 1000);
  CHECK(ok.size() == 256);
}

TEST_CASE("symbolic loads and stores build memory terms") {
  SeqProgram p = fixture("straight_store.seq");
  CutSet cuts = place_cutpoints(p);
  auto branches = sym_run_to_cutpoints(p, entry_state(p, 8, "M0"), 8, cuts);
  REQUIRE(branches.size() == 1);
  CHECK(branches[0].psi->kind == FormulaKind::True);
  Mem expect = m_update(m_base("M0", 8), t_var("%B", 8), t_const(5, 8));
  CHECK(branches[0].end.mem.get() == expect.get());
}
