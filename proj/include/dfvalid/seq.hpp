#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dfvalid/term.hpp"

namespace dfv {

// The sequential IR: SSA basic blocks over word-sized integers. Pointers are
// plain words; address arithmetic is ordinary arithmetic. The register width
// defaults to the word width chosen at run time; casts narrow or widen to
// explicit bit counts.

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Operand {
  bool is_const = false;
  word cval = 0;
  std::string reg;
};

struct SeqInstr {
  enum class Kind { Bin, ZExt, SExt, Trunc, Select, Phi, Load, Store };
  Kind kind;
  std::string result;  // empty for Store
  BinOp bop = BinOp::Add;
  unsigned cast_to = 0;
  // Bin: a, b. Select: cond, a, b. Load: addr. Store: value, addr.
  // Casts: a. Phi: one operand per incoming edge, labels in phi_preds.
  std::vector<Operand> args;
  std::vector<std::string> phi_preds;
};

struct SeqTerminator {
  enum class Kind { Br, CondBr, Ret };
  Kind kind = Kind::Ret;
  Operand cond;  // CondBr
  std::string target_true, target_false;  // Br uses target_true
};

struct SeqBlock {
  std::string label;
  std::vector<SeqInstr> instrs;
  SeqTerminator term;
};

struct SeqParam {
  std::string name;
  bool is_ptr = false;
};

struct SeqProgram {
  std::string name;
  std::vector<SeqParam> params;
  std::vector<SeqBlock> blocks;  // first block is the entry
  std::vector<std::string> noalias;  // pointer params, pairwise disjoint

  const SeqBlock* block(const std::string& label) const;
  bool is_param(const std::string& name) const;
  // "<block>:<index>"; the terminator uses index = #instrs.
  static std::string instr_id(const std::string& block, std::size_t idx);
};

SeqProgram parse_seq(const std::string& text);
std::string print_seq(const SeqProgram& p);
// Structural checks: entry shape, SSA single assignment, dominated uses,
// phi/predecessor agreement, label resolution. Throws ParseError.
void validate_seq(const SeqProgram& p);

// Register widths at word width W. Casts pin absolute widths; everything
// else inherits from its operands. Throws TypeError on inconsistency.
std::map<std::string, unsigned> reg_widths(const SeqProgram& p, unsigned W);

// --- control flow analysis ---

struct LoopInfo {
  std::string header;
  std::string latch;               // single in-loop predecessor of the header
  std::set<std::string> blocks;    // includes the header
  std::string parent;              // innermost enclosing header, or ""
  unsigned depth = 1;
  // While shape: the header's condbr picks between the loop body and the
  // sole exit; no other edge leaves the loop. Required by the compiler,
  // not by execution.
  bool while_shape = false;
  std::string body_target, exit_target;
};

struct SeqAnalysis {
  std::vector<std::string> rpo;
  std::map<std::string, std::vector<std::string>> preds, succs;
  std::map<std::string, std::string> idom;  // entry maps to itself
  std::vector<std::pair<std::string, std::string>> back_edges;  // latch, header
  std::map<std::string, LoopInfo> loops;  // keyed by header
  std::map<std::string, std::set<std::string>> live_in, live_out;

  bool dominates(const std::string& a, const std::string& b) const;
  const LoopInfo* innermost_loop(const std::string& block) const;
};

// Throws ParseError on irreducible control flow or a multi-latch header.
SeqAnalysis analyze_seq(const SeqProgram& p);

// --- cut points ---

struct CutPoint {
  enum class Kind { Entry, BackEdge, Exit };
  Kind kind;
  std::string header;  // BackEdge: loop header label
  std::string latch;
  std::string str() const;
};

struct CutSet {
  std::vector<CutPoint> cuts;  // Entry first, headers in rpo order, Exit last
  int entry_idx() const { return 0; }
  int exit_idx() const { return int(cuts.size()) - 1; }
  int of_header(const std::string& header) const;
};

CutSet place_cutpoints(const SeqProgram& p);

// --- concrete execution ---

struct SeqConfig {
  std::string block;
  std::size_t idx = 0;
  std::string prev;
  VarEnv regs;
  MemMap mem;
  bool final = false;
  // Phi results are staged on block entry so same-block phis read the
  // values from before the jump (parallel-copy semantics).
  VarEnv staged;
};

struct SeqRunResult {
  SeqConfig config;
  std::size_t steps = 0;
  bool exhausted = false;
  std::vector<std::string> trace;  // executed instruction ids
};

// One instruction or terminator. Returns false when already final.
bool step_concrete(const SeqProgram& p, SeqConfig& c, unsigned W,
                   const std::map<std::string, unsigned>& widths,
                   std::string* fired_id = nullptr);

SeqRunResult run_concrete(const SeqProgram& p, const VarEnv& args,
                          const MemMap& mem0, unsigned W, std::size_t fuel);

// --- symbolic execution ---

struct SymSeqState {
  std::string block;
  std::size_t idx = 0;
  std::string prev;
  std::map<std::string, Term> regs;
  Mem mem;
  std::map<std::string, Term> staged;  // see SeqConfig::staged
};

struct TraceStep {
  std::string id;
  Term result;  // null for stores and terminators
  Term cond;    // condbr only
  bool taken = false;
};

struct SeqBranch {
  Formula psi;  // over the start state's free variables
  std::vector<TraceStep> steps;
  int end_cut = -1;  // index into CutSet::cuts
  SymSeqState end;
};

// Explores every path from a cut-point state to the next cut-point arrival.
// Branch count over `cap` throws CapabilityError naming the start location.
std::vector<SeqBranch> sym_run_to_cutpoints(const SeqProgram& p,
                                            const SymSeqState& start,
                                            unsigned W, const CutSet& cuts,
                                            std::size_t cap = 64);

// Fresh symbolic state at the entry cut: one variable per parameter (named
// after it) and a fresh memory base.
SymSeqState entry_state(const SeqProgram& p, unsigned W,
                        const std::string& mem_name = "Mem");

}  // namespace dfv
