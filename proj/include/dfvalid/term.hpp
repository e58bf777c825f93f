#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dfvalid/words.hpp"

namespace dfv {

// Immutable, interned expression DAG. Interning makes syntactic equality a
// pointer comparison, which pattern matching and generalization lean on.

class TermNode;
class MemNode;
using Term = std::shared_ptr<const TermNode>;
using Mem = std::shared_ptr<const MemNode>;

enum class TermKind { Const, Var, Binary, ZExt, SExt, Trunc, Select, MemRead };

class TermNode {
 public:
  TermKind kind;
  unsigned width;           // result width in bits
  word cval = 0;            // Const
  std::string name;         // Var
  BinOp bop = BinOp::Add;   // Binary
  unsigned src_width = 0;   // ZExt/SExt/Trunc operand width
  std::vector<Term> ops;    // operands
  Mem mem;                  // MemRead source

  std::size_t hash = 0;
  std::uint64_t id = 0;  // interning sequence number, stable within a process
};

enum class MemKind { Base, Update };

class MemNode {
 public:
  MemKind kind;
  unsigned width;     // word width for both addresses and values
  std::string name;   // Base
  Mem prev;           // Update
  Term addr, value;   // Update

  std::size_t hash = 0;
  std::uint64_t id = 0;
};

struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EnvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Constructors intern and constant-fold. No rewriting beyond constant folding
// and last-write-wins update chains.
Term t_const(word v, unsigned width);
Term t_var(const std::string& name, unsigned width);
Term t_bin(BinOp op, Term a, Term b);
Term t_zext(Term a, unsigned to);
Term t_sext(Term a, unsigned to);
Term t_trunc(Term a, unsigned to);
Term t_select(Term cond, Term a, Term b);
Term t_memread(Mem m, Term addr);

Mem m_base(const std::string& name, unsigned width);
Mem m_update(Mem m, Term addr, Term value);

inline bool is_const(const Term& t) { return t && t->kind == TermKind::Const; }
inline bool is_const(const Term& t, word v) {
  return is_const(t) && t->cval == v;
}

std::string term_str(const Term& t);
std::string mem_str(const Mem& m);

// Concrete environments. Memory maps are sparse; unwritten addresses read 0.
using VarEnv = std::map<std::string, word>;
using MemMap = std::map<word, word>;
using MemEnv = std::map<std::string, MemMap>;

word eval_concrete(const Term& t, const VarEnv& env, const MemEnv& mem_env);
word eval_mem_at(const Mem& m, word addr, const VarEnv& env, const MemEnv& mem_env);

// Substitution maps variables to terms and memory bases to memories.
struct Subst {
  std::map<std::string, Term> vars;
  std::map<std::string, Mem> mems;
};
Term subst_term(const Term& t, const Subst& s);
Mem subst_mem(const Mem& m, const Subst& s);

void collect_vars(const Term& t, std::map<std::string, unsigned>& vars,
                  std::map<std::string, unsigned>& mems);
void collect_vars(const Mem& m, std::map<std::string, unsigned>& vars,
                  std::map<std::string, unsigned>& mems);

// ---------------------------------------------------------------------------
// Formulas: boolean structure over width-1 terms and memory equalities.

class FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

enum class FormulaKind { True, False, Atom, MemEq, Not, And, Or, Implies };

class FormulaNode {
 public:
  FormulaKind kind;
  Term atom;                     // Atom: width-1 term, true iff non-zero
  Mem mem_a, mem_b;              // MemEq
  std::vector<Formula> children; // Not(1), And/Or(n), Implies(2)
};

Formula f_true();
Formula f_false();
Formula f_atom(Term t);                   // width 1 required
Formula f_cmp(BinOp op, Term a, Term b);  // comparison sugar
Formula f_eq(Term a, Term b);
Formula f_mem_eq(Mem a, Mem b);
Formula f_not(Formula f);
Formula f_and(std::vector<Formula> fs);
Formula f_and(Formula a, Formula b);
Formula f_or(std::vector<Formula> fs);
Formula f_or(Formula a, Formula b);
Formula f_implies(Formula a, Formula b);

std::string formula_str(const Formula& f);
Formula subst_formula(const Formula& f, const Subst& s);
void collect_vars(const Formula& f, std::map<std::string, unsigned>& vars,
                  std::map<std::string, unsigned>& mems);

// Three-valued on purpose: memory equality needs the full address space, so
// callers supply complete maps for every base mentioned.
bool eval_formula(const Formula& f, const VarEnv& env, const MemEnv& mem_env,
                  unsigned addr_width);

}  // namespace dfv
