#include "dfvalid/term.hpp"

#include <mutex>
#include <sstream>
#include <unordered_map>

namespace dfv {

const char* binop_name(BinOp op) {
  switch (op) {
    case BinOp::Add: return "add";
    case BinOp::Sub: return "sub";
    case BinOp::Mul: return "mul";
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
    case BinOp::Xor: return "xor";
    case BinOp::Shl: return "shl";
    case BinOp::Lshr: return "lshr";
    case BinOp::Ashr: return "ashr";
    case BinOp::Eq: return "eq";
    case BinOp::Ne: return "ne";
    case BinOp::Ult: return "ult";
    case BinOp::Slt: return "slt";
    case BinOp::Ule: return "ule";
    case BinOp::Sle: return "sle";
  }
  return "?";
}

bool binop_from_name(const std::string& name, BinOp& out) {
  static const std::unordered_map<std::string, BinOp> table = {
      {"add", BinOp::Add}, {"sub", BinOp::Sub}, {"mul", BinOp::Mul},
      {"and", BinOp::And}, {"or", BinOp::Or},   {"xor", BinOp::Xor},
      {"shl", BinOp::Shl}, {"lshr", BinOp::Lshr}, {"ashr", BinOp::Ashr},
      {"eq", BinOp::Eq},   {"ne", BinOp::Ne},   {"ult", BinOp::Ult},
      {"slt", BinOp::Slt}, {"ule", BinOp::Ule}, {"sle", BinOp::Sle},
  };
  auto it = table.find(name);
  if (it == table.end()) return false;
  out = it->second;
  return true;
}

namespace {

inline std::size_t mix(std::size_t h, std::size_t v) {
  return h * 1000003u ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

struct Interner {
  std::mutex lock;
  std::unordered_multimap<std::size_t, Term> terms;
  std::unordered_multimap<std::size_t, Mem> mems;
  std::uint64_t next_id = 1;
};

Interner& interner() {
  static Interner it;
  return it;
}

bool term_equal_shallow(const TermNode& a, const TermNode& b) {
  if (a.kind != b.kind || a.width != b.width) return false;
  switch (a.kind) {
    case TermKind::Const: return a.cval == b.cval;
    case TermKind::Var: return a.name == b.name;
    case TermKind::Binary:
      if (a.bop != b.bop) return false;
      break;
    case TermKind::ZExt:
    case TermKind::SExt:
    case TermKind::Trunc:
      if (a.src_width != b.src_width) return false;
      break;
    default:
      break;
  }
  if (a.ops.size() != b.ops.size()) return false;
  for (std::size_t i = 0; i < a.ops.size(); ++i)
    if (a.ops[i].get() != b.ops[i].get()) return false;
  return a.mem.get() == b.mem.get();
}

std::size_t term_hash(const TermNode& n) {
  std::size_t h = static_cast<std::size_t>(n.kind);
  h = mix(h, n.width);
  h = mix(h, static_cast<std::size_t>(n.cval));
  h = mix(h, std::hash<std::string>{}(n.name));
  h = mix(h, static_cast<std::size_t>(n.bop));
  h = mix(h, n.src_width);
  for (const auto& o : n.ops) h = mix(h, o->hash);
  if (n.mem) h = mix(h, n.mem->hash);
  return h;
}

Term intern(TermNode n) {
  n.hash = term_hash(n);
  auto& it = interner();
  std::lock_guard<std::mutex> guard(it.lock);
  auto range = it.terms.equal_range(n.hash);
  for (auto i = range.first; i != range.second; ++i)
    if (term_equal_shallow(*i->second, n)) return i->second;
  auto node = std::make_shared<TermNode>(std::move(n));
  const_cast<TermNode&>(*node).id = it.next_id++;
  it.terms.emplace(node->hash, node);
  return node;
}

std::size_t mem_hash(const MemNode& n) {
  std::size_t h = static_cast<std::size_t>(n.kind);
  h = mix(h, n.width);
  h = mix(h, std::hash<std::string>{}(n.name));
  if (n.prev) h = mix(h, n.prev->hash);
  if (n.addr) h = mix(h, n.addr->hash);
  if (n.value) h = mix(h, n.value->hash);
  return h;
}

Mem intern(MemNode n) {
  n.hash = mem_hash(n);
  auto& it = interner();
  std::lock_guard<std::mutex> guard(it.lock);
  auto range = it.mems.equal_range(n.hash);
  for (auto i = range.first; i != range.second; ++i) {
    const MemNode& m = *i->second;
    if (m.kind == n.kind && m.width == n.width && m.name == n.name &&
        m.prev.get() == n.prev.get() && m.addr.get() == n.addr.get() &&
        m.value.get() == n.value.get())
      return i->second;
  }
  auto node = std::make_shared<MemNode>(std::move(n));
  const_cast<MemNode&>(*node).id = it.next_id++;
  it.mems.emplace(node->hash, node);
  return node;
}

}  // namespace

Term t_const(word v, unsigned width) {
  TermNode n;
  n.kind = TermKind::Const;
  n.width = width;
  n.cval = truncate(v, width);
  return intern(std::move(n));
}

Term t_var(const std::string& name, unsigned width) {
  TermNode n;
  n.kind = TermKind::Var;
  n.width = width;
  n.name = name;
  return intern(std::move(n));
}

Term t_bin(BinOp op, Term a, Term b) {
  if (!a || !b) throw TypeError("binary op on null term");
  if (a->width != b->width)
    throw TypeError(std::string("width mismatch in ") + binop_name(op) + ": " +
                    std::to_string(a->width) + " vs " + std::to_string(b->width));
  unsigned out_width = is_comparison(op) ? 1 : a->width;
  if (a->kind == TermKind::Const && b->kind == TermKind::Const)
    return t_const(apply_binop(op, a->cval, b->cval, a->width), out_width);
  TermNode n;
  n.kind = TermKind::Binary;
  n.width = out_width;
  n.bop = op;
  n.ops = {std::move(a), std::move(b)};
  return intern(std::move(n));
}

Term t_zext(Term a, unsigned to) {
  if (!a) throw TypeError("zext of null term");
  if (to < a->width) throw TypeError("zext to narrower width");
  if (to == a->width) return a;
  if (a->kind == TermKind::Const) return t_const(a->cval, to);
  TermNode n;
  n.kind = TermKind::ZExt;
  n.width = to;
  n.src_width = a->width;
  n.ops = {std::move(a)};
  return intern(std::move(n));
}

Term t_sext(Term a, unsigned to) {
  if (!a) throw TypeError("sext of null term");
  if (to < a->width) throw TypeError("sext to narrower width");
  if (to == a->width) return a;
  if (a->kind == TermKind::Const)
    return t_const(sext_word(a->cval, a->width, to), to);
  TermNode n;
  n.kind = TermKind::SExt;
  n.width = to;
  n.src_width = a->width;
  n.ops = {std::move(a)};
  return intern(std::move(n));
}

Term t_trunc(Term a, unsigned to) {
  if (!a) throw TypeError("trunc of null term");
  if (to > a->width) throw TypeError("trunc to wider width");
  if (to == a->width) return a;
  if (a->kind == TermKind::Const) return t_const(a->cval, to);
  TermNode n;
  n.kind = TermKind::Trunc;
  n.width = to;
  n.src_width = a->width;
  n.ops = {std::move(a)};
  return intern(std::move(n));
}

Term t_select(Term cond, Term a, Term b) {
  if (!cond || !a || !b) throw TypeError("select of null term");
  if (cond->width != 1) throw TypeError("select condition must be width 1");
  if (a->width != b->width) throw TypeError("select arm width mismatch");
  if (cond->kind == TermKind::Const) return cond->cval ? a : b;
  if (a.get() == b.get()) return a;
  TermNode n;
  n.kind = TermKind::Select;
  n.width = a->width;
  n.ops = {std::move(cond), std::move(a), std::move(b)};
  return intern(std::move(n));
}

Term t_memread(Mem m, Term addr) {
  if (!m || !addr) throw TypeError("memory read of null");
  if (addr->width != m->width) throw TypeError("memory read address width mismatch");
  // Walk update chains as far as syntactic equality or constant disequality decides.
  Mem cur = m;
  while (cur->kind == MemKind::Update) {
    if (cur->addr.get() == addr.get()) return cur->value;
    if (cur->addr->kind == TermKind::Const && addr->kind == TermKind::Const &&
        cur->addr->cval != addr->cval) {
      cur = cur->prev;
      continue;
    }
    break;
  }
  TermNode n;
  n.kind = TermKind::MemRead;
  n.width = m->width;
  n.mem = std::move(cur);
  n.ops = {std::move(addr)};
  return intern(std::move(n));
}

Mem m_base(const std::string& name, unsigned width) {
  MemNode n;
  n.kind = MemKind::Base;
  n.width = width;
  n.name = name;
  return intern(std::move(n));
}

Mem m_update(Mem m, Term addr, Term value) {
  if (!m || !addr || !value) throw TypeError("memory update of null");
  if (addr->width != m->width || value->width != m->width)
    throw TypeError("memory update width mismatch");
  // Last write wins: drop shadowed updates at a syntactically equal address.
  std::vector<const MemNode*> chain;
  Mem cur = m;
  bool dropped = false;
  while (cur->kind == MemKind::Update) {
    if (cur->addr.get() == addr.get()) {
      dropped = true;
      cur = cur->prev;
      continue;
    }
    chain.push_back(cur.get());
    cur = cur->prev;
  }
  Mem rebuilt = cur;
  if (dropped) {
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      MemNode n;
      n.kind = MemKind::Update;
      n.width = (*it)->width;
      n.prev = rebuilt;
      n.addr = (*it)->addr;
      n.value = (*it)->value;
      rebuilt = intern(std::move(n));
    }
  } else {
    rebuilt = m;
  }
  MemNode n;
  n.kind = MemKind::Update;
  n.width = m->width;
  n.prev = std::move(rebuilt);
  n.addr = std::move(addr);
  n.value = std::move(value);
  return intern(std::move(n));
}

std::string term_str(const Term& t) {
  if (!t) return "<null>";
  std::ostringstream os;
  switch (t->kind) {
    case TermKind::Const:
      os << t->cval << "w" << t->width;
      break;
    case TermKind::Var:
      os << t->name;
      break;
    case TermKind::Binary:
      os << "(" << binop_name(t->bop) << " " << term_str(t->ops[0]) << " "
         << term_str(t->ops[1]) << ")";
      break;
    case TermKind::ZExt:
      os << "(zext" << t->width << " " << term_str(t->ops[0]) << ")";
      break;
    case TermKind::SExt:
      os << "(sext" << t->width << " " << term_str(t->ops[0]) << ")";
      break;
    case TermKind::Trunc:
      os << "(trunc" << t->width << " " << term_str(t->ops[0]) << ")";
      break;
    case TermKind::Select:
      os << "(select " << term_str(t->ops[0]) << " " << term_str(t->ops[1])
         << " " << term_str(t->ops[2]) << ")";
      break;
    case TermKind::MemRead:
      os << "(read " << mem_str(t->mem) << " " << term_str(t->ops[0]) << ")";
      break;
  }
  return os.str();
}

std::string mem_str(const Mem& m) {
  if (!m) return "<null>";
  if (m->kind == MemKind::Base) return m->name;
  return mem_str(m->prev) + "[" + term_str(m->addr) + " := " +
         term_str(m->value) + "]";
}

namespace {

struct EvalCtx {
  const VarEnv& env;
  const MemEnv& mem_env;
  std::unordered_map<const TermNode*, word> memo;
};

word eval_rec(const Term& t, EvalCtx& ctx);

word eval_mem_rec(const Mem& m, word addr, EvalCtx& ctx) {
  Mem cur = m;
  while (cur->kind == MemKind::Update) {
    word a = eval_rec(cur->addr, ctx);
    if (a == addr) return eval_rec(cur->value, ctx);
    cur = cur->prev;
  }
  auto it = ctx.mem_env.find(cur->name);
  if (it == ctx.mem_env.end()) throw EnvError("unbound memory " + cur->name);
  auto cell = it->second.find(addr);
  return cell == it->second.end() ? 0 : truncate(cell->second, cur->width);
}

word eval_rec(const Term& t, EvalCtx& ctx) {
  auto hit = ctx.memo.find(t.get());
  if (hit != ctx.memo.end()) return hit->second;
  word v = 0;
  switch (t->kind) {
    case TermKind::Const:
      v = t->cval;
      break;
    case TermKind::Var: {
      auto it = ctx.env.find(t->name);
      if (it == ctx.env.end()) throw EnvError("unbound variable " + t->name);
      v = truncate(it->second, t->width);
      break;
    }
    case TermKind::Binary:
      v = apply_binop(t->bop, eval_rec(t->ops[0], ctx), eval_rec(t->ops[1], ctx),
                      t->ops[0]->width);
      break;
    case TermKind::ZExt:
      v = zext_word(eval_rec(t->ops[0], ctx), t->src_width, t->width);
      break;
    case TermKind::SExt:
      v = sext_word(eval_rec(t->ops[0], ctx), t->src_width, t->width);
      break;
    case TermKind::Trunc:
      v = truncate(eval_rec(t->ops[0], ctx), t->width);
      break;
    case TermKind::Select:
      v = eval_rec(t->ops[0], ctx) ? eval_rec(t->ops[1], ctx)
                                   : eval_rec(t->ops[2], ctx);
      break;
    case TermKind::MemRead:
      v = eval_mem_rec(t->mem, eval_rec(t->ops[0], ctx), ctx);
      break;
  }
  v = truncate(v, t->width);
  ctx.memo.emplace(t.get(), v);
  return v;
}

}  // namespace

word eval_concrete(const Term& t, const VarEnv& env, const MemEnv& mem_env) {
  EvalCtx ctx{env, mem_env, {}};
  return eval_rec(t, ctx);
}

word eval_mem_at(const Mem& m, word addr, const VarEnv& env, const MemEnv& mem_env) {
  EvalCtx ctx{env, mem_env, {}};
  return eval_mem_rec(m, truncate(addr, m->width), ctx);
}

namespace {

struct SubstCtx {
  const Subst& s;
  std::unordered_map<const TermNode*, Term> tmemo;
  std::unordered_map<const MemNode*, Mem> mmemo;
};

Term subst_rec(const Term& t, SubstCtx& ctx);

Mem subst_mem_rec(const Mem& m, SubstCtx& ctx) {
  auto hit = ctx.mmemo.find(m.get());
  if (hit != ctx.mmemo.end()) return hit->second;
  Mem out;
  if (m->kind == MemKind::Base) {
    auto it = ctx.s.mems.find(m->name);
    out = it == ctx.s.mems.end() ? m : it->second;
    if (out->width != m->width) throw TypeError("memory substitution width mismatch");
  } else {
    out = m_update(subst_mem_rec(m->prev, ctx), subst_rec(m->addr, ctx),
                   subst_rec(m->value, ctx));
  }
  ctx.mmemo.emplace(m.get(), out);
  return out;
}

Term subst_rec(const Term& t, SubstCtx& ctx) {
  auto hit = ctx.tmemo.find(t.get());
  if (hit != ctx.tmemo.end()) return hit->second;
  Term out;
  switch (t->kind) {
    case TermKind::Const:
      out = t;
      break;
    case TermKind::Var: {
      auto it = ctx.s.vars.find(t->name);
      if (it == ctx.s.vars.end()) {
        out = t;
      } else {
        if (it->second->width != t->width)
          throw TypeError("substitution width mismatch for " + t->name);
        out = it->second;
      }
      break;
    }
    case TermKind::Binary:
      out = t_bin(t->bop, subst_rec(t->ops[0], ctx), subst_rec(t->ops[1], ctx));
      break;
    case TermKind::ZExt:
      out = t_zext(subst_rec(t->ops[0], ctx), t->width);
      break;
    case TermKind::SExt:
      out = t_sext(subst_rec(t->ops[0], ctx), t->width);
      break;
    case TermKind::Trunc:
      out = t_trunc(subst_rec(t->ops[0], ctx), t->width);
      break;
    case TermKind::Select:
      out = t_select(subst_rec(t->ops[0], ctx), subst_rec(t->ops[1], ctx),
                     subst_rec(t->ops[2], ctx));
      break;
    case TermKind::MemRead:
      out = t_memread(subst_mem_rec(t->mem, ctx), subst_rec(t->ops[0], ctx));
      break;
  }
  ctx.tmemo.emplace(t.get(), out);
  return out;
}

}  // namespace

Term subst_term(const Term& t, const Subst& s) {
  SubstCtx ctx{s, {}, {}};
  return subst_rec(t, ctx);
}

Mem subst_mem(const Mem& m, const Subst& s) {
  SubstCtx ctx{s, {}, {}};
  return subst_mem_rec(m, ctx);
}

void collect_vars(const Term& t, std::map<std::string, unsigned>& vars,
                  std::map<std::string, unsigned>& mems) {
  if (!t) return;
  if (t->kind == TermKind::Var) vars[t->name] = t->width;
  for (const auto& o : t->ops) collect_vars(o, vars, mems);
  if (t->mem) collect_vars(t->mem, vars, mems);
}

void collect_vars(const Mem& m, std::map<std::string, unsigned>& vars,
                  std::map<std::string, unsigned>& mems) {
  if (!m) return;
  if (m->kind == MemKind::Base) {
    mems[m->name] = m->width;
    return;
  }
  collect_vars(m->prev, vars, mems);
  collect_vars(m->addr, vars, mems);
  collect_vars(m->value, vars, mems);
}

// ---------------------------------------------------------------------------

namespace {
Formula mk(FormulaKind k) {
  auto n = std::make_shared<FormulaNode>();
  const_cast<FormulaNode&>(*n).kind = k;
  return n;
}
}  // namespace

Formula f_true() {
  static Formula f = mk(FormulaKind::True);
  return f;
}

Formula f_false() {
  static Formula f = mk(FormulaKind::False);
  return f;
}

Formula f_atom(Term t) {
  if (!t) throw TypeError("atom of null term");
  if (t->width != 1) throw TypeError("formula atom must be width 1");
  if (t->kind == TermKind::Const) return t->cval ? f_true() : f_false();
  auto n = std::make_shared<FormulaNode>();
  auto& m = const_cast<FormulaNode&>(*n);
  m.kind = FormulaKind::Atom;
  m.atom = std::move(t);
  return n;
}

Formula f_cmp(BinOp op, Term a, Term b) {
  if (!is_comparison(op)) throw TypeError("f_cmp needs a comparison op");
  return f_atom(t_bin(op, std::move(a), std::move(b)));
}

Formula f_eq(Term a, Term b) { return f_cmp(BinOp::Eq, std::move(a), std::move(b)); }

Formula f_mem_eq(Mem a, Mem b) {
  if (!a || !b) throw TypeError("memory equality of null");
  if (a->width != b->width) throw TypeError("memory equality width mismatch");
  if (a.get() == b.get()) return f_true();
  auto n = std::make_shared<FormulaNode>();
  auto& m = const_cast<FormulaNode&>(*n);
  m.kind = FormulaKind::MemEq;
  m.mem_a = std::move(a);
  m.mem_b = std::move(b);
  return n;
}

Formula f_not(Formula f) {
  if (!f) throw TypeError("not of null formula");
  if (f->kind == FormulaKind::True) return f_false();
  if (f->kind == FormulaKind::False) return f_true();
  if (f->kind == FormulaKind::Not) return f->children[0];
  auto n = std::make_shared<FormulaNode>();
  auto& m = const_cast<FormulaNode&>(*n);
  m.kind = FormulaKind::Not;
  m.children = {std::move(f)};
  return n;
}

Formula f_and(std::vector<Formula> fs) {
  std::vector<Formula> kids;
  for (auto& f : fs) {
    if (!f) throw TypeError("and of null formula");
    if (f->kind == FormulaKind::True) continue;
    if (f->kind == FormulaKind::False) return f_false();
    if (f->kind == FormulaKind::And) {
      for (const auto& c : f->children) kids.push_back(c);
    } else {
      kids.push_back(std::move(f));
    }
  }
  if (kids.empty()) return f_true();
  if (kids.size() == 1) return kids[0];
  auto n = std::make_shared<FormulaNode>();
  auto& m = const_cast<FormulaNode&>(*n);
  m.kind = FormulaKind::And;
  m.children = std::move(kids);
  return n;
}

Formula f_and(Formula a, Formula b) { return f_and(std::vector<Formula>{a, b}); }

Formula f_or(std::vector<Formula> fs) {
  std::vector<Formula> kids;
  for (auto& f : fs) {
    if (!f) throw TypeError("or of null formula");
    if (f->kind == FormulaKind::False) continue;
    if (f->kind == FormulaKind::True) return f_true();
    if (f->kind == FormulaKind::Or) {
      for (const auto& c : f->children) kids.push_back(c);
    } else {
      kids.push_back(std::move(f));
    }
  }
  if (kids.empty()) return f_false();
  if (kids.size() == 1) return kids[0];
  auto n = std::make_shared<FormulaNode>();
  auto& m = const_cast<FormulaNode&>(*n);
  m.kind = FormulaKind::Or;
  m.children = std::move(kids);
  return n;
}

Formula f_or(Formula a, Formula b) { return f_or(std::vector<Formula>{a, b}); }

Formula f_implies(Formula a, Formula b) {
  if (!a || !b) throw TypeError("implies of null formula");
  if (a->kind == FormulaKind::True) return b;
  if (a->kind == FormulaKind::False) return f_true();
  if (b->kind == FormulaKind::True) return f_true();
  if (b->kind == FormulaKind::False) return f_not(a);
  auto n = std::make_shared<FormulaNode>();
  auto& m = const_cast<FormulaNode&>(*n);
  m.kind = FormulaKind::Implies;
  m.children = {std::move(a), std::move(b)};
  return n;
}

std::string formula_str(const Formula& f) {
  if (!f) return "<null>";
  switch (f->kind) {
    case FormulaKind::True: return "true";
    case FormulaKind::False: return "false";
    case FormulaKind::Atom: return term_str(f->atom);
    case FormulaKind::MemEq:
      return "(memeq " + mem_str(f->mem_a) + " " + mem_str(f->mem_b) + ")";
    case FormulaKind::Not: return "(not " + formula_str(f->children[0]) + ")";
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::string s = f->kind == FormulaKind::And ? "(and" : "(or";
      for (const auto& c : f->children) s += " " + formula_str(c);
      return s + ")";
    }
    case FormulaKind::Implies:
      return "(=> " + formula_str(f->children[0]) + " " +
             formula_str(f->children[1]) + ")";
  }
  return "?";
}

Formula subst_formula(const Formula& f, const Subst& s) {
  if (!f) throw TypeError("substitution into null formula");
  switch (f->kind) {
    case FormulaKind::True:
    case FormulaKind::False:
      return f;
    case FormulaKind::Atom:
      return f_atom(subst_term(f->atom, s));
    case FormulaKind::MemEq:
      return f_mem_eq(subst_mem(f->mem_a, s), subst_mem(f->mem_b, s));
    case FormulaKind::Not:
      return f_not(subst_formula(f->children[0], s));
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f->children.size());
      for (const auto& c : f->children) kids.push_back(subst_formula(c, s));
      return f->kind == FormulaKind::And ? f_and(std::move(kids))
                                         : f_or(std::move(kids));
    }
    case FormulaKind::Implies:
      return f_implies(subst_formula(f->children[0], s),
                       subst_formula(f->children[1], s));
  }
  return f;
}

void collect_vars(const Formula& f, std::map<std::string, unsigned>& vars,
                  std::map<std::string, unsigned>& mems) {
  if (!f) return;
  if (f->atom) collect_vars(f->atom, vars, mems);
  if (f->mem_a) collect_vars(f->mem_a, vars, mems);
  if (f->mem_b) collect_vars(f->mem_b, vars, mems);
  for (const auto& c : f->children) collect_vars(c, vars, mems);
}

bool eval_formula(const Formula& f, const VarEnv& env, const MemEnv& mem_env,
                  unsigned addr_width) {
  switch (f->kind) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Atom: return eval_concrete(f->atom, env, mem_env) != 0;
    case FormulaKind::MemEq: {
      word count = word(1) << addr_width;
      for (word a = 0; a < count; ++a)
        if (eval_mem_at(f->mem_a, a, env, mem_env) !=
            eval_mem_at(f->mem_b, a, env, mem_env))
          return false;
      return true;
    }
    case FormulaKind::Not:
      return !eval_formula(f->children[0], env, mem_env, addr_width);
    case FormulaKind::And:
      for (const auto& c : f->children)
        if (!eval_formula(c, env, mem_env, addr_width)) return false;
      return true;
    case FormulaKind::Or:
      for (const auto& c : f->children)
        if (eval_formula(c, env, mem_env, addr_width)) return true;
      return false;
    case FormulaKind::Implies:
      return !eval_formula(f->children[0], env, mem_env, addr_width) ||
             eval_formula(f->children[1], env, mem_env, addr_width);
  }
  return false;
}

}  // namespace dfv
