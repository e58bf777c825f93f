#include "dfvalid/solver.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "dfvalid/smtlib.hpp"

namespace dfv {

Formula mem_equal(const Mem& a, const Mem& b) { return f_mem_eq(a, b); }

namespace {

std::vector<Formula> top_conjuncts(const Formula& f) {
  if (f->kind == FormulaKind::And) return f->children;
  return {f};
}

// Equality elimination over the top-level conjunction: (= x t) binds x when x
// does not occur in t; memory equality of two bare bases unifies the bases.
// Bindings are kept fully substituted so model reconstruction is order-free.
struct Closure {
  Formula residual;
  std::vector<std::pair<Term, Term>> bindings;  // (var, rhs)
  std::vector<std::pair<std::string, Mem>> mem_bindings;
};

bool occurs(const Term& needle, const Term& t) {
  if (t.get() == needle.get()) return true;
  for (const auto& o : t->ops)
    if (occurs(needle, o)) return true;
  if (t->mem) {
    const MemNode* m = t->mem.get();
    while (m) {
      if (m->kind == MemKind::Update) {
        if (occurs(needle, m->addr) || occurs(needle, m->value)) return true;
        m = m->prev.get();
      } else {
        break;
      }
    }
  }
  return false;
}

Closure eliminate_equalities(const Formula& f) {
  Closure out;
  std::vector<Formula> conjuncts = top_conjuncts(f);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < conjuncts.size(); ++i) {
      const Formula& c = conjuncts[i];
      Subst s;
      if (c->kind == FormulaKind::Atom && c->atom->kind == TermKind::Binary &&
          c->atom->bop == BinOp::Eq) {
        Term a = c->atom->ops[0], b = c->atom->ops[1];
        Term var, rhs;
        if (a->kind == TermKind::Var && !occurs(a, b)) {
          var = a; rhs = b;
        } else if (b->kind == TermKind::Var && !occurs(b, a)) {
          var = b; rhs = a;
        }
        if (!var) continue;
        s.vars[var->name] = rhs;
        out.bindings.emplace_back(var, rhs);
      } else if (c->kind == FormulaKind::MemEq &&
                 c->mem_a->kind == MemKind::Base &&
                 c->mem_b->kind == MemKind::Base) {
        if (c->mem_a.get() == c->mem_b.get()) {
          conjuncts.erase(conjuncts.begin() + i);
          changed = true;
          break;
        }
        s.mems[c->mem_b->name] = c->mem_a;
        out.mem_bindings.emplace_back(c->mem_b->name, c->mem_a);
      } else {
        continue;
      }
      conjuncts.erase(conjuncts.begin() + i);
      for (auto& other : conjuncts) other = subst_formula(other, s);
      for (auto& bind : out.bindings) bind.second = subst_term(bind.second, s);
      for (auto& bind : out.mem_bindings) bind.second = subst_mem(bind.second, s);
      changed = true;
      break;
    }
  }
  out.residual = f_and(std::move(conjuncts));
  return out;
}

struct NeedCell {
  std::string base;
  word addr;
};
struct NeedPair {
  std::string base_a, base_b;
  std::set<word> touched;
};
struct AbortUnknown {
  std::string reason;
};

struct PairLink {
  bool equal;
  std::set<word> touched;
  word witness = 0;
};

using CellKey = std::pair<std::string, word>;

struct Enumerator {
  const BackendConfig& cfg;
  unsigned mem_width;  // 0 when no memories occur
  Formula residual;
  VarEnv env;
  std::map<CellKey, word> cells;
  std::map<std::pair<std::string, std::string>, PairLink> links;

  const std::string& base_root(const Mem& m) const {
    const MemNode* cur = m.get();
    while (cur->kind == MemKind::Update) cur = cur->prev.get();
    return cur->name;
  }

  word cell_value(const std::string& base, word addr) {
    // A linked-equal pair shares cells off its touched set; chase to the
    // canonical base (pairs are ordered, so this terminates).
    std::string key_base = base;
    bool moved = true;
    while (moved) {
      moved = false;
      for (const auto& [pair, link] : links) {
        if (!link.equal) continue;
        if (pair.second == key_base && !link.touched.count(addr)) {
          key_base = pair.first;
          moved = true;
        }
      }
    }
    auto it = cells.find({key_base, addr});
    if (it == cells.end()) throw NeedCell{key_base, addr};
    return it->second;
  }

  word read_mem(const Mem& m, word addr) {
    const MemNode* cur = m.get();
    while (cur->kind == MemKind::Update) {
      word a = eval_term(cur->addr);
      if (a == addr) return eval_term(cur->value);
      cur = cur->prev.get();
    }
    return cell_value(cur->name, addr);
  }

  word eval_term(const Term& t) {
    switch (t->kind) {
      case TermKind::Const: return t->cval;
      case TermKind::Var: {
        auto it = env.find(t->name);
        if (it == env.end()) throw EnvError("unbound variable " + t->name);
        return it->second;
      }
      case TermKind::Binary:
        return apply_binop(t->bop, eval_term(t->ops[0]), eval_term(t->ops[1]),
                           t->ops[0]->width);
      case TermKind::ZExt:
        return zext_word(eval_term(t->ops[0]), t->src_width, t->width);
      case TermKind::SExt:
        return sext_word(eval_term(t->ops[0]), t->src_width, t->width);
      case TermKind::Trunc:
        return truncate(eval_term(t->ops[0]), t->width);
      case TermKind::Select:
        return eval_term(t->ops[0]) ? eval_term(t->ops[1])
                                    : eval_term(t->ops[2]);
      case TermKind::MemRead:
        return read_mem(t->mem, eval_term(t->ops[0]));
    }
    return 0;
  }

  // Touched addresses of an update chain, topmost write winning.
  void chain_writes(const Mem& m, std::map<word, word>& out, std::set<word>& addrs) {
    const MemNode* cur = m.get();
    while (cur->kind == MemKind::Update) {
      word a = eval_term(cur->addr);
      if (!out.count(a)) out[a] = eval_term(cur->value);
      addrs.insert(a);
      cur = cur->prev.get();
    }
  }

  bool eval_memeq(const Formula& f) {
    std::map<word, word> wa, wb;
    std::set<word> touched;
    chain_writes(f->mem_a, wa, touched);
    chain_writes(f->mem_b, wb, touched);
    const std::string& ra = base_root(f->mem_a);
    const std::string& rb = base_root(f->mem_b);
    for (word a : touched)
      if (read_mem(f->mem_a, a) != read_mem(f->mem_b, a)) return false;
    if (ra == rb) return true;
    auto key = ra < rb ? std::make_pair(ra, rb) : std::make_pair(rb, ra);
    auto it = links.find(key);
    if (it != links.end()) {
      // Sharing and the witness were set up for one atom's touched set; a
      // second equality over the same pair with a different footprint is
      // outside what this construction covers.
      if (it->second.touched != touched)
        throw AbortUnknown{"memory bases " + ra + "/" + rb +
                           " compared in more than one equality"};
      if (it->second.equal) return true;
      return touched.count(it->second.witness) != 0;
    }
    throw NeedPair{key.first, key.second, touched};
  }

  bool eval_form(const Formula& f) {
    switch (f->kind) {
      case FormulaKind::True: return true;
      case FormulaKind::False: return false;
      case FormulaKind::Atom: return eval_term(f->atom) != 0;
      case FormulaKind::MemEq: return eval_memeq(f);
      case FormulaKind::Not: return !eval_form(f->children[0]);
      case FormulaKind::And:
        for (const auto& c : f->children)
          if (!eval_form(c)) return false;
        return true;
      case FormulaKind::Or:
        for (const auto& c : f->children)
          if (eval_form(c)) return true;
        return false;
      case FormulaKind::Implies:
        return !eval_form(f->children[0]) || eval_form(f->children[1]);
    }
    return false;
  }

  bool search() {
    try {
      return eval_form(residual);
    } catch (const NeedCell& need) {
      if (cells.size() >= cfg.max_cells)
        throw AbortUnknown{"memory cell branching limit reached"};
      CellKey key{need.base, need.addr};
      word count = word(1) << mem_width;
      for (word v = 0; v < count; ++v) {
        if (cell_conflicts(key, v)) continue;
        cells[key] = v;
        if (search()) return true;
        cells.erase(key);
      }
      return false;
    } catch (const NeedPair& need) {
      auto key = std::make_pair(need.base_a, need.base_b);
      // Cells of the non-canonical base at shared addresses were materialized
      // before the link existed; drop them so reads re-route canonically.
      for (auto it = cells.begin(); it != cells.end();) {
        if (it->first.first == key.second && !need.touched.count(it->first.second))
          it = cells.erase(it);
        else
          ++it;
      }
      links[key] = PairLink{true, need.touched, 0};
      if (search()) return true;
      // Differ somewhere off the touched set; needs a spare address whose
      // cells are not already pinned equal.
      word count = word(1) << mem_width;
      for (word w = 0; w < count; ++w) {
        if (need.touched.count(w)) continue;
        auto ca = cells.find({need.base_a, w});
        auto cb = cells.find({need.base_b, w});
        if (ca != cells.end() && cb != cells.end() && ca->second == cb->second)
          continue;
        links[key] = PairLink{false, need.touched, w};
        if (search()) return true;
      }
      links.erase(key);
      return false;
    }
  }

  bool cell_conflicts(const CellKey& key, word v) const {
    for (const auto& [pair, link] : links) {
      if (link.equal) continue;
      if (key.second != link.witness) continue;
      const std::string* other = nullptr;
      if (key.first == pair.first) other = &pair.second;
      if (key.first == pair.second) other = &pair.first;
      if (!other) continue;
      auto it = cells.find({*other, key.second});
      if (it != cells.end() && it->second == v) return true;
    }
    return false;
  }
};

Model build_model(const Enumerator& en, const Closure& closure,
                  const std::map<std::string, unsigned>& vars,
                  const std::map<std::string, unsigned>& mems) {
  Model m;
  for (const auto& [name, width] : vars) {
    auto it = en.env.find(name);
    m.vars[name] = it == en.env.end() ? 0 : truncate(it->second, width);
  }
  for (const auto& [name, width] : mems) {
    (void)width;
    m.mems[name];  // ensure map exists
  }
  for (const auto& [key, v] : en.cells) m.mems[key.first][key.second] = v;
  // Expand linked pairs into per-base maps.
  for (const auto& [pair, link] : en.links) {
    auto& ma = m.mems[pair.first];
    auto& mb = m.mems[pair.second];
    if (link.equal) {
      for (const auto& [a, v] : ma)
        if (!link.touched.count(a) && !mb.count(a)) mb[a] = v;
      for (const auto& [a, v] : mb)
        if (!link.touched.count(a) && !ma.count(a)) ma[a] = v;
    } else {
      word va = ma.count(link.witness) ? ma[link.witness] : 0;
      if (!mb.count(link.witness))
        mb[link.witness] = truncate(va + 1, en.mem_width);
      else if (!ma.count(link.witness) && mb[link.witness] == 0)
        ma[link.witness] = 1;
    }
  }
  // Bound variables and bases from equality elimination.
  for (const auto& [name, base] : closure.mem_bindings) {
    MemEnv tmp = m.mems;
    std::map<word, word> map;
    word count = en.mem_width ? (word(1) << en.mem_width) : 0;
    for (word a = 0; a < count; ++a) {
      word v = eval_mem_at(base, a, m.vars, tmp);
      if (v) map[a] = v;
    }
    m.mems[name] = std::move(map);
  }
  for (const auto& [var, rhs] : closure.bindings)
    m.vars[var->name] = eval_concrete(rhs, m.vars, m.mems);
  return m;
}

}  // namespace

SolverResult check_sat_internal(const Formula& f, const BackendConfig& config) {
  Closure closure = eliminate_equalities(f);
  std::map<std::string, unsigned> all_vars, all_mems;
  collect_vars(f, all_vars, all_mems);
  std::map<std::string, unsigned> vars, mems;
  collect_vars(closure.residual, vars, mems);

  unsigned mem_width = 0;
  for (const auto& [name, w] : all_mems) {
    (void)name;
    if (mem_width && mem_width != w)
      throw TypeError("memories of differing widths in one formula");
    mem_width = w;
  }
  if (!all_mems.empty() && mem_width > 8)
    throw CapabilityError("internal backend handles memory widths up to 8 bits, got " +
                          std::to_string(mem_width));
  unsigned bits = 0;
  for (const auto& [name, w] : vars) {
    (void)name;
    bits += w;
  }
  if (bits > config.budget_bits)
    throw CapabilityError("free-variable budget exceeded: " + std::to_string(bits) +
                          " > " + std::to_string(config.budget_bits) + " bits");

  Enumerator en{config, mem_width, closure.residual, {}, {}, {}};
  std::vector<std::pair<std::string, unsigned>> order(vars.begin(), vars.end());
  for (const auto& [name, w] : order) {
    (void)w;
    en.env[name] = 0;
  }

  std::string unknown_reason;
  word total = word(1) << bits;
  for (word idx = 0;; ++idx) {
    // Odometer decode: assign each variable its slice of idx.
    word rest = idx;
    for (const auto& [name, w] : order) {
      en.env[name] = rest & mask_of(w);
      rest >>= w;
    }
    en.cells.clear();
    en.links.clear();
    try {
      if (en.search()) {
        Model model = build_model(en, closure, all_vars, all_mems);
        bool ok = eval_formula(f, model.vars, model.mems,
                               mem_width ? mem_width : 1);
        if (!ok)
          return {Verdict::Unknown, std::nullopt,
                  "internal model failed verification"};
        return {Verdict::Sat, std::move(model), ""};
      }
    } catch (const AbortUnknown& abort) {
      unknown_reason = abort.reason;
    }
    if (idx + 1 == total || bits >= 64) break;
  }
  if (!unknown_reason.empty())
    return {Verdict::Unknown, std::nullopt, unknown_reason};
  return {Verdict::Unsat, std::nullopt, ""};
}

SolverResult check_sat(const Formula& f, const BackendConfig& config) {
  try {
    return check_sat_internal(f, config);
  } catch (const CapabilityError&) {
    if (config.solver_path.empty()) throw;
    return check_sat_external(f, config);
  }
}

ValidityResult check_valid(const Formula& f, const BackendConfig& config) {
  SolverResult r = check_sat(f_not(f), config);
  switch (r.verdict) {
    case Verdict::Unsat: return {Validity::Valid, std::nullopt, ""};
    case Verdict::Sat: return {Validity::Invalid, std::move(r.model), ""};
    case Verdict::Unknown: return {Validity::Unknown, std::nullopt, r.reason};
  }
  return {Validity::Unknown, std::nullopt, "unreachable"};
}

}  // namespace dfv
