#include "dfvalid/smtlib.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

#include <sys/wait.h>
#include <unistd.h>

namespace dfv {

namespace {

std::string sym(const std::string& name) {
  for (char c : name)
    if (c == '|' || c == '\\')
      throw std::runtime_error("name not representable as SMT symbol: " + name);
  return "|" + name + "|";
}

std::string bv_literal(word v, unsigned width) {
  std::string bits(width, '0');
  for (unsigned i = 0; i < width; ++i)
    if ((v >> i) & 1) bits[width - 1 - i] = '1';
  return "#b" + bits;
}

std::string bv_bool(const std::string& pred) {
  return "(ite " + pred + " #b1 #b0)";
}

// The queries a script issues after check-sat, in emission order. Rebuilt
// identically at parse time so responses can be consumed positionally.
struct QueryPlan {
  std::vector<std::pair<std::string, unsigned>> scalars;  // name, width
  std::vector<std::pair<std::string, unsigned>> bases;    // name, width
  std::vector<Term> addrs;  // deduped syntactic address terms
};

void collect_addrs(const Term& t, std::vector<Term>& out,
                   std::set<std::size_t>& seen);

void collect_addrs(const Mem& m, std::vector<Term>& out,
                   std::set<std::size_t>& seen) {
  const MemNode* cur = m.get();
  while (cur && cur->kind == MemKind::Update) {
    if (seen.insert(cur->addr->id).second) out.push_back(cur->addr);
    collect_addrs(cur->addr, out, seen);
    collect_addrs(cur->value, out, seen);
    cur = cur->prev.get();
  }
}

void collect_addrs(const Term& t, std::vector<Term>& out,
                   std::set<std::size_t>& seen) {
  if (t->kind == TermKind::MemRead) {
    if (seen.insert(t->ops[0]->id).second) out.push_back(t->ops[0]);
  }
  for (const auto& o : t->ops) collect_addrs(o, out, seen);
  if (t->mem) collect_addrs(t->mem, out, seen);
}

void collect_addrs(const Formula& f, std::vector<Term>& out,
                   std::set<std::size_t>& seen) {
  if (f->atom) collect_addrs(f->atom, out, seen);
  if (f->mem_a) collect_addrs(f->mem_a, out, seen);
  if (f->mem_b) collect_addrs(f->mem_b, out, seen);
  for (const auto& c : f->children) collect_addrs(c, out, seen);
}

QueryPlan make_plan(const Formula& f) {
  QueryPlan plan;
  std::map<std::string, unsigned> vars, mems;
  collect_vars(f, vars, mems);
  plan.scalars.assign(vars.begin(), vars.end());
  plan.bases.assign(mems.begin(), mems.end());
  std::set<std::size_t> seen;
  collect_addrs(f, plan.addrs, seen);
  return plan;
}

// --- response parsing ---

struct Sexp {
  bool is_atom = false;
  std::string atom;
  std::vector<Sexp> list;
};

struct SexpParser {
  const std::string& text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size()) {
      if (std::isspace(static_cast<unsigned char>(text[pos]))) {
        ++pos;
      } else if (text[pos] == ';') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  Sexp parse() {
    skip_ws();
    if (pos >= text.size()) throw std::runtime_error("unexpected end of solver output");
    if (text[pos] == '(') {
      ++pos;
      Sexp s;
      while (true) {
        skip_ws();
        if (pos >= text.size())
          throw std::runtime_error("unbalanced parenthesis in solver output");
        if (text[pos] == ')') {
          ++pos;
          return s;
        }
        s.list.push_back(parse());
      }
    }
    Sexp s;
    s.is_atom = true;
    if (text[pos] == '|') {
      std::size_t end = text.find('|', pos + 1);
      if (end == std::string::npos)
        throw std::runtime_error("unterminated quoted symbol in solver output");
      s.atom = text.substr(pos, end - pos + 1);
      pos = end + 1;
      return s;
    }
    std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')')
      ++pos;
    s.atom = text.substr(start, pos - start);
    return s;
  }
};

word parse_bv_value(const Sexp& s) {
  if (s.is_atom) {
    const std::string& a = s.atom;
    if (a.size() > 2 && a[0] == '#' && a[1] == 'b') {
      word v = 0;
      for (std::size_t i = 2; i < a.size(); ++i) {
        if (a[i] != '0' && a[i] != '1')
          throw std::runtime_error("bad binary literal: " + a);
        v = (v << 1) | word(a[i] - '0');
      }
      return v;
    }
    if (a.size() > 2 && a[0] == '#' && a[1] == 'x')
      return std::stoull(a.substr(2), nullptr, 16);
    throw std::runtime_error("unrecognized value literal: " + a);
  }
  // (_ bvNNN width)
  if (s.list.size() == 3 && s.list[0].is_atom && s.list[0].atom == "_" &&
      s.list[1].is_atom && s.list[1].atom.rfind("bv", 0) == 0)
    return std::stoull(s.list[1].atom.substr(2));
  throw std::runtime_error("unrecognized value expression");
}

// --- process invocation ---

std::string run_command(const std::string& cmd, int& exit_code) {
  std::string full = cmd + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) throw std::runtime_error("failed to launch solver process");
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  exit_code = status < 0 ? -1 : WEXITSTATUS(status);
  return out;
}

}  // namespace

std::string smtlib_mem(const Mem& m) {
  if (m->kind == MemKind::Base) return sym(m->name);
  return "(store " + smtlib_mem(m->prev) + " " + smtlib_term(m->addr) + " " +
         smtlib_term(m->value) + ")";
}

std::string smtlib_term(const Term& t) {
  switch (t->kind) {
    case TermKind::Const:
      return bv_literal(t->cval, t->width);
    case TermKind::Var:
      return sym(t->name);
    case TermKind::Binary: {
      std::string a = smtlib_term(t->ops[0]);
      std::string b = smtlib_term(t->ops[1]);
      switch (t->bop) {
        case BinOp::Add: return "(bvadd " + a + " " + b + ")";
        case BinOp::Sub: return "(bvsub " + a + " " + b + ")";
        case BinOp::Mul: return "(bvmul " + a + " " + b + ")";
        case BinOp::And: return "(bvand " + a + " " + b + ")";
        case BinOp::Or: return "(bvor " + a + " " + b + ")";
        case BinOp::Xor: return "(bvxor " + a + " " + b + ")";
        case BinOp::Shl: return "(bvshl " + a + " " + b + ")";
        case BinOp::Lshr: return "(bvlshr " + a + " " + b + ")";
        case BinOp::Ashr: return "(bvashr " + a + " " + b + ")";
        case BinOp::Eq: return bv_bool("(= " + a + " " + b + ")");
        case BinOp::Ne: return bv_bool("(distinct " + a + " " + b + ")");
        case BinOp::Ult: return bv_bool("(bvult " + a + " " + b + ")");
        case BinOp::Slt: return bv_bool("(bvslt " + a + " " + b + ")");
        case BinOp::Ule: return bv_bool("(bvule " + a + " " + b + ")");
        case BinOp::Sle: return bv_bool("(bvsle " + a + " " + b + ")");
      }
      return "";
    }
    case TermKind::ZExt:
      return "((_ zero_extend " + std::to_string(t->width - t->src_width) +
             ") " + smtlib_term(t->ops[0]) + ")";
    case TermKind::SExt:
      return "((_ sign_extend " + std::to_string(t->width - t->src_width) +
             ") " + smtlib_term(t->ops[0]) + ")";
    case TermKind::Trunc:
      return "((_ extract " + std::to_string(t->width - 1) + " 0) " +
             smtlib_term(t->ops[0]) + ")";
    case TermKind::Select:
      return "(ite (= " + smtlib_term(t->ops[0]) + " #b1) " +
             smtlib_term(t->ops[1]) + " " + smtlib_term(t->ops[2]) + ")";
    case TermKind::MemRead:
      return "(select " + smtlib_mem(t->mem) + " " + smtlib_term(t->ops[0]) +
             ")";
  }
  return "";
}

std::string smtlib_formula(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::True: return "true";
    case FormulaKind::False: return "false";
    case FormulaKind::Atom:
      return "(= " + smtlib_term(f->atom) + " #b1)";
    case FormulaKind::MemEq:
      return "(= " + smtlib_mem(f->mem_a) + " " + smtlib_mem(f->mem_b) + ")";
    case FormulaKind::Not:
      return "(not " + smtlib_formula(f->children[0]) + ")";
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::string out = f->kind == FormulaKind::And ? "(and" : "(or";
      for (const auto& c : f->children) out += " " + smtlib_formula(c);
      return out + ")";
    }
    case FormulaKind::Implies:
      return "(=> " + smtlib_formula(f->children[0]) + " " +
             smtlib_formula(f->children[1]) + ")";
  }
  return "";
}

std::string smtlib_script(const Formula& f) {
  QueryPlan plan = make_plan(f);
  std::ostringstream out;
  out << "(set-option :produce-models true)\n";
  out << "(set-logic QF_ABV)\n";
  for (const auto& [name, width] : plan.scalars)
    out << "(declare-fun " << sym(name) << " () (_ BitVec " << width << "))\n";
  for (const auto& [name, width] : plan.bases)
    out << "(declare-fun " << sym(name) << " () (Array (_ BitVec " << width
        << ") (_ BitVec " << width << ")))\n";
  out << "(assert " << smtlib_formula(f) << ")\n";
  out << "(check-sat)\n";
  for (const auto& [name, width] : plan.scalars) {
    (void)width;
    out << "(get-value (" << sym(name) << "))\n";
  }
  for (const auto& a : plan.addrs)
    out << "(get-value (" << smtlib_term(a) << "))\n";
  for (const auto& [name, width] : plan.bases) {
    (void)width;
    for (const auto& a : plan.addrs)
      out << "(get-value ((select " << sym(name) << " " << smtlib_term(a)
          << ")))\n";
  }
  return out.str();
}

SmtResponse parse_smtlib_response(const std::string& text, const Formula& f) {
  SmtResponse resp;
  resp.raw = text;
  std::istringstream lines(text);
  std::string line;
  std::string verdict_word;
  std::size_t consumed = 0;
  while (std::getline(lines, line)) {
    consumed += line.size() + 1;
    std::string trimmed;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
    if (trimmed == "sat" || trimmed == "unsat" || trimmed == "unknown") {
      verdict_word = trimmed;
      break;
    }
  }
  if (verdict_word.empty())
    throw std::runtime_error("no sat/unsat/unknown line in solver output");
  if (verdict_word == "unsat") {
    resp.verdict = Verdict::Unsat;
    return resp;
  }
  if (verdict_word == "unknown") {
    resp.verdict = Verdict::Unknown;
    return resp;
  }
  resp.verdict = Verdict::Sat;

  std::string rest = text.substr(std::min(consumed, text.size()));
  SexpParser parser{rest};
  std::vector<word> values;
  while (!parser.at_end()) {
    Sexp s = parser.parse();
    if (s.is_atom)
      throw std::runtime_error("unexpected atom in solver model: " + s.atom);
    // Each response is a list of (term value) pairs.
    for (const Sexp& pair : s.list) {
      if (pair.is_atom || pair.list.size() < 2)
        throw std::runtime_error("malformed model pair in solver output");
      values.push_back(parse_bv_value(pair.list.back()));
    }
  }

  QueryPlan plan = make_plan(f);
  std::size_t expect =
      plan.scalars.size() + plan.addrs.size() + plan.bases.size() * plan.addrs.size();
  if (values.size() != expect)
    throw std::runtime_error("solver returned " + std::to_string(values.size()) +
                             " values, expected " + std::to_string(expect));
  std::size_t k = 0;
  for (const auto& [name, width] : plan.scalars)
    resp.model.vars[name] = truncate(values[k++], width);
  std::vector<word> addr_vals;
  for (std::size_t i = 0; i < plan.addrs.size(); ++i)
    addr_vals.push_back(truncate(values[k++], plan.addrs[i]->width));
  for (const auto& [name, width] : plan.bases) {
    auto& map = resp.model.mems[name];
    for (std::size_t i = 0; i < plan.addrs.size(); ++i)
      map[addr_vals[i]] = truncate(values[k++], width);
  }
  return resp;
}

SolverResult check_sat_external(const Formula& f, const BackendConfig& config) {
  if (config.solver_path.empty())
    throw CapabilityError("no external solver configured");

  char path[] = "/tmp/dfvalid-XXXXXX.smt2";
  int fd = mkstemps(path, 5);
  if (fd < 0) throw std::runtime_error("cannot create solver script file");
  {
    std::string script = smtlib_script(f);
    std::ofstream out(path);
    out << script;
  }
  close(fd);

  std::string cmd;
  if (config.timeout_ms > 0)
    cmd = "timeout -k 1 " + std::to_string((config.timeout_ms + 999) / 1000) +
          " ";
  cmd += config.solver_path + " " + path;
  int exit_code = 0;
  std::string output = run_command(cmd, exit_code);
  std::remove(path);

  if (exit_code == 124 || exit_code == 137)
    return {Verdict::Unknown, std::nullopt, "external solver timed out"};

  SmtResponse resp;
  try {
    resp = parse_smtlib_response(output, f);
  } catch (const std::exception& e) {
    std::string head = output.substr(0, 200);
    return {Verdict::Unknown, std::nullopt,
            std::string("unparseable solver output (") + e.what() + "): " + head};
  }
  if (resp.verdict == Verdict::Unsat) return {Verdict::Unsat, std::nullopt, ""};
  if (resp.verdict == Verdict::Unknown)
    return {Verdict::Unknown, std::nullopt, "external solver answered unknown"};

  std::map<std::string, unsigned> vars, mems;
  collect_vars(f, vars, mems);
  unsigned addr_width = 1;
  for (const auto& [name, w] : mems) {
    (void)name;
    addr_width = w;
  }
  bool ok = false;
  try {
    ok = eval_formula(f, resp.model.vars, resp.model.mems, addr_width);
  } catch (const std::exception&) {
    ok = false;
  }
  if (!ok)
    return {Verdict::Unknown, std::nullopt,
            "external model failed verification"};
  return {Verdict::Sat, std::move(resp.model), ""};
}

}  // namespace dfv
