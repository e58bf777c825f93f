#include <algorithm>
#include <cctype>
#include <sstream>

#include "dfvalid/seq.hpp"

namespace dfv {

namespace {

struct Line {
  int number;
  std::vector<std::string> toks;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

bool is_punct(char c) {
  return c == ',' || c == '(' || c == ')' || c == '[' || c == ']' ||
         c == '{' || c == '}' || c == '=' || c == ':';
}

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string s = raw.substr(0, raw.find(';'));
    std::vector<std::string> toks;
    std::size_t i = 0;
    while (i < s.size()) {
      char c = s[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (is_punct(c)) {
        toks.push_back(std::string(1, c));
        ++i;
      } else {
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) &&
               !is_punct(s[j]))
          ++j;
        toks.push_back(s.substr(i, j - i));
        i = j;
      }
    }
    if (!toks.empty()) lines.push_back({number, std::move(toks)});
  }
  return lines;
}

struct Cursor {
  const Line& line;
  std::size_t pos = 0;

  bool done() const { return pos >= line.toks.size(); }
  const std::string& peek() const {
    static const std::string empty;
    return done() ? empty : line.toks[pos];
  }
  std::string next(const char* what) {
    if (done()) fail(line.number, std::string("expected ") + what);
    return line.toks[pos++];
  }
  void expect(const std::string& tok) {
    std::string got = next(tok.c_str());
    if (got != tok)
      fail(line.number, "expected '" + tok + "', got '" + got + "'");
  }
  bool accept(const std::string& tok) {
    if (!done() && line.toks[pos] == tok) {
      ++pos;
      return true;
    }
    return false;
  }
  void end() {
    if (!done()) fail(line.number, "trailing tokens ('" + peek() + "')");
  }
};

std::string reg_name(Cursor& c) {
  std::string t = c.next("register");
  if (t.empty() || t[0] != '%') fail(c.line.number, "expected %register, got '" + t + "'");
  return t.substr(1);
}

bool parse_int(const std::string& t, word& out) {
  if (t.empty()) return false;
  std::size_t i = 0;
  bool neg = t[0] == '-';
  if (neg) i = 1;
  if (i >= t.size()) return false;
  word v = 0;
  if (t.size() > i + 2 && t[i] == '0' && (t[i + 1] == 'x' || t[i + 1] == 'X')) {
    for (std::size_t k = i + 2; k < t.size(); ++k) {
      char c = std::tolower(static_cast<unsigned char>(t[k]));
      int d;
      if (c >= '0' && c <= '9') d = c - '0';
      else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
      else return false;
      v = v * 16 + word(d);
    }
  } else {
    for (std::size_t k = i; k < t.size(); ++k) {
      if (!std::isdigit(static_cast<unsigned char>(t[k]))) return false;
      v = v * 10 + word(t[k] - '0');
    }
  }
  out = neg ? word(0) - v : v;
  return true;
}

Operand operand(Cursor& c) {
  std::string t = c.next("operand");
  Operand op;
  if (!t.empty() && t[0] == '%') {
    op.reg = t.substr(1);
    return op;
  }
  if (!parse_int(t, op.cval)) fail(c.line.number, "bad operand '" + t + "'");
  op.is_const = true;
  return op;
}

unsigned parse_width(Cursor& c) {
  std::string t = c.next("width");
  word w;
  if (!parse_int(t, w) || w < 1 || w > 64) fail(c.line.number, "bad width '" + t + "'");
  return unsigned(w);
}

std::string branch_label(Cursor& c) {
  c.expect("label");
  return reg_name(c);
}

}  // namespace

const SeqBlock* SeqProgram::block(const std::string& label) const {
  for (const auto& b : blocks)
    if (b.label == label) return &b;
  return nullptr;
}

bool SeqProgram::is_param(const std::string& n) const {
  for (const auto& p : params)
    if (p.name == n) return true;
  return false;
}

std::string SeqProgram::instr_id(const std::string& block, std::size_t idx) {
  return block + ":" + std::to_string(idx);
}

SeqProgram parse_seq(const std::string& text) {
  std::vector<Line> lines = tokenize(text);
  SeqProgram p;
  bool in_func = false, closed = false;
  SeqBlock* cur = nullptr;
  bool cur_terminated = true;

  for (const Line& line : lines) {
    Cursor c{line};
    const std::string& head = c.peek();
    if (!in_func) {
      if (head != "func") fail(line.number, "expected 'func'");
      c.next("func");
      std::string fname = c.next("function name");
      if (fname.empty() || fname[0] != '@') fail(line.number, "function name must start with @");
      p.name = fname.substr(1);
      c.expect("(");
      if (!c.accept(")")) {
        while (true) {
          SeqParam param;
          if (c.accept("ptr")) param.is_ptr = true;
          param.name = reg_name(c);
          p.params.push_back(param);
          if (c.accept(")")) break;
          c.expect(",");
        }
      }
      c.expect("{");
      c.end();
      in_func = true;
      continue;
    }
    if (closed) fail(line.number, "content after closing '}'");
    if (head == "}") {
      c.next("}");
      c.end();
      if (cur && !cur_terminated) fail(line.number, "block '" + cur->label + "' lacks a terminator");
      closed = true;
      continue;
    }
    if (head == "noalias") {
      c.next("noalias");
      c.expect("(");
      while (true) {
        p.noalias.push_back(reg_name(c));
        if (c.accept(")")) break;
        c.expect(",");
      }
      c.end();
      continue;
    }
    // Block label: `name:`
    if (line.toks.size() == 2 && line.toks[1] == ":") {
      if (cur && !cur_terminated) fail(line.number, "block '" + cur->label + "' lacks a terminator");
      p.blocks.push_back(SeqBlock{});
      cur = &p.blocks.back();
      cur->label = head;
      cur_terminated = false;
      continue;
    }
    if (!cur || cur_terminated)
      fail(line.number, "instruction outside a block");

    if (head == "store") {
      c.next("store");
      SeqInstr in;
      in.kind = SeqInstr::Kind::Store;
      in.args.push_back(operand(c));
      c.expect(",");
      in.args.push_back(operand(c));
      c.end();
      cur->instrs.push_back(std::move(in));
      continue;
    }
    if (head == "br") {
      c.next("br");
      SeqTerminator t;
      if (c.peek() == "label") {
        t.kind = SeqTerminator::Kind::Br;
        t.target_true = branch_label(c);
      } else {
        t.kind = SeqTerminator::Kind::CondBr;
        t.cond = operand(c);
        c.expect(",");
        t.target_true = branch_label(c);
        c.expect(",");
        t.target_false = branch_label(c);
      }
      c.end();
      cur->term = std::move(t);
      cur_terminated = true;
      continue;
    }
    if (head == "ret") {
      c.next("ret");
      c.end();
      cur->term = SeqTerminator{};
      cur_terminated = true;
      continue;
    }
    // `%x = <op> ...`
    SeqInstr in;
    in.result = reg_name(c);
    c.expect("=");
    std::string op = c.next("opcode");
    if (op == "icmp") op = c.next("comparison");
    BinOp bop;
    if (binop_from_name(op, bop)) {
      in.kind = SeqInstr::Kind::Bin;
      in.bop = bop;
      in.args.push_back(operand(c));
      c.expect(",");
      in.args.push_back(operand(c));
    } else if (op == "zext" || op == "sext" || op == "trunc") {
      in.kind = op == "zext" ? SeqInstr::Kind::ZExt
                : op == "sext" ? SeqInstr::Kind::SExt
                               : SeqInstr::Kind::Trunc;
      in.args.push_back(operand(c));
      c.expect("to");
      in.cast_to = parse_width(c);
    } else if (op == "select") {
      in.kind = SeqInstr::Kind::Select;
      in.args.push_back(operand(c));
      c.expect(",");
      in.args.push_back(operand(c));
      c.expect(",");
      in.args.push_back(operand(c));
    } else if (op == "phi") {
      in.kind = SeqInstr::Kind::Phi;
      while (true) {
        c.expect("[");
        in.args.push_back(operand(c));
        c.expect(",");
        in.phi_preds.push_back(c.next("predecessor label"));
        c.expect("]");
        if (!c.accept(",")) break;
      }
    } else if (op == "load") {
      in.kind = SeqInstr::Kind::Load;
      in.args.push_back(operand(c));
    } else {
      fail(line.number, "unknown opcode '" + op + "'");
    }
    c.end();
    cur->instrs.push_back(std::move(in));
  }
  if (!in_func) throw ParseError("empty input: no func found");
  if (!closed) throw ParseError("missing closing '}'");
  validate_seq(p);
  return p;
}

namespace {

std::string operand_str(const Operand& o) {
  if (o.is_const) return std::to_string(o.cval);
  return "%" + o.reg;
}

}  // namespace

std::string print_seq(const SeqProgram& p) {
  std::ostringstream os;
  os << "func @" << p.name << "(";
  for (std::size_t i = 0; i < p.params.size(); ++i) {
    if (i) os << ", ";
    if (p.params[i].is_ptr) os << "ptr ";
    os << "%" << p.params[i].name;
  }
  os << ") {\n";
  if (!p.noalias.empty()) {
    os << "  noalias(";
    for (std::size_t i = 0; i < p.noalias.size(); ++i) {
      if (i) os << ", ";
      os << "%" << p.noalias[i];
    }
    os << ")\n";
  }
  for (const auto& b : p.blocks) {
    os << b.label << ":\n";
    for (const auto& in : b.instrs) {
      os << "  ";
      switch (in.kind) {
        case SeqInstr::Kind::Bin: {
          const char* name = binop_name(in.bop);
          bool cmp = is_comparison(in.bop);
          os << "%" << in.result << " = " << (cmp ? "icmp " : "") << name << " "
             << operand_str(in.args[0]) << ", " << operand_str(in.args[1]);
          break;
        }
        case SeqInstr::Kind::ZExt:
        case SeqInstr::Kind::SExt:
        case SeqInstr::Kind::Trunc: {
          const char* name = in.kind == SeqInstr::Kind::ZExt ? "zext"
                             : in.kind == SeqInstr::Kind::SExt ? "sext"
                                                               : "trunc";
          os << "%" << in.result << " = " << name << " "
             << operand_str(in.args[0]) << " to " << in.cast_to;
          break;
        }
        case SeqInstr::Kind::Select:
          os << "%" << in.result << " = select " << operand_str(in.args[0])
             << ", " << operand_str(in.args[1]) << ", "
             << operand_str(in.args[2]);
          break;
        case SeqInstr::Kind::Phi: {
          os << "%" << in.result << " = phi ";
          for (std::size_t i = 0; i < in.args.size(); ++i) {
            if (i) os << ", ";
            os << "[" << operand_str(in.args[i]) << ", " << in.phi_preds[i]
               << "]";
          }
          break;
        }
        case SeqInstr::Kind::Load:
          os << "%" << in.result << " = load " << operand_str(in.args[0]);
          break;
        case SeqInstr::Kind::Store:
          os << "store " << operand_str(in.args[0]) << ", "
             << operand_str(in.args[1]);
          break;
      }
      os << "\n";
    }
    os << "  ";
    switch (b.term.kind) {
      case SeqTerminator::Kind::Br:
        os << "br label %" << b.term.target_true;
        break;
      case SeqTerminator::Kind::CondBr:
        os << "br " << operand_str(b.term.cond) << ", label %"
           << b.term.target_true << ", label %" << b.term.target_false;
        break;
      case SeqTerminator::Kind::Ret:
        os << "ret";
        break;
    }
    os << "\n";
  }
  os << "}\n";
  return os.str();
}

void validate_seq(const SeqProgram& p) {
  if (p.blocks.empty()) throw ParseError("program has no blocks");

  std::set<std::string> labels;
  for (const auto& b : p.blocks)
    if (!labels.insert(b.label).second)
      throw ParseError("duplicate block label '" + b.label + "'");

  std::set<std::string> defined;
  for (const auto& prm : p.params)
    if (!defined.insert(prm.name).second)
      throw ParseError("duplicate parameter '%" + prm.name + "'");
  for (const auto& b : p.blocks) {
    bool seen_nonphi = false;
    for (const auto& in : b.instrs) {
      if (in.kind == SeqInstr::Kind::Phi) {
        if (seen_nonphi)
          throw ParseError("phi after non-phi instruction in block '" +
                           b.label + "'");
      } else {
        seen_nonphi = true;
      }
      if (in.kind == SeqInstr::Kind::Store) continue;
      if (!defined.insert(in.result).second)
        throw ParseError("register '%" + in.result + "' defined twice");
    }
  }

  auto check_label = [&](const std::string& l, const std::string& where) {
    if (!labels.count(l))
      throw ParseError("undefined label '" + l + "' referenced from " + where);
  };
  std::map<std::string, std::vector<std::string>> preds;
  for (const auto& b : p.blocks) {
    switch (b.term.kind) {
      case SeqTerminator::Kind::Br:
        check_label(b.term.target_true, b.label);
        preds[b.term.target_true].push_back(b.label);
        break;
      case SeqTerminator::Kind::CondBr:
        check_label(b.term.target_true, b.label);
        check_label(b.term.target_false, b.label);
        preds[b.term.target_true].push_back(b.label);
        if (b.term.target_false != b.term.target_true)
          preds[b.term.target_false].push_back(b.label);
        break;
      case SeqTerminator::Kind::Ret:
        break;
    }
  }

  if (!preds[p.blocks.front().label].empty())
    throw ParseError("entry block '" + p.blocks.front().label +
                     "' must have no predecessors");

  auto used = [&](const Operand& o, const std::string& where) {
    if (!o.is_const && !defined.count(o.reg))
      throw ParseError("use of undefined register '%" + o.reg + "' in " + where);
  };
  for (const auto& b : p.blocks) {
    for (const auto& in : b.instrs) {
      if (in.kind == SeqInstr::Kind::Phi) {
        if (b.label == p.blocks.front().label)
          throw ParseError("phi in entry block");
        std::set<std::string> have(in.phi_preds.begin(), in.phi_preds.end());
        std::set<std::string> want(preds[b.label].begin(), preds[b.label].end());
        if (have != want || in.phi_preds.size() != want.size())
          throw ParseError("phi in '" + b.label +
                           "' does not list each predecessor exactly once");
      }
      for (const auto& a : in.args) used(a, b.label);
    }
    if (b.term.kind == SeqTerminator::Kind::CondBr) used(b.term.cond, b.label);
  }

  for (const auto& n : p.noalias) {
    bool ok = false;
    for (const auto& prm : p.params) ok |= prm.name == n && prm.is_ptr;
    if (!ok)
      throw ParseError("noalias lists '%" + n + "', not a pointer parameter");
  }
}

std::map<std::string, unsigned> reg_widths(const SeqProgram& p, unsigned W) {
  std::map<std::string, unsigned> w;
  for (const auto& prm : p.params) w[prm.name] = W;

  auto op_width = [&](const Operand& o) -> unsigned {
    if (o.is_const) return 0;  // unconstrained
    auto it = w.find(o.reg);
    return it == w.end() ? 0 : it->second;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& b : p.blocks) {
      for (const auto& in : b.instrs) {
        if (in.kind == SeqInstr::Kind::Store || w.count(in.result)) continue;
        unsigned width = 0;
        switch (in.kind) {
          case SeqInstr::Kind::Bin: {
            unsigned a = op_width(in.args[0]), c = op_width(in.args[1]);
            unsigned base = a ? a : c;
            if (!base && in.args[0].is_const && in.args[1].is_const) base = W;
            if (base) width = is_comparison(in.bop) ? 1 : base;
            break;
          }
          case SeqInstr::Kind::ZExt:
          case SeqInstr::Kind::SExt:
          case SeqInstr::Kind::Trunc:
            width = in.cast_to;
            break;
          case SeqInstr::Kind::Select: {
            unsigned a = op_width(in.args[1]), c = op_width(in.args[2]);
            width = a ? a : c;
            if (!width && in.args[1].is_const && in.args[2].is_const) width = W;
            break;
          }
          case SeqInstr::Kind::Phi: {
            for (const auto& o : in.args)
              if (unsigned ow = op_width(o)) {
                width = ow;
                break;
              }
            bool all_const = true;
            for (const auto& o : in.args) all_const &= o.is_const;
            if (all_const) width = W;
            break;
          }
          case SeqInstr::Kind::Load:
            width = W;
            break;
          case SeqInstr::Kind::Store:
            break;
        }
        if (width) {
          w[in.result] = width;
          changed = true;
        }
      }
    }
  }

  // Anything still unresolved sits on an all-phi cycle; default it.
  for (const auto& b : p.blocks)
    for (const auto& in : b.instrs)
      if (in.kind != SeqInstr::Kind::Store && !w.count(in.result))
        w[in.result] = W;

  // Consistency sweep.
  auto need = [&](const Operand& o, unsigned want, const std::string& where) {
    if (o.is_const) return;
    if (w.at(o.reg) != want)
      throw TypeError("operand '%" + o.reg + "' has width " +
                      std::to_string(w.at(o.reg)) + ", expected " +
                      std::to_string(want) + " in " + where);
  };
  for (const auto& b : p.blocks) {
    for (const auto& in : b.instrs) {
      switch (in.kind) {
        case SeqInstr::Kind::Bin: {
          unsigned opw = is_comparison(in.bop)
                             ? (op_width(in.args[0]) ? op_width(in.args[0])
                                                     : op_width(in.args[1]))
                             : w.at(in.result);
          if (!opw) opw = W;
          need(in.args[0], opw, b.label);
          need(in.args[1], opw, b.label);
          break;
        }
        case SeqInstr::Kind::ZExt:
        case SeqInstr::Kind::SExt: {
          if (in.cast_to > W)
            throw TypeError("cast to " + std::to_string(in.cast_to) +
                            " exceeds word width " + std::to_string(W));
          unsigned src = op_width(in.args[0]);
          if (src && src > in.cast_to)
            throw TypeError("extension narrows '%" + in.result + "'");
          break;
        }
        case SeqInstr::Kind::Trunc: {
          unsigned src = op_width(in.args[0]);
          if (src && src < in.cast_to)
            throw TypeError("trunc widens '%" + in.result + "'");
          break;
        }
        case SeqInstr::Kind::Select:
          need(in.args[0], 1, b.label);
          need(in.args[1], w.at(in.result), b.label);
          need(in.args[2], w.at(in.result), b.label);
          break;
        case SeqInstr::Kind::Phi:
          for (const auto& o : in.args) need(o, w.at(in.result), b.label);
          break;
        case SeqInstr::Kind::Load:
          need(in.args[0], W, b.label);
          break;
        case SeqInstr::Kind::Store:
          need(in.args[0], W, b.label);
          need(in.args[1], W, b.label);
          break;
      }
    }
    if (b.term.kind == SeqTerminator::Kind::CondBr)
      need(b.term.cond, 1, b.label);
  }
  return w;
}

}  // namespace dfv
