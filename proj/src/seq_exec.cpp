#include <algorithm>

#include "dfvalid/seq.hpp"
#include "dfvalid/solver.hpp"

namespace dfv {

namespace {

word read_operand(const Operand& o, const VarEnv& regs, unsigned width) {
  if (o.is_const) return truncate(o.cval, width);
  return truncate(regs.at(o.reg), width);
}

}  // namespace

bool step_concrete(const SeqProgram& p, SeqConfig& c, unsigned W,
                   const std::map<std::string, unsigned>& widths,
                   std::string* fired_id) {
  if (c.final) return false;
  const SeqBlock* b = p.block(c.block);
  if (!b) throw EnvError("configuration at unknown block '" + c.block + "'");

  auto jump = [&](const std::string& target) {
    c.prev = c.block;
    c.block = target;
    c.idx = 0;
    c.staged.clear();
    const SeqBlock* tb = p.block(target);
    for (const auto& in : tb->instrs) {
      if (in.kind != SeqInstr::Kind::Phi) break;
      bool found = false;
      for (std::size_t k = 0; k < in.phi_preds.size(); ++k) {
        if (in.phi_preds[k] != c.prev) continue;
        c.staged[in.result] =
            read_operand(in.args[k], c.regs, widths.at(in.result));
        found = true;
        break;
      }
      if (!found)
        throw EnvError("phi '%" + in.result + "' has no edge from '" +
                       c.prev + "'");
    }
  };

  if (c.idx < b->instrs.size()) {
    const SeqInstr& in = b->instrs[c.idx];
    if (fired_id) *fired_id = SeqProgram::instr_id(c.block, c.idx);
    switch (in.kind) {
      case SeqInstr::Kind::Bin: {
        unsigned w = is_comparison(in.bop)
                         ? (in.args[0].is_const
                                ? (in.args[1].is_const ? W
                                                       : widths.at(in.args[1].reg))
                                : widths.at(in.args[0].reg))
                         : widths.at(in.result);
        word a = read_operand(in.args[0], c.regs, w);
        word bb = read_operand(in.args[1], c.regs, w);
        c.regs[in.result] = apply_binop(in.bop, a, bb, w);
        break;
      }
      case SeqInstr::Kind::ZExt: {
        unsigned src = in.args[0].is_const ? in.cast_to
                                           : widths.at(in.args[0].reg);
        c.regs[in.result] =
            zext_word(read_operand(in.args[0], c.regs, src), src, in.cast_to);
        break;
      }
      case SeqInstr::Kind::SExt: {
        unsigned src = in.args[0].is_const ? in.cast_to
                                           : widths.at(in.args[0].reg);
        c.regs[in.result] =
            sext_word(read_operand(in.args[0], c.regs, src), src, in.cast_to);
        break;
      }
      case SeqInstr::Kind::Trunc: {
        unsigned src = in.args[0].is_const ? in.cast_to
                                           : widths.at(in.args[0].reg);
        c.regs[in.result] =
            truncate(read_operand(in.args[0], c.regs, src), in.cast_to);
        break;
      }
      case SeqInstr::Kind::Select: {
        word cond = read_operand(in.args[0], c.regs, 1);
        unsigned w = widths.at(in.result);
        c.regs[in.result] =
            cond ? read_operand(in.args[1], c.regs, w)
                 : read_operand(in.args[2], c.regs, w);
        break;
      }
      case SeqInstr::Kind::Phi:
        c.regs[in.result] = c.staged.at(in.result);
        break;
      case SeqInstr::Kind::Load: {
        word addr = read_operand(in.args[0], c.regs, W);
        auto it = c.mem.find(addr);
        c.regs[in.result] = it == c.mem.end() ? 0 : it->second;
        break;
      }
      case SeqInstr::Kind::Store: {
        word v = read_operand(in.args[0], c.regs, W);
        word addr = read_operand(in.args[1], c.regs, W);
        c.mem[addr] = v;
        break;
      }
    }
    ++c.idx;
    return true;
  }

  if (fired_id) *fired_id = SeqProgram::instr_id(c.block, b->instrs.size());
  switch (b->term.kind) {
    case SeqTerminator::Kind::Br:
      jump(b->term.target_true);
      break;
    case SeqTerminator::Kind::CondBr: {
      word cond = read_operand(b->term.cond, c.regs, 1);
      jump(cond ? b->term.target_true : b->term.target_false);
      break;
    }
    case SeqTerminator::Kind::Ret:
      c.final = true;
      break;
  }
  return true;
}

SeqRunResult run_concrete(const SeqProgram& p, const VarEnv& args,
                          const MemMap& mem0, unsigned W, std::size_t fuel) {
  auto widths = reg_widths(p, W);
  SeqRunResult r;
  r.config.block = p.blocks.front().label;
  r.config.mem = mem0;
  for (const auto& prm : p.params) {
    auto it = args.find(prm.name);
    if (it == args.end())
      throw EnvError("missing argument for parameter '%" + prm.name + "'");
    r.config.regs[prm.name] = truncate(it->second, W);
  }
  std::string id;
  while (!r.config.final) {
    if (r.steps >= fuel) {
      r.exhausted = true;
      return r;
    }
    step_concrete(p, r.config, W, widths, &id);
    r.trace.push_back(id);
    ++r.steps;
  }
  return r;
}

// --- symbolic execution ---

namespace {

struct SymWork {
  SymSeqState st;
  Formula psi;
  std::vector<TraceStep> steps;
};

Term operand_term(const Operand& o, const std::map<std::string, Term>& regs,
                  unsigned width) {
  if (o.is_const) return t_const(truncate(o.cval, width), width);
  return regs.at(o.reg);
}

void stage_phis(const SeqProgram& p, SymSeqState& st,
                const std::map<std::string, unsigned>& widths) {
  const SeqBlock* b = p.block(st.block);
  st.staged.clear();
  for (const auto& in : b->instrs) {
    if (in.kind != SeqInstr::Kind::Phi) break;
    for (std::size_t k = 0; k < in.phi_preds.size(); ++k) {
      if (in.phi_preds[k] != st.prev) continue;
      st.staged[in.result] =
          operand_term(in.args[k], st.regs, widths.at(in.result));
      break;
    }
    if (!st.staged.count(in.result))
      throw EnvError("phi '%" + in.result + "' has no edge from '" + st.prev +
                     "'");
  }
}

}  // namespace

SymSeqState entry_state(const SeqProgram& p, unsigned W,
                        const std::string& mem_name) {
  SymSeqState st;
  st.block = p.blocks.front().label;
  st.mem = m_base(mem_name, W);
  for (const auto& prm : p.params)
    st.regs[prm.name] = t_var("%" + prm.name, W);
  return st;
}

std::vector<SeqBranch> sym_run_to_cutpoints(const SeqProgram& p,
                                            const SymSeqState& start,
                                            unsigned W, const CutSet& cuts,
                                            std::size_t cap) {
  auto widths = reg_widths(p, W);
  SeqAnalysis an = analyze_seq(p);
  std::set<std::pair<std::string, std::string>> back(an.back_edges.begin(),
                                                     an.back_edges.end());

  std::vector<SeqBranch> out;
  std::vector<SymWork> stack;
  {
    SymWork w0{start, f_true(), {}};
    if (w0.st.idx == 0 && w0.st.staged.empty()) stage_phis(p, w0.st, widths);
    stack.push_back(std::move(w0));
  }
  const std::string start_desc = start.block;
  std::size_t emitted_or_pending = 1;

  while (!stack.empty()) {
    SymWork w = std::move(stack.back());
    stack.pop_back();

    for (std::size_t guard = 0;; ++guard) {
      if (guard > 4096)
        throw CapabilityError("symbolic execution did not reach a cut point from " +
                              start_desc);
      const SeqBlock* b = p.block(w.st.block);
      if (w.st.idx < b->instrs.size()) {
        const SeqInstr& in = b->instrs[w.st.idx];
        TraceStep step;
        step.id = SeqProgram::instr_id(w.st.block, w.st.idx);
        switch (in.kind) {
          case SeqInstr::Kind::Bin: {
            unsigned opw =
                is_comparison(in.bop)
                    ? (in.args[0].is_const
                           ? (in.args[1].is_const ? W : widths.at(in.args[1].reg))
                           : widths.at(in.args[0].reg))
                    : widths.at(in.result);
            Term a = operand_term(in.args[0], w.st.regs, opw);
            Term bb = operand_term(in.args[1], w.st.regs, opw);
            w.st.regs[in.result] = t_bin(in.bop, a, bb);
            break;
          }
          case SeqInstr::Kind::ZExt:
            w.st.regs[in.result] = t_zext(
                operand_term(in.args[0], w.st.regs, in.cast_to), in.cast_to);
            break;
          case SeqInstr::Kind::SExt:
            w.st.regs[in.result] = t_sext(
                operand_term(in.args[0], w.st.regs, in.cast_to), in.cast_to);
            break;
          case SeqInstr::Kind::Trunc:
            w.st.regs[in.result] = t_trunc(
                operand_term(in.args[0], w.st.regs, in.cast_to), in.cast_to);
            break;
          case SeqInstr::Kind::Select: {
            unsigned rw = widths.at(in.result);
            w.st.regs[in.result] =
                t_select(operand_term(in.args[0], w.st.regs, 1),
                         operand_term(in.args[1], w.st.regs, rw),
                         operand_term(in.args[2], w.st.regs, rw));
            break;
          }
          case SeqInstr::Kind::Phi:
            w.st.regs[in.result] = w.st.staged.at(in.result);
            break;
          case SeqInstr::Kind::Load:
            w.st.regs[in.result] = t_memread(
                w.st.mem, operand_term(in.args[0], w.st.regs, W));
            break;
          case SeqInstr::Kind::Store:
            w.st.mem = m_update(w.st.mem,
                                operand_term(in.args[1], w.st.regs, W),
                                operand_term(in.args[0], w.st.regs, W));
            break;
        }
        if (in.kind != SeqInstr::Kind::Store)
          step.result = w.st.regs[in.result];
        w.steps.push_back(std::move(step));
        ++w.st.idx;
        continue;
      }

      // Terminator.
      TraceStep step;
      step.id = SeqProgram::instr_id(w.st.block, b->instrs.size());
      auto finish_jump = [&](const std::string& target) -> bool {
        // Returns true when the branch ended at a cut point.
        std::string from = w.st.block;
        w.st.prev = from;
        w.st.block = target;
        w.st.idx = 0;
        w.st.staged.clear();
        if (back.count({from, target})) {
          SeqBranch br;
          br.psi = w.psi;
          br.steps = w.steps;
          br.end_cut = cuts.of_header(target);
          br.end = w.st;
          out.push_back(std::move(br));
          return true;
        }
        stage_phis(p, w.st, widths);
        return false;
      };

      if (b->term.kind == SeqTerminator::Kind::Ret) {
        w.steps.push_back(std::move(step));
        SeqBranch br;
        br.psi = w.psi;
        br.steps = w.steps;
        br.end_cut = cuts.exit_idx();
        br.end = w.st;
        out.push_back(std::move(br));
        break;
      }
      if (b->term.kind == SeqTerminator::Kind::Br) {
        w.steps.push_back(std::move(step));
        if (finish_jump(b->term.target_true)) break;
        continue;
      }
      // CondBr.
      Term cond = operand_term(b->term.cond, w.st.regs, 1);
      step.cond = cond;
      if (is_const(cond)) {
        step.taken = cond->cval != 0;
        w.steps.push_back(std::move(step));
        if (finish_jump(step.taken ? b->term.target_true
                                   : b->term.target_false))
          break;
        continue;
      }
      if (++emitted_or_pending > cap)
        throw CapabilityError("symbolic execution from " + start_desc +
                              " exceeded " + std::to_string(cap) +
                              " branches");
      SymWork other = w;
      {
        TraceStep fstep = step;
        fstep.taken = false;
        other.steps.push_back(std::move(fstep));
        other.psi = f_and(other.psi, f_not(f_atom(cond)));
      }
      step.taken = true;
      w.steps.push_back(std::move(step));
      w.psi = f_and(w.psi, f_atom(cond));

      bool other_done = false;
      {
        std::string from = other.st.block;
        other.st.prev = from;
        other.st.block = b->term.target_false;
        other.st.idx = 0;
        other.st.staged.clear();
        if (back.count({from, b->term.target_false})) {
          SeqBranch br;
          br.psi = other.psi;
          br.steps = other.steps;
          br.end_cut = cuts.of_header(b->term.target_false);
          br.end = other.st;
          out.push_back(std::move(br));
          other_done = true;
        } else {
          stage_phis(p, other.st, widths);
        }
      }
      if (!other_done) stack.push_back(std::move(other));
      if (finish_jump(b->term.target_true)) break;
    }
  }
  return out;
}

}  // namespace dfv
