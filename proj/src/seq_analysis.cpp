#include <algorithm>
#include <functional>

#include "dfvalid/seq.hpp"

namespace dfv {

namespace {

std::vector<std::string> successors(const SeqBlock& b) {
  switch (b.term.kind) {
    case SeqTerminator::Kind::Br:
      return {b.term.target_true};
    case SeqTerminator::Kind::CondBr:
      if (b.term.target_true == b.term.target_false)
        return {b.term.target_true};
      return {b.term.target_true, b.term.target_false};
    case SeqTerminator::Kind::Ret:
      return {};
  }
  return {};
}

}  // namespace

bool SeqAnalysis::dominates(const std::string& a, const std::string& b) const {
  std::string cur = b;
  while (true) {
    if (cur == a) return true;
    auto it = idom.find(cur);
    if (it == idom.end() || it->second == cur) return cur == a;
    cur = it->second;
  }
}

const LoopInfo* SeqAnalysis::innermost_loop(const std::string& block) const {
  const LoopInfo* best = nullptr;
  for (const auto& [h, loop] : loops) {
    (void)h;
    if (!loop.blocks.count(block)) continue;
    if (!best || loop.depth > best->depth) best = &loop;
  }
  return best;
}

SeqAnalysis analyze_seq(const SeqProgram& p) {
  SeqAnalysis a;
  const std::string entry = p.blocks.front().label;

  for (const auto& b : p.blocks) {
    a.succs[b.label] = successors(b);
    for (const auto& s : a.succs[b.label]) a.preds[s].push_back(b.label);
    a.preds.try_emplace(b.label);
  }

  // Depth-first order; an edge to a block still on the stack is retreating
  // and must close a natural loop once dominators are known.
  std::map<std::string, int> post;
  std::set<std::string> on_stack;
  std::vector<std::pair<std::string, std::string>> retreating;
  int counter = 0;
  std::function<void(const std::string&)> dfs = [&](const std::string& u) {
    on_stack.insert(u);
    post[u] = -1;
    for (const auto& v : a.succs[u]) {
      if (on_stack.count(v)) {
        retreating.emplace_back(u, v);
      } else if (!post.count(v)) {
        dfs(v);
      }
    }
    on_stack.erase(u);
    post[u] = counter++;
  };
  dfs(entry);

  for (const auto& b : p.blocks)
    if (!post.count(b.label))
      throw ParseError("unreachable block '" + b.label + "'");

  a.rpo.resize(p.blocks.size());
  for (const auto& [label, idx] : post)
    a.rpo[p.blocks.size() - 1 - idx] = label;
  std::map<std::string, std::size_t> rpo_idx;
  for (std::size_t i = 0; i < a.rpo.size(); ++i) rpo_idx[a.rpo[i]] = i;

  // Iterative dominators over the reverse postorder.
  a.idom[entry] = entry;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& b : a.rpo) {
      if (b == entry) continue;
      std::string new_idom;
      for (const auto& pr : a.preds[b]) {
        if (!a.idom.count(pr)) continue;
        if (new_idom.empty()) {
          new_idom = pr;
          continue;
        }
        // intersect
        std::string x = new_idom, y = pr;
        while (x != y) {
          while (rpo_idx[x] > rpo_idx[y]) x = a.idom[x];
          while (rpo_idx[y] > rpo_idx[x]) y = a.idom[y];
        }
        new_idom = x;
      }
      if (!new_idom.empty() && a.idom[b] != new_idom) {
        a.idom[b] = new_idom;
        changed = true;
      }
    }
  }

  for (const auto& [u, v] : retreating) {
    if (!a.dominates(v, u))
      throw ParseError("irreducible control flow: edge " + u + " -> " + v +
                       " re-enters a loop besides its header");
    a.back_edges.emplace_back(u, v);
  }

  // Natural loop bodies, one latch per header.
  for (const auto& [latch, header] : a.back_edges) {
    auto [it, fresh] = a.loops.try_emplace(header);
    LoopInfo& loop = it->second;
    if (!fresh)
      throw ParseError("loop header '" + header +
                       "' has multiple latches, which is unsupported");
    loop.header = header;
    loop.latch = latch;
    loop.blocks.insert(header);
    std::vector<std::string> work{latch};
    while (!work.empty()) {
      std::string b = work.back();
      work.pop_back();
      if (!loop.blocks.insert(b).second) continue;
      for (const auto& pr : a.preds[b])
        if (!loop.blocks.count(pr)) work.push_back(pr);
    }
  }

  // Nesting.
  for (auto& [h, loop] : a.loops) {
    for (const auto& [h2, outer] : a.loops) {
      if (h2 == h || !outer.blocks.count(h)) continue;
      if (loop.parent.empty() ||
          a.loops.at(loop.parent).blocks.count(h2))
        loop.parent = h2;
    }
  }
  for (auto& [h, loop] : a.loops) {
    (void)h;
    unsigned d = 1;
    std::string cur = loop.parent;
    while (!cur.empty()) {
      ++d;
      cur = a.loops.at(cur).parent;
    }
    loop.depth = d;
  }

  // While shape: the header's condbr is the only way out.
  for (auto& [h, loop] : a.loops) {
    const SeqBlock* hb = p.block(h);
    if (hb->term.kind != SeqTerminator::Kind::CondBr) continue;
    bool t_in = loop.blocks.count(hb->term.target_true);
    bool f_in = loop.blocks.count(hb->term.target_false);
    if (t_in == f_in) continue;
    loop.body_target = t_in ? hb->term.target_true : hb->term.target_false;
    loop.exit_target = t_in ? hb->term.target_false : hb->term.target_true;
    bool sealed = true;
    for (const auto& b : loop.blocks) {
      if (b == h) continue;
      for (const auto& s : a.succs[b]) sealed &= loop.blocks.count(s) > 0;
    }
    loop.while_shape = sealed;
  }

  // Liveness. Phi operands count as uses at the tail of the matching
  // predecessor, not at the head of the phi's block.
  std::map<std::string, std::set<std::string>> use, def;
  for (const auto& b : p.blocks) {
    auto& u = use[b.label];
    auto& d = def[b.label];
    auto add_use = [&](const Operand& o) {
      if (!o.is_const && !d.count(o.reg)) u.insert(o.reg);
    };
    for (const auto& in : b.instrs) {
      if (in.kind != SeqInstr::Kind::Phi)
        for (const auto& o : in.args) add_use(o);
      if (in.kind != SeqInstr::Kind::Store) d.insert(in.result);
    }
    if (b.term.kind == SeqTerminator::Kind::CondBr) add_use(b.term.cond);
  }
  changed = true;
  while (changed) {
    changed = false;
    for (auto it = a.rpo.rbegin(); it != a.rpo.rend(); ++it) {
      const std::string& label = *it;
      const SeqBlock* b = p.block(label);
      std::set<std::string> out;
      for (const auto& s : a.succs[label]) {
        const SeqBlock* sb = p.block(s);
        std::set<std::string> in = a.live_in[s];
        for (const auto& instr : sb->instrs) {
          if (instr.kind != SeqInstr::Kind::Phi) break;
          in.erase(instr.result);
          for (std::size_t k = 0; k < instr.phi_preds.size(); ++k)
            if (instr.phi_preds[k] == label && !instr.args[k].is_const)
              in.insert(instr.args[k].reg);
        }
        out.insert(in.begin(), in.end());
      }
      std::set<std::string> in = use[label];
      for (const auto& r : out)
        if (!def[label].count(r)) in.insert(r);
      if (out != a.live_out[label] || in != a.live_in[label]) {
        a.live_out[label] = std::move(out);
        a.live_in[label] = std::move(in);
        changed = true;
      }
    }
  }

  // Dominated-use check: with staging, a phi operand is read at the tail of
  // the predecessor, so its definition must dominate that block.
  std::map<std::string, std::pair<std::string, std::size_t>> def_site;
  for (const auto& prm : p.params) def_site[prm.name] = {entry, 0};
  for (const auto& b : p.blocks)
    for (std::size_t i = 0; i < b.instrs.size(); ++i)
      if (b.instrs[i].kind != SeqInstr::Kind::Store)
        def_site[b.instrs[i].result] = {b.label, i + 1};
  auto check_use = [&](const std::string& reg, const std::string& at_block,
                       std::size_t at_idx, bool is_phi_result_pos) {
    auto [db, di] = def_site.at(reg);
    if (db == at_block) {
      if (di > at_idx && !is_phi_result_pos)
        throw ParseError("register '%" + reg + "' used before definition in '" +
                         at_block + "'");
      return;
    }
    if (!a.dominates(db, at_block))
      throw ParseError("use of '%" + reg + "' in '" + at_block +
                       "' is not dominated by its definition");
  };
  for (const auto& b : p.blocks) {
    for (std::size_t i = 0; i < b.instrs.size(); ++i) {
      const auto& in = b.instrs[i];
      if (in.kind == SeqInstr::Kind::Phi) {
        for (std::size_t k = 0; k < in.args.size(); ++k)
          if (!in.args[k].is_const)
            check_use(in.args[k].reg, in.phi_preds[k],
                      p.block(in.phi_preds[k])->instrs.size() + 1, false);
      } else {
        for (const auto& o : in.args)
          if (!o.is_const) check_use(o.reg, b.label, i, false);
      }
    }
    if (b.term.kind == SeqTerminator::Kind::CondBr && !b.term.cond.is_const)
      check_use(b.term.cond.reg, b.label, b.instrs.size(), false);
  }

  return a;
}

std::string CutPoint::str() const {
  switch (kind) {
    case Kind::Entry: return "Entry";
    case Kind::BackEdge: return "BackEdge(" + header + ")";
    case Kind::Exit: return "Exit";
  }
  return "?";
}

int CutSet::of_header(const std::string& header) const {
  for (std::size_t i = 0; i < cuts.size(); ++i)
    if (cuts[i].kind == CutPoint::Kind::BackEdge && cuts[i].header == header)
      return int(i);
  return -1;
}

CutSet place_cutpoints(const SeqProgram& p) {
  SeqAnalysis a = analyze_seq(p);
  CutSet cs;
  cs.cuts.push_back({CutPoint::Kind::Entry, "", ""});
  for (const auto& label : a.rpo) {
    auto it = a.loops.find(label);
    if (it != a.loops.end())
      cs.cuts.push_back({CutPoint::Kind::BackEdge, label, it->second.latch});
  }
  cs.cuts.push_back({CutPoint::Kind::Exit, "", ""});
  return cs;
}

}  // namespace dfv
