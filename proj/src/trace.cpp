#include "cyclind/trace.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cyclind {

bool PathRelation::operator<(const PathRelation& o) const {
  if (src != o.src) return src < o.src;
  if (dst != o.dst) return dst < o.dst;
  if (dw != o.dw) return dw < o.dw;
  return m < o.m;
}

PathRelation identity_relation(int comp, int width) {
  PathRelation r;
  r.src = r.dst = comp;
  r.dw = width;
  r.m.assign(width, std::vector<Step>(width, Step::None));
  for (int i = 0; i < width; i++) r.m[i][i] = Step::Stay;
  return r;
}

static Step combine(Step a, Step b) {
  if (a == Step::None || b == Step::None) return Step::None;
  return (a == Step::Prog || b == Step::Prog) ? Step::Prog : Step::Stay;
}

std::optional<PathRelation> compose(const PathRelation& r1, const PathRelation& r2) {
  if (r1.dst != r2.src || r1.dst_width() != r2.src_width()) return std::nullopt;
  PathRelation r;
  r.src = r1.src;
  r.dst = r2.dst;
  r.dw = r2.dst_width();
  r.m.assign(r1.src_width(), std::vector<Step>(r2.dst_width(), Step::None));
  for (int a = 0; a < r1.src_width(); a++)
    for (int b = 0; b < r1.dst_width(); b++) {
      if (r1.m[a][b] == Step::None) continue;
      for (int c = 0; c < r2.dst_width(); c++) {
        Step s = combine(r1.m[a][b], r2.m[b][c]);
        if (s == Step::None) continue;
        if (r.m[a][c] == Step::None || (r.m[a][c] == Step::Stay && s == Step::Prog)) r.m[a][c] = s;
      }
    }
  return r;
}

ClosureSet closure(const std::vector<PathRelation>& basics) {
  std::set<PathRelation> cur(basics.begin(), basics.end());
  int gen = 1;
  if (basics.empty()) gen = 0;
  while (true) {
    std::set<PathRelation> next = cur;
    for (const PathRelation& a : cur)
      for (const PathRelation& b : cur)
        if (auto c = compose(a, b)) next.insert(*c);
    if (next == cur) break;
    cur = std::move(next);
    gen++;
  }
  ClosureSet out;
  out.rels.assign(cur.begin(), cur.end());
  out.generations = gen;
  return out;
}

GtcResult gtc_check(const ClosureSet& c) {
  for (const PathRelation& r : c.rels) {
    if (r.src != r.dst) continue;
    auto rr = compose(r, r);
    if (!rr || !(*rr == r)) continue;  // not idempotent
    bool prog = false;
    for (int q = 0; q < r.src_width(); q++)
      if (r.m[q][q] == Step::Prog) prog = true;
    if (!prog) return GtcResult{false, r};
  }
  return GtcResult{true, std::nullopt};
}

std::optional<LoopWitness> loop_witness(const PathRelation& r) {
  if (r.src != r.dst) return std::nullopt;
  PathRelation p = r;
  std::set<PathRelation> seen;
  for (int n = 1; seen.insert(p).second; n++) {
    auto sq = compose(p, p);
    if (sq && *sq == p) {
      for (int q = 0; q < p.src_width(); q++)
        if (p.m[q][q] == Step::Prog) return LoopWitness{n, q};
      return std::nullopt;
    }
    auto nx = compose(p, r);
    if (!nx) return std::nullopt;
    p = *nx;
  }
  return std::nullopt;
}

bool gtc_oracle(const std::vector<PathRelation>& basics, std::size_t max_len) {
  std::set<PathRelation> values(basics.begin(), basics.end());
  std::set<PathRelation> frontier = values;
  for (std::size_t len = 2; len <= max_len && !frontier.empty(); len++) {
    std::set<PathRelation> next;
    for (const PathRelation& w : frontier)
      for (const PathRelation& b : basics)
        if (auto c = compose(w, b))
          if (!values.count(*c)) next.insert(*c);
    values.insert(next.begin(), next.end());
    frontier = std::move(next);
  }
  // Every self-loop word needs a cycle through a progressing edge.
  for (const PathRelation& w : values) {
    if (w.src != w.dst) continue;
    int n = w.src_width();
    // Tarjan is overkill at these sizes: reachability matrix.
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int a = 0; a < n; a++)
      for (int b = 0; b < n; b++) reach[a][b] = w.m[a][b] != Step::None;
    for (int k = 0; k < n; k++)
      for (int a = 0; a < n; a++)
        for (int b = 0; b < n; b++)
          if (reach[a][k] && reach[k][b]) reach[a][b] = true;
    bool has_prog_cycle = false;
    for (int a = 0; a < n && !has_prog_cycle; a++)
      for (int b = 0; b < n && !has_prog_cycle; b++)
        if (w.m[a][b] == Step::Prog && reach[b][a]) has_prog_cycle = true;
    if (!has_prog_cycle) return false;
  }
  return true;
}

// ------------------------------------------------------------ from proofs

std::vector<int> inductive_positions(const Sequent& s, const DefinitionSet& defs) {
  std::vector<int> out;
  for (std::size_t i = 0; i < s.ante.size(); i++)
    if (s.ante[i].kind == FormulaKind::Atom && defs.is_inductive(s.ante[i].pred))
      out.push_back(static_cast<int>(i));
  return out;
}

namespace {

AnteIndexMap identity_map(std::size_t n) {
  AnteIndexMap m;
  m.to.resize(n);
  for (std::size_t i = 0; i < n; i++) m.to[i] = static_cast<int>(i);
  return m;
}

// Splice of `width` formulas at `pos` (the principal is consumed).
AnteIndexMap splice_map(std::size_t n, int pos, int width) {
  AnteIndexMap m;
  m.to.resize(n);
  for (std::size_t i = 0; i < n; i++) {
    int ii = static_cast<int>(i);
    if (ii < pos)
      m.to[i] = ii;
    else if (ii == pos)
      m.to[i] = -1;
    else
      m.to[i] = ii + width - 1;
  }
  return m;
}

}  // namespace

AnteIndexMap ante_index_map(const Sequent& concl, const Rule& r, int premise_index,
                            const DefinitionSet& defs) {
  std::size_t len = concl.ante.size();
  switch (r.tag) {
    case RuleTag::AndL:
      return splice_map(len, r.pos, 2);
    case RuleTag::OrL:
      return splice_map(len, r.pos, 1);
    case RuleTag::ImpL:
      return premise_index == 0 ? splice_map(len, r.pos, 0) : splice_map(len, r.pos, 1);
    case RuleTag::NegL:
      return splice_map(len, r.pos, 0);
    case RuleTag::AllL:
    case RuleTag::ExL:
      return splice_map(len, r.pos, 1);
    case RuleTag::Cut: {
      if (premise_index == 0) return identity_map(len);
      AnteIndexMap m;
      m.to.resize(len);
      for (std::size_t i = 0; i < len; i++)
        m.to[i] = static_cast<int>(i) < r.pos ? static_cast<int>(i) : static_cast<int>(i) + 1;
      return m;
    }
    case RuleTag::Wk: {
      AnteIndexMap m;
      m.to.resize(len);
      std::set<int> ins(r.inserted.begin(), r.inserted.end());
      int shift = 0;
      for (std::size_t i = 0; i < len; i++) {
        if (ins.count(static_cast<int>(i))) {
          m.to[i] = -1;
          shift++;
        } else {
          m.to[i] = static_cast<int>(i) - shift;
        }
      }
      return m;
    }
    case RuleTag::Case: {
      const Formula& p = concl.ante[static_cast<std::size_t>(r.pos)];
      const ProductionRule& pr =
          defs.productions_of(p.pred)[static_cast<std::size_t>(premise_index)];
      int width = static_cast<int>(p.terms.size() + pr.premises.size());
      AnteIndexMap m = splice_map(len, r.pos, width);
      for (std::size_t j = 0; j < pr.premises.size(); j++) {
        const Formula& f = pr.premises[j];
        if (f.kind == FormulaKind::Atom && defs.is_inductive(f.pred))
          m.prog.push_back({r.pos, r.pos + static_cast<int>(p.terms.size() + j)});
      }
      return m;
    }
    case RuleTag::Ind:
      // Minor premises keep the side context; the traced principal is consumed.
      return splice_map(len, r.pos, 0);
    default:
      return identity_map(len);
  }
}

std::vector<TracePair> trace_pairs(const ProofGraph& g, NodeId id, const DefinitionSet& defs) {
  const ProofNode& n = g.at(id);
  std::vector<TracePair> out;
  std::vector<int> cpos = inductive_positions(n.seq, defs);
  std::map<int, int> cord;
  for (std::size_t i = 0; i < cpos.size(); i++) cord[cpos[i]] = static_cast<int>(i);
  for (std::size_t k = 0; k < n.premises.size(); k++) {
    const Sequent& prem = g.at(n.premises[k]).seq;
    std::vector<int> ppos = inductive_positions(prem, defs);
    std::map<int, int> pord;
    for (std::size_t i = 0; i < ppos.size(); i++) pord[ppos[i]] = static_cast<int>(i);
    AnteIndexMap m = ante_index_map(n.seq, n.rule, static_cast<int>(k), defs);
    for (int cp : cpos) {
      int tp = m.to[static_cast<std::size_t>(cp)];
      if (tp < 0 || !pord.count(tp)) continue;
      out.push_back(TracePair{static_cast<int>(k), cord[cp], pord[tp], false});
    }
    for (const auto& [pp, ch] : m.prog) {
      if (!cord.count(pp) || !pord.count(ch)) continue;
      out.push_back(TracePair{static_cast<int>(k), cord[pp], pord[ch], true});
    }
  }
  return out;
}

PathRelation step_relation(const ProofGraph& g, NodeId id, int premise_index,
                           const DefinitionSet& defs) {
  const ProofNode& n = g.at(id);
  const Sequent& prem = g.at(n.premises[static_cast<std::size_t>(premise_index)]).seq;
  int w1 = static_cast<int>(inductive_positions(n.seq, defs).size());
  int w2 = static_cast<int>(inductive_positions(prem, defs).size());
  PathRelation r;
  r.dw = w2;
  r.m.assign(w1, std::vector<Step>(w2, Step::None));
  for (const TracePair& t : trace_pairs(g, id, defs)) {
    if (t.premise_index != premise_index) continue;
    Step s = t.progressing ? Step::Prog : Step::Stay;
    Step& cell = r.m[t.parent_pos][t.child_pos];
    if (cell == Step::None || (cell == Step::Stay && s == Step::Prog)) cell = s;
  }
  return r;
}

int TraceAnalysis::companion_index(NodeId id) const {
  auto it = std::lower_bound(companions.begin(), companions.end(), id);
  if (it == companions.end() || *it != id) throw RuleError("not a companion");
  return static_cast<int>(it - companions.begin());
}

TraceAnalysis analyze_traces(const ProofGraph& g, const DefinitionSet& defs) {
  TraceAnalysis a;
  std::set<NodeId> comps;
  for (const auto& [bud, comp] : g.buds) {
    (void)bud;
    comps.insert(comp);
  }
  a.companions.assign(comps.begin(), comps.end());
  for (NodeId c : a.companions)
    a.widths.push_back(static_cast<int>(inductive_positions(g.at(c).seq, defs).size()));
  for (NodeId id : reachable_preorder(g)) {
    int w = static_cast<int>(inductive_positions(g.at(id).seq, defs).size());
    a.max_width = std::max(a.max_width, w);
  }
  auto subs = extract_subproofs(g);
  for (NodeId comp : a.companions) {
    const Subproof& sp = subs.at(comp);
    int j = a.companion_index(comp);
    // Tree walk accumulating the composed relation from the companion root.
    struct Frame {
      NodeId node;
      PathRelation rel;
    };
    std::vector<Frame> stack{{sp.graph.root, identity_relation(j, a.widths[j])}};
    while (!stack.empty()) {
      Frame f = stack.back();
      stack.pop_back();
      const ProofNode& n = sp.graph.at(f.node);
      if (n.rule.tag == RuleTag::Assume && sp.bud_of.count(f.node)) {
        NodeId orig_bud = sp.bud_of.at(f.node);
        int k = a.companion_index(g.buds.at(orig_bud));
        PathRelation r = f.rel;
        r.dst = k;
        a.basics.push_back(std::move(r));
        continue;
      }
      for (std::size_t i = 0; i < n.premises.size(); i++) {
        PathRelation step = step_relation(sp.graph, f.node, static_cast<int>(i), defs);
        step.src = f.rel.dst;
        step.dst = f.rel.dst;  // intra-path; endpoints fixed at the leaf
        auto next = compose(f.rel, step);
        if (!next) throw RuleError("trace step composition failed");
        stack.push_back({n.premises[i], *next});
      }
    }
  }
  std::sort(a.basics.begin(), a.basics.end());
  a.basics.erase(std::unique(a.basics.begin(), a.basics.end()), a.basics.end());
  a.closed = closure(a.basics);
  GtcResult gr = gtc_check(a.closed);
  a.gtc_ok = gr.ok;
  a.counterexample = gr.counterexample;
  return a;
}

}  // namespace cyclind
