#include "cyclind/stage.hpp"

#include <algorithm>
#include <functional>

#include "cyclind/text.hpp"

namespace cyclind {

void ensure_staging_preds(DefinitionSet& defs, const ProofGraph& g) {
  std::set<std::string> preds;
  std::function<void(const Formula&)> scan = [&](const Formula& f) {
    if (f.kind == FormulaKind::Atom && defs.has_pred(f.pred) && defs.is_inductive(f.pred))
      preds.insert(f.pred + "'");
    for (const Formula& k : f.kids) scan(k);
  };
  for (const ProofNode& n : g.nodes) {
    for (const Formula& f : n.seq.ante) scan(f);
    if (n.seq.succ) scan(*n.seq.succ);
  }
  defs.ensure_preds(preds);
}

NodeId weave_prefix(ProofBuilder& b, NodeId root, const std::vector<Formula>& prefix,
                    std::map<NodeId, NodeId>& leaf_map) {
  ProofGraph& g = b.graph();
  int off = static_cast<int>(prefix.size());
  std::set<std::string> wfv;
  for (const Formula& f : prefix) free_vars(f, wfv);

  std::function<NodeId(NodeId)> go = [&](NodeId id) -> NodeId {
    // Copy the node data first: recursion may reallocate the node vector.
    ProofNode n = g.at(id);
    Sequent seq = n.seq;
    seq.ante.insert(seq.ante.begin(), prefix.begin(), prefix.end());
    Rule r = n.rule;
    if (r.pos >= 0) r.pos += off;
    if (r.target >= 0) r.target += off;
    for (int& i : r.inserted) i += off;
    switch (r.tag) {
      case RuleTag::Subst:
        for (const auto& [v, t] : r.subst) {
          (void)t;
          if (wfv.count(v)) throw RuleError("weave: substitution touches the threaded prefix");
        }
        break;
      case RuleTag::AllR:
      case RuleTag::ExL:
        if (wfv.count(r.var)) throw RuleError("weave: eigenvariable occurs in the prefix");
        break;
      case RuleTag::Case:
      case RuleTag::Ind:
        for (const auto& ys : r.fresh)
          for (const auto& y : ys)
            if (wfv.count(y)) throw RuleError("weave: eigenvariable occurs in the prefix");
        break;
      case RuleTag::Bud:
      case RuleTag::TermAx:
        throw RuleError("weave: unexpected leaf kind");
      default:
        break;
    }
    if (r.tag == RuleTag::Assume) {
      NodeId leaf = b.assume(seq);
      leaf_map[id] = leaf;
      return leaf;
    }
    std::vector<NodeId> kids;
    for (NodeId p : n.premises) kids.push_back(go(p));
    return b.make(std::move(seq), std::move(r), std::move(kids));
  };
  return go(root);
}

// ---------------------------------------------------------------- stager

namespace {

class Stager {
 public:
  Stager(ProofBuilder& b, const ProofGraph& in) : b_(b), in_(in), defs_(b.defs()) {}

  struct Sub {
    NodeId root = 0;
    std::vector<StagedAssumption> asms;
  };

  Sub go(NodeId node, const std::vector<std::string>& posvars);

  Sequent staged_sequent(const Sequent& s, const std::vector<std::string>& posvars) const {
    if (posvars.size() != s.ante.size()) throw RuleError("stager: posvars length mismatch");
    Sequent r;
    for (std::size_t i = 0; i < s.ante.size(); i++) {
      const Formula& f = s.ante[i];
      if (!posvars[i].empty()) {
        if (f.kind != FormulaKind::Atom || !defs_.is_inductive(f.pred))
          throw RuleError("stager: stage variable on a non-inductive position");
        std::vector<Term> args = f.terms;
        args.push_back(tvar(posvars[i]));
        r.ante.push_back(fatom(f.pred + "'", std::move(args)));
      } else {
        r.ante.push_back(bullet(f, defs_));
      }
    }
    if (s.succ) r.succ = bullet(*s.succ, defs_);
    return r;
  }

 private:
  Sub stage_axiom(const ProofNode& n, const std::vector<std::string>& posvars);
  Sub stage_prod(const ProofNode& n, const std::vector<std::string>& posvars);
  Sub stage_case(const ProofNode& n, const std::vector<std::string>& posvars);
  Sub stage_generic(const ProofNode& n, const std::vector<std::string>& posvars);

  ProofBuilder& b_;
  const ProofGraph& in_;
  const DefinitionSet& defs_;
};

bool is_ind_atom(const Formula& f, const DefinitionSet& defs) {
  return f.kind == FormulaKind::Atom && defs.is_inductive(f.pred);
}

Stager::Sub Stager::go(NodeId node, const std::vector<std::string>& posvars) {
  const ProofNode& n = in_.at(node);
  switch (n.rule.tag) {
    case RuleTag::Assume: {
      Sub s;
      Sequent staged = staged_sequent(n.seq, posvars);
      s.root = b_.assume(staged);
      StagedAssumption a;
      a.leaf = s.root;
      a.orig = node;
      for (const auto& v : posvars)
        if (!v.empty()) a.vars.push_back(v);
      s.asms.push_back(std::move(a));
      return s;
    }
    case RuleTag::Axiom:
      return stage_axiom(n, posvars);
    case RuleTag::BotL: {
      Sub s;
      Rule r = n.rule;
      s.root = b_.make(staged_sequent(n.seq, posvars), r, {});
      return s;
    }
    case RuleTag::EqR: {
      Sub s;
      s.root = b_.eq_refl(staged_sequent(n.seq, posvars));
      return s;
    }
    case RuleTag::HAAx: {
      Sub s;
      s.root = b_.haax(staged_sequent(n.seq, posvars));
      return s;
    }
    case RuleTag::Prod:
      return stage_prod(n, posvars);
    case RuleTag::Case:
      return stage_case(n, posvars);
    case RuleTag::Bud:
    case RuleTag::Ind:
    case RuleTag::TermAx:
      throw RuleError("stage transformation expects a bud-free cyclic proof");
    default:
      return stage_generic(n, posvars);
  }
}

Stager::Sub Stager::stage_axiom(const ProofNode& n, const std::vector<std::string>& posvars) {
  Sub s;
  int pos = n.rule.pos;
  const Formula& p = n.seq.ante[static_cast<std::size_t>(pos)];
  Sequent staged = staged_sequent(n.seq, posvars);
  if (is_ind_atom(p, defs_)) {
    // Axiom on a common inductive atom: ExR with the circ variable.
    Sequent inner = staged;
    inner.succ = staged.ante[static_cast<std::size_t>(pos)];
    NodeId ax = b_.axiom_at(inner, pos);
    Rule exr;
    exr.tag = RuleTag::ExR;
    exr.term = tvar(posvars[static_cast<std::size_t>(pos)]);
    s.root = b_.make(staged, exr, {ax});
    return s;
  }
  s.root = b_.axiom_at(staged, pos);
  return s;
}

Stager::Sub Stager::stage_generic(const ProofNode& n, const std::vector<std::string>& posvars) {
  Sequent staged = staged_sequent(n.seq, posvars);
  Rule srule = n.rule;
  if (srule.tag == RuleTag::Cut) srule.formula = bullet(srule.formula, defs_);

  Sub out;
  std::vector<NodeId> kids;
  for (std::size_t k = 0; k < n.premises.size(); k++) {
    const Sequent& prem = in_.at(n.premises[k]).seq;
    AnteIndexMap m = ante_index_map(n.seq, n.rule, static_cast<int>(k), defs_);
    std::vector<std::string> pv(prem.ante.size());
    for (std::size_t i = 0; i < m.to.size(); i++)
      if (m.to[i] >= 0 && !posvars[i].empty()) pv[static_cast<std::size_t>(m.to[i])] = posvars[i];
    // New antecedent entries holding inductive atoms take fresh stage
    // variables and are folded back under their existential afterwards.
    std::vector<std::pair<int, Formula>> folds;
    std::set<int> mapped;
    for (int t : m.to)
      if (t >= 0) mapped.insert(t);
    for (std::size_t j = 0; j < prem.ante.size(); j++) {
      if (mapped.count(static_cast<int>(j))) continue;
      if (is_ind_atom(prem.ante[j], defs_)) {
        pv[j] = b_.fresh().fresh();
        folds.push_back({static_cast<int>(j), bullet(prem.ante[j], defs_)});
      }
    }
    Sub sub = go(n.premises[k], pv);
    NodeId kid = folds.empty() ? sub.root : b_.fold_existentials(sub.root, folds);
    kids.push_back(kid);
    out.asms.insert(out.asms.end(), sub.asms.begin(), sub.asms.end());
  }
  out.root = b_.make(staged, srule, kids);
  return out;
}

Stager::Sub Stager::stage_prod(const ProofNode& n, const std::vector<std::string>& posvars) {
  Sequent staged = staged_sequent(n.seq, posvars);
  const Rule& r = n.rule;
  const ProductionRule& bpr =
      defs_.productions_of(r.pred)[static_cast<std::size_t>(r.prod_index)];
  const ProductionRule& spr =
      defs_.productions_of(r.pred + "'")[static_cast<std::size_t>(r.prod_index)];

  // Recurse on the premises with the shared context variables.
  Sub out;
  std::vector<NodeId> ord_kids;              // ordinary premise subproofs
  std::vector<NodeId> ind_kids;              // staged existential subproofs
  std::vector<std::vector<Term>> ind_args;   // substituted inductive arguments
  std::vector<std::string> ind_preds;
  for (std::size_t k = 0; k < n.premises.size(); k++) {
    Sub sub = go(n.premises[k], posvars);
    out.asms.insert(out.asms.end(), sub.asms.begin(), sub.asms.end());
    const Formula& pf = bpr.premises[k];
    if (is_ind_atom(pf, defs_)) {
      ind_kids.push_back(sub.root);
      std::vector<Term> args;
      for (const Term& t : pf.terms) args.push_back(substitute(t, r.subst));
      ind_args.push_back(std::move(args));
      ind_preds.push_back(pf.pred);
    } else {
      ord_kids.push_back(sub.root);
    }
  }
  std::size_t m = ind_kids.size();
  std::vector<std::string> us;
  for (std::size_t i = 0; i < m; i++) us.push_back(b_.fresh().fresh());
  Term t0 = numeral(1);
  for (std::size_t i = m; i-- > 0;) t0 = tplus(tvar(us[i]), t0);

  // Context with the opened staged hypotheses appended.
  Sequent opened = staged;
  opened.succ.reset();
  std::vector<Formula> opened_atoms;
  for (std::size_t i = 0; i < m; i++) {
    std::vector<Term> args = ind_args[i];
    args.push_back(tvar(us[i]));
    opened_atoms.push_back(fatom(ind_preds[i] + "'", args));
    opened.ante.push_back(opened_atoms.back());
  }
  Sequent with_n = opened;
  for (std::size_t i = 0; i < m; i++) with_n.ante.push_back(fatom("N", {tvar(us[i])}));

  // (Prod P') with the staged substitution.
  Rule prod;
  prod.tag = RuleTag::Prod;
  prod.pred = r.pred + "'";
  prod.prod_index = r.prod_index;
  prod.subst = r.subst;
  {
    std::set<std::string> base_vars(bpr.vars.begin(), bpr.vars.end());
    std::size_t k = 0;
    for (const std::string& v : spr.vars) {
      if (base_vars.count(v)) continue;
      prod.subst[v] = k == 0 ? t0 : tvar(us[k - 1]);
      k++;
    }
    if (k != m + 1) throw RuleError("stage_prod: staged production variable mismatch");
  }
  Sequent prod_goal = with_n;
  {
    std::vector<Term> cargs;
    for (const Term& t : bpr.concl_args) cargs.push_back(substitute(t, r.subst));
    cargs.push_back(t0);
    prod_goal.succ = fatom(r.pred + "'", cargs);
  }
  std::vector<Sequent> pw = premises_of(prod_goal, prod, defs_);
  std::vector<NodeId> pk;
  {
    std::size_t oi = 0;
    for (const Sequent& w : pw) {
      if (std::find(w.ante.begin(), w.ante.end(), *w.succ) != w.ante.end()) {
        pk.push_back(b_.axiom(w));
      } else if (w.succ->kind == FormulaKind::Atom && w.succ->pred == "N") {
        pk.push_back(b_.haax(w));
      } else {
        Term lta, ltb;
        if (match_lt(*w.succ, lta, ltb)) {
          pk.push_back(b_.haax(w));
        } else {
          // An ordinary premise: weaken the recursive subproof into context.
          if (oi >= ord_kids.size()) throw RuleError("stage_prod: premise misalignment");
          pk.push_back(b_.paste(ord_kids[oi++], w));
        }
      }
    }
  }
  NodeId core = b_.make(prod_goal, prod, pk);
  // ExR to the staged succedent.
  Sequent exg = with_n;
  exg.succ = staged.succ;
  {
    Rule exr;
    exr.tag = RuleTag::ExR;
    exr.term = t0;
    core = b_.make(exg, exr, {core});
  }
  // Cut the N facts, innermost last.
  for (std::size_t k = m; k-- > 0;) {
    Sequent ctx = opened;
    for (std::size_t l = 0; l < k; l++) ctx.ante.push_back(fatom("N", {tvar(us[l])}));
    Sequent ngoal = ctx;
    ngoal.succ = fatom("N", {tvar(us[k])});
    NodeId lem =
        lemma_stage_number(b_, ind_preds[k] + "'", ind_args[k], tvar(us[k]), CheckMode::CyclicLocal);
    NodeId lem_ctx = b_.paste(lem, ngoal);
    Sequent ccl = ctx;
    ccl.succ = staged.succ;
    core = b_.cut(ccl, fatom("N", {tvar(us[k])}), lem_ctx, core);
  }
  // Fold the opened hypotheses and cut them against the recursive subproofs.
  std::vector<std::pair<int, Formula>> folds;
  std::vector<Formula> bullets;
  for (std::size_t i = 0; i < m; i++) {
    bullets.push_back(bullet(fatom(ind_preds[i], ind_args[i]), defs_));
    folds.push_back({static_cast<int>(staged.ante.size() + i), bullets.back()});
  }
  NodeId cur = b_.fold_existentials(core, folds);
  for (std::size_t i = m; i-- > 0;) {
    Sequent ctx = staged;
    ctx.succ.reset();
    for (std::size_t l = 0; l < i; l++) ctx.ante.push_back(bullets[l]);
    Sequent lemma_goal = ctx;
    lemma_goal.succ = bullets[i];
    NodeId lem = b_.paste(ind_kids[i], lemma_goal);
    Sequent ccl = ctx;
    ccl.succ = staged.succ;
    cur = b_.cut(ccl, bullets[i], lem, cur);
  }
  Sub s;
  s.root = cur;
  s.asms = std::move(out.asms);
  return s;
}

Stager::Sub Stager::stage_case(const ProofNode& n, const std::vector<std::string>& posvars) {
  Sequent staged = staged_sequent(n.seq, posvars);
  const Rule& r = n.rule;
  const Formula& principal = n.seq.ante[static_cast<std::size_t>(r.pos)];
  const std::string& what = posvars[static_cast<std::size_t>(r.pos)];
  if (what.empty()) throw RuleError("stage_case: principal has no stage variable");
  const auto& bprods = defs_.productions_of(principal.pred);
  const auto& sprods = defs_.productions_of(principal.pred + "'");

  Rule crule;
  crule.tag = RuleTag::Case;
  crule.pos = r.pos;

  struct PerProd {
    std::vector<Formula> weave;                   // Sigma_1 plus the N fact
    std::vector<IneqConstraint> cs;               // its constraint reading
    Sub sub;                                      // staged recursive premise
  };
  std::vector<PerProd> parts;

  for (std::size_t k = 0; k < bprods.size(); k++) {
    const ProductionRule& bpr = bprods[k];
    const ProductionRule& spr = sprods[k];
    const auto& ys = r.fresh[k];
    VarSubst rho;
    std::map<std::string, std::string> name_of;
    for (std::size_t i = 0; i < bpr.vars.size(); i++) {
      rho[bpr.vars[i]] = tvar(ys[i]);
      name_of[bpr.vars[i]] = ys[i];
    }
    std::string v_new;
    std::vector<std::string> vi_new;
    {
      std::set<std::string> base_vars(bpr.vars.begin(), bpr.vars.end());
      std::size_t extras = 0;
      for (const std::string& v : spr.vars) {
        if (base_vars.count(v)) continue;
        std::string nv = b_.fresh().fresh();
        rho[v] = tvar(nv);
        name_of[v] = nv;
        if (extras == 0)
          v_new = nv;
        else
          vi_new.push_back(nv);
        extras++;
      }
    }
    std::vector<std::string> fresh_list;
    for (const std::string& v : spr.vars) fresh_list.push_back(name_of.at(v));
    crule.fresh.push_back(fresh_list);

    // Premise stage variables: context flows through; the production's
    // inductive premises take the staged production's fresh stage variables.
    const Sequent& prem = in_.at(n.premises[k]).seq;
    AnteIndexMap m = ante_index_map(n.seq, r, static_cast<int>(k), defs_);
    std::vector<std::string> pv(prem.ante.size());
    for (std::size_t i = 0; i < m.to.size(); i++)
      if (m.to[i] >= 0 && !posvars[i].empty()) pv[static_cast<std::size_t>(m.to[i])] = posvars[i];
    {
      std::size_t vi = 0;
      for (std::size_t j = 0; j < bpr.premises.size(); j++) {
        if (!is_ind_atom(bpr.premises[j], defs_)) continue;
        std::size_t abs = static_cast<std::size_t>(r.pos) + principal.terms.size() + j;
        pv[abs] = vi_new[vi++];
      }
      if (vi != vi_new.size()) throw RuleError("stage_case: stage variable misalignment");
    }
    PerProd part;
    part.sub = go(n.premises[k], pv);
    // The woven prefix: v-hat = v, then the staged production's new ordinary
    // premises (the stage bounds) and its trailing N v.
    part.weave.push_back(feq(tvar(what), tvar(v_new)));
    part.cs.push_back(IneqConstraint{false, what, v_new});
    // Walk the base premises: each inductive one contributed (lt, atom) to the
    // staged production; the trailing N v is last.
    {
      std::size_t sj = 0;
      std::size_t vi = 0;
      for (std::size_t j = 0; j < bpr.premises.size(); j++) {
        if (is_ind_atom(bpr.premises[j], defs_)) {
          part.weave.push_back(substitute(spr.premises[sj], rho));  // the lt bound
          part.cs.push_back(IneqConstraint{true, v_new, vi_new[vi++]});
          sj += 2;
        } else {
          sj += 1;
        }
      }
      part.weave.push_back(substitute(spr.premises.back(), rho));  // N v
    }
    parts.push_back(std::move(part));
  }

  std::vector<Sequent> want = premises_of(staged, crule, defs_);
  std::vector<NodeId> kids;
  Sub out;
  for (std::size_t k = 0; k < parts.size(); k++) {
    PerProd& part = parts[k];
    std::map<NodeId, NodeId> leaf_map;
    NodeId woven = weave_prefix(b_, part.sub.root, part.weave, leaf_map);
    for (StagedAssumption& a : part.sub.asms) {
      a.leaf = leaf_map.at(a.leaf);
      a.prefix.insert(a.prefix.begin(), part.weave.begin(), part.weave.end());
      a.ineq.insert(a.ineq.begin(), part.cs.begin(), part.cs.end());
      out.asms.push_back(a);
    }
    kids.push_back(b_.paste(woven, want[k]));
  }
  out.root = b_.make(staged, crule, kids);
  return out;
}

}  // namespace

StagedProof stage_proof(ProofBuilder& b, const ProofGraph& input) {
  // Seed the fresh generator past anything in the input.
  {
    std::set<std::string> fv;
    for (const ProofNode& n : input.nodes) free_vars(n.seq, fv);
    b.fresh().absorb(fv);
  }
  const Sequent& root_seq = input.at(input.root).seq;
  std::vector<std::string> posvars(root_seq.ante.size());
  StagedProof out;
  for (std::size_t i = 0; i < root_seq.ante.size(); i++)
    if (is_ind_atom(root_seq.ante[i], b.defs())) {
      posvars[i] = b.fresh().fresh();
      out.root_vars.push_back(posvars[i]);
    }
  Stager st(b, input);
  Stager::Sub s = st.go(input.root, posvars);
  out.root = s.root;
  out.assumptions = std::move(s.asms);
  // Consistency: each staged assumption is its prefix plus the circ form.
  for (const StagedAssumption& a : out.assumptions) {
    const Sequent& have = b.graph().at(a.leaf).seq;
    Sequent want = circ(input.at(a.orig).seq, a.vars, b.defs());
    want.ante.insert(want.ante.begin(), a.prefix.begin(), a.prefix.end());
    if (!(have == want)) throw RuleError("staged assumption shape mismatch");
  }
  return out;
}

NodeId destage(ProofBuilder& b, NodeId root, const std::vector<std::string>& root_vars,
               const Sequent& original) {
  const DefinitionSet& defs = b.defs();
  // 1. Fold the circ'd positions back under their existentials.
  std::vector<std::pair<int, Formula>> folds;
  {
    std::size_t vi = 0;
    for (std::size_t i = 0; i < original.ante.size(); i++)
      if (is_ind_atom(original.ante[i], defs)) {
        if (vi >= root_vars.size()) throw RuleError("destage: missing stage variable");
        vi++;
        folds.push_back({static_cast<int>(i), bullet(original.ante[i], defs)});
      }
  }
  NodeId cur = b.fold_existentials(root, folds);
  // 2. Convert each antecedent position from bullet back to the base formula.
  Sequent bullet_target;
  for (const Formula& f : original.ante) bullet_target.ante.push_back(bullet(f, defs));
  if (original.succ) bullet_target.succ = bullet(*original.succ, defs);
  if (!(b.graph().at(cur).seq == bullet_target))
    throw RuleError("destage: unexpected staged root shape");
  Sequent now = bullet_target;
  for (std::size_t i = 0; i < original.ante.size(); i++) {
    Formula base = original.ante[i];
    Formula blt = bullet_target.ante[i];
    if (base == blt) continue;
    Sequent before = now;
    before.ante[i] = base;
    Sequent lemma_goal = before;
    lemma_goal.succ = blt;
    NodeId lem = b.paste(congruence_to_bullet(b, base), lemma_goal);
    Sequent withb = before;
    withb.ante.push_back(blt);
    NodeId main = b.paste(cur, withb);
    cur = b.cut(before, blt, lem, main);
    now = before;
  }
  // 3. Convert the succedent.
  if (original.succ && !(*original.succ == *bullet_target.succ)) {
    Sequent target = now;
    target.succ = original.succ;
    Sequent withb = now;
    withb.ante.push_back(*bullet_target.succ);
    withb.succ = original.succ;
    NodeId use = b.paste(congruence_from_bullet(b, *original.succ), withb);
    cur = b.cut(target, *bullet_target.succ, cur, use);
    now = target;
  }
  if (!(b.graph().at(cur).seq == original)) throw RuleError("destage: did not reach the original");
  return cur;
}

bool ineq_entails(const std::vector<IneqConstraint>& ineq, const std::vector<std::string>& x,
                  const std::vector<std::string>& y, const PathRelation& rel) {
  if (static_cast<int>(x.size()) != rel.src_width() ||
      static_cast<int>(y.size()) != rel.dst_width())
    return false;
  for (int a = 0; a < rel.src_width(); a++)
    for (int c = 0; c < rel.dst_width(); c++) {
      if (rel.m[a][c] == Step::None) continue;
      bool strict = rel.m[a][c] == Step::Prog;
      if (!ineq_entails_atom(ineq, strict, x[static_cast<std::size_t>(a)],
                             y[static_cast<std::size_t>(c)]))
        return false;
    }
  return true;
}

}  // namespace cyclind
