#include "cyclind/derive.hpp"

#include <algorithm>
#include <functional>

#include "cyclind/text.hpp"

namespace cyclind {

NodeId ProofBuilder::make(Sequent concl, Rule rule, std::vector<NodeId> premises) {
  if (rule.tag == RuleTag::Subst) {
    if (premises.size() != 1 || !(substitute(g_.at(premises[0]).seq, rule.subst) == concl))
      throw RuleError("builder: Subst conclusion is not the substituted premise");
    return g_.add(std::move(concl), std::move(rule), std::move(premises));
  }
  std::vector<Sequent> want = premises_of(concl, rule, defs_);
  if (want.size() != premises.size())
    throw RuleError(std::string("builder: premise count mismatch for ") + rule_name(rule.tag) +
                    " at " + to_string(concl));
  for (std::size_t i = 0; i < want.size(); i++)
    if (!(g_.at(premises[i]).seq == want[i]))
      throw RuleError(std::string("builder: premise ") + std::to_string(i) + " of " +
                      rule_name(rule.tag) + " should be `" + to_string(want[i]) + "` but is `" +
                      to_string(g_.at(premises[i]).seq) + "`");
  return g_.add(std::move(concl), std::move(rule), std::move(premises));
}

NodeId ProofBuilder::assume(Sequent s) {
  Rule r;
  r.tag = RuleTag::Assume;
  NodeId id = g_.add(std::move(s), r, {});
  g_.assumptions.insert(id);
  return id;
}

NodeId ProofBuilder::axiom_at(const Sequent& s, int pos) {
  Rule r;
  r.tag = RuleTag::Axiom;
  r.pos = pos;
  return make(s, r, {});
}

NodeId ProofBuilder::axiom(const Sequent& s) {
  if (!s.succ) throw RuleError("axiom needs a succedent");
  for (std::size_t i = 0; i < s.ante.size(); i++)
    if (s.ante[i] == *s.succ) return axiom_at(s, static_cast<int>(i));
  throw RuleError("axiom: succedent not present in the antecedent: " + to_string(s));
}

NodeId ProofBuilder::haax(const Sequent& s) {
  Rule r;
  r.tag = RuleTag::HAAx;
  return make(s, r, {});
}

NodeId ProofBuilder::eq_refl(const Sequent& s) {
  Rule r;
  r.tag = RuleTag::EqR;
  return make(s, r, {});
}

NodeId ProofBuilder::weaken_to(NodeId inner, const Sequent& target) {
  const Sequent& have = g_.at(inner).seq;
  if (have == target) return inner;
  Rule r;
  r.tag = RuleTag::Wk;
  if (have.succ != target.succ) {
    if (have.succ.has_value() || !target.succ.has_value())
      throw RuleError("weaken_to: succedent mismatch");
    r.wk_succ = true;
  }
  // Greedy subsequence embedding; everything unmatched is an insertion.
  std::size_t i = 0;
  for (std::size_t j = 0; j < target.ante.size(); j++) {
    if (i < have.ante.size() && have.ante[i] == target.ante[j])
      i++;
    else
      r.inserted.push_back(static_cast<int>(j));
  }
  if (i != have.ante.size())
    throw RuleError("weaken_to: antecedent is not a subsequence of the target");
  return make(target, r, {inner});
}

NodeId ProofBuilder::cut(const Sequent& concl, const Formula& cut_formula, NodeId lemma,
                         NodeId main) {
  Rule r;
  r.tag = RuleTag::Cut;
  r.pos = static_cast<int>(concl.ante.size());
  r.formula = cut_formula;
  return make(concl, r, {lemma, main});
}

NodeId ProofBuilder::paste(NodeId inner, const Sequent& target) {
  const Sequent have = g_.at(inner).seq;  // copy: make() may reallocate
  if (have == target) return inner;
  if (have.succ != target.succ) {
    // Allow weakening an empty succedent as part of the paste.
    if (have.succ.has_value() || !target.succ.has_value())
      throw RuleError("paste: succedent mismatch");
  }
  // Fast path: plain weakening.
  {
    std::size_t i = 0;
    for (std::size_t j = 0; j < target.ante.size() && i < have.ante.size(); j++)
      if (have.ante[i] == target.ante[j]) i++;
    if (i == have.ante.size()) return weaken_to(inner, target);
  }
  for (const Formula& f : have.ante)
    if (std::find(target.ante.begin(), target.ante.end(), f) == target.ante.end())
      throw RuleError("paste: formula not available in the target context: " + to_string(f));
  // target.ante ++ have.ante is a supersequence of have.ante; cut each element
  // of have.ante in turn (each is an axiom from the target context).
  std::function<NodeId(std::size_t, Sequent)> go = [&](std::size_t i, Sequent ctx) -> NodeId {
    if (i == have.ante.size()) {
      Sequent final_ctx = ctx;
      return weaken_to(inner, final_ctx);
    }
    Sequent lemma_seq = ctx;
    lemma_seq.succ = have.ante[i];
    NodeId lemma = axiom(lemma_seq);
    Sequent next = ctx;
    next.ante.push_back(have.ante[i]);
    NodeId main = go(i + 1, next);
    return cut(ctx, have.ante[i], lemma, main);
  };
  return go(0, target);
}

NodeId ProofBuilder::fold_existentials(NodeId inner,
                                       const std::vector<std::pair<int, Formula>>& folds) {
  // Apply in descending position order so indices stay valid.
  std::vector<std::pair<int, Formula>> fs = folds;
  std::sort(fs.begin(), fs.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  NodeId cur = inner;
  for (const auto& [pos, ex_form] : fs) {
    const Sequent& have = g_.at(cur).seq;
    if (ex_form.kind != FormulaKind::Ex) throw RuleError("fold target must be existential");
    const Formula& atom = have.ante[static_cast<std::size_t>(pos)];
    if (atom.kind != FormulaKind::Atom || atom.terms.empty())
      throw RuleError("fold source must be a staged atom");
    const Term& witness = atom.terms.back();
    if (witness.kind != TermKind::Var) throw RuleError("fold witness must be a variable");
    Sequent concl = have;
    concl.ante[static_cast<std::size_t>(pos)] = ex_form;
    Rule r;
    r.tag = RuleTag::ExL;
    r.pos = pos;
    r.var = witness.name;
    cur = make(concl, r, {cur});
  }
  return cur;
}

// ---------------------------------------------------------------- bullet / circ

std::string bullet_binder(const std::vector<Term>& args) {
  std::set<std::string> fv;
  for (const Term& t : args) free_vars(t, fv);
  std::string v = "v";
  while (fv.count(v)) v += "'";
  return v;
}

Formula bullet(const Formula& f, const DefinitionSet& defs) {
  // The canonical order notation is arithmetic, not inductive content: its
  // relativizing N guard stays untouched (in the underlying signature the
  // order symbol is atomic).
  {
    Term a, b;
    if (match_lt(f, a, b)) return f;
  }
  switch (f.kind) {
    case FormulaKind::Atom: {
      if (!defs.is_inductive(f.pred)) return f;
      std::string v = bullet_binder(f.terms);
      std::vector<Term> args = f.terms;
      args.push_back(tvar(v));
      return fex(v, fatom(f.pred + "'", std::move(args)));
    }
    case FormulaKind::Eq:
    case FormulaKind::Falsum:
      return f;
    default: {
      Formula r = f;
      for (Formula& k : r.kids) k = bullet(k, defs);
      return r;
    }
  }
}

Sequent circ(const Sequent& s, const std::vector<std::string>& vars, const DefinitionSet& defs) {
  Sequent r;
  std::size_t next = 0;
  for (const Formula& f : s.ante) {
    if (f.kind == FormulaKind::Atom && defs.is_inductive(f.pred)) {
      if (next >= vars.size()) throw RuleError("circ: not enough stage variables");
      std::vector<Term> args = f.terms;
      args.push_back(tvar(vars[next++]));
      r.ante.push_back(fatom(f.pred + "'", std::move(args)));
    } else {
      r.ante.push_back(bullet(f, defs));
    }
  }
  if (s.succ) r.succ = bullet(*s.succ, defs);
  return r;
}

// ---------------------------------------------------------------- stage-number typing

NodeId lemma_stage_number(ProofBuilder& b, const std::string& staged_pred,
                          const std::vector<Term>& base_args, const Term& stage, CheckMode mode) {
  const DefinitionSet& defs = b.defs();
  std::vector<Term> args = base_args;
  args.push_back(stage);
  Sequent goal;
  goal.ante.push_back(fatom(staged_pred, args));
  goal.succ = fatom("N", {stage});

  const auto& prods = defs.productions_of(staged_pred);
  if (mode == CheckMode::CyclicLocal) {
    Rule r;
    r.tag = RuleTag::Case;
    r.pos = 0;
    std::vector<NodeId> premises;
    for (const ProductionRule& pr : prods) {
      std::vector<std::string> ys;
      for (std::size_t i = 0; i < pr.vars.size(); i++) ys.push_back(b.fresh().fresh());
      r.fresh.push_back(ys);
    }
    std::vector<Sequent> want = premises_of(goal, r, defs);
    for (std::size_t k = 0; k < want.size(); k++) {
      const Sequent& w = want[k];
      // The last equation is stage = v_fresh; the production's trailing
      // premise is N(v_fresh). Rewrite the goal with the equation and close.
      int eqpos = static_cast<int>(base_args.size());
      int npos = static_cast<int>(w.ante.size()) - 1;
      Rule rw;
      rw.tag = RuleTag::EqL;
      rw.pos = eqpos;
      rw.target = -1;
      rw.ltr = true;
      Sequent after = premises_of(w, rw, defs)[0];
      premises.push_back(b.make(w, rw, {b.axiom_at(after, npos)}));
    }
    return b.make(goal, r, premises);
  }

  // Ljid variant: (Ind P') with the constant-in-the-element induction formula
  // picking out the stage argument.
  Rule r;
  r.tag = RuleTag::Ind;
  r.pos = 0;
  std::vector<std::string> block = defs.mutual_block(staged_pred);
  for (const std::string& q : block) {
    IndFormula f;
    unsigned arity = defs.pred(q).arity;
    for (unsigned i = 0; i < arity; i++) f.params.push_back(b.fresh().fresh());
    f.body = fatom("N", {tvar(f.params.back())});
    r.ind[q] = std::move(f);
  }
  for (const std::string& q : block)
    for (const ProductionRule& pr : defs.productions_of(q)) {
      std::vector<std::string> ys;
      for (std::size_t i = 0; i < pr.vars.size(); i++) ys.push_back(b.fresh().fresh());
      r.fresh.push_back(ys);
    }
  std::vector<Sequent> want = premises_of(goal, r, defs);
  std::vector<NodeId> premises;
  for (const Sequent& w : want) {
    // The trailing production premise N(v) is the goal after unfolding.
    premises.push_back(b.axiom(w));
  }
  return b.make(goal, r, premises);
}

// ---------------------------------------------------------------- equivalence lemmas

namespace {

Term sum_plus_one(const std::vector<Term>& ts) {
  Term acc = numeral(1);
  for (auto it = ts.rbegin(); it != ts.rend(); ++it) acc = tplus(*it, acc);
  return acc;
}

}  // namespace

NodeId lemma_to_staged(ProofBuilder& b, const std::string& pred, const std::vector<Term>& args) {
  const DefinitionSet& defs = b.defs();
  Formula goal_atom = fatom(pred, args);
  Sequent goal;
  goal.ante.push_back(goal_atom);
  goal.succ = bullet(goal_atom, defs);

  std::vector<std::string> block = defs.mutual_block(pred);
  std::set<std::string> blockset(block.begin(), block.end());
  Rule r;
  r.tag = RuleTag::Ind;
  r.pos = 0;
  for (const std::string& q : block) {
    IndFormula f;
    unsigned arity = defs.pred(q).arity;
    std::vector<Term> params;
    for (unsigned i = 0; i < arity; i++) {
      f.params.push_back(b.fresh().fresh());
      params.push_back(tvar(f.params.back()));
    }
    f.body = bullet(fatom(q, params), defs);
    r.ind[q] = std::move(f);
  }
  for (const std::string& q : block)
    for (const ProductionRule& pr : defs.productions_of(q)) {
      std::vector<std::string> ys;
      for (std::size_t i = 0; i < pr.vars.size(); i++) ys.push_back(b.fresh().fresh());
      r.fresh.push_back(ys);
    }
  std::vector<Sequent> want = premises_of(goal, r, defs);

  std::vector<NodeId> premises;
  std::size_t fi = 0;
  for (const std::string& q : block) {
    const auto& prods = defs.productions_of(q);
    for (std::size_t pidx = 0; pidx < prods.size(); pidx++) {
      const ProductionRule& pr = prods[pidx];
      const Sequent& minor = want[fi];
      const auto& ys = r.fresh[fi];
      fi++;
      VarSubst rho;
      for (std::size_t i = 0; i < ys.size(); i++) rho[pr.vars[i]] = tvar(ys[i]);

      // Open the staged hypotheses: every block premise arrived as its bullet.
      // Then produce the staged production with stage t0 = sum of opened
      // stages + 1, after establishing the N facts.
      struct IndPrem {
        int pos;            // in `minor`
        std::string pred;   // base predicate
        std::vector<Term> args;
        std::string stage;  // opened stage variable
        bool in_block;
      };
      std::vector<IndPrem> ips;
      Sequent opened = minor;
      for (std::size_t j = 0; j < pr.premises.size(); j++) {
        const Formula& f = pr.premises[j];
        if (!(f.kind == FormulaKind::Atom && defs.is_inductive(f.pred))) continue;
        IndPrem ip;
        ip.pos = static_cast<int>(j);
        ip.pred = f.pred;
        ip.args.clear();
        for (const Term& t : f.terms) ip.args.push_back(substitute(t, rho));
        ip.in_block = blockset.count(f.pred) != 0;
        ip.stage = b.fresh().fresh();
        ips.push_back(ip);
      }
      // minor antecedent: production premises in order (no side context here).
      // Replace each staged hypothesis by its opened form.
      for (IndPrem& ip : ips) {
        std::vector<Term> sargs = ip.args;
        sargs.push_back(tvar(ip.stage));
        opened.ante[static_cast<std::size_t>(ip.pos)] = fatom(ip.pred + "'", sargs);
      }
      // Interior: context `opened` + N facts; conclude the staged atom.
      std::vector<Term> cargs;
      for (const Term& t : pr.concl_args) cargs.push_back(substitute(t, rho));
      std::vector<Term> stage_terms;
      for (const IndPrem& ip : ips) stage_terms.push_back(tvar(ip.stage));
      Term t0 = sum_plus_one(stage_terms);

      Sequent with_n = opened;
      for (const IndPrem& ip : ips) with_n.ante.push_back(fatom("N", {tvar(ip.stage)}));
      // (Prod q') instance.
      Rule prod;
      prod.tag = RuleTag::Prod;
      prod.pred = q + "'";
      prod.prod_index = static_cast<int>(pidx);
      prod.subst = rho;
      const ProductionRule& spr = defs.productions_of(q + "'")[pidx];
      // The staged production's extra variables: stage var then one per
      // inductive premise, in premise order.
      {
        std::set<std::string> base_vars(pr.vars.begin(), pr.vars.end());
        std::size_t k = 0;
        for (const std::string& v : spr.vars) {
          if (base_vars.count(v)) continue;
          if (k == 0)
            prod.subst[v] = t0;
          else
            prod.subst[v] = tvar(ips[k - 1].stage);
          k++;
        }
        if (k != ips.size() + 1) throw RuleError("staged production variable mismatch");
      }
      Sequent prod_goal = with_n;
      {
        std::vector<Term> sc = cargs;
        sc.push_back(t0);
        prod_goal.succ = fatom(q + "'", sc);
      }
      std::vector<Sequent> pw = premises_of(prod_goal, prod, defs);
      std::vector<NodeId> pk;
      for (const Sequent& w : pw) {
        if (std::find(w.ante.begin(), w.ante.end(), *w.succ) != w.ante.end())
          pk.push_back(b.axiom(w));
        else
          pk.push_back(b.haax(w));  // the new stage bounds and N t0
      }
      NodeId core = b.make(prod_goal, prod, pk);
      // ExR to the bullet goal.
      Sequent exg = with_n;
      exg.succ = minor.succ;
      {
        Rule exr;
        exr.tag = RuleTag::ExR;
        exr.term = t0;
        core = b.make(exg, exr, {core});
      }
      // Cut in the N facts (stage-number lemma on each opened hypothesis).
      for (std::size_t k = ips.size(); k-- > 0;) {
        Sequent ctx = opened;
        for (std::size_t l = 0; l < k; l++) ctx.ante.push_back(fatom("N", {tvar(ips[l].stage)}));
        Sequent ngoal = ctx;
        ngoal.succ = fatom("N", {tvar(ips[k].stage)});
        NodeId lem = lemma_stage_number(b, ips[k].pred + "'", ips[k].args, tvar(ips[k].stage),
                                        CheckMode::Ljid);
        NodeId lemma_in_ctx = b.paste(lem, ngoal);
        Sequent ccl = ctx;
        ccl.succ = exg.succ;
        core = b.cut(ccl, fatom("N", {tvar(ips[k].stage)}), lemma_in_ctx, core);
      }
      // Open the bullets: ExL at each staged hypothesis position (descending).
      std::vector<std::pair<int, Formula>> folds;
      for (const IndPrem& ip : ips) {
        if (ip.in_block) {
          folds.push_back({ip.pos, minor.ante[static_cast<std::size_t>(ip.pos)]});
        } else {
          // Lower-stratum premise arrived unstaged: cut its staging lemma.
          folds.push_back({ip.pos, bullet(fatom(ip.pred, ip.args), defs)});
        }
      }
      NodeId cur = b.fold_existentials(core, folds);
      // Now the context has bullets at every inductive premise position; for
      // lower-stratum entries derive the bullet from the plain atom by the
      // (recursively generated) staging lemma.
      Sequent cur_seq = b.graph().at(cur).seq;
      for (const IndPrem& ip : ips) {
        if (ip.in_block) continue;
        Sequent tgt = cur_seq;
        tgt.ante[static_cast<std::size_t>(ip.pos)] = fatom(ip.pred, ip.args);
        Sequent lemma_goal = tgt;
        lemma_goal.succ = bullet(fatom(ip.pred, ip.args), defs);
        NodeId lem = lemma_to_staged(b, ip.pred, ip.args);
        NodeId lem_ctx = b.paste(lem, lemma_goal);
        // cut bullet into the context, then the previous proof consumes it
        Sequent before = tgt;
        NodeId main;
        {
          Sequent withb = tgt;
          withb.ante.push_back(cur_seq.ante[static_cast<std::size_t>(ip.pos)]);
          main = b.paste(cur, withb);
        }
        cur = b.cut(before, cur_seq.ante[static_cast<std::size_t>(ip.pos)], lem_ctx, main);
        cur_seq = tgt;
      }
      premises.push_back(b.paste(cur, minor));
    }
  }
  return b.make(goal, r, premises);
}

NodeId lemma_from_staged(ProofBuilder& b, const std::string& pred, const std::vector<Term>& args) {
  const DefinitionSet& defs = b.defs();
  Formula base_atom = fatom(pred, args);
  Formula ex_form = bullet(base_atom, defs);
  Sequent goal;
  goal.ante.push_back(ex_form);
  goal.succ = base_atom;

  // Open the existential, then (Ind P') with F(z..,v) = P(z..).
  std::string stage_var = b.fresh().fresh();
  std::vector<Term> sargs = args;
  sargs.push_back(tvar(stage_var));
  Sequent opened;
  opened.ante.push_back(fatom(pred + "'", sargs));
  opened.succ = base_atom;

  std::string staged = pred + "'";
  std::vector<std::string> block = defs.mutual_block(staged);
  std::set<std::string> blockset(block.begin(), block.end());
  Rule r;
  r.tag = RuleTag::Ind;
  r.pos = 0;
  for (const std::string& q : block) {
    IndFormula f;
    unsigned arity = defs.pred(q).arity;  // base arity + 1
    std::vector<Term> params;
    for (unsigned i = 0; i < arity; i++) {
      f.params.push_back(b.fresh().fresh());
      if (i + 1 < arity) params.push_back(tvar(f.params.back()));
    }
    f.body = fatom(stage_base_name(q), params);
    r.ind[q] = std::move(f);
  }
  for (const std::string& q : block)
    for (const ProductionRule& pr : defs.productions_of(q)) {
      std::vector<std::string> ys;
      for (std::size_t i = 0; i < pr.vars.size(); i++) ys.push_back(b.fresh().fresh());
      r.fresh.push_back(ys);
    }
  std::vector<Sequent> want = premises_of(opened, r, defs);
  std::vector<NodeId> premises;
  std::size_t fi = 0;
  for (const std::string& q : block) {
    std::string base = stage_base_name(q);
    const auto& sprods = defs.productions_of(q);
    const auto& bprods = defs.productions_of(base);
    for (std::size_t pidx = 0; pidx < sprods.size(); pidx++) {
      const Sequent& minor = want[fi];
      const auto& ys = r.fresh[fi];
      fi++;
      const ProductionRule& bpr = bprods[pidx];
      // Rename the base production by the matching fresh variables: the staged
      // production's vars start with the base production's vars in order.
      VarSubst rho;
      for (std::size_t i = 0; i < bpr.vars.size(); i++) {
        // base vars are a prefix of the staged production's var list
        const ProductionRule& spr = sprods[pidx];
        auto it = std::find(spr.vars.begin(), spr.vars.end(), bpr.vars[i]);
        if (it == spr.vars.end()) throw RuleError("base production variable lost in staging");
        rho[bpr.vars[i]] = tvar(ys[static_cast<std::size_t>(it - spr.vars.begin())]);
      }
      Rule prod;
      prod.tag = RuleTag::Prod;
      prod.pred = base;
      prod.prod_index = static_cast<int>(pidx);
      prod.subst = rho;
      Sequent prod_goal = minor;
      std::vector<Sequent> pw = premises_of(prod_goal, prod, defs);
      std::vector<NodeId> pk;
      for (const Sequent& w : pw) {
        // Ordinary premises and in-block hypotheses are in the context; a
        // lower-stratum staged premise P'(t,v) yields P(t) via its own lemma.
        if (std::find(w.ante.begin(), w.ante.end(), *w.succ) != w.ante.end()) {
          pk.push_back(b.axiom(w));
        } else {
          const Formula& tgt = *w.succ;
          if (tgt.kind != FormulaKind::Atom || !defs.is_inductive(tgt.pred))
            throw RuleError("unstaging lemma: unexpected production premise " + to_string(tgt));
          // find the staged counterpart in the context
          std::vector<Term> st = tgt.terms;
          int found = -1;
          std::string found_stage;
          for (std::size_t i2 = 0; i2 < w.ante.size() && found < 0; i2++) {
            const Formula& h = w.ante[i2];
            if (h.kind == FormulaKind::Atom && h.pred == tgt.pred + "'" &&
                h.terms.size() == st.size() + 1 &&
                std::equal(st.begin(), st.end(), h.terms.begin()))
              found = static_cast<int>(i2);
          }
          if (found < 0) throw RuleError("unstaging lemma: staged premise not found");
          const Formula& h = w.ante[static_cast<std::size_t>(found)];
          // [P'(t,v)] |- P(t): ExR to bullet then the recursive lemma.
          Sequent mini;
          mini.ante.push_back(h);
          mini.succ = bullet(tgt, defs);
          Rule exr;
          exr.tag = RuleTag::ExR;
          exr.term = h.terms.back();
          NodeId step = b.make(mini, exr, {b.axiom([&] {
                                 Sequent s2 = mini;
                                 s2.succ = h;
                                 return s2;
                               }())});
          NodeId lem = lemma_from_staged(b, tgt.pred, tgt.terms);
          // chain: context |- bullet ; bullet |- base atom
          Sequent bridge = w;
          bridge.succ = bullet(tgt, defs);
          NodeId have_bullet = b.paste(step, bridge);
          Sequent withb = w;
          withb.ante.push_back(bullet(tgt, defs));
          NodeId use = b.paste(lem, withb);
          pk.push_back(b.cut(w, bullet(tgt, defs), have_bullet, use));
        }
      }
      premises.push_back(b.make(prod_goal, prod, pk));
    }
  }
  NodeId ind = b.make(opened, r, premises);
  Rule exl;
  exl.tag = RuleTag::ExL;
  exl.pos = 0;
  exl.var = stage_var;
  return b.make(goal, exl, {ind});
}

// ---------------------------------------------------------------- congruence

namespace {

NodeId congruence(ProofBuilder& b, const Formula& f, bool to_bullet);

// [from] |- to  where (from,to) = (F, F•) or (F•, F).
NodeId congruence(ProofBuilder& b, const Formula& f, bool to_bullet) {
  const DefinitionSet& defs = b.defs();
  Formula fb = bullet(f, defs);
  Formula from = to_bullet ? f : fb;
  Formula to = to_bullet ? fb : f;
  Sequent goal;
  goal.ante.push_back(from);
  goal.succ = to;
  if (from == to) return b.axiom_at(goal, 0);
  switch (f.kind) {
    case FormulaKind::Atom:
      return to_bullet ? lemma_to_staged(b, f.pred, f.terms)
                       : lemma_from_staged(b, f.pred, f.terms);
    case FormulaKind::And: {
      // [A0 op B0] |- A1 op B1 with component lemmas
      Sequent split;
      split.ante = {to_bullet ? f.kids[0] : bullet(f.kids[0], defs),
                    to_bullet ? f.kids[1] : bullet(f.kids[1], defs)};
      split.succ = to;
      Rule andr;
      andr.tag = RuleTag::AndR;
      Sequent la = split, lb = split;
      la.succ = to.kids[0];
      lb.succ = to.kids[1];
      NodeId pa = b.paste(congruence(b, f.kids[0], to_bullet), la);
      NodeId pb = b.paste(congruence(b, f.kids[1], to_bullet), lb);
      NodeId body = b.make(split, andr, {pa, pb});
      Rule andl;
      andl.tag = RuleTag::AndL;
      andl.pos = 0;
      return b.make(goal, andl, {body});
    }
    case FormulaKind::Or: {
      Rule orl;
      orl.tag = RuleTag::OrL;
      orl.pos = 0;
      std::vector<NodeId> prems;
      for (int side = 0; side < 2; side++) {
        Sequent s;
        s.ante = {to_bullet ? f.kids[side] : bullet(f.kids[side], defs)};
        s.succ = to;
        Rule orr;
        orr.tag = side == 0 ? RuleTag::OrRl : RuleTag::OrRr;
        Sequent inner = s;
        inner.succ = to.kids[side];
        NodeId p = b.paste(congruence(b, f.kids[side], to_bullet), inner);
        prems.push_back(b.make(s, orr, {p}));
      }
      return b.make(goal, orl, prems);
    }
    case FormulaKind::Imp: {
      Rule impr;
      impr.tag = RuleTag::ImpR;
      Sequent inner;
      inner.ante = {from, to.kids[0]};
      inner.succ = to.kids[1];
      // contravariant on the left: to.kids[0] |- from.kids[0]
      Rule impl;
      impl.tag = RuleTag::ImpL;
      impl.pos = 0;
      Sequent larg;
      larg.ante = {to.kids[0]};
      larg.succ = from.kids[0];
      NodeId left = b.paste(congruence(b, f.kids[0], !to_bullet), larg);
      Sequent rarg;
      rarg.ante = {from.kids[1], to.kids[0]};
      rarg.succ = to.kids[1];
      NodeId right = b.paste(congruence(b, f.kids[1], to_bullet), rarg);
      NodeId body = b.make(inner, impl, {left, right});
      return b.make(goal, impr, {body});
    }
    case FormulaKind::Not: {
      Rule negr;
      negr.tag = RuleTag::NegR;
      Sequent inner;
      inner.ante = {from, to.kids[0]};
      Rule negl;
      negl.tag = RuleTag::NegL;
      negl.pos = 0;
      Sequent larg;
      larg.ante = {to.kids[0]};
      larg.succ = from.kids[0];
      NodeId left = b.paste(congruence(b, f.kids[0], !to_bullet), larg);
      NodeId body = b.make(inner, negl, {left});
      return b.make(goal, negr, {body});
    }
    case FormulaKind::All: {
      std::string y = b.fresh().fresh();
      Formula f_inst = substitute(f.kids[0], {{f.var, tvar(y)}});
      Rule allr;
      allr.tag = RuleTag::AllR;
      allr.var = y;
      Sequent inner = goal;
      inner.succ = substitute(to.kids[0], {{to.var, tvar(y)}});
      Rule alll;
      alll.tag = RuleTag::AllL;
      alll.pos = 0;
      alll.term = tvar(y);
      Sequent opened = inner;
      opened.ante[0] = substitute(from.kids[0], {{from.var, tvar(y)}});
      NodeId rec = b.paste(congruence(b, f_inst, to_bullet), opened);
      NodeId body = b.make(inner, alll, {rec});
      return b.make(goal, allr, {body});
    }
    case FormulaKind::Ex: {
      std::string y = b.fresh().fresh();
      Formula f_inst = substitute(f.kids[0], {{f.var, tvar(y)}});
      Rule exl;
      exl.tag = RuleTag::ExL;
      exl.pos = 0;
      exl.var = y;
      Sequent inner = goal;
      inner.ante[0] = substitute(from.kids[0], {{from.var, tvar(y)}});
      Rule exr;
      exr.tag = RuleTag::ExR;
      exr.term = tvar(y);
      Sequent opened = inner;
      opened.succ = substitute(to.kids[0], {{to.var, tvar(y)}});
      NodeId rec = b.paste(congruence(b, f_inst, to_bullet), opened);
      NodeId body = b.make(inner, exr, {rec});
      return b.make(goal, exl, {body});
    }
    default:
      throw RuleError("congruence: unsupported formula");
  }
}

}  // namespace

NodeId congruence_to_bullet(ProofBuilder& b, const Formula& f) { return congruence(b, f, true); }
NodeId congruence_from_bullet(ProofBuilder& b, const Formula& f) {
  return congruence(b, f, false);
}

}  // namespace cyclind

namespace cyclind {

Term min_stage_term(const std::string& pred, const std::vector<Term>& args) {
  return pred == "N" ? args[0] : tsucc(args.back());
}

NodeId lemma_min_stage(ProofBuilder& b, const std::string& pred, const std::vector<Term>& args) {
  const DefinitionSet& defs = b.defs();
  std::vector<std::string> block = defs.mutual_block(pred);
  if (block.size() != 1) throw RuleError("min-stage lemma expects a singleton block");

  Sequent goal;
  goal.ante.push_back(fatom(pred, args));
  {
    std::vector<Term> full = args;
    full.push_back(min_stage_term(pred, args));
    goal.succ = fatom(pred + "'", full);
  }

  IndFormula f;
  std::vector<Term> params;
  for (unsigned i = 0; i < defs.pred(pred).arity; i++) {
    f.params.push_back(b.fresh().fresh());
    params.push_back(tvar(f.params.back()));
  }
  {
    std::vector<Term> full = params;
    full.push_back(min_stage_term(pred, params));
    f.body = fand(fatom(pred, params), fatom(pred + "'", full));
  }
  Rule ind;
  ind.tag = RuleTag::Ind;
  ind.pos = 0;
  ind.ind[pred] = f;
  const auto& prods = defs.productions_of(pred);
  for (const ProductionRule& pr : prods) {
    std::vector<std::string> ys;
    for (std::size_t i = 0; i < pr.vars.size(); i++) ys.push_back(b.fresh().fresh());
    ind.fresh.push_back(ys);
  }
  Sequent ind_concl = goal;
  ind_concl.succ = apply_ind(f, args);
  auto minors = premises_of(ind_concl, ind, defs);

  std::vector<NodeId> ms;
  for (std::size_t pidx = 0; pidx < prods.size(); pidx++) {
    const ProductionRule& pr = prods[pidx];
    const Sequent& minor = minors[pidx];
    const auto& ys = ind.fresh[pidx];
    VarSubst rho;
    for (std::size_t i = 0; i < ys.size(); i++) rho[pr.vars[i]] = tvar(ys[i]);

    auto dispatch = [&](const Sequent& w) -> NodeId {
      if (std::find(w.ante.begin(), w.ante.end(), *w.succ) != w.ante.end())
        return b.axiom(w);
      // the atom may hide inside an induction hypothesis F = P z /\ P'(z, s)
      for (std::size_t t = 0; t < w.ante.size(); t++) {
        const Formula& h = w.ante[t];
        if (h.kind != FormulaKind::And) continue;
        if (h.kids[0] == *w.succ || h.kids[1] == *w.succ) {
          Rule andl;
          andl.tag = RuleTag::AndL;
          andl.pos = static_cast<int>(t);
          Sequent split = premises_of(w, andl, defs)[0];
          return b.make(w, andl, {b.axiom(split)});
        }
      }
      return b.haax(w);
    };

    Rule andr;
    andr.tag = RuleTag::AndR;
    auto halves = premises_of(minor, andr, defs);
    // left: the predicate itself by its own production
    NodeId left;
    {
      Rule prod;
      prod.tag = RuleTag::Prod;
      prod.pred = pred;
      prod.prod_index = static_cast<int>(pidx);
      prod.subst = rho;
      auto want = premises_of(halves[0], prod, defs);
      std::vector<NodeId> pk;
      for (const Sequent& w : want) pk.push_back(dispatch(w));
      left = b.make(halves[0], prod, pk);
    }
    // right: the staged atom at the minimal stage; non-block staged premises
    // are provided by recursive minimal-stage cuts first.
    NodeId right;
    {
      struct NonBlock {
        std::string pred;
        std::vector<Term> args;
      };
      std::vector<NonBlock> extras_nb;
      for (const Formula& prem : pr.premises) {
        if (prem.kind != FormulaKind::Atom || !defs.is_inductive(prem.pred)) continue;
        if (prem.pred == pred) continue;
        NonBlock nb;
        nb.pred = prem.pred;
        for (const Term& t : prem.terms) nb.args.push_back(substitute(t, rho));
        extras_nb.push_back(nb);
      }
      const ProductionRule& spr = defs.productions_of(pred + "'")[pidx];
      Rule prod;
      prod.tag = RuleTag::Prod;
      prod.pred = pred + "'";
      prod.prod_index = static_cast<int>(pidx);
      prod.subst = rho;
      {
        std::set<std::string> base_vars(pr.vars.begin(), pr.vars.end());
        std::vector<Term> cargs;
        for (const Term& t : pr.concl_args) cargs.push_back(substitute(t, rho));
        std::vector<Term> extra_terms{min_stage_term(pred, cargs)};
        for (const Formula& prem : pr.premises) {
          if (prem.kind != FormulaKind::Atom || !defs.is_inductive(prem.pred)) continue;
          std::vector<Term> pargs;
          for (const Term& t : prem.terms) pargs.push_back(substitute(t, rho));
          extra_terms.push_back(min_stage_term(prem.pred, pargs));
        }
        std::size_t k = 0;
        for (const std::string& v : spr.vars) {
          if (base_vars.count(v)) continue;
          if (k >= extra_terms.size())
            throw RuleError("min-stage: staged production variable mismatch");
          prod.subst[v] = extra_terms[k++];
        }
      }
      std::function<NodeId(std::size_t, Sequent)> cuts = [&](std::size_t i,
                                                             Sequent ctx) -> NodeId {
        if (i == extras_nb.size()) {
          Sequent pgoal = ctx;
          pgoal.succ = halves[1].succ;
          auto want = premises_of(pgoal, prod, defs);
          std::vector<NodeId> pk;
          for (const Sequent& w : want) pk.push_back(dispatch(w));
          return b.make(pgoal, prod, pk);
        }
        const NonBlock& nb = extras_nb[i];
        std::vector<Term> full = nb.args;
        full.push_back(min_stage_term(nb.pred, nb.args));
        Formula fact = fatom(nb.pred + "'", full);
        Sequent lg = ctx;
        lg.succ = fact;
        NodeId lemma = b.paste(lemma_min_stage(b, nb.pred, nb.args), lg);
        Sequent next = ctx;
        next.ante.push_back(fact);
        NodeId main = cuts(i + 1, next);
        Sequent here = ctx;
        here.succ = halves[1].succ;
        Rule cut;
        cut.tag = RuleTag::Cut;
        cut.pos = static_cast<int>(ctx.ante.size());
        cut.formula = fact;
        return b.make(here, cut, {lemma, main});
      };
      Sequent base = halves[1];
      base.succ.reset();
      right = cuts(0, base);
    }
    ms.push_back(b.make(minor, andr, {left, right}));
  }
  NodeId indn = b.make(ind_concl, ind, ms);
  // project the staged conjunct
  Sequent withf = goal;
  withf.ante.push_back(*ind_concl.succ);
  Rule andl;
  andl.tag = RuleTag::AndL;
  andl.pos = 1;
  Sequent split = premises_of(withf, andl, b.defs())[0];
  NodeId use = b.make(withf, andl, {b.axiom(split)});
  return b.cut(goal, *ind_concl.succ, indn, use);
}

}  // namespace cyclind
