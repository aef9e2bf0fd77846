#include "cyclind/proof.hpp"

#include <algorithm>
#include <sstream>

#include "cyclind/arith.hpp"
#include "cyclind/text.hpp"

namespace cyclind {

const char* rule_name(RuleTag t) {
  switch (t) {
    case RuleTag::Axiom: return "Axiom";
    case RuleTag::BotL: return "BotL";
    case RuleTag::EqR: return "EqR";
    case RuleTag::HAAx: return "HAAx";
    case RuleTag::TermAx: return "TermAx";
    case RuleTag::Assume: return "Assume";
    case RuleTag::Bud: return "Bud";
    case RuleTag::AndL: return "AndL";
    case RuleTag::AndR: return "AndR";
    case RuleTag::OrL: return "OrL";
    case RuleTag::OrRl: return "OrRl";
    case RuleTag::OrRr: return "OrRr";
    case RuleTag::ImpL: return "ImpL";
    case RuleTag::ImpR: return "ImpR";
    case RuleTag::NegL: return "NegL";
    case RuleTag::NegR: return "NegR";
    case RuleTag::AllL: return "AllL";
    case RuleTag::AllR: return "AllR";
    case RuleTag::ExL: return "ExL";
    case RuleTag::ExR: return "ExR";
    case RuleTag::EqL: return "EqL";
    case RuleTag::Cut: return "Cut";
    case RuleTag::Wk: return "Wk";
    case RuleTag::Subst: return "Subst";
    case RuleTag::Prod: return "Prod";
    case RuleTag::Case: return "Case";
    case RuleTag::Ind: return "Ind";
  }
  return "?";
}

std::optional<RuleTag> rule_from_name(const std::string& s) {
  static const std::map<std::string, RuleTag> table = [] {
    std::map<std::string, RuleTag> m;
    for (int i = 0; i <= static_cast<int>(RuleTag::Ind); i++) {
      RuleTag t = static_cast<RuleTag>(i);
      m[rule_name(t)] = t;
    }
    return m;
  }();
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

Formula apply_ind(const IndFormula& f, const std::vector<Term>& args) {
  if (f.params.size() != args.size()) throw RuleError("induction formula arity mismatch");
  VarSubst s;
  for (std::size_t i = 0; i < args.size(); i++) s[f.params[i]] = args[i];
  return substitute(f.body, s);
}

const ProofNode& ProofGraph::at(NodeId id) const {
  if (id >= nodes.size()) throw RuleError("node id out of range");
  return nodes[id];
}

ProofNode& ProofGraph::at(NodeId id) {
  if (id >= nodes.size()) throw RuleError("node id out of range");
  return nodes[id];
}

// ---------------------------------------------------------------- premises_of

namespace {

const Formula& principal(const Sequent& s, int pos) {
  if (pos < 0 || static_cast<std::size_t>(pos) >= s.ante.size())
    throw RuleError("principal position out of range");
  return s.ante[static_cast<std::size_t>(pos)];
}

Sequent with_replaced(const Sequent& s, int pos, std::vector<Formula> repl) {
  Sequent r = s;
  r.ante.erase(r.ante.begin() + pos);
  r.ante.insert(r.ante.begin() + pos, repl.begin(), repl.end());
  return r;
}

const Formula& need_succ(const Sequent& s) {
  if (!s.succ) throw RuleError("rule needs a succedent");
  return *s.succ;
}

void check_eigen(const std::string& y, const Sequent& concl) {
  if (free_vars(concl).count(y))
    throw RuleError("eigenvariable " + y + " occurs free in the conclusion");
}

std::vector<Sequent> case_premises(const Sequent& concl, const Rule& rule,
                                   const DefinitionSet& defs) {
  const Formula& p = principal(concl, rule.pos);
  if (p.kind != FormulaKind::Atom || !defs.is_inductive(p.pred))
    throw RuleError("Case principal must be an inductive atom");
  const auto& prods = defs.productions_of(p.pred);
  if (rule.fresh.size() != prods.size())
    throw RuleError("Case needs one fresh-variable list per production");
  std::vector<Sequent> out;
  for (std::size_t r = 0; r < prods.size(); r++) {
    const ProductionRule& pr = prods[r];
    const auto& ys = rule.fresh[r];
    if (ys.size() != pr.vars.size()) throw RuleError("Case fresh-variable count mismatch");
    std::set<std::string> seen;
    VarSubst rho;
    for (std::size_t i = 0; i < ys.size(); i++) {
      if (!seen.insert(ys[i]).second) throw RuleError("Case fresh variables must be distinct");
      check_eigen(ys[i], concl);
      rho[pr.vars[i]] = tvar(ys[i]);
    }
    std::vector<Formula> splice;
    for (std::size_t k = 0; k < p.terms.size(); k++)
      splice.push_back(feq(p.terms[k], substitute(pr.concl_args[k], rho)));
    for (const Formula& f : pr.premises) splice.push_back(substitute(f, rho));
    out.push_back(with_replaced(concl, rule.pos, std::move(splice)));
  }
  return out;
}

std::vector<Sequent> ind_premises(const Sequent& concl, const Rule& rule,
                                  const DefinitionSet& defs) {
  const Formula& p = principal(concl, rule.pos);
  if (p.kind != FormulaKind::Atom || !defs.is_inductive(p.pred))
    throw RuleError("Ind principal must be an inductive atom");
  std::vector<std::string> block = defs.mutual_block(p.pred);
  for (const std::string& q : block) {
    auto it = rule.ind.find(q);
    if (it == rule.ind.end()) throw RuleError("Ind misses a formula for block member " + q);
    if (it->second.params.size() != defs.pred(q).arity)
      throw RuleError("Ind formula arity mismatch for " + q);
  }
  std::set<std::string> blockset(block.begin(), block.end());
  // Eigenvariables must avoid the conclusion and the formulas' free variables.
  std::set<std::string> avoid = free_vars(concl);
  for (const auto& [q, f] : rule.ind) {
    (void)q;
    std::set<std::string> fv = free_vars(f.body);
    for (const auto& prm : f.params) fv.erase(prm);
    avoid.insert(fv.begin(), fv.end());
  }
  const Formula& target = need_succ(concl);
  if (target != apply_ind(rule.ind.at(p.pred), p.terms))
    throw RuleError("Ind conclusion succedent must be the induction formula instance");

  Sequent ctx = concl;  // Gamma without the principal
  ctx.ante.erase(ctx.ante.begin() + rule.pos);

  std::vector<Sequent> out;
  std::size_t fi = 0;
  for (const std::string& q : block) {
    for (const ProductionRule& pr : defs.productions_of(q)) {
      if (fi >= rule.fresh.size()) throw RuleError("Ind fresh-variable lists missing");
      const auto& ys = rule.fresh[fi++];
      if (ys.size() != pr.vars.size())
        throw RuleError("Ind fresh-variable count mismatch for " + q + " production " +
                        std::to_string(fi - 1) + ": " + std::to_string(ys.size()) + " vs " +
                        std::to_string(pr.vars.size()));
      std::set<std::string> seen;
      VarSubst rho;
      for (std::size_t i = 0; i < ys.size(); i++) {
        if (!seen.insert(ys[i]).second) throw RuleError("Ind fresh variables must be distinct");
        if (avoid.count(ys[i]))
          throw RuleError("Ind eigenvariable " + ys[i] + " is not fresh");
        rho[pr.vars[i]] = tvar(ys[i]);
      }
      Sequent minor = ctx;
      for (const Formula& f : pr.premises) {
        if (f.kind == FormulaKind::Atom && blockset.count(f.pred)) {
          std::vector<Term> args;
          for (const Term& t : f.terms) args.push_back(substitute(t, rho));
          minor.ante.push_back(apply_ind(rule.ind.at(f.pred), args));
        } else {
          minor.ante.push_back(substitute(f, rho));
        }
      }
      std::vector<Term> cargs;
      for (const Term& t : pr.concl_args) cargs.push_back(substitute(t, rho));
      minor.succ = apply_ind(rule.ind.at(q), cargs);
      out.push_back(std::move(minor));
    }
  }
  if (fi != rule.fresh.size()) throw RuleError("Ind has surplus fresh-variable lists");
  return out;
}

}  // namespace

std::vector<Sequent> premises_of(const Sequent& concl, const Rule& rule,
                                 const DefinitionSet& defs) {
  switch (rule.tag) {
    case RuleTag::Axiom: {
      if (principal(concl, rule.pos) != need_succ(concl))
        throw RuleError("Axiom needs identical antecedent and succedent formulas");
      return {};
    }
    case RuleTag::BotL: {
      if (principal(concl, rule.pos).kind != FormulaKind::Falsum)
        throw RuleError("BotL principal must be falsity");
      return {};
    }
    case RuleTag::EqR: {
      const Formula& f = need_succ(concl);
      if (f.kind != FormulaKind::Eq || f.terms[0] != f.terms[1])
        throw RuleError("EqR proves only t = t");
      return {};
    }
    case RuleTag::HAAx: {
      std::string e = ha_oracle_check(concl, defs);
      if (!e.empty()) throw RuleError("HAAx rejected: " + e);
      return {};
    }
    case RuleTag::TermAx:
    case RuleTag::Assume:
    case RuleTag::Bud:
      return {};
    case RuleTag::AndL: {
      const Formula& f = principal(concl, rule.pos);
      if (f.kind != FormulaKind::And) throw RuleError("AndL principal must be a conjunction");
      return {with_replaced(concl, rule.pos, {f.kids[0], f.kids[1]})};
    }
    case RuleTag::AndR: {
      const Formula& f = need_succ(concl);
      if (f.kind != FormulaKind::And) throw RuleError("AndR succedent must be a conjunction");
      Sequent l = concl, r = concl;
      l.succ = f.kids[0];
      r.succ = f.kids[1];
      return {l, r};
    }
    case RuleTag::OrL: {
      const Formula& f = principal(concl, rule.pos);
      if (f.kind != FormulaKind::Or) throw RuleError("OrL principal must be a disjunction");
      return {with_replaced(concl, rule.pos, {f.kids[0]}),
              with_replaced(concl, rule.pos, {f.kids[1]})};
    }
    case RuleTag::OrRl:
    case RuleTag::OrRr: {
      const Formula& f = need_succ(concl);
      if (f.kind != FormulaKind::Or) throw RuleError("OrR succedent must be a disjunction");
      Sequent p = concl;
      p.succ = f.kids[rule.tag == RuleTag::OrRl ? 0 : 1];
      return {p};
    }
    case RuleTag::ImpL: {
      const Formula& f = principal(concl, rule.pos);
      if (f.kind != FormulaKind::Imp)
        throw RuleError("ImpL principal must be an implication, got " + to_string(f) + " at pos " + std::to_string(rule.pos));
      Sequent left = concl;
      left.ante.erase(left.ante.begin() + rule.pos);
      left.succ = f.kids[0];
      return {left, with_replaced(concl, rule.pos, {f.kids[1]})};
    }
    case RuleTag::ImpR: {
      const Formula& f = need_succ(concl);
      if (f.kind != FormulaKind::Imp) throw RuleError("ImpR succedent must be an implication");
      Sequent p = concl;
      p.ante.push_back(f.kids[0]);
      p.succ = f.kids[1];
      return {p};
    }
    case RuleTag::NegL: {
      const Formula& f = principal(concl, rule.pos);
      if (f.kind != FormulaKind::Not) throw RuleError("NegL principal must be a negation");
      Sequent p = concl;
      p.ante.erase(p.ante.begin() + rule.pos);
      p.succ = f.kids[0];
      return {p};
    }
    case RuleTag::NegR: {
      const Formula& f = need_succ(concl);
      if (f.kind != FormulaKind::Not) throw RuleError("NegR succedent must be a negation");
      Sequent p = concl;
      p.ante.push_back(f.kids[0]);
      p.succ.reset();
      return {p};
    }
    case RuleTag::AllL: {
      const Formula& f = principal(concl, rule.pos);
      if (f.kind != FormulaKind::All) throw RuleError("AllL principal must be universal");
      return {with_replaced(concl, rule.pos, {substitute(f.kids[0], {{f.var, rule.term}})})};
    }
    case RuleTag::AllR: {
      const Formula& f = need_succ(concl);
      if (f.kind != FormulaKind::All) throw RuleError("AllR succedent must be universal");
      check_eigen(rule.var, concl);
      Sequent p = concl;
      p.succ = substitute(f.kids[0], {{f.var, tvar(rule.var)}});
      return {p};
    }
    case RuleTag::ExL: {
      const Formula& f = principal(concl, rule.pos);
      if (f.kind != FormulaKind::Ex) throw RuleError("ExL principal must be existential");
      check_eigen(rule.var, concl);
      return {with_replaced(concl, rule.pos, {substitute(f.kids[0], {{f.var, tvar(rule.var)}})})};
    }
    case RuleTag::ExR: {
      const Formula& f = need_succ(concl);
      if (f.kind != FormulaKind::Ex) throw RuleError("ExR succedent must be existential");
      Sequent p = concl;
      p.succ = substitute(f.kids[0], {{f.var, rule.term}});
      return {p};
    }
    case RuleTag::EqL: {
      const Formula& eq = principal(concl, rule.pos);
      if (eq.kind != FormulaKind::Eq) throw RuleError("EqL principal must be an equation");
      Term from = rule.ltr ? eq.terms[0] : eq.terms[1];
      Term to = rule.ltr ? eq.terms[1] : eq.terms[0];
      Sequent p = concl;
      if (rule.target == -1) {
        p.succ = replace_term(need_succ(concl), from, to);
      } else {
        if (rule.target == rule.pos) throw RuleError("EqL cannot rewrite its own equation");
        const Formula& tf = principal(concl, rule.target);
        p.ante[static_cast<std::size_t>(rule.target)] = replace_term(tf, from, to);
      }
      return {p};
    }
    case RuleTag::Cut: {
      if (rule.pos < 0 || static_cast<std::size_t>(rule.pos) > concl.ante.size())
        throw RuleError("Cut insertion position out of range");
      Sequent lemma = concl;
      lemma.succ = rule.formula;
      Sequent main = concl;
      main.ante.insert(main.ante.begin() + rule.pos, rule.formula);
      return {lemma, main};
    }
    case RuleTag::Wk: {
      Sequent p = concl;
      std::vector<int> ins = rule.inserted;
      std::sort(ins.begin(), ins.end());
      if (std::adjacent_find(ins.begin(), ins.end()) != ins.end())
        throw RuleError("Wk insertion positions must be distinct");
      for (auto it = ins.rbegin(); it != ins.rend(); ++it) {
        if (*it < 0 || static_cast<std::size_t>(*it) >= p.ante.size())
          throw RuleError("Wk insertion position out of range");
        p.ante.erase(p.ante.begin() + *it);
      }
      if (rule.wk_succ) {
        if (!concl.succ) throw RuleError("Wk succedent weakening needs a succedent");
        p.succ.reset();
      }
      if (ins.empty() && !rule.wk_succ) throw RuleError("Wk must weaken something");
      return {p};
    }
    case RuleTag::Subst:
      throw RuleError("Subst premises are checked against the stored premise");
    case RuleTag::Prod: {
      const Formula& f = need_succ(concl);
      if (f.kind != FormulaKind::Atom || f.pred != rule.pred)
        throw RuleError("Prod succedent must be an atom of the rule predicate");
      const auto& prods = defs.productions_of(rule.pred);
      if (rule.prod_index < 0 || static_cast<std::size_t>(rule.prod_index) >= prods.size())
        throw RuleError("Prod production index out of range");
      const ProductionRule& pr = prods[static_cast<std::size_t>(rule.prod_index)];
      std::vector<Term> expect;
      for (const Term& t : pr.concl_args) expect.push_back(substitute(t, rule.subst));
      if (expect != f.terms) throw RuleError("Prod conclusion does not match the production");
      std::vector<Sequent> out;
      for (const Formula& prem : pr.premises) {
        Sequent s = concl;
        s.succ = substitute(prem, rule.subst);
        out.push_back(std::move(s));
      }
      return out;
    }
    case RuleTag::Case:
      return case_premises(concl, rule, defs);
    case RuleTag::Ind:
      return ind_premises(concl, rule, defs);
  }
  throw RuleError("unhandled rule tag");
}

// ---------------------------------------------------------------- checking

std::vector<Violation> check_rule(const ProofGraph& g, NodeId id, const DefinitionSet& defs,
                                  CheckMode mode, const TermAxValidator& termax) {
  std::vector<Violation> out;
  const ProofNode& n = g.at(id);
  auto bad = [&](const std::string& msg) {
    out.push_back(Violation{id, rule_name(n.rule.tag), msg});
  };
  std::string wf = defs.check_sequent(n.seq);
  if (!wf.empty()) {
    bad("ill-formed sequent: " + wf);
    return out;
  }
  switch (n.rule.tag) {
    case RuleTag::Case:
      if (mode == CheckMode::Ljid) {
        bad("(Case) is not part of the induction system");
        return out;
      }
      break;
    case RuleTag::Ind:
      if (mode == CheckMode::CyclicLocal) {
        bad("(Ind) is not part of the cyclic system");
        return out;
      }
      break;
    case RuleTag::TermAx: {
      if (!n.premises.empty()) bad("termination axiom is a leaf");
      if (!termax) {
        bad("no certificate attached for id " + n.rule.cert);
        return out;
      }
      std::string e = termax(n.rule, n.seq);
      if (!e.empty()) bad(e);
      return out;
    }
    case RuleTag::Assume: {
      if (!g.assumptions.count(id)) bad("assumption leaf not registered");
      if (!n.premises.empty()) bad("assumption leaf has premises");
      return out;
    }
    case RuleTag::Bud: {
      if (mode == CheckMode::Ljid) {
        bad("bud in the induction system");
        return out;
      }
      auto it = g.buds.find(id);
      if (it == g.buds.end()) {
        bad("bud leaf not registered");
        return out;
      }
      if (!n.premises.empty()) bad("bud is a leaf");
      if (it->second >= g.nodes.size()) {
        bad("companion id out of range");
        return out;
      }
      const ProofNode& comp = g.at(it->second);
      if (comp.rule.tag == RuleTag::Bud || comp.rule.tag == RuleTag::Assume)
        bad("companion must be an internal node");
      if (comp.seq != n.seq) bad("bud sequent differs from its companion");
      return out;
    }
    default:
      break;
  }
  if (g.buds.count(id) && n.rule.tag != RuleTag::Bud) bad("registered bud carries a rule");
  if (g.assumptions.count(id) && n.rule.tag != RuleTag::Assume)
    bad("registered assumption carries a rule");
  if (n.rule.tag == RuleTag::Subst) {
    if (n.premises.size() != 1) {
      bad("Subst needs exactly one premise");
      return out;
    }
    if (substitute(g.at(n.premises[0]).seq, n.rule.subst) != n.seq)
      bad("Subst conclusion is not the substituted premise");
    return out;
  }
  try {
    std::vector<Sequent> want = premises_of(n.seq, n.rule, defs);
    if (want.size() != n.premises.size()) {
      bad("expected " + std::to_string(want.size()) + " premises, have " +
          std::to_string(n.premises.size()));
      return out;
    }
    for (std::size_t i = 0; i < want.size(); i++) {
      const Sequent& have = g.at(n.premises[i]).seq;
      if (have != want[i])
        bad("premise " + std::to_string(i) + " should be `" + to_string(want[i]) +
            "` but is `" + to_string(have) + "`");
    }
  } catch (const RuleError& e) {
    bad(e.what());
  }
  return out;
}

std::vector<NodeId> reachable_preorder(const ProofGraph& g) {
  std::vector<NodeId> order;
  std::set<NodeId> seen;
  std::vector<NodeId> stack{g.root};
  // Preorder with premise order preserved: explicit stack, children reversed.
  // The unfolding enters companions through their buds, so bud links count as
  // edges here; otherwise a companion subtree could escape checking.
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (seen.count(id)) continue;
    seen.insert(id);
    order.push_back(id);
    const ProofNode& n = g.at(id);
    auto bud = g.buds.find(id);
    if (bud != g.buds.end() && bud->second < g.nodes.size() && !seen.count(bud->second))
      stack.push_back(bud->second);
    for (auto it = n.premises.rbegin(); it != n.premises.rend(); ++it)
      if (!seen.count(*it)) stack.push_back(*it);
  }
  return order;
}

std::vector<Violation> check_proof(const ProofGraph& g, const DefinitionSet& defs, CheckMode mode,
                                   const TermAxValidator& termax) {
  std::vector<Violation> out;
  if (g.nodes.empty()) {
    out.push_back(Violation{0, "", "empty proof"});
    return out;
  }
  if (g.root >= g.nodes.size()) {
    out.push_back(Violation{g.root, "", "root id out of range"});
    return out;
  }
  // Premise cycle detection (bud links are not premises, so this is the
  // "acyclic ignoring bud links" condition).
  {
    std::vector<int> state(g.nodes.size(), 0);
    std::vector<std::pair<NodeId, std::size_t>> stack{{g.root, 0}};
    state[g.root] = 1;
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      const ProofNode& n = g.nodes[id];
      bool descended = false;
      while (next < n.premises.size()) {
        NodeId c = n.premises[next++];
        if (c >= g.nodes.size()) {
          out.push_back(Violation{id, rule_name(n.rule.tag), "premise id out of range"});
          continue;
        }
        if (state[c] == 1) {
          out.push_back(Violation{id, rule_name(n.rule.tag), "premise cycle detected"});
          return out;
        }
        if (state[c] == 0) {
          state[c] = 1;
          stack.push_back({c, 0});
          descended = true;
          break;
        }
      }
      if (!descended && next >= n.premises.size()) {
        state[id] = 2;
        stack.pop_back();
      }
    }
  }
  for (NodeId id : reachable_preorder(g)) {
    auto vs = check_rule(g, id, defs, mode, termax);
    out.insert(out.end(), vs.begin(), vs.end());
  }
  return out;
}

// ---------------------------------------------------------------- subproofs

namespace {

NodeId copy_subtree(const ProofGraph& src, NodeId id, ProofGraph& dst,
                    std::map<NodeId, NodeId>& bud_of) {
  const ProofNode& n = src.at(id);
  if (n.rule.tag == RuleTag::Bud) {
    Rule r;
    r.tag = RuleTag::Assume;
    NodeId leaf = dst.add(n.seq, r, {});
    dst.assumptions.insert(leaf);
    bud_of[leaf] = id;
    return leaf;
  }
  std::vector<NodeId> ps;
  for (NodeId c : n.premises) ps.push_back(copy_subtree(src, c, dst, bud_of));
  NodeId nid = dst.add(n.seq, n.rule, std::move(ps));
  if (n.rule.tag == RuleTag::Assume) dst.assumptions.insert(nid);
  return nid;
}

}  // namespace

std::map<NodeId, Subproof> extract_subproofs(const ProofGraph& g) {
  std::set<NodeId> companions;
  for (const auto& [bud, comp] : g.buds) {
    (void)bud;
    companions.insert(comp);
  }
  std::map<NodeId, Subproof> out;
  for (NodeId comp : companions) {
    Subproof sp;
    sp.graph.root = copy_subtree(g, comp, sp.graph, sp.bud_of);
    out[comp] = std::move(sp);
  }
  return out;
}

std::vector<std::pair<NodeId, Sequent>> assumption_instances(const ProofGraph& g) {
  std::vector<std::pair<NodeId, Sequent>> out;
  if (g.nodes.empty()) return out;
  // Depth-first, premises left to right.
  std::set<NodeId> seen;
  std::vector<NodeId> stack{g.root};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (seen.count(id)) continue;
    seen.insert(id);
    const ProofNode& n = g.at(id);
    if (n.rule.tag == RuleTag::Assume) out.push_back({id, n.seq});
    for (auto it = n.premises.rbegin(); it != n.premises.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

ProofGraph canonicalize(const ProofGraph& g) {
  std::vector<NodeId> order = reachable_preorder(g);
  std::map<NodeId, NodeId> remap;
  for (std::size_t i = 0; i < order.size(); i++) remap[order[i]] = static_cast<NodeId>(i);
  ProofGraph out;
  out.root = 0;
  for (NodeId old : order) {
    ProofNode n = g.at(old);
    for (NodeId& p : n.premises) p = remap.at(p);
    out.nodes.push_back(std::move(n));
  }
  for (const auto& [bud, comp] : g.buds)
    if (remap.count(bud) && remap.count(comp)) out.buds[remap.at(bud)] = remap.at(comp);
  for (NodeId a : g.assumptions)
    if (remap.count(a)) out.assumptions.insert(remap.at(a));
  return out;
}

// ---------------------------------------------------------------- text io

namespace {

void print_var_list(std::ostringstream& o, const std::vector<std::string>& vs) {
  o << "[";
  for (std::size_t i = 0; i < vs.size(); i++) {
    if (i) o << " ";
    o << vs[i];
  }
  o << "]";
}

void print_rule(std::ostringstream& o, const Rule& r) {
  o << rule_name(r.tag);
  switch (r.tag) {
    case RuleTag::Axiom:
    case RuleTag::BotL:
    case RuleTag::AndL:
    case RuleTag::OrL:
    case RuleTag::ImpL:
    case RuleTag::NegL:
      o << " pos=" << r.pos;
      break;
    case RuleTag::AllL:
      o << " pos=" << r.pos << " term=(" << to_string(r.term) << ")";
      break;
    case RuleTag::ExR:
      o << " term=(" << to_string(r.term) << ")";
      break;
    case RuleTag::AllR:
      o << " var=" << r.var;
      break;
    case RuleTag::ExL:
      o << " pos=" << r.pos << " var=" << r.var;
      break;
    case RuleTag::EqL:
      o << " pos=" << r.pos << " target=";
      if (r.target == -1)
        o << "succ";
      else
        o << r.target;
      o << " dir=" << (r.ltr ? "lr" : "rl");
      break;
    case RuleTag::Cut:
      o << " pos=" << r.pos << " cut=(" << to_string(r.formula) << ")";
      break;
    case RuleTag::Wk: {
      o << " inserted=[";
      for (std::size_t i = 0; i < r.inserted.size(); i++) {
        if (i) o << " ";
        o << r.inserted[i];
      }
      o << "]";
      if (r.wk_succ) o << " succw=1";
      break;
    }
    case RuleTag::Subst: {
      o << " subst={";
      bool first = true;
      for (const auto& [v, t] : r.subst) {
        if (!first) o << " ";
        first = false;
        o << v << ":=(" << to_string(t) << ")";
      }
      o << "}";
      break;
    }
    case RuleTag::Prod:
      o << " pred=" << r.pred << " prod=" << r.prod_index << " subst={";
      {
        bool first = true;
        for (const auto& [v, t] : r.subst) {
          if (!first) o << " ";
          first = false;
          o << v << ":=(" << to_string(t) << ")";
        }
      }
      o << "}";
      break;
    case RuleTag::Case: {
      o << " pos=" << r.pos << " fresh=[";
      for (std::size_t i = 0; i < r.fresh.size(); i++) {
        if (i) o << " ";
        print_var_list(o, r.fresh[i]);
      }
      o << "]";
      break;
    }
    case RuleTag::Ind: {
      o << " pos=" << r.pos << " fresh=[";
      for (std::size_t i = 0; i < r.fresh.size(); i++) {
        if (i) o << " ";
        print_var_list(o, r.fresh[i]);
      }
      o << "] ind={";
      bool first = true;
      for (const auto& [q, f] : r.ind) {
        if (!first) o << " ";
        first = false;
        o << q << ":";
        print_var_list(o, f.params);
        o << "(" << to_string(f.body) << ")";
      }
      o << "}";
      break;
    }
    case RuleTag::TermAx: {
      o << " cert=" << r.cert << " G=";
      print_var_list(o, r.g.params);
      o << "(" << to_string(r.g.body) << ")";
      break;
    }
    default:
      break;
  }
}

std::vector<std::string> parse_var_list(Cursor& c) {
  std::vector<std::string> vs;
  c.expect("[");
  while (!c.try_consume("]")) vs.push_back(c.ident());
  return vs;
}

Term parse_paren_term(Cursor& c) {
  c.expect("(");
  Term t = parse_term(c);
  c.expect(")");
  return t;
}

Formula parse_paren_formula(Cursor& c) {
  c.expect("(");
  Formula f = parse_formula(c);
  c.expect(")");
  return f;
}

VarSubst parse_subst_map(Cursor& c) {
  VarSubst s;
  c.expect("{");
  while (!c.try_consume("}")) {
    std::string v = c.ident();
    c.expect(":=");
    s[v] = parse_paren_term(c);
  }
  return s;
}

Rule parse_rule(Cursor& c) {
  std::string name = c.ident();
  auto tag = rule_from_name(name);
  if (!tag) c.fail("unknown rule tag " + name);
  Rule r;
  r.tag = *tag;
  while (true) {
    if (c.try_keyword("pos")) {
      c.expect("=");
      r.pos = static_cast<int>(c.integer());
    } else if (c.try_keyword("target")) {
      c.expect("=");
      if (c.try_keyword("succ"))
        r.target = -1;
      else
        r.target = static_cast<int>(c.integer());
    } else if (c.try_keyword("dir")) {
      c.expect("=");
      if (c.try_keyword("lr"))
        r.ltr = true;
      else if (c.try_keyword("rl"))
        r.ltr = false;
      else
        c.fail("dir must be lr or rl");
    } else if (c.try_keyword("term")) {
      c.expect("=");
      r.term = parse_paren_term(c);
    } else if (c.try_keyword("var")) {
      c.expect("=");
      r.var = c.ident();
    } else if (c.try_keyword("cut")) {
      c.expect("=");
      r.formula = parse_paren_formula(c);
    } else if (c.try_keyword("subst")) {
      c.expect("=");
      r.subst = parse_subst_map(c);
    } else if (c.try_keyword("pred")) {
      c.expect("=");
      r.pred = c.ident();
    } else if (c.try_keyword("prod")) {
      c.expect("=");
      r.prod_index = static_cast<int>(c.integer());
    } else if (c.try_keyword("fresh")) {
      c.expect("=");
      c.expect("[");
      while (!c.try_consume("]")) r.fresh.push_back(parse_var_list(c));
    } else if (c.try_keyword("ind")) {
      c.expect("=");
      c.expect("{");
      while (!c.try_consume("}")) {
        std::string q = c.ident();
        c.expect(":");
        IndFormula f;
        f.params = parse_var_list(c);
        f.body = parse_paren_formula(c);
        r.ind[q] = std::move(f);
      }
    } else if (c.try_keyword("inserted")) {
      c.expect("=");
      c.expect("[");
      while (!c.try_consume("]")) r.inserted.push_back(static_cast<int>(c.integer()));
    } else if (c.try_keyword("succw")) {
      c.expect("=");
      r.wk_succ = c.integer() != 0;
    } else if (c.try_keyword("cert")) {
      c.expect("=");
      r.cert = c.ident();
    } else if (c.try_keyword("G")) {
      c.expect("=");
      r.g.params = parse_var_list(c);
      r.g.body = parse_paren_formula(c);
    } else {
      break;
    }
  }
  return r;
}

}  // namespace

std::string to_string(const ProofGraph& g) {
  std::ostringstream o;
  o << "root " << g.root << "\n";
  for (std::size_t id = 0; id < g.nodes.size(); id++) {
    const ProofNode& n = g.nodes[id];
    o << "node " << id << ": " << to_string(n.seq) << " ; rule ";
    print_rule(o, n.rule);
    o << " ; premises";
    for (NodeId p : n.premises) o << " " << p;
    o << "\n";
  }
  for (const auto& [bud, comp] : g.buds) o << "bud " << bud << " -> " << comp << "\n";
  for (NodeId a : g.assumptions) o << "assume " << a << "\n";
  return o.str();
}

ProofGraph parse_proof(const std::string& src) {
  ProofGraph g;
  std::map<long long, NodeId> ids;
  std::vector<std::pair<long long, std::vector<long long>>> premise_refs;
  std::vector<std::pair<long long, long long>> bud_refs;
  std::vector<long long> assume_refs;
  long long root_ref = -1;
  bool have_root = false;

  Cursor c(src);
  while (!c.eof()) {
    if (c.try_keyword("root")) {
      root_ref = c.integer();
      have_root = true;
      continue;
    }
    if (c.try_keyword("node")) {
      long long id = c.integer();
      c.expect(":");
      // The sequent runs up to the ';' separator.
      std::size_t start = c.pos();
      std::string line = c.rest_of_line();
      std::size_t semi = line.find(';');
      if (semi == std::string::npos) throw ParseError(start, "node line misses '; rule'");
      std::string seq_text = line.substr(0, semi);
      Sequent seq = parse_sequent(seq_text);
      std::string rest = line.substr(semi + 1);
      Cursor rc(rest);
      if (!rc.try_keyword("rule")) rc.fail("expected 'rule'");
      Rule rule = parse_rule(rc);
      if (!rc.try_consume(";")) rc.fail("expected '; premises'");
      if (!rc.try_keyword("premises")) rc.fail("expected 'premises'");
      std::vector<long long> prems;
      while (!rc.eof()) prems.push_back(rc.integer());
      if (ids.count(id)) throw ParseError(start, "duplicate node id");
      ids[id] = g.add(std::move(seq), std::move(rule), {});
      premise_refs.push_back({id, std::move(prems)});
      continue;
    }
    if (c.try_keyword("bud")) {
      long long b = c.integer();
      c.expect("->");
      long long comp = c.integer();
      bud_refs.push_back({b, comp});
      continue;
    }
    if (c.try_keyword("assume")) {
      assume_refs.push_back(c.integer());
      continue;
    }
    c.fail("expected node/bud/assume/root line");
  }
  auto resolve = [&](long long ref) {
    auto it = ids.find(ref);
    if (it == ids.end()) throw ParseError(0, "reference to undefined node " + std::to_string(ref));
    return it->second;
  };
  for (auto& [id, prems] : premise_refs) {
    ProofNode& n = g.nodes[ids.at(id)];
    for (long long p : prems) n.premises.push_back(resolve(p));
  }
  for (auto& [b, comp] : bud_refs) g.buds[resolve(b)] = resolve(comp);
  for (long long a : assume_refs) g.assumptions.insert(resolve(a));
  if (!have_root) throw ParseError(0, "proof misses a root line");
  g.root = resolve(root_ref);
  return g;
}

}  // namespace cyclind
