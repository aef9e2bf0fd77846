#include "cyclind/defs.hpp"

#include <algorithm>
#include <stdexcept>

namespace cyclind {

bool is_stage_name(const std::string& name) { return !name.empty() && name.back() == '\''; }

std::string stage_base_name(const std::string& name) {
  if (!is_stage_name(name)) throw std::invalid_argument("not a stage name: " + name);
  return name.substr(0, name.size() - 1);
}

DefinitionSet::DefinitionSet() {
  // Reserved sequence-coding symbols are always in scope.
  declare_func("cons", 2);
  declare_func("len", 1);
  declare_func("proj", 2);
}

void DefinitionSet::declare_func(const std::string& name, unsigned arity) {
  if (funcs_.count(name)) throw std::invalid_argument("duplicate function " + name);
  funcs_[name] = FuncSymbol{name, arity};
}

void DefinitionSet::declare_pred(const std::string& name, unsigned arity, PredKind kind) {
  if (preds_.count(name)) throw std::invalid_argument("duplicate predicate " + name);
  PredicateSymbol p{name, arity, kind, ""};
  if (kind == PredKind::Stage) p.base = stage_base_name(name);
  preds_[name] = p;
  pred_order_.push_back(name);
  if (kind != PredKind::Ordinary) productions_[name];
}

void DefinitionSet::add_production(ProductionRule p) {
  if (!is_inductive(p.pred))
    throw std::invalid_argument("production for non-inductive predicate " + p.pred);
  if (pred(p.pred).arity != p.concl_args.size())
    throw std::invalid_argument("production conclusion arity mismatch for " + p.pred);
  p.vars = production_vars(p);
  productions_[p.pred].push_back(std::move(p));
}

void DefinitionSet::include_nat() {
  if (with_nat_) return;
  with_nat_ = true;
  declare_pred("N", 1, PredKind::Inductive);
  ProductionRule zero;
  zero.pred = "N";
  zero.concl_args = {tzero()};
  add_production(zero);
  ProductionRule succ;
  succ.pred = "N";
  succ.concl_args = {tsucc(tvar("x"))};
  succ.premises = {fatom("N", {tvar("x")})};
  add_production(succ);
}

bool DefinitionSet::has_pred(const std::string& name) const { return preds_.count(name) != 0; }

const PredicateSymbol& DefinitionSet::pred(const std::string& name) const {
  auto it = preds_.find(name);
  if (it == preds_.end()) throw std::out_of_range("unknown predicate " + name);
  return it->second;
}

bool DefinitionSet::has_func(const std::string& name) const { return funcs_.count(name) != 0; }

const FuncSymbol& DefinitionSet::func(const std::string& name) const {
  auto it = funcs_.find(name);
  if (it == funcs_.end()) throw std::out_of_range("unknown function " + name);
  return it->second;
}

bool DefinitionSet::is_inductive(const std::string& name) const {
  auto it = preds_.find(name);
  return it != preds_.end() && it->second.kind != PredKind::Ordinary;
}

const std::vector<ProductionRule>& DefinitionSet::productions_of(const std::string& name) const {
  auto it = productions_.find(name);
  if (it == productions_.end()) throw std::out_of_range("no productions for " + name);
  return it->second;
}

ProductionRule DefinitionSet::stage_production_impl(const ProductionRule& p) const {
  ProductionRule r;
  r.pred = p.pred + "'";
  std::set<std::string> used;
  {
    Sequent probe;
    for (const Term& t : p.concl_args) probe.ante.push_back(feq(t, t));
    for (const Formula& f : p.premises) probe.ante.push_back(f);
    free_vars(probe, used);
  }
  auto fresh = [&used](std::string v) {
    while (used.count(v)) v += "'";
    used.insert(v);
    return v;
  };
  std::string v = fresh("v");
  r.concl_args = p.concl_args;
  r.concl_args.push_back(tvar(v));
  unsigned i = 0;
  for (const Formula& f : p.premises) {
    if (f.kind == FormulaKind::Atom && is_inductive(f.pred)) {
      std::string vi = fresh("v" + std::to_string(++i));
      r.premises.push_back(flt(tvar(vi), tvar(v)));
      std::vector<Term> args = f.terms;
      args.push_back(tvar(vi));
      r.premises.push_back(fatom(f.pred + "'", std::move(args)));
    } else {
      r.premises.push_back(f);
    }
  }
  r.premises.push_back(fatom("N", {tvar(v)}));
  r.vars = production_vars(r);
  return r;
}

void DefinitionSet::ensure_stage_pred(const std::string& staged_name) {
  if (preds_.count(staged_name)) return;
  if (!is_stage_name(staged_name))
    throw std::invalid_argument("not a stage-predicate name: " + staged_name);
  std::string base = stage_base_name(staged_name);
  if (!preds_.count(base) && is_stage_name(base)) ensure_stage_pred(base);
  const PredicateSymbol& b = pred(base);
  if (b.kind == PredKind::Ordinary)
    throw std::invalid_argument("stage predicate over ordinary symbol: " + staged_name);
  declare_pred(staged_name, b.arity + 1, PredKind::Stage);
  // Stage the whole block first so premise symbols exist before use.
  for (const ProductionRule& p : productions_of(base))
    for (const Formula& f : p.premises)
      if (f.kind == FormulaKind::Atom && is_inductive(f.pred)) ensure_stage_pred(f.pred + "'");
  for (const ProductionRule& p : productions_of(base))
    productions_[staged_name].push_back(stage_production_impl(p));
}

void DefinitionSet::ensure_preds(const std::set<std::string>& names) {
  for (const auto& n : names) {
    if (preds_.count(n)) continue;
    if (is_stage_name(n)) ensure_stage_pred(n);
  }
}

std::vector<std::string> DefinitionSet::mutual_block(const std::string& p) const {
  // Tiny graphs: reachability both ways instead of a full SCC pass.
  auto reach = [&](const std::string& from) {
    std::set<std::string> seen{from};
    std::vector<std::string> work{from};
    while (!work.empty()) {
      std::string cur = work.back();
      work.pop_back();
      auto it = productions_.find(cur);
      if (it == productions_.end()) continue;
      for (const ProductionRule& pr : it->second)
        for (const Formula& f : pr.premises)
          if (f.kind == FormulaKind::Atom && is_inductive(f.pred) && !seen.count(f.pred)) {
            seen.insert(f.pred);
            work.push_back(f.pred);
          }
    }
    return seen;
  };
  std::set<std::string> down = reach(p);
  std::vector<std::string> block;
  for (const std::string& q : pred_order_) {
    if (!down.count(q) || !is_inductive(q)) continue;
    if (q == p || reach(q).count(p)) block.push_back(q);
  }
  return block;
}

std::string DefinitionSet::check_term(const Term& t) const {
  if (t.kind == TermKind::App) {
    if (!has_func(t.name)) return "unknown function symbol " + t.name;
    if (func(t.name).arity != t.args.size()) return "arity mismatch for " + t.name;
  }
  for (const Term& a : t.args) {
    std::string e = check_term(a);
    if (!e.empty()) return e;
  }
  return "";
}

std::string DefinitionSet::check_formula(const Formula& f) const {
  switch (f.kind) {
    case FormulaKind::Atom: {
      if (!has_pred(f.pred)) return "unknown predicate " + f.pred;
      if (pred(f.pred).arity != f.terms.size()) return "arity mismatch for " + f.pred;
      break;
    }
    case FormulaKind::Eq:
      if (f.terms.size() != 2) return "equality needs two terms";
      break;
    default:
      break;
  }
  for (const Term& t : f.terms) {
    std::string e = check_term(t);
    if (!e.empty()) return e;
  }
  for (const Formula& k : f.kids) {
    std::string e = check_formula(k);
    if (!e.empty()) return e;
  }
  return "";
}

std::string DefinitionSet::check_sequent(const Sequent& s) const {
  for (const Formula& f : s.ante) {
    std::string e = check_formula(f);
    if (!e.empty()) return e;
  }
  if (s.succ) return check_formula(*s.succ);
  return "";
}

std::vector<std::string> production_vars(const ProductionRule& p) {
  Sequent probe;
  for (const Term& t : p.concl_args) probe.ante.push_back(feq(t, t));
  for (const Formula& f : p.premises) probe.ante.push_back(f);
  return free_vars_ordered(probe);
}

std::vector<Sequent> ha_axioms() {
  Term x = tvar("x"), y = tvar("y");
  Formula nx = fatom("N", {x}), ny = fatom("N", {y});
  auto ax = [](Formula f) {
    Sequent s;
    s.succ = std::move(f);
    return s;
  };
  return {
      ax(fimp(nx, fnot(feq(tsucc(x), tzero())))),
      ax(fimp(fand(nx, ny), fimp(feq(tsucc(x), tsucc(y)), feq(x, y)))),
      ax(fimp(nx, feq(tplus(x, tzero()), x))),
      ax(fimp(fand(nx, ny), feq(tplus(x, tsucc(y)), tsucc(tplus(x, y))))),
      ax(fimp(nx, feq(ttimes(x, tzero()), tzero()))),
      ax(fimp(fand(nx, ny), feq(ttimes(x, tsucc(y)), tplus(ttimes(x, y), x)))),
  };
}

}  // namespace cyclind
