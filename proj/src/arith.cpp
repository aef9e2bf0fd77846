#include "cyclind/arith.hpp"

#include <algorithm>
#include <limits>

#include "cyclind/text.hpp"

namespace cyclind {

void LinForm::add(const LinForm& o, long long scale) {
  for (const auto& [u, c] : o.coef) {
    coef[u] += c * scale;
    if (coef[u] == 0) coef.erase(u);
  }
  konst += o.konst * scale;
  arith_on_units = arith_on_units || o.arith_on_units;
  raw_units.insert(o.raw_units.begin(), o.raw_units.end());
}

static LinForm lin_opaque(const Term& t) {
  LinForm f;
  std::string key = to_string(t);
  f.coef[key] = 1;
  f.raw_units.insert(key);
  return f;
}

LinForm lin_of_term(const Term& t) {
  switch (t.kind) {
    case TermKind::Var: {
      LinForm f;
      f.coef[t.name] = 1;
      f.raw_units.insert(t.name);
      return f;
    }
    case TermKind::Zero:
      return LinForm{};
    case TermKind::Succ: {
      LinForm f = lin_of_term(t.args[0]);
      f.konst += 1;
      if (!f.coef.empty()) f.arith_on_units = true;
      return f;
    }
    case TermKind::Plus: {
      LinForm f = lin_of_term(t.args[0]);
      f.add(lin_of_term(t.args[1]));
      if (!f.coef.empty()) f.arith_on_units = true;
      return f;
    }
    case TermKind::Times: {
      LinForm a = lin_of_term(t.args[0]);
      if (a.is_const()) {
        LinForm b = lin_of_term(t.args[1]);
        LinForm r;
        r.add(b, a.konst);
        r.raw_units = b.raw_units;
        if (!b.coef.empty() || !b.raw_units.empty()) r.arith_on_units = true;
        r.raw_units.insert(a.raw_units.begin(), a.raw_units.end());
        return r;
      }
      if (t.args[1].kind == TermKind::Zero) {
        LinForm r;
        r.arith_on_units = true;
        r.raw_units = a.raw_units;
        return r;
      }
      if (t.args[1].kind == TermKind::Succ) {
        // times(a, s(b)) = times(a, b) + a
        LinForm r = lin_of_term(ttimes(t.args[0], t.args[1].args[0]));
        r.add(a);
        r.arith_on_units = true;
        return r;
      }
      LinForm b = lin_of_term(t.args[1]);
      if (b.is_const()) {
        LinForm r;
        r.add(a, b.konst);
        r.raw_units = a.raw_units;
        r.arith_on_units = true;
        return r;
      }
      LinForm r = lin_opaque(t);
      r.raw_units.insert(a.raw_units.begin(), a.raw_units.end());
      r.raw_units.insert(b.raw_units.begin(), b.raw_units.end());
      return r;
    }
    case TermKind::App: {
      if (t.name == "len") {
        // len(0) = 0, len(cons(h, s)) = 1 + len(s)
        const Term* cur = &t.args[0];
        long long n = 0;
        while (cur->kind == TermKind::App && cur->name == "cons") {
          n++;
          cur = &cur->args[1];
        }
        if (cur->kind == TermKind::Zero) {
          LinForm f;
          f.konst = n;
          return f;
        }
        LinForm f = lin_opaque(tlen(*cur));
        f.konst = n;
        return f;
      }
      if (t.name == "proj") {
        LinForm idx = lin_of_term(t.args[1]);
        if (idx.is_const() && idx.konst >= 0 && !idx.arith_on_units) {
          Term cur = t.args[0];
          long long k = idx.konst;
          while (cur.kind == TermKind::App && cur.name == "cons") {
            if (k == 0) return lin_of_term(cur.args[0]);
            k--;
            cur = cur.args[1];
          }
          return lin_opaque(tproj(cur, numeral(static_cast<unsigned>(k))));
        }
        return lin_opaque(t);
      }
      return lin_opaque(t);
    }
  }
  return LinForm{};
}

// ---------------------------------------------------------------- engine

namespace {

struct Engine {
  std::vector<LinFact> facts;
  std::set<std::string> guards;
  std::vector<std::pair<LinForm, LinForm>> eq_sides;  // raw equality hypotheses
  bool need_guards = true;  // relation-level mode disables the discipline
  std::set<std::string> closure_guards;
  bool closure_built = false;

  // Union-find over units from pure equalities (offset-free merges only).
  std::map<std::string, std::string> parent;

  std::string find(const std::string& u) {
    auto it = parent.find(u);
    if (it == parent.end()) return u;
    std::string r = find(it->second);
    parent[u] = r;
    return r;
  }

  void merge(const std::string& a, const std::string& b) {
    std::string ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  LinForm canon(const LinForm& f) {
    LinForm r;
    r.konst = f.konst;
    r.arith_on_units = f.arith_on_units;
    r.raw_units = f.raw_units;
    for (const auto& [u, c] : f.coef) {
      std::string ru = find(u);
      r.coef[ru] += c;
      if (r.coef[ru] == 0) r.coef.erase(ru);
    }
    return r;
  }

  bool unit_in(const std::string& u) {
    if (closure_guards.count(find(u))) return true;
    // N is closed under + and x: a compound arithmetic unit whose argument
    // units are all guarded is itself a number.
    if (u.rfind("times(", 0) == 0 || u.rfind("plus(", 0) == 0) {
      Term t = parse_term(u);
      for (const Term& arg : t.args) {
        LinForm lf = lin_of_term(arg);
        for (const auto& r : lf.raw_units)
          if (!unit_in(r)) return false;
      }
      return true;
    }
    return false;
  }

  // Fixpoint: guards flow through equality hypotheses onto single-unit sides
  // (term-built linear forms have nonnegative coefficients, so a guarded side
  // is a number and =L transports the guard).
  void build_guard_closure() {
    closure_built = true;
    for (const auto& g : guards) closure_guards.insert(find(g));
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [a, bside] : eq_sides) {
        for (int dir = 0; dir < 2; dir++) {
          const LinForm& from = dir ? bside : a;
          const LinForm& to = dir ? a : bside;
          if (to.coef.size() != 1 || to.coef.begin()->second != 1 || to.konst != 0) continue;
          std::string u = find(to.coef.begin()->first);
          if (closure_guards.count(u)) continue;
          bool ok = true;
          for (const auto& [w, c] : from.coef) {
            (void)c;
            if (!unit_in(w)) ok = false;
          }
          if (ok) {
            closure_guards.insert(u);
            changed = true;
          }
        }
      }
    }
  }

  bool guarded_unit(const std::string& u) {
    if (!need_guards) return true;
    if (!closure_built) build_guard_closure();
    return unit_in(u);
  }

  bool guarded_form(const LinForm& f) {
    for (const auto& [u, c] : f.coef) {
      (void)c;
      if (!guarded_unit(u)) return false;
    }
    return true;
  }

  // Guard every unit that took part in arithmetic smoothing, even if it later
  // canceled out of the difference (x+0 = x must not slip through unguarded).
  bool raw_units_guarded(const LinForm& f) {
    for (const auto& u : f.raw_units)
      if (!guarded_unit(u)) return false;
    return true;
  }

  bool goal_guards_ok(const LinForm& a, const LinForm& b) {
    if (a.arith_on_units && !raw_units_guarded(a)) return false;
    if (b.arith_on_units && !raw_units_guarded(b)) return false;
    return true;
  }

  // Longest-path over difference edges: edge (a -> b, w) asserts a - b >= w.
  struct Edge {
    int a, b;
    long long w;
  };

  std::map<std::string, int> node_ids;
  std::vector<Edge> edges;
  std::vector<LinFact> usable;  // canonicalized, guard-filtered
  bool graph_built = false;
  bool positive_cycle = false;

  int node(const std::string& u) {
    auto it = node_ids.find(u);
    if (it != node_ids.end()) return it->second;
    int id = static_cast<int>(node_ids.size());
    node_ids[u] = id;
    return id;
  }

  void build_graph() {
    if (graph_built) return;
    graph_built = true;
    int zero = node("");
    (void)zero;
    for (const LinFact& raw : facts) {
      LinFact f{canon(raw.diff), raw.delta, raw.pure};
      if (!f.pure && !raw_units_guarded(raw.diff)) continue;
      usable.push_back(f);
      long long d = f.delta - f.diff.konst;
      if (f.diff.coef.size() == 2) {
        auto it = f.diff.coef.begin();
        auto jt = std::next(it);
        if (it->second == 1 && jt->second == -1)
          edges.push_back({node(it->first), node(jt->first), d});
        else if (it->second == -1 && jt->second == 1)
          edges.push_back({node(jt->first), node(it->first), d});
      } else if (f.diff.coef.size() == 1) {
        auto it = f.diff.coef.begin();
        if (it->second == 1)
          edges.push_back({node(it->first), node(""), d});
        else if (it->second == -1)
          edges.push_back({node(""), node(it->first), d});
      } else if (f.diff.coef.empty()) {
        if (0 < d) positive_cycle = true;  // inconsistent numeric fact
      }
    }
    for (const auto& [u, id] : node_ids)
      if (!u.empty() && guarded_unit(u)) edges.push_back({id, node(""), 0});
  }

  static constexpr long long kNegInf = std::numeric_limits<long long>::min() / 4;

  // Max total weight over paths a -> b; kNegInf if unreachable; huge if the
  // facts are inconsistent (positive cycle).
  long long longest(const std::string& ua, const std::string& ub) {
    build_graph();
    if (positive_cycle) return -kNegInf;
    if (!node_ids.count(ua) || !node_ids.count(ub)) return kNegInf;
    int a = node_ids[ua], b = node_ids[ub];
    std::size_t n = node_ids.size();
    std::vector<long long> dist(n, kNegInf);
    dist[a] = 0;
    bool changed = true;
    for (std::size_t i = 0; i < n && changed; i++) {
      changed = false;
      for (const Edge& e : edges)
        if (dist[e.a] != kNegInf && dist[e.a] + e.w > dist[e.b]) {
          dist[e.b] = dist[e.a] + e.w;
          changed = true;
        }
    }
    if (changed) return -kNegInf;  // still relaxing after n rounds
    return dist[b];
  }

  // Do the usable facts contain a positive cycle (i.e. are they unsat over N)?
  bool inconsistent() {
    build_graph();
    if (positive_cycle) return true;
    std::size_t n = node_ids.size();
    std::vector<long long> dist(n, 0);  // virtual super-source
    bool changed = true;
    for (std::size_t i = 0; i < n && changed; i++) {
      changed = false;
      for (const Edge& e : edges)
        if (dist[e.a] + e.w > dist[e.b]) {
          dist[e.b] = dist[e.a] + e.w;
          changed = true;
        }
    }
    return changed;
  }

  // diff >= delta?
  bool entail_ineq(const LinForm& raw, long long delta) {
    if (inconsistent()) return true;
    LinForm diff = canon(raw);
    // Coefficient criterion: all units nonnegative over N.
    bool nonneg = true;
    for (const auto& [u, c] : diff.coef)
      if (c < 0) nonneg = false;
    if (nonneg && diff.konst >= delta && guarded_form(diff)) return true;
    if (diff.coef.empty()) return diff.konst >= delta;
    if (!guarded_form(diff)) return false;
    if (diff.coef.size() == 1) {
      auto it = diff.coef.begin();
      if (it->second == 1) return longest(it->first, "") >= delta - diff.konst;
      if (it->second == -1) return longest("", it->first) >= delta - diff.konst;
      return false;
    }
    if (diff.coef.size() == 2) {
      auto it = diff.coef.begin();
      auto jt = std::next(it);
      if (it->second == 1 && jt->second == -1 &&
          longest(it->first, jt->first) >= delta - diff.konst)
        return true;
      if (it->second == -1 && jt->second == 1 &&
          longest(jt->first, it->first) >= delta - diff.konst)
        return true;
    }
    return combine(diff, delta);
  }

  // Sum up to three usable facts (unit multipliers) and absorb a nonnegative
  // guarded remainder: diff = sum + R with R's units >= 0 proves
  // diff >= sum of the facts' bounds + R's constant.
  bool combine(const LinForm& diff, long long delta) {
    build_graph();
    auto residue_ok = [&](const LinForm& r, long long bound) {
      for (const auto& [u, c] : r.coef)
        if (c < 0 || !guarded_unit(u)) return false;
      return r.konst + bound >= delta;
    };
    std::size_t n = usable.size();
    for (std::size_t i = 0; i < n; i++) {
      LinForm r1 = diff;
      r1.add(usable[i].diff, -1);
      if (residue_ok(r1, usable[i].delta)) return true;
      for (std::size_t j = i + 1; j < n; j++) {
        LinForm r2 = r1;
        r2.add(usable[j].diff, -1);
        if (residue_ok(r2, usable[i].delta + usable[j].delta)) return true;
        for (std::size_t k = j + 1; k < n; k++) {
          LinForm r3 = r2;
          r3.add(usable[k].diff, -1);
          if (residue_ok(r3, usable[i].delta + usable[j].delta + usable[k].delta)) return true;
        }
      }
    }
    return false;
  }

  bool entail_eq_pure(const LinForm& a, const LinForm& b) {
    LinForm d = canon(a);
    d.add(canon(b), -1);
    return d.coef.empty() && d.konst == 0 && !a.arith_on_units && !b.arith_on_units;
  }

  bool entail_eq(const LinForm& a, const LinForm& b) {
    if (entail_eq_pure(a, b)) return true;
    if (!goal_guards_ok(a, b)) return false;
    LinForm d = a;
    d.add(b, -1);
    LinForm nd = b;
    nd.add(a, -1);
    return entail_ineq(d, 0) && entail_ineq(nd, 0);
  }
};

bool is_n_chain(const std::string& pred) {
  if (pred.empty() || pred[0] != 'N') return false;
  for (std::size_t i = 1; i < pred.size(); i++)
    if (pred[i] != '\'') return false;
  return true;
}

void add_guard_unit(Engine& e, const Term& t) {
  LinForm f = lin_of_term(t);
  if (f.arith_on_units) return;
  if (f.coef.size() == 1 && f.konst == 0 && f.coef.begin()->second == 1)
    e.guards.insert(f.coef.begin()->first);
}

void add_eq_fact(Engine& e, const Term& a, const Term& b) {
  LinForm la = lin_of_term(a), lb = lin_of_term(b);
  e.eq_sides.push_back({la, lb});
  bool pure = !la.arith_on_units && !lb.arith_on_units;
  if (pure) {
    // Offset-free unit merges feed the class structure (plain =L reasoning).
    if (la.coef.size() == 1 && lb.coef.size() == 1 && la.konst == lb.konst &&
        la.coef.begin()->second == 1 && lb.coef.begin()->second == 1)
      e.merge(la.coef.begin()->first, lb.coef.begin()->first);
  }
  LinFact f1, f2;
  f1.diff = la;
  f1.diff.add(lb, -1);
  f1.pure = pure;
  f2.diff = lb;
  f2.diff.add(la, -1);
  f2.pure = pure;
  e.facts.push_back(f1);
  e.facts.push_back(f2);
}

void add_lt_fact(Engine& e, const Term& a, const Term& b) {
  LinFact f;
  f.diff = lin_of_term(b);
  f.diff.add(lin_of_term(a), -1);
  f.delta = 1;
  e.facts.push_back(f);
}

void add_le_fact(Engine& e, const Term& a, const Term& b) {
  LinFact f;
  f.diff = lin_of_term(b);
  f.diff.add(lin_of_term(a), -1);
  f.delta = 0;
  e.facts.push_back(f);
}

void flatten_hyp(Engine& e, const Formula& f, const DefinitionSet& defs) {
  Term a, b;
  if (match_lt(f, a, b)) {
    add_lt_fact(e, a, b);
    return;
  }
  if (match_le(f, a, b)) {
    add_le_fact(e, a, b);
    return;
  }
  switch (f.kind) {
    case FormulaKind::Atom: {
      if (!defs.has_pred(f.pred)) return;
      const PredicateSymbol& p = defs.pred(f.pred);
      if (f.pred == "N") {
        add_guard_unit(e, f.terms[0]);
      } else if (p.kind == PredKind::Stage) {
        add_guard_unit(e, f.terms.back());  // the stage argument is a number
        // In an N-chain every argument is a number and the arguments are
        // ordered: a0 <= a1 < a2 < ... (element and stage lemmas per level).
        if (is_n_chain(f.pred)) {
          for (const Term& t : f.terms) add_guard_unit(e, t);
          for (std::size_t i = 0; i + 1 < f.terms.size(); i++) {
            if (i == 0)
              add_le_fact(e, f.terms[0], f.terms[1]);
            else
              add_lt_fact(e, f.terms[i], f.terms[i + 1]);
          }
        }
      }
      return;
    }
    case FormulaKind::Eq:
      add_eq_fact(e, f.terms[0], f.terms[1]);
      return;
    case FormulaKind::And:
      flatten_hyp(e, f.kids[0], defs);
      flatten_hyp(e, f.kids[1], defs);
      return;
    case FormulaKind::Ex: {
      // Bullet form of an N-chain guard: ex v. N'(t, ..., v).
      const Formula& body = f.kids[0];
      if (body.kind == FormulaKind::Atom && defs.has_pred(body.pred) &&
          defs.pred(body.pred).kind == PredKind::Stage && is_n_chain(body.pred) &&
          body.terms.back() == tvar(f.var))
        for (std::size_t i = 0; i + 1 < body.terms.size(); i++) add_guard_unit(e, body.terms[i]);
      return;
    }
    default:
      return;
  }
}

bool check_goal(Engine& e, const Formula& f, const DefinitionSet& defs);

bool check_goal_atom(Engine& e, const Formula& f, const DefinitionSet&) {
  Term a, b;
  if (match_lt(f, a, b) || match_le(f, a, b)) {
    LinForm la = lin_of_term(a), lb = lin_of_term(b);
    if (!e.goal_guards_ok(la, lb)) return false;
    LinForm d = lb;
    d.add(la, -1);
    Term a2, b2;
    return e.entail_ineq(d, match_lt(f, a2, b2) ? 1 : 0);
  }
  switch (f.kind) {
    case FormulaKind::Atom: {
      // N is closed under 0, s, + and x, so N(t) follows once every unit of t
      // is guarded.
      if (f.pred != "N") return false;
      LinForm t = lin_of_term(f.terms[0]);
      for (const auto& u : t.raw_units)
        if (!e.guarded_unit(u)) return false;
      for (const auto& [u, c] : t.coef) {
        (void)c;
        if (!e.guarded_unit(u)) return false;
      }
      return true;
    }
    case FormulaKind::Eq:
      return e.entail_eq(lin_of_term(f.terms[0]), lin_of_term(f.terms[1]));
    case FormulaKind::Not: {
      const Formula& g = f.kids[0];
      if (g.kind != FormulaKind::Eq) return false;
      LinForm la = lin_of_term(g.terms[0]), lb = lin_of_term(g.terms[1]);
      if (!e.goal_guards_ok(la, lb)) return false;
      LinForm d1 = la;
      d1.add(lb, -1);
      LinForm d2 = lb;
      d2.add(la, -1);
      return e.entail_ineq(d1, 1) || e.entail_ineq(d2, 1);
    }
    case FormulaKind::Falsum: {
      LinForm zero;
      return e.entail_ineq(zero, 1);  // only provable from inconsistent facts
    }
    default:
      return false;
  }
}

bool check_goal(Engine& e, const Formula& f, const DefinitionSet& defs) {
  Term a, b;
  if (match_lt(f, a, b) || match_le(f, a, b)) return check_goal_atom(e, f, defs);
  switch (f.kind) {
    case FormulaKind::And:
      return check_goal(e, f.kids[0], defs) && check_goal(e, f.kids[1], defs);
    case FormulaKind::Or:
      return check_goal(e, f.kids[0], defs) || check_goal(e, f.kids[1], defs);
    case FormulaKind::Imp: {
      Engine inner = e;
      inner.graph_built = false;
      inner.edges.clear();
      inner.node_ids.clear();
      inner.usable.clear();
      inner.positive_cycle = false;
      inner.closure_built = false;
      inner.closure_guards.clear();
      flatten_hyp(inner, f.kids[0], defs);
      return check_goal(inner, f.kids[1], defs);
    }
    default:
      return check_goal_atom(e, f, defs);
  }
}

}  // namespace

std::string ha_oracle_check(const Sequent& s, const DefinitionSet& defs) {
  Engine e;
  for (const Formula& f : s.ante) flatten_hyp(e, f, defs);
  Formula goal = s.succ ? *s.succ : ffalsum();
  if (check_goal(e, goal, defs)) return "";
  return "not within the guarded linear fragment: " + to_string(s);
}

bool ineq_entails_atom(const std::vector<IneqConstraint>& cs, bool strict_goal,
                       const std::string& a, const std::string& b) {
  Engine e;
  e.need_guards = false;
  for (const IneqConstraint& c : cs) {
    if (c.strict)
      add_lt_fact(e, tvar(c.rhs), tvar(c.lhs));
    else
      add_eq_fact(e, tvar(c.lhs), tvar(c.rhs));
  }
  LinForm d = lin_of_term(tvar(a));
  d.add(lin_of_term(tvar(b)), -1);
  if (strict_goal) return e.entail_ineq(d, 1);
  return e.entail_eq(lin_of_term(tvar(a)), lin_of_term(tvar(b)));
}

}  // namespace cyclind
