#include "cyclind/syntax.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace cyclind {

// ---------------------------------------------------------------- terms

bool Term::operator==(const Term& o) const {
  return kind == o.kind && name == o.name && args == o.args;
}

bool Term::operator<(const Term& o) const {
  if (kind != o.kind) return kind < o.kind;
  if (name != o.name) return name < o.name;
  return args < o.args;
}

Term tvar(std::string name) {
  Term t;
  t.kind = TermKind::Var;
  t.name = std::move(name);
  return t;
}

Term tzero() { return Term{}; }

Term tsucc(Term t) {
  Term r;
  r.kind = TermKind::Succ;
  r.args.push_back(std::move(t));
  return r;
}

Term tplus(Term a, Term b) {
  Term r;
  r.kind = TermKind::Plus;
  r.args.push_back(std::move(a));
  r.args.push_back(std::move(b));
  return r;
}

Term ttimes(Term a, Term b) {
  Term r;
  r.kind = TermKind::Times;
  r.args.push_back(std::move(a));
  r.args.push_back(std::move(b));
  return r;
}

Term tapp(std::string f, std::vector<Term> args) {
  Term r;
  r.kind = TermKind::App;
  r.name = std::move(f);
  r.args = std::move(args);
  return r;
}

Term numeral(unsigned n) {
  Term t = tzero();
  for (unsigned i = 0; i < n; i++) t = tsucc(std::move(t));
  return t;
}

Term tcons(Term head, Term tail) { return tapp("cons", {std::move(head), std::move(tail)}); }
Term tlen(Term t) { return tapp("len", {std::move(t)}); }
Term tproj(Term t, Term idx) { return tapp("proj", {std::move(t), std::move(idx)}); }

Term tseq(const std::vector<Term>& elems) {
  Term t = tzero();
  for (auto it = elems.rbegin(); it != elems.rend(); ++it) t = tcons(*it, std::move(t));
  return t;
}

// ---------------------------------------------------------------- formulas

bool Formula::operator==(const Formula& o) const {
  return kind == o.kind && pred == o.pred && terms == o.terms && var == o.var && kids == o.kids;
}

bool Formula::operator<(const Formula& o) const {
  auto key = [](const Formula& f) { return std::tie(f.kind, f.pred, f.var); };
  if (key(*this) != key(o)) return key(*this) < key(o);
  if (terms != o.terms) return terms < o.terms;
  return kids < o.kids;
}

Formula fatom(std::string pred, std::vector<Term> args) {
  Formula f;
  f.kind = FormulaKind::Atom;
  f.pred = std::move(pred);
  f.terms = std::move(args);
  return f;
}

Formula feq(Term a, Term b) {
  Formula f;
  f.kind = FormulaKind::Eq;
  f.terms.push_back(std::move(a));
  f.terms.push_back(std::move(b));
  return f;
}

static Formula binop(FormulaKind k, Formula a, Formula b) {
  Formula f;
  f.kind = k;
  f.kids.push_back(std::move(a));
  f.kids.push_back(std::move(b));
  return f;
}

Formula fand(Formula a, Formula b) { return binop(FormulaKind::And, std::move(a), std::move(b)); }
Formula for_(Formula a, Formula b) { return binop(FormulaKind::Or, std::move(a), std::move(b)); }
Formula fimp(Formula a, Formula b) { return binop(FormulaKind::Imp, std::move(a), std::move(b)); }

Formula fnot(Formula a) {
  Formula f;
  f.kind = FormulaKind::Not;
  f.kids.push_back(std::move(a));
  return f;
}

static Formula quant(FormulaKind k, std::string var, Formula body) {
  Formula f;
  f.kind = k;
  f.var = std::move(var);
  f.kids.push_back(std::move(body));
  return f;
}

Formula fall(std::string var, Formula body) {
  return quant(FormulaKind::All, std::move(var), std::move(body));
}
Formula fex(std::string var, Formula body) {
  return quant(FormulaKind::Ex, std::move(var), std::move(body));
}
Formula ffalsum() { return Formula{}; }

static std::string lt_witness_name(const Term& a, const Term& b) {
  std::set<std::string> fv;
  free_vars(a, fv);
  free_vars(b, fv);
  std::string z = "z";
  while (fv.count(z)) z += "'";
  return z;
}

Formula flt(const Term& a, const Term& b) {
  std::string z = lt_witness_name(a, b);
  return fex(z, fand(fatom("N", {tvar(z)}), feq(tplus(a, tsucc(tvar(z))), b)));
}

Formula fle(const Term& a, const Term& b) { return for_(feq(a, b), flt(a, b)); }

bool match_lt(const Formula& f, Term& a, Term& b) {
  if (f.kind != FormulaKind::Ex) return false;
  const Formula& body = f.kids[0];
  if (body.kind != FormulaKind::And) return false;
  const Formula& guard = body.kids[0];
  const Formula& eq = body.kids[1];
  if (guard.kind != FormulaKind::Atom || guard.pred != "N" || guard.terms.size() != 1)
    return false;
  if (guard.terms[0] != tvar(f.var)) return false;
  if (eq.kind != FormulaKind::Eq) return false;
  const Term& lhs = eq.terms[0];
  if (lhs.kind != TermKind::Plus) return false;
  if (lhs.args[1] != tsucc(tvar(f.var))) return false;
  std::set<std::string> fv;
  free_vars(lhs.args[0], fv);
  free_vars(eq.terms[1], fv);
  if (fv.count(f.var)) return false;
  a = lhs.args[0];
  b = eq.terms[1];
  return true;
}

bool match_le(const Formula& f, Term& a, Term& b) {
  if (f.kind != FormulaKind::Or) return false;
  const Formula& l = f.kids[0];
  if (l.kind != FormulaKind::Eq) return false;
  Term x, y;
  if (!match_lt(f.kids[1], x, y)) return false;
  if (l.terms[0] != x || l.terms[1] != y) return false;
  a = x;
  b = y;
  return true;
}

Formula fand_all(const std::vector<Formula>& fs) {
  if (fs.empty()) throw std::invalid_argument("fand_all: empty");
  Formula f = fs.back();
  for (auto it = fs.rbegin() + 1; it != fs.rend(); ++it) f = fand(*it, std::move(f));
  return f;
}

Formula for_all(const std::vector<Formula>& fs) {
  if (fs.empty()) throw std::invalid_argument("for_all: empty");
  Formula f = fs.back();
  for (auto it = fs.rbegin() + 1; it != fs.rend(); ++it) f = for_(*it, std::move(f));
  return f;
}

Formula fimp_chain(const std::vector<Formula>& ante, const std::optional<Formula>& succ) {
  Formula f = succ ? *succ : ffalsum();
  for (auto it = ante.rbegin(); it != ante.rend(); ++it) f = fimp(*it, std::move(f));
  return f;
}

// ---------------------------------------------------------------- sequents

bool Sequent::operator==(const Sequent& o) const { return ante == o.ante && succ == o.succ; }

// ---------------------------------------------------------------- variables

void free_vars(const Term& t, std::set<std::string>& out) {
  if (t.kind == TermKind::Var) {
    out.insert(t.name);
    return;
  }
  for (const Term& a : t.args) free_vars(a, out);
}

static void free_vars_rec(const Formula& f, std::set<std::string>& bound,
                          std::set<std::string>& out) {
  switch (f.kind) {
    case FormulaKind::Atom:
    case FormulaKind::Eq: {
      std::set<std::string> fv;
      for (const Term& t : f.terms) free_vars(t, fv);
      for (const auto& v : fv)
        if (!bound.count(v)) out.insert(v);
      break;
    }
    case FormulaKind::All:
    case FormulaKind::Ex: {
      bool was = bound.count(f.var) != 0;
      bound.insert(f.var);
      free_vars_rec(f.kids[0], bound, out);
      if (!was) bound.erase(f.var);
      break;
    }
    default:
      for (const Formula& k : f.kids) free_vars_rec(k, bound, out);
  }
}

void free_vars(const Formula& f, std::set<std::string>& out) {
  std::set<std::string> bound;
  free_vars_rec(f, bound, out);
}

void free_vars(const Sequent& s, std::set<std::string>& out) {
  for (const Formula& f : s.ante) free_vars(f, out);
  if (s.succ) free_vars(*s.succ, out);
}

std::set<std::string> free_vars(const Sequent& s) {
  std::set<std::string> out;
  free_vars(s, out);
  return out;
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  free_vars(f, out);
  return out;
}

bool occurs_free(const std::string& v, const Formula& f) {
  return free_vars(f).count(v) != 0;
}

static void ordered_vars_term(const Term& t, const std::set<std::string>& bound,
                              std::vector<std::string>& out, std::set<std::string>& seen) {
  if (t.kind == TermKind::Var) {
    if (!bound.count(t.name) && !seen.count(t.name)) {
      seen.insert(t.name);
      out.push_back(t.name);
    }
    return;
  }
  for (const Term& a : t.args) ordered_vars_term(a, bound, out, seen);
}

static void ordered_vars_formula(const Formula& f, std::set<std::string>& bound,
                                 std::vector<std::string>& out, std::set<std::string>& seen) {
  switch (f.kind) {
    case FormulaKind::Atom:
    case FormulaKind::Eq:
      for (const Term& t : f.terms) ordered_vars_term(t, bound, out, seen);
      break;
    case FormulaKind::All:
    case FormulaKind::Ex: {
      bool was = bound.count(f.var) != 0;
      bound.insert(f.var);
      ordered_vars_formula(f.kids[0], bound, out, seen);
      if (!was) bound.erase(f.var);
      break;
    }
    default:
      for (const Formula& k : f.kids) ordered_vars_formula(k, bound, out, seen);
  }
}

std::vector<std::string> free_vars_ordered(const Sequent& s) {
  std::vector<std::string> out;
  std::set<std::string> seen, bound;
  for (const Formula& f : s.ante) ordered_vars_formula(f, bound, out, seen);
  if (s.succ) ordered_vars_formula(*s.succ, bound, out, seen);
  return out;
}

// ---------------------------------------------------------------- substitution

Term substitute(const Term& t, const VarSubst& s) {
  if (t.kind == TermKind::Var) {
    auto it = s.find(t.name);
    return it == s.end() ? t : it->second;
  }
  Term r = t;
  for (Term& a : r.args) a = substitute(a, s);
  return r;
}

static std::string rename_away(const std::string& base, const std::set<std::string>& avoid) {
  std::string v = base;
  do {
    v += "'";
  } while (avoid.count(v));
  return v;
}

Formula substitute(const Formula& f, const VarSubst& s) {
  switch (f.kind) {
    case FormulaKind::Atom:
    case FormulaKind::Eq: {
      Formula r = f;
      for (Term& t : r.terms) t = substitute(t, s);
      return r;
    }
    case FormulaKind::All:
    case FormulaKind::Ex: {
      VarSubst inner = s;
      inner.erase(f.var);
      if (inner.empty()) return f;
      // Capture check: rename the binder if some substituted term mentions it.
      std::set<std::string> range_fv;
      std::set<std::string> body_fv = free_vars(f.kids[0]);
      for (const auto& [v, t] : inner)
        if (body_fv.count(v)) free_vars(t, range_fv);
      Formula r = f;
      if (range_fv.count(f.var)) {
        std::set<std::string> avoid = range_fv;
        avoid.insert(body_fv.begin(), body_fv.end());
        std::string nv = rename_away(f.var, avoid);
        inner[f.var] = tvar(nv);
        r.var = nv;
      }
      r.kids[0] = substitute(f.kids[0], inner);
      return r;
    }
    default: {
      Formula r = f;
      for (Formula& k : r.kids) k = substitute(k, s);
      return r;
    }
  }
}

Sequent substitute(const Sequent& seq, const VarSubst& s) {
  Sequent r;
  for (const Formula& f : seq.ante) r.ante.push_back(substitute(f, s));
  if (seq.succ) r.succ = substitute(*seq.succ, s);
  return r;
}

Term replace_term(const Term& in, const Term& from, const Term& to) {
  if (in == from) return to;
  Term r = in;
  for (Term& a : r.args) a = replace_term(a, from, to);
  return r;
}

static Formula replace_term_rec(const Formula& in, const Term& from, const Term& to,
                                const std::set<std::string>& relevant,
                                std::set<std::string>& bound) {
  switch (in.kind) {
    case FormulaKind::Atom:
    case FormulaKind::Eq: {
      for (const auto& v : relevant)
        if (bound.count(v)) return in;  // occurrence would not be free here
      Formula r = in;
      for (Term& t : r.terms) t = replace_term(t, from, to);
      return r;
    }
    case FormulaKind::All:
    case FormulaKind::Ex: {
      Formula r = in;
      if (relevant.count(in.var)) {
        // Rename the binder away so replacement stays capture-free and total.
        std::set<std::string> avoid = relevant;
        free_vars(in.kids[0], avoid);
        std::string nv = rename_away(in.var, avoid);
        r.var = nv;
        r.kids[0] = substitute(in.kids[0], {{in.var, tvar(nv)}});
      }
      bool was = bound.count(r.var) != 0;
      bound.insert(r.var);
      r.kids[0] = replace_term_rec(r.kids[0], from, to, relevant, bound);
      if (!was) bound.erase(r.var);
      return r;
    }
    default: {
      Formula r = in;
      for (Formula& k : r.kids) k = replace_term_rec(k, from, to, relevant, bound);
      return r;
    }
  }
}

Formula replace_term(const Formula& in, const Term& from, const Term& to) {
  std::set<std::string> relevant;
  free_vars(from, relevant);
  free_vars(to, relevant);
  std::set<std::string> bound;
  return replace_term_rec(in, from, to, relevant, bound);
}

// ---------------------------------------------------------------- alpha equivalence

static bool alpha_term(const Term& a, const Term& b, const std::map<std::string, std::string>& m,
                       const std::map<std::string, std::string>& minv) {
  if (a.kind != b.kind) return false;
  if (a.kind == TermKind::Var) {
    auto it = m.find(a.name);
    auto jt = minv.find(b.name);
    if (it != m.end() || jt != minv.end())
      return it != m.end() && jt != minv.end() && it->second == b.name && jt->second == a.name;
    return a.name == b.name;
  }
  if (a.name != b.name || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); i++)
    if (!alpha_term(a.args[i], b.args[i], m, minv)) return false;
  return true;
}

static bool alpha_rec(const Formula& a, const Formula& b, std::map<std::string, std::string>& m,
                      std::map<std::string, std::string>& minv) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case FormulaKind::Atom:
      if (a.pred != b.pred) return false;
      [[fallthrough]];
    case FormulaKind::Eq: {
      if (a.terms.size() != b.terms.size()) return false;
      for (std::size_t i = 0; i < a.terms.size(); i++)
        if (!alpha_term(a.terms[i], b.terms[i], m, minv)) return false;
      return true;
    }
    case FormulaKind::All:
    case FormulaKind::Ex: {
      auto saved_m = m;
      auto saved_minv = minv;
      m[a.var] = b.var;
      minv[b.var] = a.var;
      bool ok = alpha_rec(a.kids[0], b.kids[0], m, minv);
      m = std::move(saved_m);
      minv = std::move(saved_minv);
      return ok;
    }
    default: {
      if (a.kids.size() != b.kids.size()) return false;
      for (std::size_t i = 0; i < a.kids.size(); i++)
        if (!alpha_rec(a.kids[i], b.kids[i], m, minv)) return false;
      return true;
    }
  }
}

bool alpha_eq(const Formula& a, const Formula& b) {
  std::map<std::string, std::string> m, minv;
  return alpha_rec(a, b, m, minv);
}

bool alpha_eq(const Sequent& a, const Sequent& b) {
  if (a.ante.size() != b.ante.size() || a.succ.has_value() != b.succ.has_value()) return false;
  for (std::size_t i = 0; i < a.ante.size(); i++)
    if (!alpha_eq(a.ante[i], b.ante[i])) return false;
  return !a.succ || alpha_eq(*a.succ, *b.succ);
}

// ---------------------------------------------------------------- fresh names

void FreshGen::absorb(const std::set<std::string>& names) {
  for (const auto& n : names) {
    if (n.size() < 2 || n[0] != '$') continue;
    std::uint64_t k = 0;
    bool num = true;
    for (std::size_t i = 1; i < n.size(); i++) {
      if (n[i] < '0' || n[i] > '9') {
        num = false;
        break;
      }
      k = k * 10 + (n[i] - '0');
    }
    if (num && k + 1 > next_) next_ = k + 1;
  }
}

bool is_reserved_var(const std::string& name) { return !name.empty() && name[0] == '$'; }

// ---------------------------------------------------------------- seq coding

SeqCode seq_encode(const std::vector<std::uint64_t>& xs) { return SeqCode{xs}; }

std::size_t seq_length(const SeqCode& s) { return s.xs.size(); }

std::uint64_t seq_proj(const SeqCode& s, std::size_t i) {
  if (i >= s.xs.size()) throw std::out_of_range("seq_proj: index past end");
  return s.xs[i];
}

SeqCode seq_concat(const SeqCode& a, const SeqCode& b) {
  SeqCode r = a;
  r.xs.insert(r.xs.end(), b.xs.begin(), b.xs.end());
  return r;
}

}  // namespace cyclind
