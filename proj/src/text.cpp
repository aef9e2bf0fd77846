#include "cyclind/text.hpp"

#include <cctype>
#include <sstream>

namespace cyclind {

void Cursor::skip_ws(bool newlines) {
  while (i_ < src_.size()) {
    char ch = src_[i_];
    if (ch == '#') {
      while (i_ < src_.size() && src_[i_] != '\n') i_++;
      continue;
    }
    if (ch == '\n' && !newlines) return;
    if (std::isspace(static_cast<unsigned char>(ch))) {
      i_++;
      continue;
    }
    return;
  }
}

bool Cursor::eof() {
  skip_ws();
  return i_ >= src_.size();
}

char Cursor::peek() {
  skip_ws();
  if (i_ >= src_.size()) fail("unexpected end of input");
  return src_[i_];
}

char Cursor::get() {
  char c = peek();
  i_++;
  return c;
}

static bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
static bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool Cursor::try_consume(const std::string& tok) {
  skip_ws();
  if (src_.compare(i_, tok.size(), tok) != 0) return false;
  i_ += tok.size();
  return true;
}

bool Cursor::try_keyword(const std::string& word) {
  skip_ws();
  if (src_.compare(i_, word.size(), word) != 0) return false;
  std::size_t end = i_ + word.size();
  if (end < src_.size() && (ident_char(src_[end]) || src_[end] == '\'')) return false;
  i_ = end;
  return true;
}

void Cursor::expect(const std::string& tok) {
  if (!try_consume(tok)) fail("expected '" + tok + "'");
}

std::string Cursor::ident() {
  skip_ws();
  if (i_ >= src_.size() || !ident_start(src_[i_])) fail("expected identifier");
  std::size_t start = i_;
  i_++;
  while (i_ < src_.size() && ident_char(src_[i_])) i_++;
  while (i_ < src_.size() && src_[i_] == '\'') i_++;
  return src_.substr(start, i_ - start);
}

long long Cursor::integer() {
  skip_ws();
  bool neg = false;
  if (i_ < src_.size() && src_[i_] == '-') {
    neg = true;
    i_++;
  }
  if (i_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[i_])))
    fail("expected integer");
  long long v = 0;
  while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_])))
    v = v * 10 + (src_[i_++] - '0');
  return neg ? -v : v;
}

std::string Cursor::rest_of_line() {
  std::size_t start = i_;
  while (i_ < src_.size() && src_[i_] != '\n') i_++;
  return src_.substr(start, i_ - start);
}

// ---------------------------------------------------------------- terms

static std::vector<Term> parse_term_args(Cursor& c, unsigned expect_n) {
  std::vector<Term> args;
  c.expect("(");
  if (!c.try_consume(")")) {
    args.push_back(parse_term(c));
    while (c.try_consume(",")) args.push_back(parse_term(c));
    c.expect(")");
  }
  if (expect_n != static_cast<unsigned>(-1) && args.size() != expect_n)
    c.fail("wrong argument count");
  return args;
}

Term parse_term(Cursor& c) {
  char ch = c.peek();
  if (std::isdigit(static_cast<unsigned char>(ch))) {
    long long n = c.integer();
    if (n < 0) c.fail("negative numeral");
    return numeral(static_cast<unsigned>(n));
  }
  if (c.try_keyword("s")) {
    auto a = parse_term_args(c, 1);
    return tsucc(a[0]);
  }
  if (c.try_keyword("plus")) {
    auto a = parse_term_args(c, 2);
    return tplus(a[0], a[1]);
  }
  if (c.try_keyword("times")) {
    auto a = parse_term_args(c, 2);
    return ttimes(a[0], a[1]);
  }
  std::string name = c.ident();
  c.skip_ws();
  if (!c.eof() && c.peek() == '(') return tapp(name, parse_term_args(c, -1));
  return tvar(name);
}

// ---------------------------------------------------------------- formulas

static std::pair<Term, Term> parse_two_terms(Cursor& c) {
  c.expect("(");
  Term a = parse_term(c);
  c.expect(",");
  Term b = parse_term(c);
  c.expect(")");
  return {a, b};
}

static std::pair<Formula, Formula> parse_two_formulas(Cursor& c) {
  c.expect("(");
  Formula a = parse_formula(c);
  c.expect(",");
  Formula b = parse_formula(c);
  c.expect(")");
  return {a, b};
}

Formula parse_formula(Cursor& c) {
  if (c.try_keyword("false")) return ffalsum();
  if (c.try_keyword("eq")) {
    auto [a, b] = parse_two_terms(c);
    return feq(a, b);
  }
  if (c.try_keyword("lt")) {
    auto [a, b] = parse_two_terms(c);
    return flt(a, b);
  }
  if (c.try_keyword("le")) {
    auto [a, b] = parse_two_terms(c);
    return fle(a, b);
  }
  if (c.try_keyword("gt")) {
    auto [a, b] = parse_two_terms(c);
    return flt(b, a);
  }
  if (c.try_keyword("ge")) {
    auto [a, b] = parse_two_terms(c);
    return fle(b, a);
  }
  if (c.try_keyword("and")) {
    auto [a, b] = parse_two_formulas(c);
    return fand(a, b);
  }
  if (c.try_keyword("or")) {
    auto [a, b] = parse_two_formulas(c);
    return for_(a, b);
  }
  if (c.try_keyword("imp")) {
    auto [a, b] = parse_two_formulas(c);
    return fimp(a, b);
  }
  if (c.try_keyword("not")) {
    c.expect("(");
    Formula a = parse_formula(c);
    c.expect(")");
    return fnot(a);
  }
  std::string name = c.ident();
  if (name == "all" || name == "ex") {
    c.expect("(");
    std::string v = c.ident();
    c.expect(",");
    Formula body = parse_formula(c);
    c.expect(")");
    return name == "all" ? fall(v, body) : fex(v, body);
  }
  std::vector<Term> args;
  c.skip_ws();
  if (!c.eof() && c.peek() == '(') args = parse_term_args(c, -1);
  return fatom(name, std::move(args));
}

Sequent parse_sequent(Cursor& c) {
  Sequent s;
  if (!c.try_consume("|-")) {
    s.ante.push_back(parse_formula(c));
    while (c.try_consume(",")) s.ante.push_back(parse_formula(c));
    c.expect("|-");
  }
  // Callers hand over the sequent text in isolation (the proof reader splits
  // node lines on ';'), so anything left is the succedent.
  if (!c.eof()) s.succ = parse_formula(c);
  return s;
}

Term parse_term(const std::string& s) {
  Cursor c(s);
  Term t = parse_term(c);
  if (!c.eof()) c.fail("trailing input");
  return t;
}

Formula parse_formula(const std::string& s) {
  Cursor c(s);
  Formula f = parse_formula(c);
  if (!c.eof()) c.fail("trailing input");
  return f;
}

Sequent parse_sequent(const std::string& s) {
  Cursor c(s);
  Sequent q = parse_sequent(c);
  if (!c.eof()) c.fail("trailing input");
  return q;
}

// ---------------------------------------------------------------- printing

static void print_term(std::ostringstream& o, const Term& t) {
  switch (t.kind) {
    case TermKind::Var:
      o << t.name;
      return;
    case TermKind::Zero:
      o << "0";
      return;
    case TermKind::Succ:
      o << "s(";
      print_term(o, t.args[0]);
      o << ")";
      return;
    case TermKind::Plus:
    case TermKind::Times:
      o << (t.kind == TermKind::Plus ? "plus(" : "times(");
      print_term(o, t.args[0]);
      o << ", ";
      print_term(o, t.args[1]);
      o << ")";
      return;
    case TermKind::App: {
      o << t.name;
      o << "(";
      for (std::size_t i = 0; i < t.args.size(); i++) {
        if (i) o << ", ";
        print_term(o, t.args[i]);
      }
      o << ")";
      return;
    }
  }
}

static void print_formula(std::ostringstream& o, const Formula& f) {
  switch (f.kind) {
    case FormulaKind::Falsum:
      o << "false";
      return;
    case FormulaKind::Atom: {
      o << f.pred;
      if (!f.terms.empty()) {
        o << "(";
        for (std::size_t i = 0; i < f.terms.size(); i++) {
          if (i) o << ", ";
          print_term(o, f.terms[i]);
        }
        o << ")";
      }
      return;
    }
    case FormulaKind::Eq:
      o << "eq(";
      print_term(o, f.terms[0]);
      o << ", ";
      print_term(o, f.terms[1]);
      o << ")";
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp: {
      o << (f.kind == FormulaKind::And ? "and(" : f.kind == FormulaKind::Or ? "or(" : "imp(");
      print_formula(o, f.kids[0]);
      o << ", ";
      print_formula(o, f.kids[1]);
      o << ")";
      return;
    }
    case FormulaKind::Not:
      o << "not(";
      print_formula(o, f.kids[0]);
      o << ")";
      return;
    case FormulaKind::All:
    case FormulaKind::Ex:
      o << (f.kind == FormulaKind::All ? "all(" : "ex(") << f.var << ", ";
      print_formula(o, f.kids[0]);
      o << ")";
      return;
  }
}

std::string to_string(const Term& t) {
  std::ostringstream o;
  print_term(o, t);
  return o.str();
}

std::string to_string(const Formula& f) {
  std::ostringstream o;
  print_formula(o, f);
  return o.str();
}

std::string to_string(const Sequent& s) {
  std::ostringstream o;
  for (std::size_t i = 0; i < s.ante.size(); i++) {
    if (i) o << ", ";
    print_formula(o, s.ante[i]);
  }
  if (!s.ante.empty()) o << " ";
  o << "|-";
  if (s.succ) {
    o << " ";
    print_formula(o, *s.succ);
  }
  return o.str();
}

// ---------------------------------------------------------------- definition files

DefinitionSet parse_defs(const std::string& src) {
  DefinitionSet d;
  Cursor c(src);
  if (c.try_keyword("signature")) {
    c.expect("{");
    while (!c.try_consume("}")) {
      if (c.try_keyword("nat")) {
        d.include_nat();
        continue;
      }
      if (c.try_keyword("func")) {
        std::string name = c.ident();
        long long n = c.integer();
        if (n < 0) c.fail("negative arity");
        d.declare_func(name, static_cast<unsigned>(n));
        continue;
      }
      if (c.try_keyword("pred")) {
        std::string name = c.ident();
        if (is_stage_name(name)) c.fail("stage predicates are derived, not declared");
        long long n = c.integer();
        if (n < 0) c.fail("negative arity");
        PredKind kind;
        if (c.try_keyword("ordinary"))
          kind = PredKind::Ordinary;
        else if (c.try_keyword("inductive"))
          kind = PredKind::Inductive;
        else
          c.fail("expected 'ordinary' or 'inductive'");
        d.declare_pred(name, static_cast<unsigned>(n), kind);
        continue;
      }
      c.fail("expected signature item");
    }
  }
  while (!c.eof()) {
    if (!c.try_keyword("production")) c.fail("expected 'production'");
    std::string pred = c.ident();
    c.expect("<-");
    ProductionRule p;
    p.pred = pred;
    if (!c.try_consume("=>")) {
      p.premises.push_back(parse_formula(c));
      while (c.try_consume(",")) p.premises.push_back(parse_formula(c));
      c.expect("=>");
    }
    Formula concl = parse_formula(c);
    if (concl.kind != FormulaKind::Atom || concl.pred != pred)
      c.fail("production conclusion must be an atom of " + pred);
    p.concl_args = concl.terms;
    for (const Formula& f : p.premises) {
      std::string e = d.check_formula(f);
      if (!e.empty()) c.fail(e);
    }
    std::string e = d.check_formula(concl);
    if (!e.empty()) c.fail(e);
    d.add_production(std::move(p));
  }
  // Fig.-2 shape: ordinary premises must not mention inductive predicates.
  for (const auto& name : d.pred_order()) {
    if (!d.is_inductive(name)) continue;
    for (const ProductionRule& p : d.productions_of(name))
      for (const Formula& f : p.premises) {
        if (f.kind == FormulaKind::Atom && d.is_inductive(f.pred)) continue;
        std::set<std::string> preds_in;
        std::vector<const Formula*> stack{&f};
        while (!stack.empty()) {
          const Formula* g = stack.back();
          stack.pop_back();
          if (g->kind == FormulaKind::Atom) preds_in.insert(g->pred);
          for (const Formula& k : g->kids) stack.push_back(&k);
        }
        for (const auto& q : preds_in)
          if (d.is_inductive(q))
            throw ParseError(0, "production for " + name +
                                    " has an inductive symbol under a compound premise");
      }
  }
  return d;
}

std::string to_string(const DefinitionSet& d) {
  std::ostringstream o;
  o << "signature {\n";
  if (d.has_nat()) o << "  nat\n";
  for (const auto& [name, f] : d.funcs()) {
    if (name == "cons" || name == "len" || name == "proj") continue;
    o << "  func " << name << " " << f.arity << "\n";
  }
  for (const auto& name : d.pred_order()) {
    const PredicateSymbol& p = d.pred(name);
    if (p.kind == PredKind::Stage) continue;  // derived
    if (name == "N") continue;                // from nat
    o << "  pred " << name << " " << p.arity << " "
      << (p.kind == PredKind::Ordinary ? "ordinary" : "inductive") << "\n";
  }
  o << "}\n";
  for (const auto& name : d.pred_order()) {
    const PredicateSymbol& p = d.pred(name);
    if (p.kind != PredKind::Inductive || name == "N") continue;
    for (const ProductionRule& pr : d.productions_of(name)) {
      o << "production " << name << " <- ";
      for (std::size_t i = 0; i < pr.premises.size(); i++) {
        if (i) o << ", ";
        o << to_string(pr.premises[i]);
      }
      if (!pr.premises.empty()) o << " ";
      o << "=> " << to_string(fatom(name, pr.concl_args)) << "\n";
    }
  }
  return o.str();
}

}  // namespace cyclind
