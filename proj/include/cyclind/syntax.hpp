#ifndef CYCLIND_SYNTAX_HPP
#define CYCLIND_SYNTAX_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cyclind {

// ---------------------------------------------------------------- terms

enum class TermKind { Var, Zero, Succ, Plus, Times, App };

struct Term {
  TermKind kind = TermKind::Zero;
  std::string name;        // Var and App
  std::vector<Term> args;  // Succ(1), Plus/Times(2), App(n)

  bool operator==(const Term& o) const;
  bool operator!=(const Term& o) const { return !(*this == o); }
  bool operator<(const Term& o) const;
};

Term tvar(std::string name);
Term tzero();
Term tsucc(Term t);
Term tplus(Term a, Term b);
Term ttimes(Term a, Term b);
Term tapp(std::string f, std::vector<Term> args);
Term numeral(unsigned n);

// Reserved sequence-coding symbols. nil is the term 0.
Term tcons(Term head, Term tail);
Term tlen(Term t);
Term tproj(Term t, Term idx);
// cons(v0, cons(v1, ... cons(vk, 0)))
Term tseq(const std::vector<Term>& elems);

// ---------------------------------------------------------------- formulas

enum class FormulaKind { Atom, Eq, And, Or, Imp, Not, All, Ex, Falsum };

struct Formula {
  FormulaKind kind = FormulaKind::Falsum;
  std::string pred;            // Atom
  std::vector<Term> terms;     // Atom args; Eq has exactly two
  std::vector<Formula> kids;   // And/Or/Imp(2), Not(1), All/Ex(1)
  std::string var;             // All/Ex binder

  bool operator==(const Formula& o) const;
  bool operator!=(const Formula& o) const { return !(*this == o); }
  bool operator<(const Formula& o) const;
};

Formula fatom(std::string pred, std::vector<Term> args);
Formula feq(Term a, Term b);
Formula fand(Formula a, Formula b);
Formula for_(Formula a, Formula b);
Formula fimp(Formula a, Formula b);
Formula fnot(Formula a);
Formula fall(std::string var, Formula body);
Formula fex(std::string var, Formula body);
Formula ffalsum();

// a < b expands to the N-relativized pattern ex z (N(z) and a + s(z) = b);
// a <= b is a = b or a < b. The printer folds both back to lt/le.
Formula flt(const Term& a, const Term& b);
Formula fle(const Term& a, const Term& b);
// Recognizers for the canonical expansions.
bool match_lt(const Formula& f, Term& a, Term& b);
bool match_le(const Formula& f, Term& a, Term& b);

// Right-nested conjunction/disjunction of a nonempty list.
Formula fand_all(const std::vector<Formula>& fs);
Formula for_all(const std::vector<Formula>& fs);
// antecedent_1 imp (... imp (antecedent_n imp target)); target falsum when succ empty.
Formula fimp_chain(const std::vector<Formula>& ante, const std::optional<Formula>& succ);

// ---------------------------------------------------------------- sequents

struct Sequent {
  std::vector<Formula> ante;
  std::optional<Formula> succ;

  bool operator==(const Sequent& o) const;
  bool operator!=(const Sequent& o) const { return !(*this == o); }
};

// ---------------------------------------------------------------- variables

void free_vars(const Term& t, std::set<std::string>& out);
void free_vars(const Formula& f, std::set<std::string>& out);
void free_vars(const Sequent& s, std::set<std::string>& out);
std::set<std::string> free_vars(const Sequent& s);
std::set<std::string> free_vars(const Formula& f);
bool occurs_free(const std::string& v, const Formula& f);

// All variable names in first-occurrence order (free occurrences only).
std::vector<std::string> free_vars_ordered(const Sequent& s);

// ---------------------------------------------------------------- substitution

using VarSubst = std::map<std::string, Term>;

Term substitute(const Term& t, const VarSubst& s);
// Capture-avoiding; bound variables are primed (x -> x') only when necessary.
Formula substitute(const Formula& f, const VarSubst& s);
Sequent substitute(const Sequent& seq, const VarSubst& s);

// Replace every free-position occurrence of the term `from` by `to`
// (occurrences under a binder capturing a variable of `from` or `to` are skipped).
Term replace_term(const Term& in, const Term& from, const Term& to);
Formula replace_term(const Formula& in, const Term& from, const Term& to);

// Alpha-equivalence (bound-variable renaming only).
bool alpha_eq(const Formula& a, const Formula& b);
bool alpha_eq(const Sequent& a, const Sequent& b);

// ---------------------------------------------------------------- fresh names

// Reserved pipeline namespace: names "$<k>". Counters are threaded explicitly.
class FreshGen {
 public:
  explicit FreshGen(std::uint64_t start = 0) : next_(start) {}
  std::string fresh() { return "$" + std::to_string(next_++); }
  std::uint64_t mark() const { return next_; }
  // Bump past every $-variable occurring in the given name set.
  void absorb(const std::set<std::string>& names);

 private:
  std::uint64_t next_;
};

bool is_reserved_var(const std::string& name);

// ---------------------------------------------------------------- seq coding (meta level)

// Executable model of the sequence coding: |<t0..tn>| = n+1, (<..>)_i = t_i, <> * s = s.
struct SeqCode {
  std::vector<std::uint64_t> xs;

  bool operator==(const SeqCode& o) const { return xs == o.xs; }
  bool operator<(const SeqCode& o) const { return xs < o.xs; }
};

SeqCode seq_encode(const std::vector<std::uint64_t>& xs);
std::size_t seq_length(const SeqCode& s);
std::uint64_t seq_proj(const SeqCode& s, std::size_t i);  // throws std::out_of_range
SeqCode seq_concat(const SeqCode& a, const SeqCode& b);

}  // namespace cyclind

#endif
