#ifndef CYCLIND_ARITH_HPP
#define CYCLIND_ARITH_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cyclind/defs.hpp"
#include "cyclind/syntax.hpp"

namespace cyclind {

// Linear form over "units" (variables or opaque subterms keyed by canonical
// text) with integer coefficients. arith_on_units records whether +/x/s laws
// were applied over unit-containing subterms during normalization; such facts
// are only HA-derivable when the units carry N guards.
struct LinForm {
  std::map<std::string, long long> coef;
  long long konst = 0;
  bool arith_on_units = false;
  std::set<std::string> raw_units;

  void add(const LinForm& o, long long scale = 1);
  bool is_const() const { return coef.empty(); }
  bool operator==(const LinForm& o) const { return coef == o.coef && konst == o.konst; }
};

// Normalizes a term: s(t) = t+1, plus linear, times distributed over literal
// s-spines / constants, len/proj reduced over cons-spines, everything else an
// opaque unit.
LinForm lin_of_term(const Term& t);

// One linear hypothesis: diff >= delta, where diff is lhs - rhs.
struct LinFact {
  LinForm diff;
  long long delta = 0;
  bool pure = false;  // usable without N guards (no arithmetic smoothing involved)
};

// Decides the HA-theory leaf: accepts a sequent when its succedent (or, for an
// empty succedent, falsity) is an N-guard-relativized linear consequence of the
// antecedent's linear facts. Returns "" on acceptance, else a reason.
std::string ha_oracle_check(const Sequent& s, const DefinitionSet& defs);

// Relation-level entailment used by the stage-transform Ineq checks: does the
// constraint set force a > b (strict) or a = b over naturals?
struct IneqConstraint {
  bool strict = false;  // lhs > rhs when strict, lhs = rhs otherwise
  std::string lhs, rhs;
};
bool ineq_entails_atom(const std::vector<IneqConstraint>& cs, bool strict_goal,
                       const std::string& a, const std::string& b);

}  // namespace cyclind

#endif
