#ifndef CYCLIND_DERIVE_HPP
#define CYCLIND_DERIVE_HPP

#include "cyclind/proof.hpp"
#include "cyclind/trace.hpp"

namespace cyclind {

// Append-only construction over a proof graph. Every make() re-derives the
// premises from the conclusion and instantiation and verifies they match the
// supplied children, so nothing locally invalid can ever be built.
class ProofBuilder {
 public:
  ProofBuilder(ProofGraph& g, const DefinitionSet& defs, FreshGen& fresh)
      : g_(g), defs_(defs), fresh_(fresh) {}

  ProofGraph& graph() { return g_; }
  const DefinitionSet& defs() const { return defs_; }
  FreshGen& fresh() { return fresh_; }

  NodeId make(Sequent concl, Rule rule, std::vector<NodeId> premises);
  NodeId assume(Sequent s);

  // Leaves.
  NodeId axiom(const Sequent& s);              // finds the succedent in the antecedent
  NodeId axiom_at(const Sequent& s, int pos);
  NodeId haax(const Sequent& s);
  NodeId eq_refl(const Sequent& s);

  // Structural helpers.
  // Weaken `inner` to `target` (inner's antecedent must be a subsequence of
  // target's, same or weakened succedent). Returns inner when already equal.
  NodeId weaken_to(NodeId inner, const Sequent& target);
  // Derive `target` from `inner` when every antecedent member of inner occurs
  // in target (any positions, any order): cuts + axioms + one weakening.
  NodeId paste(NodeId inner, const Sequent& target);
  // Cut `cut_formula` into `concl` at the end of the antecedent.
  NodeId cut(const Sequent& concl, const Formula& cut_formula, NodeId lemma, NodeId main);

  // Successive ExL folds turning P'(t,v) back into its bullet at the given
  // positions (descending order applied internally).
  NodeId fold_existentials(NodeId inner, const std::vector<std::pair<int, Formula>>& folds);

 private:
  ProofGraph& g_;
  const DefinitionSet& defs_;
  FreshGen& fresh_;
};

// Stage-number typing (the stage argument of a staged atom is a number):
// builds [P'(args, v)] |- N v. CyclicLocal mode uses (Case P'), Ljid (Ind P').
NodeId lemma_stage_number(ProofBuilder& b, const std::string& staged_pred,
                          const std::vector<Term>& base_args, const Term& stage, CheckMode mode);

// Equivalence of an inductive atom with its staged form (both Ljid):
//   to_staged:   [P(args)] |- ex v. P'(args, v)
//   from_staged: [ex v. P'(args, v)] |- P(args)
NodeId lemma_to_staged(ProofBuilder& b, const std::string& pred, const std::vector<Term>& args);
NodeId lemma_from_staged(ProofBuilder& b, const std::string& pred, const std::vector<Term>& args);

// Minimal-stage lemma for the arithmetic chain (Ljid):
//   [N(a)]        |- N'(a, a)
//   [N'(a, b)]    |- N''(a, b, s(b))     and so on upward.
NodeId lemma_min_stage(ProofBuilder& b, const std::string& pred, const std::vector<Term>& args);
// The stage witness the lemma produces for pred(args).
Term min_stage_term(const std::string& pred, const std::vector<Term>& args);

// Congruence closure of the atom equivalences over a whole formula (Ljid):
//   [F] |- bullet(F)  and  [bullet(F)] |- F.
NodeId congruence_to_bullet(ProofBuilder& b, const Formula& f);
NodeId congruence_from_bullet(ProofBuilder& b, const Formula& f);

// The homomorphic stage transform of formulas/sequents: every inductive atom
// P(t...) becomes ex v. P'(t..., v).
Formula bullet(const Formula& f, const DefinitionSet& defs);
// bullet, then the i-th top-level staged antecedent element loses its
// quantifier in favour of vars[i].
Sequent circ(const Sequent& s, const std::vector<std::string>& vars, const DefinitionSet& defs);
// The bullet binder for an atom (deterministic naming).
std::string bullet_binder(const std::vector<Term>& args);

}  // namespace cyclind

#endif
