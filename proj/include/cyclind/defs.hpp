#ifndef CYCLIND_DEFS_HPP
#define CYCLIND_DEFS_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cyclind/syntax.hpp"

namespace cyclind {

enum class PredKind { Ordinary, Inductive, Stage };

struct PredicateSymbol {
  std::string name;
  unsigned arity = 0;
  PredKind kind = PredKind::Ordinary;
  std::string base;  // Stage only: the symbol this one annotates
};

struct FuncSymbol {
  std::string name;
  unsigned arity = 0;
};

// Martin-Lof production: conclusion P(t...) from ordinary premises (formulas that
// mention no inductive predicate) and inductive premises (inductive atoms), kept
// in their declared order.
struct ProductionRule {
  std::string pred;
  std::vector<Term> concl_args;
  std::vector<Formula> premises;
  std::vector<std::string> vars;  // production variables, first-occurrence order
};

class DefinitionSet {
 public:
  DefinitionSet();

  void declare_func(const std::string& name, unsigned arity);
  void declare_pred(const std::string& name, unsigned arity, PredKind kind);
  void add_production(ProductionRule p);
  // Adds 0,s,+,x,N and the two N productions.
  void include_nat();
  bool has_nat() const { return with_nat_; }

  bool has_pred(const std::string& name) const;
  const PredicateSymbol& pred(const std::string& name) const;
  bool has_func(const std::string& name) const;
  const FuncSymbol& func(const std::string& name) const;
  bool is_inductive(const std::string& name) const;  // Inductive or Stage kind
  const std::vector<ProductionRule>& productions_of(const std::string& name) const;

  const std::map<std::string, PredicateSymbol>& preds() const { return preds_; }
  const std::map<std::string, FuncSymbol>& funcs() const { return funcs_; }
  const std::vector<std::string>& pred_order() const { return pred_order_; }

  // Materializes the stage-number predicate P' (productions per the staged
  // transform) for an inductive P; trailing quotes stack (P'', ...).
  void ensure_stage_pred(const std::string& staged_name);
  // Ensure every name in the set resolves, synthesizing stage predicates.
  void ensure_preds(const std::set<std::string>& names);

  // SCC of the inductive-predicate dependency graph containing `pred`,
  // in declaration order. Used by the (Ind) minor-premise schema.
  std::vector<std::string> mutual_block(const std::string& pred) const;

  // Well-formedness of syntax against the signature (arity + declared symbols).
  // Returns an error description or empty string.
  std::string check_term(const Term& t) const;
  std::string check_formula(const Formula& f) const;
  std::string check_sequent(const Sequent& s) const;

  // Staged-production transform of one rule: conclusion P'(t...,v); each
  // inductive premise P_i(s...) becomes v_i < v, P_i'(s...,v_i); trailing N v.
  ProductionRule stage_production_impl(const ProductionRule& p) const;

 private:
  std::map<std::string, PredicateSymbol> preds_;
  std::map<std::string, FuncSymbol> funcs_;
  std::map<std::string, std::vector<ProductionRule>> productions_;
  std::vector<std::string> pred_order_;
  bool with_nat_ = false;
};

// The Heyting axioms of the arithmetic base, as closed sequents.
std::vector<Sequent> ha_axioms();

// Production variable list (first occurrence over conclusion then premises).
std::vector<std::string> production_vars(const ProductionRule& p);

bool is_stage_name(const std::string& name);   // ends in '
std::string stage_base_name(const std::string& name);

}  // namespace cyclind

#endif
