#ifndef CYCLIND_STAGE_HPP
#define CYCLIND_STAGE_HPP

#include "cyclind/arith.hpp"
#include "cyclind/derive.hpp"
#include "cyclind/proof.hpp"
#include "cyclind/trace.hpp"

namespace cyclind {

struct StagedAssumption {
  NodeId leaf = 0;  // in the staged graph
  NodeId orig = 0;  // the corresponding Assume leaf in the input graph
  std::vector<std::string> vars;     // stage variables of the circ'd sequent
  std::vector<IneqConstraint> ineq;  // Ineq(pi): v-hat = v and v > v_i entries
  std::vector<Formula> prefix;       // threaded constraint formulas, outermost first
};

struct StagedProof {
  NodeId root = 0;
  std::vector<std::string> root_vars;
  std::vector<StagedAssumption> assumptions;
};

// Stage transformation of a bud-free proof (open assumptions allowed): the
// output, written through the builder, proves circ(input root) and carries one
// staged assumption per input assumption, with its Ineq prefix threaded
// through the path. Requires the builder's definition set to contain the
// staged predicates of every inductive symbol in the input.
StagedProof stage_proof(ProofBuilder& b, const ProofGraph& input);

// Ensure every stage predicate needed to stage `g` exists in `defs`.
void ensure_staging_preds(DefinitionSet& defs, const ProofGraph& g);

// Wrap an Ljid proof of circ(original) into a proof of the original sequent:
// fold the stage variables back under their existentials, then replace every
// staged formula by cuts against the congruence lemmas.
NodeId destage(ProofBuilder& b, NodeId root, const std::vector<std::string>& root_vars,
               const Sequent& original);

// Does Ineq(pi) entail every Prog/Stay cell of the path relation, reading the
// source tuple as x and the target tuple as y?
bool ineq_entails(const std::vector<IneqConstraint>& ineq, const std::vector<std::string>& x,
                  const std::vector<std::string>& y, const PathRelation& rel);

// Thread a constraint prefix through every antecedent of a (tree-shaped)
// subproof; returns the new root and maps relocated assumption leaves.
NodeId weave_prefix(ProofBuilder& b, NodeId root, const std::vector<Formula>& prefix,
                    std::map<NodeId, NodeId>& leaf_map);

}  // namespace cyclind

#endif
