// Internal derivation gadgets shared by the compiler and the lowering pass.
#ifndef CYCLIND_SRC_GADGETS_HPP
#define CYCLIND_SRC_GADGETS_HPP

#include <functional>

#include "cyclind/derive.hpp"

namespace cyclind {
namespace gadgets {

// Discharge an implication chain sitting at `pos`: every antecedent of the
// chain must be present in the context or be a reflexive equation; the chain's
// target must match the succedent (or be falsity).
NodeId chain_apply(ProofBuilder& b, const Sequent& concl, int pos);

// Instantiate a universal chain at `pos` with the given terms, then continue.
NodeId forall_chain(ProofBuilder& b, const Sequent& concl, int pos,
                    const std::vector<Term>& terms,
                    const std::function<NodeId(const Sequent&)>& k);

// Select the i-th disjunct of the right-nested disjunction in the succedent.
NodeId or_select(ProofBuilder& b, const Sequent& concl, int index, int total,
                 const std::function<NodeId(const Sequent&)>& k);

// Build a right-nested conjunction in the succedent, leaves via `k`.
NodeId and_build(ProofBuilder& b, const Sequent& concl,
                 const std::function<NodeId(const Sequent&)>& k);

// Expose the index-th conjunct of the right-nested conjunction at `pos`.
NodeId conj_select(ProofBuilder& b, const Sequent& concl, int pos, int index, int total,
                   const std::function<NodeId(const Sequent&, int)>& k);

// Prove `C |- InU(n, enc)`; tuple-member guards are read from staged atoms
// already in C by the theory oracle.
NodeId prove_in_u(ProofBuilder& b, const Sequent& goal, int width, int p);

}  // namespace gadgets
}  // namespace cyclind

#endif
