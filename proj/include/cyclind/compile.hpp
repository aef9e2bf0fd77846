#ifndef CYCLIND_COMPILE_HPP
#define CYCLIND_COMPILE_HPP

#include "cyclind/stage.hpp"

namespace cyclind {

// Machine-checkable record licensing the Ind(U, >_Pi, G) axiom: the basic
// path relations, their composition closure, per-self-loop power witnesses,
// and the universe bounds. Side conditions are re-derived on validation.
struct TerminationCertificate {
  std::string id;
  int p = 0;                  // widest tuple
  std::vector<int> widths;    // per companion
  std::vector<PathRelation> basics;
  ClosureSet closed;
  struct Witness {
    int rel = 0;  // index into closed.rels
    int n = 0;
    int q = 0;
  };
  std::vector<Witness> witnesses;
};

std::string to_string(const TerminationCertificate& c);
TerminationCertificate parse_certificate(const std::string& src);
std::string certificate_id(const TerminationCertificate& c);  // content hash

// Build the certificate for a cyclic proof whose trace analysis passed.
TerminationCertificate make_certificate(const TraceAnalysis& a);
// "" when all side conditions hold (closure reproduces, GTC, witnesses,
// disjointification and transitivity by construction).
std::string validate_certificate(const TerminationCertificate& c);

// Canonical formulas of the bud-elimination construction.
struct EliminationFormulas {
  std::string x0, x, y0, y;                  // reserved variable names
  Formula in_u;                              // InU(x0, x)
  Formula rel_closure;                       // (x0,x) >_Pi (y0,y)
  Formula g;                                 // G x0 x
  Formula h;                                 // H x0 x (guarded)
  Formula ind_instance;                      // the termination axiom statement
  std::vector<Sequent> staged_companions;    // circ'd companion sequents
  std::vector<std::vector<std::string>> companion_vars;
};

// Validator for TermAx leaves backed by a certificate registry.
TermAxValidator certificate_validator(const std::map<std::string, TerminationCertificate>& reg);

// Replace every (Case) by the corresponding (Ind) scheme; the conclusion and
// assumption leaves are unchanged. Returns the new root and maps relocated
// assumption leaves.
NodeId case_to_ind(ProofBuilder& b, NodeId root, std::map<NodeId, NodeId>& leaf_map);

struct CompileResult {
  ProofGraph proof;                // the final Ljid proof over the base signature
  ProofGraph pre_lowered;          // before the conservativity translation
  TerminationCertificate cert;     // empty id when no buds were present
  Sequent endsequent;
};

// The full pipeline: local checks + GTC, stage, case->ind, bud elimination,
// grafting, destaging, conservativity lowering. Throws RuleError with stage
// provenance on failure.
CompileResult compile_proof(const ProofGraph& cyclic, const DefinitionSet& defs);

// Lemma-decrease audit data produced during compilation.
struct DecreaseCheck {
  int companion = 0;
  int assumption = 0;
  bool holds = false;
};
std::vector<DecreaseCheck> last_decrease_checks();

// (1) of the equivalence: replace every (Ind) by a (Case) cycle with buds.
ProofGraph embed_proof(const ProofGraph& ljid, const DefinitionSet& defs);

// Conservativity: lower N' and second-level stage predicates to the base
// signature by the tilde translation.
ProofGraph lower_proof(const ProofGraph& ljid, const DefinitionSet& defs,
                       const std::map<std::string, TerminationCertificate>& certs,
                       std::map<std::string, TerminationCertificate>& certs_out);

}  // namespace cyclind

#endif
