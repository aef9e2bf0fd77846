#ifndef CYCLIND_TRACE_HPP
#define CYCLIND_TRACE_HPP

#include <optional>
#include <vector>

#include "cyclind/proof.hpp"

namespace cyclind {

enum class Step : unsigned char { None = 0, Stay = 1, Prog = 2 };

// Matrix abstraction of the traces between two companion-indexed sequents.
// m[q2][q1] relates the q2-th inductive antecedent atom of the source (bottom)
// sequent to the q1-th of the target (top) sequent; Prog dominates Stay.
struct PathRelation {
  int src = 0;
  int dst = 0;
  int dw = 0;  // column count, kept explicitly so zero-row matrices compose
  std::vector<std::vector<Step>> m;

  int src_width() const { return static_cast<int>(m.size()); }
  int dst_width() const { return dw; }
  bool operator==(const PathRelation& o) const {
    return src == o.src && dst == o.dst && dw == o.dw && m == o.m;
  }
  bool operator<(const PathRelation& o) const;
};

PathRelation identity_relation(int comp, int width);
std::optional<PathRelation> compose(const PathRelation& r1, const PathRelation& r2);

struct ClosureSet {
  std::vector<PathRelation> rels;  // sorted, duplicate-free
  int generations = 0;             // least n with C_{n+1} = C_n
};

ClosureSet closure(const std::vector<PathRelation>& basics);

struct GtcResult {
  bool ok = false;
  std::optional<PathRelation> counterexample;  // offending idempotent self-loop
};

GtcResult gtc_check(const ClosureSet& c);

// Minimal n and diagonal position q with Prog at (q,q) in the idempotent power
// r^n; nullopt when no power ever progresses on the diagonal.
struct LoopWitness {
  int n = 0;
  int q = 0;
};
std::optional<LoopWitness> loop_witness(const PathRelation& r);

// Brute-force oracle: enumerate composable words over the basic relations
// (deduplicated by value, up to the given length bound) and demand that every
// self-loop word's trace graph has a cycle containing a progressing edge.
bool gtc_oracle(const std::vector<PathRelation>& basics, std::size_t max_len);

// ------------------------------------------------------------ from proofs

// Antecedent indices holding inductive (or stage-number) atoms.
std::vector<int> inductive_positions(const Sequent& s, const DefinitionSet& defs);

struct TracePair {
  int premise_index = 0;
  int parent_pos = 0;  // inductive ordinal in the conclusion
  int child_pos = 0;   // inductive ordinal in the premise
  bool progressing = false;
};

// Conclusion antecedent index -> premise antecedent index (-1 where consumed),
// plus the progressing (Case) pairs in absolute coordinates.
struct AnteIndexMap {
  std::vector<int> to;
  std::vector<std::pair<int, int>> prog;
};

AnteIndexMap ante_index_map(const Sequent& concl, const Rule& rule, int premise_index,
                            const DefinitionSet& defs);

std::vector<TracePair> trace_pairs(const ProofGraph& g, NodeId id, const DefinitionSet& defs);

// Step matrix from a node's conclusion to its premise_index-th premise.
PathRelation step_relation(const ProofGraph& g, NodeId id, int premise_index,
                           const DefinitionSet& defs);

struct TraceAnalysis {
  std::vector<NodeId> companions;  // sorted original node ids; index = companion number
  std::vector<int> widths;         // inductive-atom count per companion sequent
  int max_width = 0;               // the p of the certificate
  std::vector<PathRelation> basics;
  ClosureSet closed;
  bool gtc_ok = false;
  std::optional<PathRelation> counterexample;

  int companion_index(NodeId id) const;
};

TraceAnalysis analyze_traces(const ProofGraph& g, const DefinitionSet& defs);

}  // namespace cyclind

#endif
