#ifndef CYCLIND_PROOF_HPP
#define CYCLIND_PROOF_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cyclind/defs.hpp"
#include "cyclind/syntax.hpp"

namespace cyclind {

enum class RuleTag {
  Axiom,
  BotL,
  EqR,
  HAAx,
  TermAx,
  Assume,
  Bud,
  AndL,
  AndR,
  OrL,
  OrRl,
  OrRr,
  ImpL,
  ImpR,
  NegL,
  NegR,
  AllL,
  AllR,
  ExL,
  ExR,
  EqL,
  Cut,
  Wk,
  Subst,
  Prod,
  Case,
  Ind,
};

const char* rule_name(RuleTag t);
std::optional<RuleTag> rule_from_name(const std::string& s);

struct IndFormula {
  std::vector<std::string> params;
  Formula body;

  bool operator==(const IndFormula& o) const { return params == o.params && body == o.body; }
};

Formula apply_ind(const IndFormula& f, const std::vector<Term>& args);

// Instantiation data. Only the fields relevant to the tag are meaningful; the
// rule plus the conclusion determine the premises (checkability).
struct Rule {
  RuleTag tag = RuleTag::Axiom;
  int pos = -1;        // principal antecedent position
  int target = -1;     // EqL: rewritten formula (-1 = succedent, else index)
  bool ltr = true;     // EqL direction (replace lhs by rhs when true)
  Term term;           // AllL / ExR witness
  std::string var;     // AllR / ExL eigenvariable
  Formula formula;     // Cut formula
  VarSubst subst;      // Subst / Prod instantiation
  std::string pred;    // Prod / Case / Ind
  int prod_index = -1; // Prod
  std::vector<std::vector<std::string>> fresh;  // Case / Ind: per production
  std::map<std::string, IndFormula> ind;        // Ind: per block predicate
  std::vector<int> inserted;                    // Wk: conclusion positions added
  bool wk_succ = false;                         // Wk: premise succedent was empty
  std::string cert;                             // TermAx certificate id
  IndFormula g;                                 // TermAx: the induction target
};

using NodeId = std::uint32_t;

struct ProofNode {
  Sequent seq;
  Rule rule;
  std::vector<NodeId> premises;
};

struct ProofGraph {
  std::vector<ProofNode> nodes;
  NodeId root = 0;
  std::map<NodeId, NodeId> buds;  // bud leaf -> companion
  std::set<NodeId> assumptions;

  NodeId add(ProofNode n) {
    nodes.push_back(std::move(n));
    return static_cast<NodeId>(nodes.size() - 1);
  }
  NodeId add(Sequent s, Rule r, std::vector<NodeId> ps) {
    return add(ProofNode{std::move(s), std::move(r), std::move(ps)});
  }
  const ProofNode& at(NodeId id) const;
  ProofNode& at(NodeId id);
};

enum class CheckMode { Ljid, CyclicLocal };

struct Violation {
  NodeId node = 0;
  std::string rule;
  std::string msg;
};

struct RuleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Premise sequents dictated by (conclusion, rule). Throws RuleError on shape
// violations. Subst/Bud/Assume are validated at the graph level instead.
std::vector<Sequent> premises_of(const Sequent& concl, const Rule& rule,
                                 const DefinitionSet& defs);

// Validates Ind(U,>,G) leaves against an attached certificate; returns "" when
// the sequent is licensed. Provided by the certificate module via check_proof.
using TermAxValidator = std::function<std::string(const Rule&, const Sequent&)>;

std::vector<Violation> check_rule(const ProofGraph& g, NodeId id, const DefinitionSet& defs,
                                  CheckMode mode, const TermAxValidator& termax);
std::vector<Violation> check_proof(const ProofGraph& g, const DefinitionSet& defs, CheckMode mode,
                                   const TermAxValidator& termax = nullptr);

// Bud-free subproof rooted at a companion (tree copy; buds become assumptions).
struct Subproof {
  ProofGraph graph;
  // assumption leaf id in `graph` -> original bud id in the source graph
  std::map<NodeId, NodeId> bud_of;
};

// companion id -> its subproof, for every companion of the graph.
std::map<NodeId, Subproof> extract_subproofs(const ProofGraph& g);

// Open assumptions in left-to-right leaf order.
std::vector<std::pair<NodeId, Sequent>> assumption_instances(const ProofGraph& g);

// Reachable ids from the root via premises (bud links excluded), preorder.
std::vector<NodeId> reachable_preorder(const ProofGraph& g);

// Renumber to preorder ids, dropping unreachable nodes. Root becomes 0.
ProofGraph canonicalize(const ProofGraph& g);

// ------------------------------------------------------------ proof text io

std::string to_string(const ProofGraph& g);
ProofGraph parse_proof(const std::string& src);

}  // namespace cyclind

#endif
