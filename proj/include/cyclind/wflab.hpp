#ifndef CYCLIND_WFLAB_HPP
#define CYCLIND_WFLAB_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cyclind::wflab {

// Finite-model laboratory: executable semantics for the well-foundedness
// constructions (Kleene-Brouwer relations, monotonically-colored sequences,
// tree insertion) validated against brute force.

using Elem = unsigned;
using Seq = std::vector<Elem>;
using Rel = std::set<std::pair<Elem, Elem>>;
using SeqSet = std::set<Seq>;
using SeqRel = std::set<std::pair<Seq, Seq>>;

struct System {
  std::vector<Elem> universe;
  std::vector<Rel> rels;  // colored relations R_1..R_k
};

Rel rel_union(const System& s);

// Induction principle on a finite universe = no cycle in the digraph.
bool is_wellfounded(const std::vector<Elem>& universe, const Rel& r);

// n-fold composition, product, restriction, one-step extension.
Rel power(const Rel& r, unsigned n);
// Product of two systems over an encoded pair universe (i * |u2| + j).
Rel product2(const std::vector<Elem>& u1, const Rel& r1, const std::vector<Elem>& u2,
             const Rel& r2, std::vector<Elem>& universe_out);
Rel restrict_rel(const Rel& r, const std::set<Elem>& v);
// x >ext y iff y = x * <u> (within the given set).
SeqRel ext_relation(const SeqSet& t);

// Decreasing / decreasing-transitive sequences; requires an acyclic relation.
SeqSet ds(const std::vector<Elem>& u, const Rel& r);
SeqSet dt(const std::vector<Elem>& u, const Rel& r);

bool monoseq(const System& s, const Seq& x);
SeqSet ms(const System& s);
SeqSet ms_r(const System& s, Elem r);

// Kleene-Brouwer relation for a lifted tree and element-indexed relations.
bool kb_gt(const SeqSet& tree, const std::function<bool(Elem, Elem, Elem)>& gt_u, const Seq& x,
           const Seq& y);
SeqRel kb_relation(const SeqSet& tree, const std::function<bool(Elem, Elem, Elem)>& gt_u);

// The left-to-right / right-to-left sibling orders and their KB relations.
bool left_gt(const System& s, Elem u, Elem a, Elem b);
SeqRel kb1(const System& s, Elem r);
SeqRel kb2(const System& s, Elem r);
// KB over sequences of sequences (>KB2-sorted), compared pointwise by >KB1.
bool kb_main_gt(const System& s, Elem r, const std::vector<Seq>& x, const std::vector<Seq>& y);
bool kb_main_gt(const System& s, const SeqSet& tree, const std::vector<Seq>& x,
                const std::vector<Seq>& y);

// Tree insertion and the derived tree of a decreasing transitive sequence.
SeqSet insert_op(const System& s, Elem u, const SeqSet& t, const Seq& sigma);
SeqSet et(const System& s, const Seq& x);
std::vector<Seq> et2(const System& s, const Seq& x);
std::vector<Seq> et2(const System& s, const Seq& x, const SeqSet& tree);

// Ordered set subtraction making the colors pairwise disjoint.
System disjointify(const System& s);

struct PrOutcome {
  bool ok = false;                // all lemma-level assertions held
  bool union_acyclic = false;    // the final verdict
  std::string failed_lemma;      // first failing assertion, empty when ok
  Seq witness;                   // a longest decreasing transitive sequence
  std::size_t et2_checks = 0;    // one-step extensions tested for Lemma ET
};

// Executes the construction chain, asserting each lemma's conclusion:
// disjointify, MS enumeration, KB relations, insertion/ET monotonicity,
// then the acyclicity verdict for the union.
PrOutcome pr_check(const System& s);

// ------------------------------------------------------------ text formats

std::string to_string(const System& s);
System parse_system(const std::string& src);
SeqSet parse_tree(const std::string& src);

}  // namespace cyclind::wflab

#endif
