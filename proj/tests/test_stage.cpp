#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cyclind/stage.hpp"
#include "cyclind/text.hpp"

using namespace cyclind;

static std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

static DefinitionSet nat_defs() { return parse_defs(slurp(CORPUS_DIR "/nat.defs")); }

// Strip bud links: buds become assumptions (the whole-proof transform input).
static ProofGraph strip_buds(const ProofGraph& g) {
  ProofGraph out = g;
  for (auto& [bud, comp] : g.buds) {
    (void)comp;
    Rule r;
    r.tag = RuleTag::Assume;
    out.at(bud).rule = r;
    out.assumptions.insert(bud);
  }
  out.buds.clear();
  return out;
}

static void expect_clean(const ProofGraph& g, const DefinitionSet& d, CheckMode mode) {
  auto vs = check_proof(g, d, mode);
  for (const auto& v : vs) {
    CAPTURE(v.node);
    CAPTURE(v.rule);
    CHECK_MESSAGE(false, v.msg);
  }
  CHECK(vs.empty());
}

TEST_CASE("staging the even-or-odd proof") {
  DefinitionSet d = nat_defs();
  ProofGraph in = strip_buds(parse_proof(slurp(CORPUS_DIR "/even-or-odd.cp")));
  ensure_staging_preds(d, in);
  FreshGen fresh;
  ProofGraph g;
  ProofBuilder b(g, d, fresh);
  StagedProof sp = stage_proof(b, in);
  g.root = sp.root;
  expect_clean(g, d, CheckMode::CyclicLocal);
  CHECK(g.buds.empty());
  // root: N'(x, $k) |- or(ex v even'(x,v), ex v odd'(x,v))
  REQUIRE(sp.root_vars.size() == 1);
  Sequent want = circ(in.at(in.root).seq, sp.root_vars, d);
  CHECK(g.at(sp.root).seq == want);
  // one staged assumption whose Ineq is (v-hat = v, v > v1)
  REQUIRE(sp.assumptions.size() == 1);
  const StagedAssumption& a = sp.assumptions[0];
  REQUIRE(a.ineq.size() == 2);
  CHECK(!a.ineq[0].strict);
  CHECK(a.ineq[0].lhs == sp.root_vars[0]);
  CHECK(a.ineq[1].strict);
  CHECK(a.ineq[1].lhs == a.ineq[0].rhs);   // v > v1 bounds from the same v
  REQUIRE(a.vars.size() == 1);
  CHECK(a.ineq[1].rhs == a.vars[0]);       // the bud's stage variable
  // Lemma decrease at the relation level: Ineq entails the progressing cell.
  PathRelation rel;
  rel.src = rel.dst = 0;
  rel.m = {{Step::Prog}};
  rel.dw = 1;
  CHECK(ineq_entails(a.ineq, {sp.root_vars[0]}, {a.vars[0]}, rel));
  // and the threaded prefix sits verbatim in the assumption sequent
  const Sequent& leaf = g.at(a.leaf).seq;
  REQUIRE(leaf.ante.size() >= a.prefix.size());
  for (std::size_t i = 0; i < a.prefix.size(); i++) CHECK(leaf.ante[i] == a.prefix[i]);
}

TEST_CASE("staging add-n (Subst + HA leaves through the transform)") {
  DefinitionSet d = nat_defs();
  ProofGraph in = strip_buds(parse_proof(slurp(CORPUS_DIR "/add-n.cp")));
  ensure_staging_preds(d, in);
  FreshGen fresh;
  ProofGraph g;
  ProofBuilder b(g, d, fresh);
  StagedProof sp = stage_proof(b, in);
  g.root = sp.root;
  expect_clean(g, d, CheckMode::CyclicLocal);
  REQUIRE(sp.root_vars.size() == 2);
  REQUIRE(sp.assumptions.size() == 1);
  // the loop progresses in the second coordinate only
  PathRelation rel;
  rel.src = rel.dst = 0;
  rel.m = {{Step::Stay, Step::None}, {Step::None, Step::Prog}};
  rel.dw = 2;
  CHECK(ineq_entails(sp.assumptions[0].ineq, sp.root_vars, sp.assumptions[0].vars, rel));
  // the stay cell really is variable identity
  CHECK(sp.root_vars[0] == sp.assumptions[0].vars[0]);
}

TEST_CASE("staging the second-level proof") {
  DefinitionSet d = nat_defs();
  d.ensure_stage_pred("N'");
  ProofGraph in = strip_buds(parse_proof(slurp(CORPUS_DIR "/stage-in.cp")));
  ensure_staging_preds(d, in);  // brings in N''
  CHECK(d.has_pred("N''"));
  FreshGen fresh;
  ProofGraph g;
  ProofBuilder b(g, d, fresh);
  StagedProof sp = stage_proof(b, in);
  g.root = sp.root;
  expect_clean(g, d, CheckMode::CyclicLocal);
}

TEST_CASE("staging both subproofs of two-loops") {
  DefinitionSet d = nat_defs();
  ProofGraph whole = parse_proof(slurp(CORPUS_DIR "/two-loops.cp"));
  ensure_staging_preds(d, whole);
  auto subs = extract_subproofs(whole);
  REQUIRE(subs.size() == 2);
  for (auto& [comp, sub] : subs) {
    CAPTURE(comp);
    FreshGen fresh;
    ProofGraph g;
    ProofBuilder b(g, d, fresh);
    StagedProof sp = stage_proof(b, sub.graph);
    g.root = sp.root;
    expect_clean(g, d, CheckMode::CyclicLocal);
    REQUIRE(sp.assumptions.size() == 1);
    // Lemma decrease property against the analyzed path relation
    TraceAnalysis a = analyze_traces(whole, d);
    int j = a.companion_index(comp);
    for (const PathRelation& r : a.basics) {
      if (r.src != j || r.dst != j) continue;
      CHECK(ineq_entails(sp.assumptions[0].ineq, sp.root_vars, sp.assumptions[0].vars, r));
    }
  }
}

TEST_CASE("destage recovers the original sequent") {
  DefinitionSet d = nat_defs();
  // A bud-free Ljid-compatible proof: the x = 0 branch logic.
  // even(x), N(x) |- or(even(x), odd(x))
  ProofGraph in;
  {
    FreshGen fr;
    ProofBuilder bb(in, d, fr);
    Sequent s = parse_sequent("even(x), N(x) |- or(even(x), odd(x))");
    Rule orl;
    orl.tag = RuleTag::OrRl;
    Sequent inner = s;
    inner.succ = parse_formula("even(x)");
    in.root = bb.make(s, orl, {bb.axiom(inner)});
  }
  ensure_staging_preds(d, in);
  FreshGen fresh;
  ProofGraph g;
  ProofBuilder b(g, d, fresh);
  StagedProof sp = stage_proof(b, in);
  CHECK(sp.assumptions.empty());
  // No Case rules were used, so the staged proof is already Ljid.
  g.root = destage(b, sp.root, sp.root_vars, in.at(in.root).seq);
  expect_clean(g, d, CheckMode::Ljid);
  CHECK(g.at(g.root).seq == in.at(in.root).seq);
}
