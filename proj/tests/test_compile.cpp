#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cyclind/compile.hpp"
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

static void expect_clean(const ProofGraph& g, const DefinitionSet& d, CheckMode mode,
                         const TermAxValidator& v = nullptr) {
  auto vs = check_proof(g, d, mode, v);
  for (const auto& viol : vs) {
    CAPTURE(viol.node);
    CAPTURE(viol.rule);
    CHECK_MESSAGE(false, viol.msg);
  }
  CHECK(vs.empty());
}

TEST_CASE("certificate io and validation") {
  DefinitionSet d = nat_defs();
  ProofGraph g = parse_proof(slurp(CORPUS_DIR "/even-or-odd.cp"));
  TraceAnalysis ta = analyze_traces(g, d);
  REQUIRE(ta.gtc_ok);
  TerminationCertificate c = make_certificate(ta);
  CHECK(validate_certificate(c) == "");
  TerminationCertificate c2 = parse_certificate(to_string(c));
  CHECK(to_string(c2) == to_string(c));
  CHECK(c2.id == c.id);
  // tampering is caught
  TerminationCertificate bad = c;
  bad.witnesses.clear();
  CHECK(validate_certificate(bad) != "");
  TerminationCertificate bad2 = c;
  REQUIRE(!bad2.closed.rels.empty());
  bad2.closed.rels.pop_back();
  CHECK(validate_certificate(bad2) != "");
}

TEST_CASE("case_to_ind on the even-or-odd subproof") {
  DefinitionSet d = nat_defs();
  ProofGraph whole = parse_proof(slurp(CORPUS_DIR "/even-or-odd.cp"));
  auto subs = extract_subproofs(whole);
  REQUIRE(subs.size() == 1);
  ProofGraph g = subs.begin()->second.graph;
  FreshGen fresh;
  {
    std::set<std::string> fv;
    for (const ProofNode& n : g.nodes) free_vars(n.seq, fv);
    fresh.absorb(fv);
  }
  ProofBuilder b(g, d, fresh);
  std::map<NodeId, NodeId> lm;
  NodeId root = case_to_ind(b, g.root, lm);
  g.root = root;
  expect_clean(g, d, CheckMode::Ljid);
  // conclusion unchanged, assumption unchanged
  CHECK(g.at(root).seq == whole.at(whole.root).seq);
  auto as = assumption_instances(g);
  REQUIRE(as.size() == 1);
  CHECK(as[0].second == whole.at(whole.root).seq);
  // a proof without Case nodes is returned unchanged
  ProofGraph tiny;
  FreshGen f2;
  ProofBuilder b2(tiny, d, f2);
  NodeId leaf = b2.axiom(parse_sequent("even(x) |- even(x)"));
  tiny.root = leaf;
  std::map<NodeId, NodeId> lm2;
  CHECK(case_to_ind(b2, leaf, lm2) == leaf);
}

TEST_CASE("compile even-or-odd end to end") {
  DefinitionSet d = nat_defs();
  ProofGraph g = parse_proof(slurp(CORPUS_DIR "/even-or-odd.cp"));
  CompileResult r = compile_proof(g, d);
  CHECK(r.endsequent == g.at(g.root).seq);
  CHECK(r.proof.at(r.proof.root).seq == r.endsequent);
  CHECK(r.proof.buds.empty());
  CHECK(assumption_instances(r.proof).empty());
  DefinitionSet d2 = nat_defs();
  ensure_staging_preds(d2, r.proof);
  std::map<std::string, TerminationCertificate> reg{{r.cert.id, r.cert}};
  expect_clean(r.proof, d2, CheckMode::Ljid, certificate_validator(reg));
  // every companion-to-assumption path satisfied Lemma decrease
  auto checks = last_decrease_checks();
  CHECK(!checks.empty());
  for (const auto& c : checks) CHECK(c.holds);
}

TEST_CASE("compile the remaining corpus") {
  for (const char* name :
       {"two-loops.cp", "add-n.cp", "stage-in.cp", "even-nonneg.cp", "odd-zero.cp"}) {
    CAPTURE(name);
    DefinitionSet d = nat_defs();
    d.ensure_stage_pred("N'");
    ProofGraph g = parse_proof(slurp(std::string(CORPUS_DIR "/") + name));
    CompileResult r = compile_proof(g, d);
    CHECK(r.proof.at(r.proof.root).seq == r.endsequent);
    DefinitionSet d2 = nat_defs();
    d2.ensure_stage_pred("N'");
    ensure_staging_preds(d2, r.proof);
    std::map<std::string, TerminationCertificate> reg{{r.cert.id, r.cert}};
    expect_clean(r.proof, d2, CheckMode::Ljid, certificate_validator(reg));
    for (const auto& c : last_decrease_checks()) CHECK(c.holds);
  }
}

TEST_CASE("embed a hand-written induction proof") {
  DefinitionSet d = nat_defs();
  // N(a) |- nonneg(a) via (Ind N) with F(z) = nonneg(z)
  ProofGraph g;
  FreshGen fresh;
  ProofBuilder b(g, d, fresh);
  Rule ind;
  ind.tag = RuleTag::Ind;
  ind.pos = 0;
  ind.ind["N"] = IndFormula{{"z"}, parse_formula("nonneg(z)")};
  ind.fresh = {{}, {"y"}};
  Sequent concl = parse_sequent("N(a) |- nonneg(a)");
  auto minors = premises_of(concl, ind, d);
  std::vector<NodeId> ms;
  {
    Rule prod;
    prod.tag = RuleTag::Prod;
    prod.pred = "nonneg";
    prod.prod_index = 0;
    ms.push_back(b.make(minors[0], prod, {}));
  }
  {
    Rule prod;
    prod.tag = RuleTag::Prod;
    prod.pred = "nonneg";
    prod.prod_index = 1;
    prod.subst = {{"x", tvar("y")}};
    auto w = premises_of(minors[1], prod, d);
    ms.push_back(b.make(minors[1], prod, {b.axiom(w[0])}));
  }
  g.root = b.make(concl, ind, ms);
  expect_clean(g, d, CheckMode::Ljid);

  ProofGraph cyc = embed_proof(g, d);
  expect_clean(cyc, d, CheckMode::CyclicLocal);
  CHECK(cyc.at(cyc.root).seq == concl);
  CHECK(!cyc.buds.empty());
  TraceAnalysis ta = analyze_traces(cyc, d);
  CHECK(ta.gtc_ok);
}

TEST_CASE("embed compiled corpus proofs (round trip)") {
  for (const char* name : {"even-or-odd.cp", "add-n.cp"}) {
    CAPTURE(std::string(name));
    DefinitionSet d = nat_defs();
    ProofGraph g = parse_proof(slurp(std::string(CORPUS_DIR "/") + name));
    CompileResult r = compile_proof(g, d);
    DefinitionSet d2 = nat_defs();
    ensure_staging_preds(d2, r.proof);
    ProofGraph cyc = embed_proof(r.proof, d2);
    CHECK(cyc.at(cyc.root).seq == r.endsequent);
    std::map<std::string, TerminationCertificate> reg{{r.cert.id, r.cert}};
    auto vs = check_proof(cyc, d2, CheckMode::CyclicLocal, certificate_validator(reg));
    for (const auto& v : vs) {
      CAPTURE(v.node);
      CAPTURE(v.rule);
      CHECK_MESSAGE(false, v.msg);
    }
    TraceAnalysis ta = analyze_traces(cyc, d2);
    CHECK(ta.gtc_ok);
  }
}

TEST_CASE("gtc-failing input is rejected before transformation") {
  DefinitionSet d = nat_defs();
  ProofGraph g = parse_proof(slurp(CORPUS_DIR "/stay-loop.cp"));
  CHECK(check_proof(g, d, CheckMode::CyclicLocal).empty());
  TraceAnalysis a = analyze_traces(g, d);
  CHECK(!a.gtc_ok);
  REQUIRE(a.counterexample.has_value());
  CHECK(a.counterexample->m[0][0] == Step::Stay);
  CHECK_THROWS_WITH_AS(compile_proof(g, d), "compile: global trace condition fails", RuleError);
}

TEST_CASE("bud-free cyclic proof compiles to an essentially-identity result") {
  DefinitionSet d = nat_defs();
  // one (Case N), closed on both branches, no cycles
  ProofGraph g;
  FreshGen fresh;
  ProofBuilder b(g, d, fresh);
  Rule caser;
  caser.tag = RuleTag::Case;
  caser.pos = 0;
  caser.fresh = {{}, {"y"}};
  Sequent concl = parse_sequent("N(u) |- or(eq(u, 0), not(eq(u, 0)))");
  auto want = premises_of(concl, caser, d);
  std::vector<NodeId> kids;
  {
    Rule orl;
    orl.tag = RuleTag::OrRl;
    auto w = premises_of(want[0], orl, d);
    kids.push_back(b.make(want[0], orl, {b.axiom(w[0])}));
  }
  {
    Rule orr;
    orr.tag = RuleTag::OrRr;
    auto w = premises_of(want[1], orr, d);
    // not(eq(u,0)) from u = s(y): the theory oracle decides it
    kids.push_back(b.make(want[1], orr, {b.haax(w[0])}));
  }
  g.root = b.make(concl, caser, kids);
  CHECK(check_proof(g, d, CheckMode::CyclicLocal).empty());
  CompileResult r = compile_proof(g, d);
  CHECK(r.cert.id.empty());
  CHECK(r.proof.at(r.proof.root).seq == concl);
  DefinitionSet d2 = nat_defs();
  ensure_staging_preds(d2, r.proof);
  expect_clean(r.proof, d2, CheckMode::Ljid);
}

TEST_CASE("arity mismatches are rejected by well-formedness checking") {
  DefinitionSet d = nat_defs();
  CHECK(d.check_formula(fatom("N", {tvar("x"), tvar("y")})) != "");
  CHECK(d.check_formula(fatom("mystery", {tvar("x")})) != "");
  CHECK(d.check_term(tapp("cons", {tvar("x")})) != "");
  CHECK(d.check_formula(fatom("even", {tvar("x")})) == "");
}

TEST_CASE("trace pairs per rule") {
  DefinitionSet d = nat_defs();
  ProofGraph g;
  // (Wk): existing inductive atoms stay
  Rule assume;
  assume.tag = RuleTag::Assume;
  NodeId p1 = g.add(parse_sequent("N(x) |- even(x)"), assume, {});
  Rule wk;
  wk.tag = RuleTag::Wk;
  wk.inserted = {0};
  NodeId n1 = g.add(parse_sequent("even(y), N(x) |- even(x)"), wk, {p1});
  auto tp1 = trace_pairs(g, n1, d);
  REQUIRE(tp1.size() == 1);
  CHECK(tp1[0].parent_pos == 1);  // N(x) is the second inductive atom below
  CHECK(tp1[0].child_pos == 0);
  CHECK(!tp1[0].progressing);
  // (AndR): both premises share the antecedent traces
  NodeId q1 = g.add(parse_sequent("N(x) |- even(x)"), assume, {});
  NodeId q2 = g.add(parse_sequent("N(x) |- odd(x)"), assume, {});
  Rule andr;
  andr.tag = RuleTag::AndR;
  NodeId n2 = g.add(parse_sequent("N(x) |- and(even(x), odd(x))"), andr, {q1, q2});
  auto tp2 = trace_pairs(g, n2, d);
  REQUIRE(tp2.size() == 2);
  for (const auto& t : tp2) {
    CHECK(t.parent_pos == 0);
    CHECK(t.child_pos == 0);
    CHECK(!t.progressing);
  }
}
