#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "cyclind/proof.hpp"
#include "cyclind/text.hpp"
#include "cyclind/trace.hpp"

using namespace cyclind;

static std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

static DefinitionSet nat_defs() { return parse_defs(slurp(CORPUS_DIR "/nat.defs")); }

static ProofGraph load(const DefinitionSet& defs, const std::string& name) {
  ProofGraph g = parse_proof(slurp(std::string(CORPUS_DIR "/") + name));
  (void)defs;
  return g;
}

TEST_CASE("or-right premise regeneration") {
  DefinitionSet d = nat_defs();
  Sequent concl = parse_sequent("N(x) |- or(even(x), odd(x))");
  Rule r;
  r.tag = RuleTag::OrRl;
  auto prems = premises_of(concl, r, d);
  REQUIRE(prems.size() == 1);
  CHECK(prems[0] == parse_sequent("N(x) |- even(x)"));
  // wrong disjunct is a violation
  ProofGraph g;
  NodeId leaf = g.add(parse_sequent("N(x) |- odd(x)"), []{ Rule r; r.tag = RuleTag::Assume; return r; }(), {});
  g.assumptions.insert(leaf);
  NodeId root = g.add(concl, r, {leaf});
  g.root = root;
  auto vs = check_proof(g, d, CheckMode::CyclicLocal);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].node == root);
}

TEST_CASE("case premises follow the production shape") {
  DefinitionSet d = nat_defs();
  Sequent concl = parse_sequent("P(y), N(u) |- even(u)");
  d.declare_pred("P", 1, PredKind::Ordinary);
  Rule r;
  r.tag = RuleTag::Case;
  r.pos = 1;
  r.fresh = {{}, {"z"}};
  auto prems = premises_of(concl, r, d);
  REQUIRE(prems.size() == 2);
  CHECK(prems[0] == parse_sequent("P(y), eq(u, 0) |- even(u)"));
  CHECK(prems[1] == parse_sequent("P(y), eq(u, s(z)), N(z) |- even(u)"));
  // eigenvariable captured by the conclusion is rejected
  r.fresh = {{}, {"y"}};
  CHECK_THROWS_AS(premises_of(concl, r, d), RuleError);
}

TEST_CASE("corpus proofs check in cyclic mode") {
  DefinitionSet d = nat_defs();
  for (const char* name : {"even-or-odd.cp", "two-loops.cp", "add-n.cp"}) {
    CAPTURE(name);
    ProofGraph g = load(d, name);
    auto vs = check_proof(g, d, CheckMode::CyclicLocal);
    for (const auto& v : vs) {
      CAPTURE(v.node);
      CAPTURE(v.rule);
      CHECK_MESSAGE(false, v.msg);
    }
    CHECK(vs.empty());
    // and are rejected in induction mode (Case + bud)
    CHECK(!check_proof(g, d, CheckMode::Ljid).empty());
  }
}

TEST_CASE("stage-in proof uses a derived stage predicate") {
  DefinitionSet d = nat_defs();
  d.ensure_stage_pred("N'");
  ProofGraph g = load(d, "stage-in.cp");
  auto vs = check_proof(g, d, CheckMode::CyclicLocal);
  for (const auto& v : vs) CHECK_MESSAGE(false, v.rule, ": ", v.msg);
  CHECK(vs.empty());
}

TEST_CASE("bud sequent must equal its companion") {
  DefinitionSet d = nat_defs();
  ProofGraph g = load(d, "even-or-odd.cp");
  // mutate the bud's sequent
  for (auto& [bud, comp] : g.buds) {
    (void)comp;
    g.at(bud).seq.ante.push_back(parse_formula("N(x)"));
  }
  bool found = false;
  for (const auto& v : check_proof(g, d, CheckMode::CyclicLocal))
    if (v.msg.find("companion") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("assumption order is left to right") {
  DefinitionSet d = nat_defs();
  ProofGraph g;
  FreshGen fresh;
  Rule assume;
  assume.tag = RuleTag::Assume;
  NodeId a1 = g.add(parse_sequent("|- even(0)"), assume, {});
  NodeId a2 = g.add(parse_sequent("|- odd(s(0))"), assume, {});
  g.assumptions = {a1, a2};
  Rule andr;
  andr.tag = RuleTag::AndR;
  g.root = g.add(parse_sequent("|- and(even(0), odd(s(0)))"), andr, {a1, a2});
  auto as = assumption_instances(g);
  REQUIRE(as.size() == 2);
  CHECK(as[0].first == a1);
  CHECK(as[1].first == a2);
  (void)fresh;
}

TEST_CASE("parse-print round trip over the corpus") {
  for (const char* name : {"even-or-odd.cp", "two-loops.cp", "add-n.cp", "stage-in.cp"}) {
    CAPTURE(std::string(name));
    ProofGraph g = parse_proof(slurp(std::string(CORPUS_DIR "/") + name));
    std::string canonical = to_string(g);
    CHECK(to_string(parse_proof(canonical)) == canonical);
  }
  DefinitionSet d = parse_defs(slurp(CORPUS_DIR "/nat.defs"));
  std::string canonical = to_string(d);
  CHECK(to_string(parse_defs(canonical)) == canonical);
}

TEST_CASE("proof io round trip") {
  DefinitionSet d = nat_defs();
  ProofGraph g = load(d, "even-or-odd.cp");
  std::string text = to_string(g);
  ProofGraph g2 = parse_proof(text);
  CHECK(to_string(g2) == text);
  CHECK(check_proof(g2, d, CheckMode::CyclicLocal).empty());
  // canonicalization is stable and keeps the proof valid
  ProofGraph c = canonicalize(g);
  CHECK(c.root == 0);
  CHECK(check_proof(c, d, CheckMode::CyclicLocal).empty());
  CHECK(to_string(canonicalize(c)) == to_string(c));
}

TEST_CASE("subproof extraction and assumptions") {
  DefinitionSet d = nat_defs();
  ProofGraph g = load(d, "two-loops.cp");
  auto subs = extract_subproofs(g);
  REQUIRE(subs.size() == 2);
  for (auto& [comp, sp] : subs) {
    CAPTURE(comp);
    REQUIRE(sp.bud_of.size() == 1);
    // subproofs are bud-free and check with assumptions
    CHECK(sp.graph.buds.empty());
    CHECK(check_proof(sp.graph, d, CheckMode::CyclicLocal).empty());
    auto as = assumption_instances(sp.graph);
    REQUIRE(as.size() == 1);
    CHECK(as[0].second == g.at(comp).seq);
  }
  // proof with no buds has no subproofs
  ProofGraph tiny;
  tiny.root = tiny.add(parse_sequent("even(0) |- even(0)"), [] {
    Rule r;
    r.tag = RuleTag::Axiom;
    r.pos = 0;
    return r;
  }(), {});
  CHECK(extract_subproofs(tiny).empty());
  CHECK(assumption_instances(tiny).empty());
}

TEST_CASE("trace analysis of the corpus") {
  DefinitionSet d = nat_defs();
  SUBCASE("even-or-odd: single progressing loop") {
    ProofGraph g = load(d, "even-or-odd.cp");
    TraceAnalysis a = analyze_traces(g, d);
    REQUIRE(a.companions.size() == 1);
    CHECK(a.widths == std::vector<int>{1});
    REQUIRE(a.basics.size() == 1);
    CHECK(a.basics[0].m[0][0] == Step::Prog);
    CHECK(a.gtc_ok);
    CHECK(gtc_oracle(a.basics, 2 * a.closed.rels.size() + 2));
    auto w = loop_witness(a.basics[0]);
    REQUIRE(w.has_value());
    CHECK(w->n == 1);
    CHECK(w->q == 0);
  }
  SUBCASE("two-loops: two independent relations") {
    ProofGraph g = load(d, "two-loops.cp");
    TraceAnalysis a = analyze_traces(g, d);
    REQUIRE(a.companions.size() == 2);
    CHECK(a.basics.size() == 2);
    for (const auto& r : a.basics) CHECK(r.src == r.dst);
    CHECK(a.gtc_ok);
    // closure contains both loops (and nothing composable across them)
    CHECK(a.closed.rels.size() == 2);
  }
  SUBCASE("add-n: width-two loop progressing in one coordinate") {
    ProofGraph g = load(d, "add-n.cp");
    TraceAnalysis a = analyze_traces(g, d);
    REQUIRE(a.basics.size() == 1);
    CHECK(a.widths == std::vector<int>{2});
    CHECK(a.basics[0].m[0][0] == Step::Stay);
    CHECK(a.basics[0].m[1][1] == Step::Prog);
    CHECK(a.gtc_ok);
  }
}

TEST_CASE("gtc rejects a stay-only loop") {
  PathRelation r = identity_relation(0, 2);  // all-stay loop
  ClosureSet c = closure({r});
  GtcResult res = gtc_check(c);
  CHECK(!res.ok);
  REQUIRE(res.counterexample.has_value());
  CHECK(!gtc_oracle({r}, 6));
  // one progressing diagonal fixes it
  r.m[0][0] = Step::Prog;
  CHECK(gtc_check(closure({r})).ok);
  CHECK(gtc_oracle({r}, 6));
}

TEST_CASE("permuted loop needs a power for its witness") {
  // swap positions 0 and 1 with progress on one arc
  PathRelation r;
  r.src = r.dst = 0;
  r.m = {{Step::None, Step::Prog}, {Step::Stay, Step::None}};
  r.dw = 2;
  ClosureSet c = closure({r});
  CHECK(gtc_check(c).ok);
  auto w = loop_witness(r);
  REQUIRE(w.has_value());
  CHECK(w->n == 2);
}

TEST_CASE("composition semantics") {
  PathRelation id = identity_relation(0, 2);
  PathRelation r;
  r.src = r.dst = 0;
  r.m = {{Step::Prog, Step::None}, {Step::None, Step::Stay}};
  r.dw = 2;
  CHECK(*compose(id, r) == r);
  CHECK(*compose(r, id) == r);
  // (>).(=) chains give (>)
  PathRelation s = identity_relation(0, 2);
  auto rs = compose(r, s);
  REQUIRE(rs.has_value());
  CHECK(rs->m[0][0] == Step::Prog);
  // mismatched companions do not compose
  PathRelation t = identity_relation(1, 2);
  CHECK(!compose(r, t).has_value());
}

TEST_CASE("composition soundness on instantiated tuples") {
  // For all concrete tuple pairs over values <= 4: x >r1 z and z >r2 y imply
  // x >(r1;r2) y, reading Prog as strict decrease and Stay as equality.
  std::mt19937_64 rng(11);
  auto rand_rel = [&](int w1, int w2) {
    PathRelation r;
    r.src = 0;
    r.dst = 0;
    r.dw = w2;
    r.m.assign(w1, std::vector<Step>(w2, Step::None));
    for (auto& row : r.m)
      for (auto& cell : row) cell = static_cast<Step>(rng() % 3);
    return r;
  };
  auto holds = [](const PathRelation& r, const std::vector<int>& x, const std::vector<int>& y) {
    for (int a = 0; a < r.src_width(); a++)
      for (int b = 0; b < r.dst_width(); b++) {
        if (r.m[a][b] == Step::Prog && !(x[a] > y[b])) return false;
        if (r.m[a][b] == Step::Stay && !(x[a] == y[b])) return false;
      }
    return true;
  };
  const int w = 2, range = 4;
  for (int iter = 0; iter < 50; iter++) {
    PathRelation r1 = rand_rel(w, w), r2 = rand_rel(w, w);
    PathRelation r12 = *compose(r1, r2);
    std::vector<int> x(w), z(w), y(w);
    for (x[0] = 0; x[0] <= range; x[0]++)
      for (x[1] = 0; x[1] <= range; x[1]++)
        for (z[0] = 0; z[0] <= range; z[0]++)
          for (z[1] = 0; z[1] <= range; z[1]++)
            for (y[0] = 0; y[0] <= range; y[0]++)
              for (y[1] = 0; y[1] <= range; y[1]++)
                if (holds(r1, x, z) && holds(r2, z, y)) CHECK(holds(r12, x, y));
  }
}

TEST_CASE("closure is idempotent and order independent") {
  std::mt19937_64 rng(23);
  for (int iter = 0; iter < 30; iter++) {
    std::vector<PathRelation> basics;
    int comps = 1 + static_cast<int>(rng() % 3);
    std::vector<int> widths;
    for (int i = 0; i < comps; i++) widths.push_back(1 + static_cast<int>(rng() % 3));
    int nrels = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < nrels; i++) {
      PathRelation r;
      r.src = static_cast<int>(rng() % comps);
      r.dst = static_cast<int>(rng() % comps);
      r.dw = widths[r.dst];
      r.m.assign(widths[r.src], std::vector<Step>(widths[r.dst], Step::None));
      for (auto& row : r.m)
        for (auto& cell : row) cell = static_cast<Step>(rng() % 3);
      basics.push_back(std::move(r));
    }
    ClosureSet c = closure(basics);
    // compose-closing adds nothing
    for (const auto& x : c.rels)
      for (const auto& y : c.rels)
        if (auto z = compose(x, y))
          CHECK(std::binary_search(c.rels.begin(), c.rels.end(), *z));
    // shuffled input produces the identical closure
    std::vector<PathRelation> shuffled = basics;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(closure(shuffled).rels == c.rels);
  }
}

TEST_CASE("gtc agrees with the brute-force oracle on random systems") {
  std::mt19937_64 rng(31);
  int disagreements = 0;
  for (int iter = 0; iter < 300; iter++) {
    int comps = 1 + static_cast<int>(rng() % 3);
    std::vector<int> widths;
    for (int i = 0; i < comps; i++) widths.push_back(1 + static_cast<int>(rng() % 3));
    std::vector<PathRelation> basics;
    int nrels = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < nrels; i++) {
      PathRelation r;
      r.src = static_cast<int>(rng() % comps);
      r.dst = static_cast<int>(rng() % comps);
      r.dw = widths[r.dst];
      r.m.assign(widths[r.src], std::vector<Step>(widths[r.dst], Step::None));
      for (auto& row : r.m)
        for (auto& cell : row) {
          int roll = static_cast<int>(rng() % 10);
          cell = roll < 4 ? Step::None : roll < 7 ? Step::Stay : Step::Prog;
        }
      basics.push_back(std::move(r));
    }
    ClosureSet c = closure(basics);
    bool mine = gtc_check(c).ok;
    bool oracle = gtc_oracle(basics, 2 * c.rels.size() + 2);
    if (mine != oracle) disagreements++;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("a companion reachable only through its bud is still checked") {
  DefinitionSet d = nat_defs();
  ProofGraph g;
  // root: Wk from a bud; the companion hangs off the bud link only and its
  // subtree is invalid (wrong axiom position).
  Rule ax;
  ax.tag = RuleTag::Axiom;
  ax.pos = 1;  // out of range on purpose
  NodeId broken = g.add(parse_sequent("even(x) |- even(x)"), ax, {});
  Rule wk;
  wk.tag = RuleTag::Wk;
  wk.inserted = {0};
  NodeId comp = g.add(parse_sequent("N(y), even(x) |- even(x)"), wk, {broken});
  Rule bud;
  bud.tag = RuleTag::Bud;
  NodeId b = g.add(parse_sequent("N(y), even(x) |- even(x)"), bud, {});
  g.buds[b] = comp;
  Rule wk2;
  wk2.tag = RuleTag::Wk;
  wk2.inserted = {0};
  g.root = g.add(parse_sequent("odd(z), N(y), even(x) |- even(x)"), wk2, {b});
  auto vs = check_proof(g, d, CheckMode::CyclicLocal);
  bool found = false;
  for (const auto& v : vs)
    if (v.node == broken) found = true;
  CHECK(found);
}

TEST_CASE("rule-level negatives") {
  DefinitionSet d = nat_defs();
  d.ensure_stage_pred("N'");
  auto reject = [&](const char* concl, Rule r, std::vector<const char*> premises) {
    ProofGraph g;
    std::vector<NodeId> kids;
    for (const char* p : premises) {
      Rule assume;
      assume.tag = RuleTag::Assume;
      NodeId id = g.add(parse_sequent(p), assume, {});
      g.assumptions.insert(id);
      kids.push_back(id);
    }
    g.root = g.add(parse_sequent(concl), r, kids);
    CHECK(!check_proof(g, d, CheckMode::Ljid).empty());
  };
  // AllR: eigenvariable captured by the conclusion
  {
    Rule r;
    r.tag = RuleTag::AllR;
    r.var = "x";
    reject("N(x) |- all(y, eq(y, y))", r, {"N(x) |- eq(x, x)"});
  }
  // ExL: eigenvariable occurs in the succedent
  {
    Rule r;
    r.tag = RuleTag::ExL;
    r.pos = 0;
    r.var = "w";
    reject("ex(v, N(v)) |- N(w)", r, {"N(w) |- N(w)"});
  }
  // Subst: conclusion is not the substituted premise
  {
    Rule r;
    r.tag = RuleTag::Subst;
    r.subst = {{"x", tzero()}};
    reject("N(s(0)) |- N(s(0))", r, {"N(x) |- N(x)"});
  }
  // Prod: conclusion does not match the production
  {
    Rule r;
    r.tag = RuleTag::Prod;
    r.pred = "even";
    r.prod_index = 0;
    reject("|- even(s(0))", r, {});
  }
  // Cut: wrong premise shape
  {
    Rule r;
    r.tag = RuleTag::Cut;
    r.pos = 0;
    r.formula = parse_formula("even(0)");
    reject("N(z) |- N(z)", r, {"N(z) |- odd(0)", "even(0), N(z) |- N(z)"});
  }
  // EqR on distinct terms
  {
    Rule r;
    r.tag = RuleTag::EqR;
    reject("|- eq(0, s(0))", r, {});
  }
  // Ind: succedent is not the induction-formula instance
  {
    Rule r;
    r.tag = RuleTag::Ind;
    r.pos = 0;
    r.ind["N"] = IndFormula{{"z"}, parse_formula("nonneg(z)")};
    r.fresh = {{}, {"q"}};
    reject("N(a) |- even(a)", r,
           {"|- nonneg(0)", "nonneg(q) |- nonneg(s(q))"});
  }
  // HAAx: a false arithmetic statement
  {
    Rule r;
    r.tag = RuleTag::HAAx;
    reject("N(x) |- eq(s(x), x)", r, {});
  }
  // TermAx without a certificate registry entry
  {
    ProofGraph g;
    Rule r;
    r.tag = RuleTag::TermAx;
    r.cert = "missing";
    r.g = IndFormula{{"a", "b"}, parse_formula("eq(a, a)")};
    Sequent s;
    s.succ = parse_formula("imp(eq(0, 0), eq(0, 0))");
    g.root = g.add(s, r, {});
    CHECK(!check_proof(g, d, CheckMode::Ljid).empty());
  }
}
