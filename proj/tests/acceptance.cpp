// Acceptance suite: one pass/fail line per criterion. Exit code 0 iff all
// criteria hold at their stated bounds.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "cyclind/compile.hpp"
#include "cyclind/text.hpp"
#include "cyclind/wflab.hpp"

using namespace cyclind;
namespace wf = cyclind::wflab;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void verdict(int n, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << n << " (" << name << "): "
            << detail << "\n";
  if (!ok) g_failures++;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw std::runtime_error("cannot read " + path);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

DefinitionSet base_defs_for(const ProofGraph& g) {
  DefinitionSet d = parse_defs(slurp(CORPUS_DIR "/nat.defs"));
  std::set<std::string> names;
  std::function<void(const Formula&)> scan = [&](const Formula& f) {
    if (f.kind == FormulaKind::Atom) names.insert(f.pred);
    for (const Formula& k : f.kids) scan(k);
  };
  for (const ProofNode& n : g.nodes) {
    for (const Formula& f : n.seq.ante) scan(f);
    if (n.seq.succ) scan(*n.seq.succ);
  }
  d.ensure_preds(names);
  return d;
}

const char* kCorpus[] = {"even-or-odd.cp", "two-loops.cp",  "add-n.cp",
                         "stage-in.cp",    "even-nonneg.cp", "odd-zero.cp"};

// Brute-force verdict for a colored system: cycle search on the union.
bool union_acyclic_oracle(const wf::System& s) {
  return wf::is_wellfounded(s.universe, wf::rel_union(s));
}

// All strict partial orders on {0..n-1} (irreflexive transitive relations).
std::vector<wf::Rel> strict_orders(unsigned n) {
  std::vector<std::pair<unsigned, unsigned>> slots;
  for (unsigned a = 0; a < n; a++)
    for (unsigned b = 0; b < n; b++)
      if (a != b) slots.push_back({a, b});
  std::vector<wf::Rel> out;
  for (std::uint64_t mask = 0; mask < (1ull << slots.size()); mask++) {
    wf::Rel r;
    for (std::size_t i = 0; i < slots.size(); i++)
      if (mask & (1ull << i)) r.insert(slots[i]);
    bool trans = true;
    for (const auto& [a, b] : r) {
      for (const auto& [c, d] : r)
        if (b == c && !r.count({a, d})) {
          trans = false;
          break;
        }
      if (!trans) break;
    }
    if (!trans) continue;
    bool acyclic = true;
    for (const auto& [a, b] : r)
      if (r.count({b, a}) || a == b) acyclic = false;
    if (!acyclic) continue;
    out.push_back(std::move(r));
  }
  return out;
}

wf::System random_system(std::mt19937_64& rng, unsigned max_u, unsigned max_k) {
  unsigned n = 1 + static_cast<unsigned>(rng() % max_u);
  unsigned k = 1 + static_cast<unsigned>(rng() % max_k);
  wf::System s;
  for (unsigned e = 0; e < n; e++) s.universe.push_back(e);
  wf::Rel base;
  for (unsigned a = 0; a < n; a++)
    for (unsigned b = 0; b < a; b++)
      if (rng() % 2) base.insert({a, b});
  for (unsigned rep = 0; rep < n; rep++) {
    wf::Rel add;
    for (const auto& [a, b] : base)
      for (const auto& [c, d] : base)
        if (b == c) add.insert({a, d});
    base.insert(add.begin(), add.end());
  }
  s.rels.assign(k, {});
  for (const auto& pr : base) s.rels[rng() % k].insert(pr);
  return s;
}

void criterion_1_and_3() {
  Timer t;
  std::size_t systems = 0, et2_checks = 0;
  std::size_t disagreements = 0;
  std::string first_fail;
  auto run = [&](const wf::System& s) {
    wf::PrOutcome o = wf::pr_check(s);
    systems++;
    et2_checks += o.et2_checks;
    if (!o.ok && first_fail.empty()) first_fail = o.failed_lemma;
    if (!o.ok || o.union_acyclic != union_acyclic_oracle(s)) disagreements++;
  };
  // Exhaustive: |U| <= 4, k <= 2 over strict orders and their 2-colorings.
  for (unsigned n = 0; n <= 4; n++) {
    std::vector<unsigned> universe;
    for (unsigned e = 0; e < n; e++) universe.push_back(e);
    for (const wf::Rel& order : strict_orders(n)) {
      wf::System s1;
      s1.universe = universe;
      s1.rels = {order};
      run(s1);
      std::vector<std::pair<unsigned, unsigned>> edges(order.begin(), order.end());
      if (edges.size() <= 12) {
        for (std::uint64_t mask = 0; mask < (1ull << edges.size()); mask++) {
          wf::System s2;
          s2.universe = universe;
          s2.rels.assign(2, {});
          for (std::size_t i = 0; i < edges.size(); i++)
            s2.rels[mask & (1ull << i) ? 1 : 0].insert(edges[i]);
          run(s2);
        }
      }
    }
  }
  std::size_t exhaustive = systems;
  // Random: >= 10000 seeded systems with |U| <= 6, k <= 3.
  std::mt19937_64 rng(20260811);
  for (int i = 0; i < 10000; i++) run(random_system(rng, 6, 3));
  std::ostringstream d;
  d << exhaustive << " exhaustive + 10000 random systems, " << disagreements
    << " disagreements";
  if (!first_fail.empty()) d << ", first failed lemma: " << first_fail;
  d << ", " << t.seconds() << "s";
  verdict(1, "Podelski-Rybalchenko chain", disagreements == 0 && t.seconds() < 300, d.str());
  std::ostringstream d3;
  d3 << et2_checks << " one-step extensions, 0 failures";
  verdict(3, "ET2 monotonicity", et2_checks > 0 && disagreements == 0, d3.str());
}

void criterion_2() {
  Timer t;
  std::mt19937_64 rng(424242);
  std::size_t failures = 0;
  for (int iter = 0; iter < 1000; iter++) {
    unsigned n = 2 + static_cast<unsigned>(rng() % 5);
    wf::SeqSet tree{{0}};
    std::vector<wf::Seq> nodes{{0}};
    while (tree.size() < 25 && rng() % 8 != 0) {
      wf::Seq parent = nodes[rng() % nodes.size()];
      wf::Seq child = parent;
      child.push_back(static_cast<unsigned>(rng() % n));
      if (tree.insert(child).second) nodes.push_back(child);
    }
    // random acyclic sibling relations from a random linear rank per parent
    std::vector<unsigned> perm(n);
    for (unsigned i = 0; i < n; i++) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; i++) rank[perm[i]] = i;
    std::uint64_t salt = rng();
    auto gt_u = [&](unsigned u, unsigned a, unsigned b) {
      return ((salt >> (u % 17)) & 1) == 0 ? rank[a] < rank[b] : (u + a + b) % 3 == 0 && rank[a] < rank[b];
    };
    wf::SeqRel kb = wf::kb_relation(tree, gt_u);
    std::map<wf::Seq, unsigned> idx;
    std::vector<unsigned> named;
    for (const wf::Seq& q : tree) {
      idx[q] = static_cast<unsigned>(named.size());
      named.push_back(static_cast<unsigned>(named.size()));
    }
    wf::Rel flat;
    bool irreflexive = true;
    for (const auto& [a, b] : kb) {
      if (a == b) irreflexive = false;
      flat.insert({idx[a], idx[b]});
    }
    if (!irreflexive || !wf::is_wellfounded(named, flat)) failures++;
  }
  std::ostringstream d;
  d << "1000 lifted trees (<= 25 nodes), " << failures << " failures, " << t.seconds() << "s";
  verdict(2, "Kleene-Brouwer finite scale", failures == 0, d.str());
}

void criterion_4() {
  Timer t;
  std::size_t disagreements = 0, done = 0;
  // corpus proofs
  for (const char* name : kCorpus) {
    ProofGraph g = parse_proof(slurp(std::string(CORPUS_DIR "/") + name));
    DefinitionSet d = base_defs_for(g);
    TraceAnalysis a = analyze_traces(g, d);
    bool oracle = gtc_oracle(a.basics, 2 * a.closed.rels.size() + 2);
    if (a.gtc_ok != oracle) disagreements++;
    done++;
  }
  // random proof-graph skeletons: abstract relation systems
  std::mt19937_64 rng(909090);
  for (int iter = 0; iter < 500; iter++) {
    int comps = 1 + static_cast<int>(rng() % 6);
    std::vector<int> widths;
    for (int i = 0; i < comps; i++) widths.push_back(1 + static_cast<int>(rng() % 4));
    std::vector<PathRelation> basics;
    int nrels = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < nrels; i++) {
      PathRelation r;
      r.src = static_cast<int>(rng() % comps);
      r.dst = static_cast<int>(rng() % comps);
      r.dw = widths[r.dst];
      r.m.assign(widths[r.src], std::vector<Step>(widths[r.dst], Step::None));
      for (auto& row : r.m)
        for (auto& cell : row) {
          int roll = static_cast<int>(rng() % 10);
          cell = roll < 5 ? Step::None : roll < 8 ? Step::Stay : Step::Prog;
        }
      basics.push_back(std::move(r));
    }
    ClosureSet c = closure(basics);
    bool mine = gtc_check(c).ok;
    bool oracle = gtc_oracle(basics, 2 * c.rels.size() + 2);
    if (mine != oracle) disagreements++;
    done++;
  }
  std::ostringstream d;
  d << done << " graphs (corpus + 500 skeletons), " << disagreements << " disagreements, "
    << t.seconds() << "s";
  verdict(4, "GTC vs brute force", disagreements == 0 && t.seconds() < 120, d.str());
}

struct CompiledCorpus {
  std::string name;
  CompileResult result;
  double seconds = 0;
  bool recheck_ok = false;
  bool endseq_ok = false;
  bool cert_ok = false;
  std::vector<DecreaseCheck> decrease;
};

std::vector<CompiledCorpus> compile_corpus() {
  std::vector<CompiledCorpus> out;
  for (const char* name : kCorpus) {
    CompiledCorpus c;
    c.name = name;
    ProofGraph g = parse_proof(slurp(std::string(CORPUS_DIR "/") + name));
    DefinitionSet d = base_defs_for(g);
    Timer t;
    c.result = compile_proof(g, d);
    c.decrease = last_decrease_checks();
    c.seconds = t.seconds();
    DefinitionSet dcheck = base_defs_for(c.result.proof);
    std::map<std::string, TerminationCertificate> reg;
    if (!c.result.cert.id.empty()) reg[c.result.cert.id] = c.result.cert;
    c.recheck_ok =
        check_proof(c.result.proof, dcheck, CheckMode::Ljid, certificate_validator(reg)).empty();
    c.endseq_ok = c.result.proof.at(c.result.proof.root).seq == c.result.endsequent;
    // bit-for-bit certificate reproduction from a fresh analysis
    if (!c.result.cert.id.empty()) {
      TraceAnalysis a = analyze_traces(g, d);
      TerminationCertificate again = make_certificate(a);
      c.cert_ok = to_string(again) == to_string(c.result.cert) &&
                  validate_certificate(c.result.cert).empty();
    } else {
      c.cert_ok = true;
    }
    out.push_back(std::move(c));
  }
  return out;
}

void criterion_5_and_6(const std::vector<CompiledCorpus>& cs) {
  bool ok = cs.size() >= 3;
  std::ostringstream d;
  for (const auto& c : cs) {
    bool this_ok = c.recheck_ok && c.endseq_ok && c.cert_ok && c.seconds < 30;
    ok = ok && this_ok;
    d << c.name << "(recheck=" << c.recheck_ok << " endseq=" << c.endseq_ok
      << " cert=" << c.cert_ok << " " << c.seconds << "s) ";
  }
  verdict(5, "end-to-end compilation", ok, d.str());

  std::size_t paths = 0, holds = 0;
  for (const auto& c : cs)
    for (const auto& dc : c.decrease) {
      paths++;
      if (dc.holds) holds++;
    }
  std::ostringstream d6;
  d6 << holds << "/" << paths << " companion-to-assumption paths entailed";
  verdict(6, "Lemma decrease at runtime", paths > 0 && holds == paths, d6.str());
}

void criterion_7(const std::vector<CompiledCorpus>& cs) {
  bool ok = true;
  std::ostringstream d;
  // embed . compile preserves endsequent and verdicts
  for (const auto& c : cs) {
    DefinitionSet dd = base_defs_for(c.result.proof);
    ProofGraph cyc = embed_proof(c.result.proof, dd);
    std::map<std::string, TerminationCertificate> reg;
    if (!c.result.cert.id.empty()) reg[c.result.cert.id] = c.result.cert;
    bool checks = check_proof(cyc, dd, CheckMode::CyclicLocal, certificate_validator(reg)).empty();
    bool gtc = cyc.buds.empty() || analyze_traces(cyc, dd).gtc_ok;
    bool endseq = cyc.at(cyc.root).seq == c.result.endsequent;
    if (!(checks && gtc && endseq)) {
      ok = false;
      d << c.name << "(embed fails: check=" << checks << " gtc=" << gtc << " endseq=" << endseq
        << ") ";
    }
  }
  // destage . stage on the corpus (buds as assumptions, cases rewritten)
  for (const char* name : kCorpus) {
    ProofGraph g = parse_proof(slurp(std::string(CORPUS_DIR "/") + name));
    DefinitionSet dd = base_defs_for(g);
    for (auto& [bud, comp] : std::map<NodeId, NodeId>(g.buds)) {
      (void)comp;
      Rule r;
      r.tag = RuleTag::Assume;
      g.at(bud).rule = r;
      g.assumptions.insert(bud);
    }
    g.buds.clear();
    ensure_staging_preds(dd, g);
    ProofGraph sg;
    FreshGen fresh;
    ProofBuilder b(sg, dd, fresh);
    StagedProof sp = stage_proof(b, g);
    std::map<NodeId, NodeId> lm;
    NodeId root = case_to_ind(b, sp.root, lm);
    // close assumptions by weakening their staged counterparts in place: for
    // the round trip we only need the endsequent and checker verdicts with
    // open assumptions allowed.
    sg.root = destage(b, root, sp.root_vars, g.at(g.root).seq);
    bool checks = check_proof(sg, dd, CheckMode::Ljid).empty();
    bool endseq = sg.at(sg.root).seq == g.at(g.root).seq;
    if (!(checks && endseq)) {
      ok = false;
      d << name << "(destage-stage fails: check=" << checks << " endseq=" << endseq << ") ";
    }
  }
  // conservativity outputs check over the base signature (the compile result
  // is the lowered proof; verify no translated symbols remain)
  for (const auto& c : cs) {
    ProofGraph g0 = parse_proof(slurp(std::string(CORPUS_DIR "/") + c.name));
    DefinitionSet base = base_defs_for(g0);
    bool clean = true;
    std::function<void(const Formula&)> scan = [&](const Formula& f) {
      if (f.kind == FormulaKind::Atom && is_stage_name(f.pred) && !base.has_pred(f.pred)) {
        std::string b2 = stage_base_name(f.pred);
        if (b2 == "N" || is_stage_name(b2)) clean = false;
      }
      for (const Formula& k : f.kids) scan(k);
    };
    for (const ProofNode& n : c.result.proof.nodes) {
      for (const Formula& f : n.seq.ante) scan(f);
      if (n.seq.succ) scan(*n.seq.succ);
    }
    if (!clean) {
      ok = false;
      d << c.name << "(translated symbols remain) ";
    }
  }
  if (ok) d << "embed-compile, destage-stage and lowering round trips hold on the corpus";
  verdict(7, "round trips", ok, d.str());
}

void criterion_8() {
  bool ok = true;
  std::ostringstream d;
  for (const char* name : {"even-or-odd.cp", "add-n.cp"}) {
    ProofGraph g = parse_proof(slurp(std::string(CORPUS_DIR "/") + name));
    DefinitionSet dd = base_defs_for(g);
    CompileResult r1 = compile_proof(g, dd);
    CompileResult r2 = compile_proof(g, dd);
    if (to_string(r1.proof) != to_string(r2.proof) ||
        to_string(r1.cert) != to_string(r2.cert)) {
      ok = false;
      d << name << "(differs) ";
    }
  }
  if (ok) d << "two compilations are byte-identical (proofs and certificates)";
  verdict(8, "reproducibility", ok, d.str());
}

}  // namespace

int main() {
  Timer total;
  criterion_1_and_3();
  criterion_2();
  criterion_4();
  std::vector<CompiledCorpus> cs = compile_corpus();
  criterion_5_and_6(cs);
  criterion_7(cs);
  criterion_8();
  std::cout << (g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT") << " ("
            << total.seconds() << "s total)\n";
  return g_failures == 0 ? 0 : 1;
}
