// Command-line front end: proof checking, trace analysis, the stage and
// induction transformations, and the finite-model laboratory.

#include <CLI11.hpp>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "cyclind/compile.hpp"
#include "cyclind/text.hpp"
#include "cyclind/wflab.hpp"

using namespace cyclind;

namespace {

struct Out {
  bool quiet = false;
  std::string report_path;
  std::ostringstream report;

  void note(const std::string& line) {
    if (!quiet) std::cerr << line << "\n";
  }
  void record(const std::string& line) { report << line << "\n"; }
  void flush() {
    if (report_path.empty()) return;
    std::ofstream f(report_path, std::ios::binary);
    f << report.str();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw std::runtime_error("cannot read " + path);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) throw std::runtime_error("cannot write " + path);
  out << content;
}

DefinitionSet load_defs(const std::string& path, const ProofGraph* proof) {
  DefinitionSet d = parse_defs(slurp(path));
  if (proof) {
    std::set<std::string> names;
    std::function<void(const Formula&)> scan = [&](const Formula& f) {
      if (f.kind == FormulaKind::Atom) names.insert(f.pred);
      for (const Formula& k : f.kids) scan(k);
    };
    for (const ProofNode& n : proof->nodes) {
      for (const Formula& f : n.seq.ante) scan(f);
      if (n.seq.succ) scan(*n.seq.succ);
    }
    d.ensure_preds(names);
  }
  return d;
}

int report_violations(Out& out, const std::vector<Violation>& vs, const std::string& what) {
  if (vs.empty()) {
    out.note(what + ": ok");
    out.record("result=pass what=" + what);
    return 0;
  }
  for (const auto& v : vs) {
    out.note(what + ": node " + std::to_string(v.node) + " [" + v.rule + "] " + v.msg);
    out.record("result=violation what=" + what + " node=" + std::to_string(v.node) + " rule=" +
               v.rule);
  }
  return 1;
}

std::string closure_dump(const TraceAnalysis& a, const TerminationCertificate* cert) {
  std::ostringstream o;
  o << "companions " << a.companions.size() << "\n";
  for (std::size_t j = 0; j < a.companions.size(); j++)
    o << "companion " << j << " node " << a.companions[j] << " width " << a.widths[j] << "\n";
  o << "p " << a.max_width << "\n";
  TerminationCertificate c;
  if (cert) c = *cert;
  o << "basics " << a.basics.size() << "\n";
  auto dump_rel = [&o](const PathRelation& r) {
    o << "rel " << r.src << " -> " << r.dst << " :";
    for (int i = 0; i < r.src_width(); i++) {
      o << " ";
      for (int j = 0; j < r.dst_width(); j++)
        o << (r.m[i][j] == Step::None ? '.' : r.m[i][j] == Step::Stay ? '=' : '>');
      if (r.dst_width() == 0) o << "-";
    }
    o << "\n";
  };
  for (const PathRelation& r : a.basics) dump_rel(r);
  o << "closure " << a.closed.rels.size() << " fixpoint-generation " << a.closed.generations
    << "\n";
  for (const PathRelation& r : a.closed.rels) dump_rel(r);
  o << "gtc " << (a.gtc_ok ? "ok" : "fail") << "\n";
  for (const PathRelation& r : a.closed.rels) {
    if (r.src != r.dst) continue;
    auto w = loop_witness(r);
    if (w)
      o << "witness src " << r.src << " n " << w->n << " q " << w->q << "\n";
    else
      o << "witness src " << r.src << " none\n";
  }
  return o.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cyclic-proof kernel and induction compiler"};
  app.require_subcommand(1);
  app.fallthrough();

  Out out;
  std::string defs_path;
  std::uint64_t seed = 1;
  app.add_flag("--quiet", out.quiet, "suppress diagnostics");
  app.add_option("--report", out.report_path, "machine-readable report path");
  app.add_option("--seed", seed, "seed for randomized sweeps");

  // ---- check
  auto* cmd_check = app.add_subcommand("check", "check a proof file");
  std::string check_mode = "cyclic", check_proof_path, check_cert_path;
  bool local_only = false;
  cmd_check->add_option("--mode", check_mode, "ljid or cyclic")
      ->check(CLI::IsMember({"ljid", "cyclic"}));
  cmd_check->add_option("--defs", defs_path, "definition file")->required();
  cmd_check->add_option("proof", check_proof_path, "proof file")->required();
  cmd_check->add_option("--cert", check_cert_path, "termination certificate file");
  cmd_check->add_flag("--local-only", local_only, "skip the global trace condition");

  // ---- trace
  auto* cmd_trace = app.add_subcommand("trace", "path relations, closure and GTC");
  std::string trace_proof_path, trace_dump;
  cmd_trace->add_option("--defs", defs_path, "definition file")->required();
  cmd_trace->add_option("proof", trace_proof_path, "proof file")->required();
  cmd_trace->add_option("--dump-closure", trace_dump, "write the closure layout here");

  // ---- stage
  auto* cmd_stage = app.add_subcommand("stage", "stage-number transformation");
  std::string stage_in, stage_out, ineq_report;
  cmd_stage->add_option("--defs", defs_path, "definition file")->required();
  cmd_stage->add_option("proof", stage_in, "proof file")->required();
  cmd_stage->add_option("-o", stage_out, "output proof path")->required();
  cmd_stage->add_option("--ineq-report", ineq_report, "write the Ineq sets here");

  // ---- compile
  auto* cmd_compile = app.add_subcommand("compile", "cyclic proof to induction proof");
  std::string compile_in, compile_out, compile_cert;
  cmd_compile->add_option("--defs", defs_path, "definition file")->required();
  cmd_compile->add_option("proof", compile_in, "cyclic proof file")->required();
  cmd_compile->add_option("-o", compile_out, "output proof path")->required();
  cmd_compile->add_option("--cert", compile_cert, "certificate output path");

  // ---- embed
  auto* cmd_embed = app.add_subcommand("embed", "induction proof to cyclic proof");
  std::string embed_in, embed_out;
  cmd_embed->add_option("--defs", defs_path, "definition file")->required();
  cmd_embed->add_option("proof", embed_in, "induction proof file")->required();
  cmd_embed->add_option("-o", embed_out, "output proof path")->required();

  // ---- lower
  auto* cmd_lower = app.add_subcommand("lower", "conservativity translation");
  std::string lower_in, lower_out, lower_cert;
  cmd_lower->add_option("--defs", defs_path, "definition file (base signature)")->required();
  cmd_lower->add_option("proof", lower_in, "induction proof file")->required();
  cmd_lower->add_option("-o", lower_out, "output proof path")->required();
  cmd_lower->add_option("--cert", lower_cert, "certificate file for termination axioms");

  // ---- lab
  auto* cmd_lab = app.add_subcommand("lab", "finite-model laboratory");
  cmd_lab->require_subcommand(1);
  auto* lab_pr = cmd_lab->add_subcommand("pr-check", "run the construction chain on a system");
  std::string lab_system;
  lab_pr->add_option("--system", lab_system, "system file")->required();
  auto* lab_sweep = cmd_lab->add_subcommand("sweep", "randomized construction sweeps");
  unsigned max_u = 4, max_k = 2, samples = 1000;
  lab_sweep->add_option("--max-u", max_u, "largest universe");
  lab_sweep->add_option("--max-k", max_k, "largest color count");
  lab_sweep->add_option("--samples", samples, "number of random systems");
  auto* lab_kb = cmd_lab->add_subcommand("kb", "Kleene-Brouwer relation of a lifted tree");
  std::string lab_tree;
  lab_kb->add_option("--tree", lab_tree, "tree file (one sequence per line)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
  }

  try {
    int rc = 0;
    if (*cmd_check) {
      ProofGraph g = parse_proof(slurp(check_proof_path));
      DefinitionSet d = load_defs(defs_path, &g);
      std::map<std::string, TerminationCertificate> certs;
      if (!check_cert_path.empty()) {
        TerminationCertificate c = parse_certificate(slurp(check_cert_path));
        certs[c.id] = c;
      }
      CheckMode mode = check_mode == "ljid" ? CheckMode::Ljid : CheckMode::CyclicLocal;
      auto vs = check_proof(g, d, mode, certificate_validator(certs));
      rc = report_violations(out, vs, "check(" + check_mode + ")");
      if (rc == 0 && mode == CheckMode::CyclicLocal && !local_only && !g.buds.empty()) {
        TraceAnalysis a = analyze_traces(g, d);
        if (!a.gtc_ok) {
          out.note("check(cyclic): global trace condition fails");
          out.record("result=violation what=gtc");
          rc = 1;
        } else {
          out.note("check(cyclic): global trace condition ok");
          out.record("result=pass what=gtc");
        }
      }
    } else if (*cmd_trace) {
      ProofGraph g = parse_proof(slurp(trace_proof_path));
      DefinitionSet d = load_defs(defs_path, &g);
      TraceAnalysis a = analyze_traces(g, d);
      std::string dump = closure_dump(a, nullptr);
      if (!trace_dump.empty()) spit(trace_dump, dump);
      if (!out.quiet) std::cout << dump;
      out.record(std::string("result=") + (a.gtc_ok ? "pass" : "violation") + " what=gtc");
      rc = a.gtc_ok ? 0 : 1;
    } else if (*cmd_stage) {
      ProofGraph g = parse_proof(slurp(stage_in));
      DefinitionSet d = load_defs(defs_path, &g);
      auto vs = check_proof(g, d, CheckMode::CyclicLocal);
      if (!vs.empty()) return report_violations(out, vs, "stage-input");
      // buds become open assumptions for the transformation
      for (auto& [bud, comp] : std::map<NodeId, NodeId>(g.buds)) {
        (void)comp;
        Rule r;
        r.tag = RuleTag::Assume;
        g.at(bud).rule = r;
        g.assumptions.insert(bud);
      }
      g.buds.clear();
      ensure_staging_preds(d, g);
      ProofGraph sg;
      FreshGen fresh;
      ProofBuilder b(sg, d, fresh);
      StagedProof sp = stage_proof(b, g);
      sg.root = sp.root;
      std::ostringstream ineq;
      for (const StagedAssumption& a : sp.assumptions) {
        ineq << "assumption orig-node " << a.orig << " vars";
        for (const auto& v : a.vars) ineq << " " << v;
        ineq << " ineq";
        for (const auto& c : a.ineq)
          ineq << " " << c.lhs << (c.strict ? ">" : "=") << c.rhs;
        ineq << "\n";
      }
      if (!ineq_report.empty()) spit(ineq_report, ineq.str());
      spit(stage_out, to_string(canonicalize(sg)));
      out.note("staged proof written to " + stage_out);
      out.record("result=pass what=stage");
    } else if (*cmd_compile) {
      ProofGraph g = parse_proof(slurp(compile_in));
      DefinitionSet d = load_defs(defs_path, &g);
      CompileResult r = compile_proof(g, d);
      DefinitionSet dcheck = load_defs(defs_path, &r.proof);
      std::map<std::string, TerminationCertificate> certs;
      if (!r.cert.id.empty()) certs[r.cert.id] = r.cert;
      auto vs = check_proof(r.proof, dcheck, CheckMode::Ljid, certificate_validator(certs));
      if (!vs.empty()) return report_violations(out, vs, "compile-recheck");
      spit(compile_out, to_string(r.proof));
      // certificates are part of the trust story: always written on success
      if (compile_cert.empty()) compile_cert = compile_out + ".cert";
      if (!r.cert.id.empty()) spit(compile_cert, to_string(r.cert));
      for (const auto& c : last_decrease_checks())
        out.record("what=lemma-decrease companion=" + std::to_string(c.companion) +
                   " holds=" + (c.holds ? "1" : "0"));
      out.note("compiled proof written to " + compile_out);
      out.record("result=pass what=compile nodes=" + std::to_string(r.proof.nodes.size()));
    } else if (*cmd_embed) {
      ProofGraph g = parse_proof(slurp(embed_in));
      DefinitionSet d = load_defs(defs_path, &g);
      ProofGraph cyc = embed_proof(g, d);
      spit(embed_out, to_string(cyc));
      out.note("cyclic proof written to " + embed_out);
      out.record("result=pass what=embed nodes=" + std::to_string(cyc.nodes.size()));
    } else if (*cmd_lower) {
      ProofGraph g = parse_proof(slurp(lower_in));
      DefinitionSet d = load_defs(defs_path, nullptr);
      std::map<std::string, TerminationCertificate> certs, certs_out;
      if (!lower_cert.empty()) {
        TerminationCertificate c = parse_certificate(slurp(lower_cert));
        certs[c.id] = c;
      }
      ProofGraph low = lower_proof(g, d, certs, certs_out);
      spit(lower_out, to_string(low));
      out.note("lowered proof written to " + lower_out);
      out.record("result=pass what=lower nodes=" + std::to_string(low.nodes.size()));
    } else if (*lab_pr) {
      wflab::System s = wflab::parse_system(slurp(lab_system));
      wflab::PrOutcome o = wflab::pr_check(s);
      out.note(std::string("pr-check: ") + (o.ok ? "ok" : ("failed at " + o.failed_lemma)));
      out.record(std::string("result=") + (o.ok ? "pass" : "violation") + " what=pr-check");
      if (o.ok) {
        std::ostringstream w;
        w << "witness";
        for (auto e : o.witness) w << " " << e;
        out.note(w.str());
      }
      rc = o.ok ? 0 : 1;
    } else if (*lab_sweep) {
      if (app.count("--seed") == 0) {
        out.note("lab sweep: --seed is required for reproducible sweeps");
        return 2;
      }
      std::mt19937_64 rng(seed);
      unsigned failures = 0;
      for (unsigned i = 0; i < samples; i++) {
        unsigned n = 1 + static_cast<unsigned>(rng() % max_u);
        unsigned k = 1 + static_cast<unsigned>(rng() % max_k);
        wflab::System s;
        for (unsigned e = 0; e < n; e++) s.universe.push_back(e);
        // random strict order: transitive closure of a random DAG on 0..n-1
        wflab::Rel base;
        for (unsigned a2 = 0; a2 < n; a2++)
          for (unsigned b2 = 0; b2 < a2; b2++)
            if (rng() % 2) base.insert({a2, b2});
        for (unsigned rep = 0; rep < n; rep++) {
          wflab::Rel add;
          for (const auto& [a2, b2] : base)
            for (const auto& [c2, d2] : base)
              if (b2 == c2) add.insert({a2, d2});
          base.insert(add.begin(), add.end());
        }
        s.rels.assign(k, {});
        for (const auto& pr : base) s.rels[rng() % k].insert(pr);
        wflab::PrOutcome o = wflab::pr_check(s);
        bool oracle = wflab::is_wellfounded(s.universe, wflab::rel_union(s));
        if (!o.ok || o.union_acyclic != oracle) failures++;
      }
      out.note("sweep: " + std::to_string(samples) + " systems, " + std::to_string(failures) +
               " failures");
      out.record("result=" + std::string(failures == 0 ? "pass" : "violation") +
                 " what=lab-sweep samples=" + std::to_string(samples) +
                 " failures=" + std::to_string(failures));
      rc = failures == 0 ? 0 : 1;
    } else if (*lab_kb) {
      wflab::SeqSet tree = wflab::parse_tree(slurp(lab_tree));
      auto kb = wflab::kb_relation(tree, [](wflab::Elem, wflab::Elem a, wflab::Elem b) {
        return a < b;  // ascending element order as the sibling relation
      });
      for (const auto& [a, b] : kb) {
        std::ostringstream line;
        for (auto e : a) line << e << " ";
        line << ">KB ";
        for (auto e : b) line << e << " ";
        if (!out.quiet) std::cout << line.str() << "\n";
      }
      out.record("result=pass what=lab-kb pairs=" + std::to_string(kb.size()));
    }
    out.flush();
    return rc;
  } catch (const ParseError& e) {
    out.note(std::string("parse error: ") + e.what());
    out.record("result=error what=parse");
    out.flush();
    return 2;
  } catch (const std::exception& e) {
    out.note(std::string("error: ") + e.what());
    out.record("result=error");
    out.flush();
    return 1;
  }
}
