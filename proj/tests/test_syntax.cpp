#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cyclind/arith.hpp"
#include "cyclind/defs.hpp"
#include "cyclind/syntax.hpp"
#include "cyclind/text.hpp"

using namespace cyclind;

TEST_CASE("substitution basics") {
  // substitute(N x, {x -> 0}) = N 0
  Formula nx = fatom("N", {tvar("x")});
  CHECK(substitute(nx, {{"x", tzero()}}) == fatom("N", {tzero()}));
  // identity on empty binding
  Formula f = fall("x", fatom("P", {tvar("x"), tvar("y")}));
  CHECK(substitute(f, {}) == f);
  // capture avoidance: (all x. P(x,y))[y:=x] renames the binder
  Formula g = substitute(f, {{"y", tvar("x")}});
  CHECK(g.kind == FormulaKind::All);
  CHECK(g.var == "x'");
  CHECK(g.kids[0] == fatom("P", {tvar("x'"), tvar("x")}));
  CHECK(alpha_eq(g, fall("w", fatom("P", {tvar("w"), tvar("x")}))));
}

TEST_CASE("substitution composes up to alpha") {
  std::mt19937_64 rng(7);
  auto rand_term = [&](auto&& self, int depth) -> Term {
    switch (rng() % (depth > 2 ? 2 : 4)) {
      case 0:
        return tvar(std::string(1, static_cast<char>('a' + rng() % 4)));
      case 1:
        return tzero();
      case 2:
        return tsucc(self(self, depth + 1));
      default:
        return tplus(self(self, depth + 1), self(self, depth + 1));
    }
  };
  auto rand_formula = [&](auto&& self, int depth) -> Formula {
    switch (rng() % (depth > 2 ? 2 : 6)) {
      case 0:
        return fatom("P", {rand_term(rand_term, 0), rand_term(rand_term, 0)});
      case 1:
        return feq(rand_term(rand_term, 0), rand_term(rand_term, 0));
      case 2:
        return fand(self(self, depth + 1), self(self, depth + 1));
      case 3:
        return fimp(self(self, depth + 1), self(self, depth + 1));
      case 4:
        return fall(std::string(1, static_cast<char>('a' + rng() % 4)), self(self, depth + 1));
      default:
        return fex(std::string(1, static_cast<char>('a' + rng() % 4)), self(self, depth + 1));
    }
  };
  for (int iter = 0; iter < 500; iter++) {
    Formula f = rand_formula(rand_formula, 0);
    VarSubst sigma{{"a", rand_term(rand_term, 1)}, {"b", rand_term(rand_term, 1)}};
    VarSubst tau{{"b", rand_term(rand_term, 1)}, {"c", rand_term(rand_term, 1)}};
    // tau . sigma
    VarSubst comp = tau;
    for (const auto& [v, t] : sigma) comp[v] = substitute(t, tau);
    CHECK(alpha_eq(substitute(substitute(f, sigma), tau), substitute(f, comp)));
  }
}

TEST_CASE("seq code laws") {
  CHECK(seq_length(seq_encode({5, 7})) == 2);
  CHECK(seq_proj(seq_encode({5, 7}), 1) == 7);
  CHECK(seq_concat(seq_encode({}), seq_encode({3})) == seq_encode({3}));
  CHECK_THROWS_AS(seq_proj(seq_encode({1}), 1), std::out_of_range);
  // exhaustive over small lists
  for (std::uint64_t n = 0; n <= 8; n++) {
    std::vector<std::uint64_t> xs;
    for (std::uint64_t i = 0; i < n; i++) xs.push_back((i * 3) % 9);
    SeqCode s = seq_encode(xs);
    CHECK(seq_length(s) == n);
    for (std::uint64_t i = 0; i < n; i++) CHECK(seq_proj(s, i) == xs[i]);
    for (std::uint64_t cut = 0; cut <= n; cut++) {
      std::vector<std::uint64_t> a(xs.begin(), xs.begin() + cut);
      std::vector<std::uint64_t> b(xs.begin() + cut, xs.end());
      CHECK(seq_concat(seq_encode(a), seq_encode(b)) == s);
    }
  }
}

TEST_CASE("parser round trips") {
  CHECK(parse_formula("N(s(0))") == fatom("N", {tsucc(tzero())}));
  CHECK_THROWS_AS(parse_formula("P(x"), ParseError);
  try {
    parse_formula("P(x");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }
  const char* samples[] = {
      "N(s(0))",
      "or(even(x), odd(x))",
      "all(x, imp(N(x), ex(y, eq(s(x), y))))",
      "not(eq(plus(x, times(y, s(0))), 0))",
      "false",
      "P(cons(x, cons(y, 0)), len(proj(t, s(0))))",
  };
  for (const char* s : samples) {
    Formula f = parse_formula(s);
    CHECK(to_string(f) == s);
    CHECK(parse_formula(to_string(f)) == f);
  }
  // lt/le sugar expands; printing is the explicit form; reparse is stable
  Formula lt = parse_formula("lt(x, y)");
  Term a, b;
  CHECK(match_lt(lt, a, b));
  CHECK(a == tvar("x"));
  CHECK(b == tvar("y"));
  CHECK(parse_formula(to_string(lt)) == lt);
  Formula le = parse_formula("le(0, v)");
  CHECK(match_le(le, a, b));
  // canonical order expansion: 1 < 2 is the relativized existential
  Formula onelt2 = parse_formula("lt(1, 2)");
  CHECK(onelt2 ==
        fex("z", fand(fatom("N", {tvar("z")}),
                      feq(tplus(numeral(1), tsucc(tvar("z"))), numeral(2)))));
  // numerals as sugar
  CHECK(parse_term("3") == numeral(3));
  CHECK(to_string(numeral(2)) == "s(s(0))");
  // sequents
  Sequent sq = parse_sequent("N(x), even(x) |- odd(s(x))");
  CHECK(sq.ante.size() == 2);
  CHECK(to_string(sq) == "N(x), even(x) |- odd(s(x))");
  Sequent empty_succ = parse_sequent("N(x) |-");
  CHECK(!empty_succ.succ.has_value());
  CHECK(to_string(empty_succ) == "N(x) |-");
}

TEST_CASE("definition files") {
  std::string src =
      "signature {\n"
      "  nat\n"
      "  pred even 1 inductive\n"
      "  pred odd 1 inductive\n"
      "}\n"
      "production even <- => even(0)\n"
      "production even <- odd(x) => even(s(x))\n"
      "production odd <- even(x) => odd(s(x))\n";
  DefinitionSet d = parse_defs(src);
  CHECK(d.has_nat());
  CHECK(d.is_inductive("even"));
  CHECK(d.productions_of("even").size() == 2);
  CHECK(d.productions_of("N").size() == 2);
  // round trip through the printer
  DefinitionSet d2 = parse_defs(to_string(d));
  CHECK(to_string(d2) == to_string(d));
  // mutual block
  auto block = d.mutual_block("even");
  CHECK(block == std::vector<std::string>{"even", "odd"});
  CHECK(d.mutual_block("N") == std::vector<std::string>{"N"});
}

TEST_CASE("staged productions") {
  DefinitionSet d;
  d.include_nat();
  d.ensure_stage_pred("N'");
  const auto& prods = d.productions_of("N'");
  REQUIRE(prods.size() == 2);
  // N0 becomes N'(0, v) <= N(v)
  CHECK(prods[0].concl_args == std::vector<Term>{tzero(), tvar("v")});
  REQUIRE(prods[0].premises.size() == 1);
  CHECK(prods[0].premises[0] == fatom("N", {tvar("v")}));
  // N(s x) <= N(x) becomes N'(s(x), v) <= v1 < v, N'(x, v1), N(v)
  CHECK(prods[1].concl_args == std::vector<Term>{tsucc(tvar("x")), tvar("v")});
  REQUIRE(prods[1].premises.size() == 3);
  Term a, b;
  CHECK(match_lt(prods[1].premises[0], a, b));
  CHECK(a == tvar("v1"));
  CHECK(b == tvar("v"));
  CHECK(prods[1].premises[1] == fatom("N'", {tvar("x"), tvar("v1")}));
  CHECK(prods[1].premises[2] == fatom("N", {tvar("v")}));
  // premise-free production of an ordinary-premise-only rule keeps Q's then N v
  DefinitionSet e;
  e.include_nat();
  e.declare_pred("Q", 1, PredKind::Ordinary);
  e.declare_pred("P", 1, PredKind::Inductive);
  ProductionRule p;
  p.pred = "P";
  p.concl_args = {tvar("x")};
  p.premises = {fatom("Q", {tvar("x")})};
  e.add_production(p);
  e.ensure_stage_pred("P'");
  const auto& sp = e.productions_of("P'")[0];
  REQUIRE(sp.premises.size() == 2);
  CHECK(sp.premises[0] == fatom("Q", {tvar("x")}));
  CHECK(sp.premises[1] == fatom("N", {tvar("v")}));
}

TEST_CASE("ha axioms as sequents") {
  auto axs = ha_axioms();
  CHECK(axs.size() == 6);
  // |- N x imp s x != 0
  CHECK(axs[0].succ == fimp(fatom("N", {tvar("x")}), fnot(feq(tsucc(tvar("x")), tzero()))));
  // |- N x imp x + 0 = x
  CHECK(axs[2].succ == fimp(fatom("N", {tvar("x")}), feq(tplus(tvar("x"), tzero()), tvar("x"))));
  // every axiom is accepted by the theory oracle
  DefinitionSet d;
  d.include_nat();
  for (const Sequent& s : axs) CHECK(ha_oracle_check(s, d) == "");
}

TEST_CASE("ha oracle guard discipline") {
  DefinitionSet d;
  d.include_nat();
  auto seq = [](std::vector<Formula> ante, Formula succ) {
    Sequent s;
    s.ante = std::move(ante);
    s.succ = std::move(succ);
    return s;
  };
  Formula nx = fatom("N", {tvar("x")});
  Formula ny = fatom("N", {tvar("y")});
  // unguarded arithmetic is rejected
  CHECK(ha_oracle_check(seq({}, feq(tplus(tvar("x"), tzero()), tvar("x"))), d) != "");
  CHECK(ha_oracle_check(seq({nx}, feq(tplus(tvar("x"), tzero()), tvar("x"))), d) == "");
  // invalid statements are rejected
  CHECK(ha_oracle_check(seq({nx, ny}, feq(tvar("x"), tvar("y"))), d) != "");
  CHECK(ha_oracle_check(seq({nx}, flt(tvar("x"), tvar("x"))), d) != "");
  // transitivity chains through equalities
  Sequent chain = seq({nx, ny, fatom("N", {tvar("z")}), feq(tvar("x"), tvar("y")),
                       flt(tvar("y"), tvar("z"))},
                      flt(tvar("x"), tvar("z")));
  CHECK(ha_oracle_check(chain, d) == "");
  // t0 bound: v1 < v1 + v2 + 1 under guards
  Term t0 = tplus(tvar("v1"), tplus(tvar("v2"), numeral(1)));
  Sequent bound =
      seq({fatom("N", {tvar("v1")}), fatom("N", {tvar("v2")})}, flt(tvar("v1"), t0));
  CHECK(ha_oracle_check(bound, d) == "");
  CHECK(ha_oracle_check(seq({fatom("N", {tvar("v1")})}, flt(tvar("v1"), t0)), d) != "");
  // coding reductions need no guards
  Term enc = tseq({tvar("a"), tvar("b")});
  CHECK(ha_oracle_check(seq({}, feq(tlen(enc), numeral(2))), d) == "");
  CHECK(ha_oracle_check(seq({}, feq(tproj(enc, numeral(1)), tvar("b"))), d) == "");
  CHECK(ha_oracle_check(seq({}, feq(tlen(enc), numeral(3))), d) != "");
  // 0 <= v via the le pattern
  CHECK(ha_oracle_check(seq({fatom("N", {tvar("v")})}, fle(tzero(), tvar("v"))), d) == "");
  // stage atoms guard their stage argument
  d.ensure_stage_pred("N'");
  Sequent st = seq({fatom("N'", {tvar("x"), tvar("v")})}, fle(tzero(), tvar("v")));
  CHECK(ha_oracle_check(st, d) == "");
  Sequent st2 = seq({fatom("N'", {tvar("x"), tvar("v")})}, fle(tzero(), tvar("x")));
  CHECK(ha_oracle_check(st2, d) == "");  // N-chain: element is a number too
}

TEST_CASE("ineq entailment is graph theoretic") {
  using C = IneqConstraint;
  // v̂=v, v>v1 entails v1 < v̂
  std::vector<C> sigma{{false, "vh", "v"}, {true, "v", "v1"}};
  CHECK(ineq_entails_atom(sigma, true, "vh", "v1"));
  CHECK(!ineq_entails_atom(sigma, true, "v1", "vh"));
  CHECK(ineq_entails_atom(sigma, false, "vh", "v"));
  // missing constraint
  CHECK(!ineq_entails_atom({{false, "a", "b"}}, true, "a", "b"));
  // longer chain
  std::vector<C> chain{{false, "a", "b"}, {true, "b", "c"}, {false, "c", "d"}, {true, "d", "e"}};
  CHECK(ineq_entails_atom(chain, true, "a", "e"));
  CHECK(!ineq_entails_atom(chain, false, "a", "e"));
}
