// Syntax front end: parser shapes, printer round-trips, sort checking, and
// conditional-term expansion.
#include <functional>
#include <random>

#include "doctest.h"
#include "qdl/desugar.hpp"
#include "qdl/parse.hpp"
#include "qdl/print.hpp"
#include "qdl/subst.hpp"
#include "testutil.hpp"

using namespace qdl;
using qdltest::codeOf;
using qdltest::groundFormula;

namespace {

// One object sort C with the car-style vocabulary used across the suite.
std::shared_ptr<SymbolTable> carSyms() {
  auto syms = std::make_shared<SymbolTable>();
  int C = syms->addSort("C");
  syms->addFunc("x", {C}, 0);
  syms->addFunc("v", {C}, 0);
  syms->addFunc("a", {C}, 0);
  syms->addFunc("v_x", {C}, 0);  // companion for x''
  syms->addFunc("l", {C}, C);
  syms->addFunc("M", {C, C}, 0);
  syms->addFunc("nu", {}, C);
  syms->addFunc("b", {}, 0);
  syms->addFunc("z", {}, 0);
  syms->addVar("p", 0);
  syms->addVar("q", 0);
  return syms;
}

}  // namespace

TEST_CASE("quantified assignment parses with binder, target, and rhs") {
  auto syms = carSyms();
  ProgramP p = parseProgramStr(*syms, "forall C i. a(i) := a(i) + 1");
  REQUIRE(p->kind == PK::QAssign);
  CHECK(p->qsort == syms->sortOf("C"));
  CHECK(p->qvar == syms->varIx.at("i"));
  REQUIRE(p->items.size() == 1);
  const auto& it = p->items[0];
  CHECK(it.fn == syms->funcIx.at("a"));
  REQUIRE(it.args.size() == 1);
  CHECK(it.args[0]->kind == TK::Var);
  CHECK(it.args[0]->ref == p->qvar);
  CHECK(eqTerm(it.rhs, parseTermStr(*syms, "a(i) + 1")));
}

TEST_CASE("neutral test program") {
  auto syms = carSyms();
  ProgramP p = parseProgramStr(*syms, "?true");
  REQUIRE(p->kind == PK::Test);
  CHECK(p->test->kind == FK::True);
}

TEST_CASE("creation; guard; evolution parses to Seq(New, Seq(Test, QOde))") {
  auto syms = carSyms();
  ProgramP p = parseProgramStr(
      *syms, "nu := new C; ?(forall C i. M(i, nu) = 1); forall C i. {x(i)'' = a(i)}");
  // `;` is left-associative, so reassociate before checking the spine.
  REQUIRE(p->kind == PK::Seq);
  REQUIRE(p->a->kind == PK::Seq);
  ProgramP nu = p->a->a, test = p->a->b, ode = p->b;
  REQUIRE(nu->kind == PK::New);
  CHECK(nu->newFn == syms->funcIx.at("nu"));
  CHECK(nu->newSort == syms->sortOf("C"));
  REQUIRE(test->kind == PK::Test);
  CHECK(test->test->kind == FK::Forall);
  REQUIRE(ode->kind == PK::QOde);
  // x(i)'' expands through the declared companion v_x.
  REQUIRE(ode->odes.size() == 2);
  CHECK(ode->odes[0].fn == syms->funcIx.at("x"));
  CHECK(eqTerm(ode->odes[0].rhs, parseTermStr(*syms, "v_x(i)")));
  CHECK(ode->odes[1].fn == syms->funcIx.at("v_x"));
  CHECK(eqTerm(ode->odes[1].rhs, parseTermStr(*syms, "a(i)")));
}

TEST_CASE("x'' without a declared companion is rejected") {
  auto syms = carSyms();
  CHECK(codeOf([&] { parseProgramStr(*syms, "forall C i. {v(i)'' = 0}"); }) == Err::TypeError);
}

TEST_CASE("nested program quantifier blocks are rejected") {
  auto syms = carSyms();
  CHECK(codeOf([&] {
          parseProgramStr(*syms, "forall C i. forall C j. x(i) := x(j)");
        }) == Err::UnsupportedFeature);
}

TEST_CASE("programs quantify universally, not existentially") {
  auto syms = carSyms();
  CHECK_THROWS_AS(parseProgramStr(*syms, "exists C i. x(i) := 0"), QdlError);
}

TEST_CASE("quantified update without the bound variable in the args is rejected") {
  auto syms = carSyms();
  auto checkP = [&](const char* s) {
    ProgramP p = parseProgramStr(*syms, s);
    typecheckFormula(*syms, mkModal(FK::Box, p, mkBoolConst(true)));
  };
  CHECK(codeOf([&] { checkP("forall C i. x(l(i)) := 0"); }) == Err::TypeError);
  CHECK_NOTHROW(checkP("forall C i. x(i) := 0"));
  CHECK_NOTHROW(checkP("forall C i. z := a(i)"));  // empty args: one shared position
}

TEST_CASE("evolved symbol must not occur in its own argument list") {
  auto syms = carSyms();
  syms->addFunc("w", {0}, 0);
  ProgramP p = parseProgramStr(*syms, "{w(w(1))' = 1}");
  CHECK(codeOf([&] {
          typecheckFormula(*syms, mkModal(FK::Box, p, mkBoolConst(true)));
        }) == Err::TypeError);
}

TEST_CASE("exact rationals print and reparse exactly") {
  auto syms = carSyms();
  CHECK(printTerm(*syms, mkNum(Rat(1, 2))) == "1/2");
  CHECK(printTerm(*syms, mkNum(Rat(-3, 4))) == "-3/4");
  TermP half = parseTermStr(*syms, "1/2");
  REQUIRE(half->kind == TK::Num);
  CHECK(half->num == Rat(1, 2));
  TermP dec = parseTermStr(*syms, "0.25");
  REQUIRE(dec->kind == TK::Num);
  CHECK(dec->num == Rat(1, 4));
  CHECK(codeOf([&] { parseTermStr(*syms, "1/0"); }) == Err::SyntaxError);
}

TEST_CASE("comparisons require matching sorts") {
  auto syms = carSyms();
  CHECK(codeOf([&] { parseFormulaStr(*syms, "forall C i. x(i) = l(i)"); }) == Err::TypeError);
  CHECK_NOTHROW(parseFormulaStr(*syms, "forall C i. x(i) >= 0"));
  // no order on object sorts
  CHECK(codeOf([&] { parseFormulaStr(*syms, "forall C i. l(i) >= l(i)"); }) == Err::TypeError);
  CHECK_NOTHROW(parseFormulaStr(*syms, "forall C i. l(i) != l(l(i))"));
}

TEST_CASE("syntax errors carry source spans") {
  auto syms = carSyms();
  try {
    parseFormulaStr(*syms, "b >");
    FAIL("expected a syntax error");
  } catch (const QdlError& e) {
    CHECK(e.code == Err::SyntaxError);
    CHECK(e.span.lo >= 2);  // points at the missing right-hand side
  }
}

TEST_CASE("conditional guard expansion matches the guarded-implication form") {
  auto syms = carSyms();
  FormulaP f = parseFormulaStr(*syms, "(if p = 1 then 2 else 3) >= 2");
  FormulaP g = expandConditionals(f);
  CHECK(printFormula(*syms, g) == "(p = 1 -> 2 >= 2) & (!(p = 1) -> 3 >= 2)");
  CHECK(eqFormula(g, parseFormulaStr(*syms, "(p = 1 -> 2 >= 2) & (!(p = 1) -> 3 >= 2)")));
}

TEST_CASE("conditional-free formulas are returned unchanged") {
  auto syms = carSyms();
  FormulaP f = parseFormulaStr(*syms, "p >= 0 & q < 1");
  CHECK(expandConditionals(f).get() == f.get());
  CHECK(!hasConditionalAtom(f));
}

TEST_CASE("nested conditionals expand innermost-first to four guarded atoms") {
  auto syms = carSyms();
  FormulaP f =
      parseFormulaStr(*syms, "(if p = 1 then (if q = 1 then 1 else 2) else 3 + q) >= 2");
  FormulaP g = expandConditionals(f);
  CHECK(!hasConditionalAtom(g));
  // count the guarded comparison leaves
  int atoms = 0;
  std::function<void(const FormulaP&)> walk = [&](const FormulaP& h) {
    if (h->kind == FK::Cmp && h->rel == Rel::Ge) ++atoms;
    for (const auto& k : h->kids) walk(k);
  };
  walk(g);
  CHECK(atoms == 4);
  // equivalence on all four guard valuations (p,q each 1 or 0)
  int vp = syms->varIx.at("p"), vq = syms->varIx.at("q");
  for (Rat pv : {Rat(0), Rat(1)}) {
    for (Rat qv : {Rat(0), Rat(1)}) {
      SymbolTable tmp = *syms;
      FormulaP f1 = substVarF(tmp, substVarF(tmp, f, vp, mkNum(pv)), vq, mkNum(qv));
      FormulaP g1 = substVarF(tmp, substVarF(tmp, g, vp, mkNum(pv)), vq, mkNum(qv));
      CHECK(groundFormula(f1) == groundFormula(g1));
    }
  }
}

TEST_CASE("printer output reparses to a structurally equal AST") {
  auto syms = carSyms();
  const char* formulas[] = {
      "forall C i. a(i) >= 0 -> x(i) + v(i) * 2 > -1/2",
      "exists C i. eps(i) = 1 & l(i) != nu",
      "p - -3 = 0",
      "(-1/2) * b^2 - b >= 0 | p < q",
      "p <= 1 <-> (q >= 0 <-> p != q)",
      "!(p = 1) & !(b > 0 | p > 0)",
      "[?true] true",
      "[nu := new C] eps(nu) = 1",
      "[forall C i. a(i) := a(i) + 1; ?p > 0] forall C i. v(i) >= 0",
      "<(x(nu) := 0, v(nu) := 1); {x(nu)' = v(nu) & v(nu) >= 0}> x(nu) > 0",
      "[(z := z + 1)*] z >= 0",
      "[(?p > 0; z := 1) ++ (?(p <= 0); z := -1)] z != 0",
      "[forall C i. {x(i)' = v(i), v(i)' = a(i) & v(i) >= 0}] x(nu) >= 0",
      "forall R y. exists R w. y + w = 0",
      "(if p = 1 then 2 else 3) >= 2",
  };
  for (const char* s : formulas) {
    CAPTURE(s);
    FormulaP f = parseFormulaStr(*syms, s);
    std::string printed = printFormula(*syms, f);
    CAPTURE(printed);
    FormulaP g = parseFormulaStr(*syms, printed);
    CHECK(eqFormula(f, g));
    CHECK(printFormula(*syms, g) == printed);  // printing is a fixpoint
  }
  const char* programs[] = {
      "nu := new C",
      "(z := 1)*",
      "(nu := new C)*",
      "?p > 0; z := 1; (z := z + 1)* ++ z := 0",
      "forall C i. (x(i) := v(i), v(i) := 0)",
      "{z' = 1}",
      "forall C i. {x(i)' = v(i) & x(i) <= 10}*",
      "(?p > 0)*",
      "z := 0; (forall C i. a(i) := a(i) + 1 ++ ?true)*",
  };
  for (const char* s : programs) {
    CAPTURE(s);
    ProgramP p = parseProgramStr(*syms, s);
    std::string printed = printProgram(*syms, p);
    CAPTURE(printed);
    ProgramP q = parseProgramStr(*syms, printed);
    CHECK(eqProgram(p, q));
    CHECK(printProgram(*syms, q) == printed);
  }
}

TEST_CASE("actualist quantifier sugar expands to createdness guards") {
  auto syms = carSyms();
  FormulaP f = parseFormulaStr(*syms, "forallE C i. v(i) >= 0");
  CHECK(eqFormula(f, parseFormulaStr(*syms, "forall C i. eps(i) = 1 -> v(i) >= 0")));
  FormulaP g = parseFormulaStr(*syms, "existsE C i. v(i) >= 0");
  CHECK(eqFormula(g, parseFormulaStr(*syms, "exists C i. eps(i) = 1 & v(i) >= 0")));
  // multi-binder form distributes the guard over each binder
  FormulaP h = parseFormulaStr(*syms, "forallE C i, j. M(i, j) >= 0");
  CHECK(eqFormula(h, parseFormulaStr(*syms, "forall C i. eps(i) = 1 -> "
                                            "(forall C j. eps(j) = 1 -> M(i, j) >= 0)")));
}

TEST_CASE("actualist program sugar masks slopes and updates") {
  auto syms = carSyms();
  ProgramP ode = parseProgramStr(*syms, "forallE C i. {x(i)' = v(i) & v(i) >= 0}");
  REQUIRE(ode->kind == PK::QOde);
  CHECK(eqTerm(ode->odes[0].rhs, parseTermStr(*syms, "eps(i) * v(i)")));
  CHECK(eqFormula(ode->domain, parseFormulaStr(*syms, "eps(i) = 1 -> v(i) >= 0")));

  ProgramP asg = parseProgramStr(*syms, "forallE C i. a(i) := 2");
  REQUIRE(asg->kind == PK::QAssign);
  REQUIRE(asg->items[0].rhs->kind == TK::Cond);
  CHECK(eqTerm(asg->items[0].rhs->args[1], parseTermStr(*syms, "a(i)")));
}

TEST_CASE("problem files parse declarations, hints, and the conjecture") {
  Problem prob = parseProblem(R"(
    // two cars on a line
    sort C;
    func R x(C);
    func R v(C);
    var R t;
    invariant: forall C i. v(i) >= 0;
    problem: forall C i. (x(i) >= 0 -> [forall C j. {x(j)' = v(j)}] x(i) >= 0)
  )");
  CHECK(prob.syms->sortIx.count("C") == 1);
  CHECK(prob.conjecture->kind == FK::Forall);
  REQUIRE(prob.invariants.size() == 1);
  CHECK(prob.invariants[0]->kind == FK::Forall);
  // round-trip through the printer
  FormulaP f = prob.conjecture;
  CHECK(eqFormula(f, parseFormulaStr(*prob.syms, printFormula(*prob.syms, f))));
}

TEST_CASE("reserved names are rejected in declarations") {
  CHECK_THROWS_AS(parseProblem("sort R; problem: true"), QdlError);
  CHECK_THROWS_AS(parseProblem("sort C; func R eps(C); problem: true"), QdlError);
}

TEST_CASE("randomized ASTs survive print -> parse") {
  auto syms = carSyms();
  std::mt19937_64 rng(20260815);
  int C = syms->sortOf("C");
  int vi = syms->addVar("i", C);
  int vt = syms->addVar("t", 0);

  std::function<TermP(int, int)> mkT = [&](int sort, int depth) -> TermP {
    if (sort == C) {
      switch (rng() % (depth > 0 ? 3 : 2)) {
        case 0: return mkVar(vi);
        case 1: return mkApp(syms->funcIx.at("nu"), {});
        default: return mkApp(syms->funcIx.at("l"), {mkT(C, depth - 1)});
      }
    }
    if (depth == 0) {
      switch (rng() % 3) {
        case 0: return mkNum(ratOf((long)(rng() % 17) - 8, (long)(1 + rng() % 4)));
        case 1: return mkVar(vt);
        default: return mkApp(syms->funcIx.at("b"), {});
      }
    }
    switch (rng() % 8) {
      case 0: return mkBin(TK::Add, mkT(0, depth - 1), mkT(0, depth - 1));
      case 1: return mkBin(TK::Sub, mkT(0, depth - 1), mkT(0, depth - 1));
      case 2: return mkBin(TK::Mul, mkT(0, depth - 1), mkT(0, depth - 1));
      case 3: return mkNeg(mkT(0, depth - 1));
      case 4: return mkPow(mkT(0, depth - 1), (int)(rng() % 4));
      case 5: return mkApp(syms->funcIx.at("x"), {mkT(C, depth - 1)});
      case 6: return mkCond(mkCmp(Rel::Ge, mkT(0, depth - 1), mkT(0, depth - 1)),
                            mkT(0, depth - 1), mkT(0, depth - 1));
      default: return mkNum(Rat((long)(rng() % 17) - 8));
    }
  };
  std::function<FormulaP(int)> mkF = [&](int depth) -> FormulaP {
    if (depth == 0) {
      Rel rels[] = {Rel::Eq, Rel::Ne, Rel::Ge, Rel::Gt, Rel::Le, Rel::Lt};
      if (rng() % 5 == 0) return mkCmp(rng() % 2 ? Rel::Eq : Rel::Ne, mkT(C, 1), mkT(C, 1));
      return mkCmp(rels[rng() % 6], mkT(0, 1), mkT(0, 1));
    }
    switch (rng() % 7) {
      case 0: return mkNot(mkF(depth - 1));
      case 1: return mkBinF(FK::And, mkF(depth - 1), mkF(depth - 1));
      case 2: return mkBinF(FK::Or, mkF(depth - 1), mkF(depth - 1));
      case 3: return mkBinF(FK::Imply, mkF(depth - 1), mkF(depth - 1));
      case 4: return mkBinF(FK::Equiv, mkF(depth - 1), mkF(depth - 1));
      case 5: return mkQuant(rng() % 2 ? FK::Forall : FK::Exists, vi, C, mkF(depth - 1));
      default: return mkQuant(rng() % 2 ? FK::Forall : FK::Exists, vt, 0, mkF(depth - 1));
    }
  };

  for (int n = 0; n < 300; ++n) {
    FormulaP f = mkF(1 + (int)(rng() % 3));
    std::string printed = printFormula(*syms, f);
    CAPTURE(printed);
    FormulaP g = parseFormulaStr(*syms, printed);
    CHECK(eqFormula(f, g));
  }
}
