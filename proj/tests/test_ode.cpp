// Symbolic ODE solving: closed forms for derivative chains, the independent
// solution checker, and the evolve-step builder used by the proof rules.
#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "qdl/ode.hpp"
#include "qdl/parse.hpp"
#include "qdl/poly.hpp"
#include "qdl/print.hpp"
#include "qdl/qe.hpp"
#include "qdl/subst.hpp"

using namespace qdl;

namespace {

std::shared_ptr<SymbolTable> odeSyms() {
  auto syms = std::make_shared<SymbolTable>();
  int C = syms->addSort("C");
  syms->addFunc("x", {C}, 0);
  syms->addFunc("v", {C}, 0);
  syms->addFunc("a", {C}, 0);
  syms->addFunc("l", {C}, C);
  syms->addFunc("b", {}, 0);
  syms->addFunc("z", {}, 0);
  syms->addVar("i", C);
  return syms;
}

// Equality of terms as polynomials over shared opaque coefficients.
bool samePoly(SymbolTable& syms, const TermP& s, const TermP& t) {
  QeCtx ctx(syms);
  return (qeTermToPoly(ctx, s) - qeTermToPoly(ctx, t)).isZero();
}
bool zeroPoly(SymbolTable& syms, const TermP& t) {
  QeCtx ctx(syms);
  return qeTermToPoly(ctx, t).isZero();
}

// Parse an expected flow written with the placeholder variable T, then remap
// T onto the solver's own time variable.
TermP atVar(SymbolTable& syms, const std::string& s, int var) {
  int vT = syms.addVar("T", 0);
  TermP t = parseTermStr(syms, s);
  return substVarT(syms, t, vT, mkVar(var));
}

}  // namespace

TEST_CASE("a derivative chain integrates to the quadratic flow") {
  auto symsP = odeSyms();
  SymbolTable& tab = *symsP;
  ProgramP ode = parseProgramStr(tab, "forall C i. {x(i)' = v(i), v(i)' = a(i)}");
  auto sol = solveQOde(tab, *ode);
  REQUIRE(sol);
  CHECK(sol->qvar == tab.varIx.at("i"));
  CHECK(sol->qsort == tab.sortOf("C"));
  CHECK(tab.vars[sol->timeVar].sort == SymbolTable::kRealSort);
  REQUIRE(sol->items.size() == 2);
  CHECK(sol->items[0].fn == tab.funcIx.at("x"));
  CHECK(sol->items[1].fn == tab.funcIx.at("v"));
  CHECK(samePoly(tab, sol->items[0].rhs,
                 atVar(tab, "x(i) + v(i)*T + (a(i)/2)*T^2", sol->timeVar)));
  CHECK(samePoly(tab, sol->items[1].rhs, atVar(tab, "v(i) + a(i)*T", sol->timeVar)));
  CHECK(checkQOdeSolution(tab, *ode, *sol).ok);
}

TEST_CASE("a clock integrates to elapsed time") {
  auto symsP = odeSyms();
  SymbolTable& tab = *symsP;
  ProgramP ode = parseProgramStr(tab, "{z' = 1}");
  auto sol = solveQOde(tab, *ode);
  REQUIRE(sol);
  CHECK(sol->qvar == -1);
  REQUIRE(sol->items.size() == 1);
  CHECK(sol->items[0].fn == tab.funcIx.at("z"));
  CHECK(sol->items[0].args.empty());
  CHECK(samePoly(tab, sol->items[0].rhs, atVar(tab, "z + T", sol->timeVar)));
  CHECK(checkQOdeSolution(tab, *ode, *sol).ok);
}

TEST_CASE("state feedback has no polynomial solution") {
  auto symsP = odeSyms();
  SymbolTable& tab = *symsP;
  CHECK(!solveQOde(tab, *parseProgramStr(tab, "forall C i. {x(i)' = x(i)}")));
  CHECK(!solveQOde(tab, *parseProgramStr(tab, "{z' = z}")));
  CHECK(!solveQOde(tab, *parseProgramStr(tab, "forall C i. {x(i)' = v(i), v(i)' = x(i)}")));
  CHECK(!solveQOde(tab, *parseProgramStr(tab, "forall C i. {x(i)' = v(i), v(i)' = 0 - x(i)}")));
  // two equations for the same function never make a well-posed system
  CHECK(!solveQOde(tab, *parseProgramStr(tab, "forall C i. {x(i)' = v(i), x(i)' = a(i)}")));
}

TEST_CASE("an evolved symbol read under a different argument pattern is rejected") {
  auto symsP = odeSyms();
  SymbolTable& tab = *symsP;
  CHECK(!solveQOde(tab, *parseProgramStr(tab, "forall C i. {x(i)' = v(l(i)), v(i)' = a(i)}")));
  // when v does not evolve, v(l(i)) is just a constant coefficient
  auto sol = solveQOde(tab, *parseProgramStr(tab, "forall C i. {x(i)' = v(l(i))}"));
  REQUIRE(sol);
  CHECK(samePoly(tab, sol->items[0].rhs, atVar(tab, "x(i) + v(l(i))*T", sol->timeVar)));
}

TEST_CASE("coefficients may mention unevolved symbols, parameters, and quotients") {
  auto symsP = odeSyms();
  SymbolTable& tab = *symsP;

  auto s1 = solveQOde(tab, *parseProgramStr(tab, "forall C i. {x(i)' = 2*a(i) + b}"));
  REQUIRE(s1);
  CHECK(samePoly(tab, s1->items[0].rhs, atVar(tab, "x(i) + (2*a(i) + b)*T", s1->timeVar)));

  auto s2 = solveQOde(tab, *parseProgramStr(tab, "forall C i. {x(i)' = v(i)/2, v(i)' = a(i)}"));
  REQUIRE(s2);
  CHECK(samePoly(tab, s2->items[0].rhs,
                 atVar(tab, "x(i) + (v(i)/2)*T + (a(i)/4)*T^2", s2->timeVar)));

  // nonlinearity in an evolved symbol is fine as long as nothing feeds back
  ProgramP cubic = parseProgramStr(tab, "forall C i. {x(i)' = v(i)*v(i), v(i)' = a(i)}");
  auto s3 = solveQOde(tab, *cubic);
  REQUIRE(s3);
  CHECK(samePoly(tab, s3->items[0].rhs,
                 atVar(tab, "x(i) + v(i)^2*T + v(i)*a(i)*T^2 + (a(i)^2/3)*T^3", s3->timeVar)));
  CHECK(checkQOdeSolution(tab, *cubic, *s3).ok);
}

TEST_CASE("the checker accepts hand-built solutions and pins residuals for wrong ones") {
  auto symsP = odeSyms();
  SymbolTable& tab = *symsP;
  ProgramP ode = parseProgramStr(tab, "forall C i. {x(i)' = v(i), v(i)' = a(i)}");
  auto sol = solveQOde(tab, *ode);
  REQUIRE(sol);

  QOdeSolution hand = *sol;
  hand.items[0].rhs = atVar(tab, "x(i) + v(i)*T + 1/2*a(i)*T^2", hand.timeVar);
  hand.items[1].rhs = atVar(tab, "v(i) + a(i)*T", hand.timeVar);
  CHECK(checkQOdeSolution(tab, *ode, hand).ok);

  SUBCASE("a wrong quadratic coefficient leaves a linear slope residual") {
    QOdeSolution bad = hand;
    bad.items[0].rhs = atVar(tab, "x(i) + v(i)*T + a(i)*T^2", bad.timeVar);
    OdeCheck r = checkQOdeSolution(tab, *ode, bad);
    CHECK(!r.ok);
    CHECK(r.eqnIndex == 0);
    REQUIRE(r.residual);
    CHECK(samePoly(tab, r.residual, atVar(tab, "a(i)*T", bad.timeVar)));
  }
  SUBCASE("a wrong initial value is caught at time zero") {
    QOdeSolution bad = hand;
    bad.items[1].rhs = atVar(tab, "2*v(i) + a(i)*T", bad.timeVar);
    OdeCheck r = checkQOdeSolution(tab, *ode, bad);
    CHECK(!r.ok);
    CHECK(r.eqnIndex == 1);
    REQUIRE(r.residual);
    CHECK(samePoly(tab, r.residual, parseTermStr(tab, "v(i)")));
  }
  SUBCASE("a missing equation is rejected") {
    QOdeSolution part = *sol;
    part.items.pop_back();
    OdeCheck r = checkQOdeSolution(tab, *ode, part);
    CHECK(!r.ok);
    CHECK(r.eqnIndex == 1);
  }
  SUBCASE("ten perturbed candidates are all rejected with nonzero residuals") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 10; ++k) {
      QOdeSolution bad = *sol;
      size_t which = rng() % bad.items.size();
      int pw = (int)(rng() % 3);
      Rat c = ratOf((long)(rng() % 7) - 3, (long)(1 + rng() % 2));
      if (c == 0) c = Rat(1);
      TermP bump = mkBin(TK::Mul, mkNum(c), mkPow(mkVar(bad.timeVar), pw));
      bad.items[which].rhs = mkBin(TK::Add, bad.items[which].rhs, bump);
      OdeCheck r = checkQOdeSolution(tab, *ode, bad);
      CHECK(!r.ok);
      REQUIRE(r.residual);
      CHECK(!zeroPoly(tab, r.residual));
    }
  }
}

TEST_CASE("symbolic flows agree with fixed-step numeric integration") {
  auto symsP = odeSyms();
  SymbolTable& tab = *symsP;
  ProgramP ode = parseProgramStr(tab, "forall C i. {x(i)' = v(i), v(i)' = a(i)}");
  auto sol = solveQOde(tab, *ode);
  REQUIRE(sol);

  auto evalD = [&](const TermP& t, double x0, double v0, double a0, double tv) -> double {
    std::function<double(const TermP&)> go = [&](const TermP& u) -> double {
      switch (u->kind) {
        case TK::Num: return u->num.get_d();
        case TK::Var: {
          REQUIRE(u->ref == sol->timeVar);
          return tv;
        }
        case TK::App: {
          std::string key = printTerm(tab, u);
          if (key == "x(i)") return x0;
          if (key == "v(i)") return v0;
          REQUIRE(key == "a(i)");
          return a0;
        }
        case TK::Add: return go(u->args[0]) + go(u->args[1]);
        case TK::Sub: return go(u->args[0]) - go(u->args[1]);
        case TK::Mul: return go(u->args[0]) * go(u->args[1]);
        case TK::Div: return go(u->args[0]) / go(u->args[1]);
        case TK::Neg: return -go(u->args[0]);
        case TK::Pow: {
          double bse = go(u->args[0]), r = 1;
          for (int j = 0; j < u->ipow; ++j) r *= bse;
          return r;
        }
        default: FAIL("unexpected term shape in a flow"); return 0;
      }
    };
    return go(t);
  };

  std::mt19937_64 rng(20260815);
  for (int trial = 0; trial < 20; ++trial) {
    double x0 = ((long)(rng() % 17) - 8) / 4.0;
    double v0 = ((long)(rng() % 17) - 8) / 4.0;
    double a0 = ((long)(rng() % 17) - 8) / 4.0;
    CHECK(evalD(sol->items[0].rhs, x0, v0, a0, 0.0) == x0);
    CHECK(evalD(sol->items[1].rhs, x0, v0, a0, 0.0) == v0);
    for (double tEnd : {0.5, 1.0, 2.0}) {
      const double h = 1.0 / 64;
      int steps = (int)(tEnd / h + 0.5);
      double x = x0, v = v0;
      for (int s = 0; s < steps; ++s) {
        // classical fourth-order step on (x, v) with constant acceleration
        double k1x = v, k1v = a0;
        double k2x = v + h / 2 * k1v, k2v = a0;
        double k3x = v + h / 2 * k2v, k3v = a0;
        double k4x = v + h * k3v, k4v = a0;
        x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
      }
      double symX = evalD(sol->items[0].rhs, x0, v0, a0, tEnd);
      double symV = evalD(sol->items[1].rhs, x0, v0, a0, tEnd);
      CHECK(std::fabs(symX - x) <= 1e-6 * std::max(1.0, std::fabs(symX)));
      CHECK(std::fabs(symV - v) <= 1e-6 * std::max(1.0, std::fabs(symV)));
    }
  }
}

TEST_CASE("the duration substitutes into the update") {
  auto symsP = odeSyms();
  SymbolTable& tab = *symsP;
  ProgramP ode = parseProgramStr(tab, "forall C i. {x(i)' = v(i), v(i)' = a(i)}");
  auto sol = solveQOde(tab, *ode);
  REQUIRE(sol);
  ProgramP upd = solutionUpdate(tab, *sol, parseTermStr(tab, "3"));
  REQUIRE(upd);
  REQUIRE(upd->kind == PK::QAssign);
  CHECK(upd->qvar == sol->qvar);
  REQUIRE(upd->items.size() == 2);
  CHECK(samePoly(tab, upd->items[0].rhs, parseTermStr(tab, "x(i) + 3*v(i) + 9/2*a(i)")));
  CHECK(samePoly(tab, upd->items[1].rhs, parseTermStr(tab, "v(i) + 3*a(i)")));
  CHECK_NOTHROW(typecheckFormula(tab, mkModal(FK::Box, upd, mkBoolConst(true))));
}

TEST_CASE("the evolve step guards the whole time interval") {
  auto symsP = odeSyms();
  SymbolTable& tab = *symsP;

  SUBCASE("a trivial domain needs no guard") {
    ProgramP ode = parseProgramStr(tab, "forall C i. {x(i)' = v(i), v(i)' = a(i)}");
    auto sol = solveQOde(tab, *ode);
    REQUIRE(sol);
    int dur = tab.freshVar(0);
    int tee = tab.freshVar(0);
    EvolveStep st = mkEvolveUpdate(tab, *ode, *sol, mkVar(dur), tee);
    REQUIRE(st.update);
    REQUIRE(st.update->kind == PK::QAssign);
    CHECK(samePoly(tab, st.update->items[0].rhs,
                   atVar(tab, "x(i) + v(i)*T + (a(i)/2)*T^2", dur)));
    REQUIRE(st.guard);
    CHECK(st.guard->kind == FK::True);
  }

  SUBCASE("a domain constraint must hold along the flow") {
    ProgramP ode =
        parseProgramStr(tab, "forall C i. {x(i)' = v(i), v(i)' = 0 - b & v(i) >= 0}");
    auto sol = solveQOde(tab, *ode);
    REQUIRE(sol);
    CHECK(samePoly(tab, sol->items[0].rhs,
                   atVar(tab, "x(i) + v(i)*T - (b/2)*T^2", sol->timeVar)));
    int dur = tab.freshVar(0);
    int tee = tab.freshVar(0);
    EvolveStep st = mkEvolveUpdate(tab, *ode, *sol, mkVar(dur), tee);
    REQUIRE(st.guard);
    REQUIRE(st.guard->kind == FK::Forall);
    CHECK(st.guard->var == tee);
    const FormulaP& body = st.guard->kids[0];
    REQUIRE(body->kind == FK::Imply);
    const FormulaP& range = body->kids[0];
    REQUIRE(range->kind == FK::And);
    REQUIRE(range->kids[0]->kind == FK::Cmp);
    CHECK(range->kids[0]->rel == Rel::Le);
    CHECK(eqTerm(range->kids[0]->lhs, mkNum(Rat(0))));
    CHECK(eqTerm(range->kids[0]->rhs, mkVar(tee)));
    REQUIRE(range->kids[1]->kind == FK::Cmp);
    CHECK(range->kids[1]->rel == Rel::Le);
    CHECK(eqTerm(range->kids[1]->lhs, mkVar(tee)));
    CHECK(eqTerm(range->kids[1]->rhs, mkVar(dur)));
    const FormulaP& after = body->kids[1];
    REQUIRE(after->kind == FK::Box);
    REQUIRE(after->prog->kind == PK::QAssign);
    CHECK(eqFormula(after->kids[0], ode->domain));
    CHECK(samePoly(tab, after->prog->items[1].rhs, atVar(tab, "v(i) - b*T", tee)));
    CHECK_NOTHROW(typecheckFormula(tab, st.guard));
  }
}
