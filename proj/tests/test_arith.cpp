// Exact real arithmetic: polynomials, root isolation, and quantifier
// elimination, cross-checked against brute-force oracles.
#include <random>

#include "doctest.h"
#include "qdl/parse.hpp"
#include "qdl/print.hpp"
#include "qdl/qe.hpp"
#include "qdl/sturm.hpp"
#include "qdl/subst.hpp"
#include "testutil.hpp"

using namespace qdl;
using qdltest::codeOf;
using qdltest::groundFormula;

namespace {

std::shared_ptr<SymbolTable> arithSyms() {
  auto syms = std::make_shared<SymbolTable>();
  syms->addFunc("Z", {}, 0);  // an opaque real-valued symbol
  int C = syms->addSort("C");
  syms->addFunc("aa", {C}, 0);
  syms->addFunc("nu", {}, C);
  syms->addFunc("lnk", {C}, C);
  for (const char* v : {"a", "b", "c", "V", "W", "X", "Y"}) syms->addVar(v, 0);
  return syms;
}

std::string qeStr(SymbolTable& syms, const std::string& in) {
  return printFormula(syms, qe(syms, parseFormulaStr(syms, in)));
}

// Substitutes rational values for every free variable of f.
FormulaP plug(SymbolTable& syms, FormulaP f, const std::map<int, Rat>& asg) {
  for (const auto& [v, r] : asg) f = substVarF(syms, f, v, mkNum(r));
  return f;
}

Rat randRat(std::mt19937_64& rng) {
  long num = (long)(rng() % 17) - 8;
  long den = 1 + (long)(rng() % 4);
  return ratOf(num, den);
}

// Truth of a closed first-order formula whose quantifiers run over the reals,
// decided by brute force: every atom is linear in each quantified variable,
// so cell decomposition by atom roots is exact.
bool bruteForce(SymbolTable& syms, const FormulaP& f);

void collectAtomsLinear(const FormulaP& f, int var, std::vector<std::pair<Rat, Rat>>& out) {
  // gathers (slope, intercept) of each atom's lhs - rhs, both ground except var
  if (f->kind == FK::Cmp) {
    // lhs - rhs as alpha*var + beta evaluated by plugging var = 0 and var = 1
    // (explicit return type: gmp expression templates must not outlive operands)
    auto evalAt = [&](const Rat& x) -> Rat {
      SymbolTable tmp;
      (void)tmp;
      struct Ev {
        int var;
        Rat x;
        Rat term(const TermP& t) {
          switch (t->kind) {
            case TK::Num: return t->num;
            case TK::Var: return t->ref == var ? x : Rat(0);  // unreachable otherwise
            case TK::Add: return term(t->args[0]) + term(t->args[1]);
            case TK::Sub: return term(t->args[0]) - term(t->args[1]);
            case TK::Mul: return term(t->args[0]) * term(t->args[1]);
            case TK::Neg: return -term(t->args[0]);
            default: FAIL("unexpected term in linear atom"); return Rat(0);
          }
        }
      } ev{var, x};
      return ev.term(f->lhs) - ev.term(f->rhs);
    };
    Rat b = evalAt(Rat(0));
    Rat ab = evalAt(Rat(1));
    out.emplace_back(ab - b, b);
    return;
  }
  for (const auto& k : f->kids) collectAtomsLinear(k, var, out);
}

bool bruteForce(SymbolTable& syms, const FormulaP& f) {
  if (f->kind == FK::Forall || f->kind == FK::Exists) {
    bool isAll = f->kind == FK::Forall;
    // candidate points: atom roots, midpoints between adjacent roots, and
    // points beyond the extremes; every sign cell of the arrangement is hit
    std::vector<std::pair<Rat, Rat>> atoms;
    collectAtomsLinear(f->kids[0], f->var, atoms);
    std::vector<Rat> roots;
    for (const auto& [alpha, beta] : atoms)
      if (alpha != 0) roots.push_back(-beta / alpha);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    std::vector<Rat> cands;
    if (roots.empty()) {
      cands.push_back(Rat(0));
    } else {
      cands.push_back(roots.front() - 1);
      for (size_t i = 0; i < roots.size(); ++i) {
        cands.push_back(roots[i]);
        if (i + 1 < roots.size()) cands.push_back((roots[i] + roots[i + 1]) / 2);
      }
      cands.push_back(roots.back() + 1);
    }
    for (const Rat& x : cands) {
      bool sub = bruteForce(syms, substVarF(syms, f->kids[0], f->var, mkNum(x)));
      if (isAll && !sub) return false;
      if (!isAll && sub) return true;
    }
    return isAll;
  }
  if (f->kind == FK::Not) return !bruteForce(syms, f->kids[0]);
  if (f->kind == FK::And) return bruteForce(syms, f->kids[0]) && bruteForce(syms, f->kids[1]);
  if (f->kind == FK::Or) return bruteForce(syms, f->kids[0]) || bruteForce(syms, f->kids[1]);
  if (f->kind == FK::Imply)
    return !bruteForce(syms, f->kids[0]) || bruteForce(syms, f->kids[1]);
  if (f->kind == FK::Equiv)
    return bruteForce(syms, f->kids[0]) == bruteForce(syms, f->kids[1]);
  return groundFormula(f);
}

// Agreement of in/out on random assignments to the shared free variables;
// the instantiated input is closed, so qeDecide settles it exactly.
void checkSampledEquivalence(SymbolTable& syms, const FormulaP& in, const FormulaP& out,
                             int samples, uint64_t seed) {
  std::vector<int> fv;
  collectFreeVars(in, fv);
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int n = 0; n < samples; ++n) {
    std::map<int, Rat> asg;
    for (int v : fv) asg[v] = randRat(rng);
    bool a = qeDecide(syms, plug(syms, in, asg));
    bool b = groundFormula(plug(syms, out, asg));
    if (a != b) ++bad;
  }
  CHECK(bad == 0);
}

UPoly up(std::initializer_list<long> coeffs) {  // low order first
  UPoly p;
  for (long c : coeffs) p.push_back(Rat(c));
  return upNormalize(p);
}

}  // namespace

TEST_CASE("polynomial ring basics") {
  Poly x = Poly::var(0), y = Poly::var(1);
  Poly p = x * x + y * Poly::num(Rat(2)) - Poly::num(Rat(3));
  CHECK((p - p).isZero());
  CHECK(p.degreeIn(0) == 2);
  CHECK(p.degreeIn(1) == 1);
  CHECK(p.totalDegree() == 2);
  CHECK(p.coeffOf(0, 2) == Poly::num(Rat(1)));
  CHECK(p.coeffOf(0, 0) == y * Poly::num(Rat(2)) - Poly::num(Rat(3)));
  CHECK(p.derivative(0) == x * Poly::num(Rat(2)));
  CHECK(p.substPoly(0, y) == y * y + y * Poly::num(Rat(2)) - Poly::num(Rat(3)));
  CHECK(p.eval({{0, Rat(2)}, {1, Rat(1, 2)}}) == Rat(2));

  std::mt19937_64 rng(7);
  for (int n = 0; n < 100; ++n) {
    auto rnd = [&] {
      Poly q = Poly::num(randRat(rng));
      if (rng() % 2) q = q + x * Poly::num(randRat(rng));
      if (rng() % 2) q = q + y * y * Poly::num(randRat(rng));
      return q;
    };
    Poly a = rnd(), b = rnd(), c = rnd();
    CHECK((a + b) * c == a * c + b * c);  // distributivity
    CHECK(a * b == b * a);
    CHECK(a + (-a) == Poly());
  }
}

TEST_CASE("canonical scaling preserves sign and normalizes the class") {
  Poly x = Poly::var(0);
  Poly p = x * Poly::num(ratOf(4, 6)) - Poly::num(Rat(2, 3));  // (2/3)(x - 1)
  Poly s = p.scaledByContent();
  CHECK(s == x - Poly::num(Rat(1)));
  Poly q = -p;
  CHECK(q.canonicalPositive() == s);  // sign is forced positive
  CHECK(q.scaledByContent() == Poly::num(Rat(1)) - x);  // but plain scaling keeps it
}

TEST_CASE("root isolation finds every real root exactly once") {
  // x^2 - 2: two irrational roots bracketing +-sqrt(2)
  auto r1 = isolateRoots(up({-2, 0, 1}));
  REQUIRE(r1.size() == 2);
  CHECK(upEval(up({-2, 0, 1}), r1[0].lo) * upEval(up({-2, 0, 1}), r1[0].hi) < 0);
  CHECK(r1[0].hi < 0);
  CHECK(r1[1].lo > 0);
  CHECK(r1[1].lo * r1[1].lo < 2);
  CHECK(r1[1].hi * r1[1].hi > 2);

  // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
  auto r2 = isolateRoots(up({-6, 11, -6, 1}));
  REQUIRE(r2.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(r2[k].lo <= Rat(k + 1));
    CHECK(Rat(k + 1) <= r2[k].hi);
  }

  // x^2 + 1: no real roots
  CHECK(isolateRoots(up({1, 0, 1})).empty());

  // 2x - 1: one exact rational root
  auto r3 = isolateRoots(up({-1, 2}));
  REQUIRE(r3.size() == 1);
  CHECK(r3[0].exact());
  CHECK(r3[0].lo == Rat(1, 2));

  // mixed exact and irrational: (x - 1/2)(x^2 - 2)
  UPoly mixed = up({2, -4, -1, 2});  // 2x^3 - x^2 - 4x + 2
  auto r4 = isolateRoots(upSqfree(mixed));
  REQUIRE(r4.size() == 3);
  CHECK(r4[1].exact());
  CHECK(r4[1].lo == Rat(1, 2));
}

TEST_CASE("sign evaluation at an isolated algebraic root") {
  UPoly q = up({-2, 0, 1});  // roots +-sqrt(2)
  auto roots = isolateRoots(q);
  REQUIRE(roots.size() == 2);
  // x^3 is negative at -sqrt(2), positive at +sqrt(2)
  CHECK(signAtRoot(up({0, 0, 0, 1}), q, roots[0]) == -1);
  CHECK(signAtRoot(up({0, 0, 0, 1}), q, roots[1]) == 1);
  // x^2 - 2 itself vanishes there, also when hidden in a product
  CHECK(signAtRoot(up({-2, 0, 1}), q, roots[1]) == 0);
  UPoly prod = upNormalize({Rat(-2), Rat(-2), Rat(1), Rat(1)});  // (x^2-2)(x+1)
  CHECK(signAtRoot(prod, q, roots[1]) == 0);
  CHECK(signAtRoot(up({1, 1}), q, roots[0]) < 0);  // x + 1 < 0 at -sqrt(2)
}

TEST_CASE("univariate decisions match a fine grid scan on 50 low-degree polynomials") {
  auto syms = arithSyms();
  std::mt19937_64 rng(99);
  int checked = 0;
  while (checked < 50) {
    // product of up to 4 linear factors with roots on the 1/8 lattice: every
    // sign cell is wider than the scan step, so the grid oracle is exact
    int deg = 1 + (int)(rng() % 4);
    UPoly p = {Rat((long)(rng() % 5) - 2)};
    if (p[0] == 0) p[0] = Rat(1);
    if (rng() % 2) p[0] /= 2;
    for (int k = 0; k < deg; ++k) {
      Rat root((long)(rng() % 81) - 40, 8);
      // multiply by (x - root)
      UPoly q(p.size() + 1, Rat(0));
      for (size_t i = 0; i < p.size(); ++i) {
        q[i + 1] += p[i];
        q[i] -= p[i] * root;
      }
      p = q;
    }

    // build the formula exists t. p(t) rel 0 in concrete syntax
    SymbolTable tab = *syms;
    int vt = tab.addVar("t", 0);
    TermP tv = mkVar(vt);
    TermP body = mkNum(p[0]);
    for (size_t i = 1; i < p.size(); ++i)
      body = mkBin(TK::Add, body,
                   mkBin(TK::Mul, mkNum(p[i]), i == 1 ? tv : mkPow(tv, (int)i)));
    Rel rels[] = {Rel::Gt, Rel::Eq, Rel::Ge, Rel::Lt};
    Rel rel = rels[checked % 4];
    FormulaP f = mkQuant(FK::Exists, vt, 0, mkCmp(rel, body, mkNum(Rat(0))));

    bool got = qeDecide(tab, f);

    // oracle: scan [-6, 6] in 10^-3 steps with exact rationals
    bool want = false;
    for (long k = -6000; k <= 6000 && !want; ++k) {
      Rat val = upEval(p, ratOf(k, 1000));
      switch (rel) {
        case Rel::Gt: want = val > 0; break;
        case Rel::Eq: want = val == 0; break;
        case Rel::Ge: want = val >= 0; break;
        default: want = val < 0; break;
      }
    }
    CAPTURE(checked);
    CHECK(got == want);
    ++checked;
  }
}

TEST_CASE("ground comparisons evaluate exactly") {
  auto syms = arithSyms();
  CHECK(qeDecide(*syms, parseFormulaStr(*syms, "2 + 3 * 4 = 14")));
  CHECK(qeDecide(*syms, parseFormulaStr(*syms, "1/3 > 1/4")));
  CHECK(qeDecide(*syms, parseFormulaStr(*syms, "(-2) * (-2) >= 4")));
  CHECK(!qeDecide(*syms, parseFormulaStr(*syms, "1/3 = 0.3")));
}

TEST_CASE("pinned eliminations") {
  auto syms = arithSyms();
  SUBCASE("universal square bound") {
    CHECK(qeStr(*syms, "forall R y. Z < y^2") == "Z < 0");
    // same shape through an abstracted unary application
    SymbolTable tab = *syms;
    tab.addVar("i", tab.sortOf("C"));
    CHECK(printFormula(tab, qe(tab, parseFormulaStr(tab, "forall R y. aa(i) < y^2"))) ==
          "aa(i) < 0");
  }
  SUBCASE("interval nonemptiness") {
    CHECK(qeStr(*syms, "exists R x. x > a & x < b") == "a < b");
  }
  SUBCASE("parametric universal sign constraint") {
    CHECK(qeStr(*syms, "forall R x. c * x >= 0") == "c = 0");
  }
  SUBCASE("closed decisions") {
    CHECK(qeDecide(*syms, parseFormulaStr(*syms, "exists R x. x > 0 & x < 1")));
    CHECK(qeDecide(*syms, parseFormulaStr(*syms, "forall R t. t >= 0 -> t^2 + 1 > 0")));
    CHECK(!qeDecide(*syms, parseFormulaStr(*syms, "forall R t. t >= 0 -> 10 * t != 1")));
    CHECK(qeDecide(*syms, parseFormulaStr(*syms, "exists R t. t^2 = 2 & t > 0")));
    CHECK(qeDecide(*syms, parseFormulaStr(*syms, "true")));
  }
  SUBCASE("even powers reduce to the nonnegative half-line") {
    CHECK(qeStr(*syms, "exists R y. y^2 < c") == "c > 0");
  }
  SUBCASE("parametric disequality splits on the leading coefficient") {
    FormulaP in = parseFormulaStr(*syms, "exists R s. (V - W) * s + (X - Y) != 0");
    FormulaP out = qe(*syms, in);
    std::vector<int> fv;
    collectFreeVars(out, fv);
    CHECK(fv.size() <= 4);  // no new free variables, s eliminated
    checkSampledEquivalence(*syms, parseFormulaStr(*syms, "V != W | X != Y"), out, 50, 5);
  }
}

TEST_CASE("quantified elimination leaves no extra free variables") {
  auto syms = arithSyms();
  FormulaP in = parseFormulaStr(*syms, "forall R x. x > a -> x > b");
  FormulaP out = qe(*syms, in);
  CHECK(out->kind == FK::Cmp);  // reduces to a single comparison of a and b
  std::vector<int> inFv, outFv;
  collectFreeVars(in, inFv);
  collectFreeVars(out, outFv);
  for (int v : outFv)
    CHECK(std::find(inFv.begin(), inFv.end(), v) != inFv.end());
  checkSampledEquivalence(*syms, in, out, 200, 17);
}

TEST_CASE("errors are reported with the right codes") {
  auto syms = arithSyms();
  SymbolTable tab = *syms;
  CHECK(codeOf([&] { qe(tab, parseFormulaStr(tab, "exists R x. x^3 + c * x = 1")); }) ==
        Err::UnsupportedDegree);
  CHECK(codeOf([&] { qe(tab, parseFormulaStr(tab, "forall C i. lnk(i) != i")); }) ==
        Err::ObjectSortAtom);
  CHECK(codeOf([&] { qe(tab, parseFormulaStr(tab, "[Z := 1] Z > 0")); }) ==
        Err::QeInapplicable);
}

TEST_CASE("object literals ride through elimination untouched") {
  auto syms = arithSyms();
  SymbolTable tab = *syms;
  FormulaP f = parseFormulaStr(tab, "nu = lnk(nu) | (exists R x. x > a & x < a + 1)");
  FormulaP g = qe(tab, f);
  // the arithmetic half is true, so the whole simplifies to true
  CHECK(g->kind == FK::True);
  FormulaP h = qe(tab, parseFormulaStr(tab, "nu = lnk(nu) & (exists R x. x > a & x < a)"));
  CHECK(h->kind == FK::False);
  // the literal survives alone (operands come back print-sorted)
  FormulaP k = qe(tab, parseFormulaStr(tab, "nu != lnk(nu) & (exists R x. x < a)"));
  CHECK(printFormula(tab, k) == "lnk(nu) != nu");
}

TEST_CASE("100 random linear eliminations agree with the cell-decomposition oracle") {
  auto syms = arithSyms();
  std::mt19937_64 rng(20260815);
  int va = syms->varIx.at("a"), vb = syms->varIx.at("b");

  for (int n = 0; n < 100; ++n) {
    SymbolTable tab = *syms;
    int vx = tab.addVar("x", 0);
    // random boolean combination of linear atoms in x with parameters a, b
    std::function<FormulaP(int)> mkAtomic = [&](int depth) -> FormulaP {
      if (depth == 0) {
        auto lin = [&](int v) {
          return mkBin(TK::Mul, mkNum(Rat((long)(rng() % 5) - 2)), mkVar(v));
        };
        TermP lhs = mkBin(TK::Add, lin(vx), mkBin(TK::Add, lin(va), lin(vb)));
        TermP rhs = mkNum(ratOf((long)(rng() % 9) - 4, (long)(1 + rng() % 2)));
        Rel rels[] = {Rel::Eq, Rel::Ne, Rel::Ge, Rel::Gt, Rel::Le, Rel::Lt};
        return mkCmp(rels[rng() % 6], lhs, rhs);
      }
      switch (rng() % 4) {
        case 0: return mkNot(mkAtomic(depth - 1));
        case 1: return mkBinF(FK::And, mkAtomic(depth - 1), mkAtomic(depth - 1));
        case 2: return mkBinF(FK::Or, mkAtomic(depth - 1), mkAtomic(depth - 1));
        default: return mkBinF(FK::Imply, mkAtomic(depth - 1), mkAtomic(depth - 1));
      }
    };
    FormulaP matrix = mkAtomic(1 + (int)(rng() % 2));
    FormulaP f = mkQuant(rng() % 2 ? FK::Exists : FK::Forall, vx, 0, matrix);
    FormulaP g = qe(tab, f);
    CHECK(!formulaMentionsVar(g, vx));

    // compare on a grid of parameter values
    for (long ai = -2; ai <= 2; ++ai) {
      for (long bi = -2; bi <= 2; ++bi) {
        std::map<int, Rat> asg{{va, ratOf(ai, 2)}, {vb, ratOf(bi, 2)}};
        bool want = bruteForce(tab, plug(tab, f, asg));
        bool got = groundFormula(plug(tab, g, asg));
        CAPTURE(n);
        CAPTURE(ai);
        CAPTURE(bi);
        REQUIRE(want == got);
      }
    }
  }
}
