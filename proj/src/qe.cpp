#include "qdl/qe.hpp"

#include <algorithm>

#include "qdl/desugar.hpp"
#include "qdl/parse.hpp"
#include "qdl/print.hpp"
#include "qdl/sturm.hpp"

namespace qdl {

int QeCtx::varOf(const TermP& t) {
  std::string key = printTerm(syms, t);
  auto it = polyVarByKey.find(key);
  if (it != polyVarByKey.end()) return it->second;
  int id = (int)polyVarTerm.size();
  polyVarTerm.push_back(t);
  polyVarByKey[key] = id;
  return id;
}

int QeCtx::olitOf(const TermP& a, const TermP& b) {
  std::string ka = printTerm(syms, a), kb = printTerm(syms, b);
  if (kb < ka) return olitOf(b, a);
  std::string key = ka + "\x1f" + kb;
  auto it = olitByKey.find(key);
  if (it != olitByKey.end()) return it->second;
  int id = (int)olitPair.size();
  olitPair.push_back({a, b});
  olitByKey[key] = id;
  return id;
}

namespace {

bool mentionsBlockVar(const QeCtx& ctx, const TermP& t) {
  for (int v : ctx.blockVars)
    if (termMentionsVar(t, v)) return true;
  return false;
}

Poly alienParam(QeCtx& ctx, const TermP& t, const char* what) {
  if (mentionsBlockVar(ctx, t))
    fail(Err::UnsupportedFeature,
         std::string(what) + " depending on a quantified variable is outside "
                             "the supported fragment",
         t->span);
  return Poly::var(ctx.varOf(t));
}

}  // namespace

Poly qeTermToPoly(QeCtx& ctx, const TermP& t) {
  switch (t->kind) {
    case TK::Num: return Poly::num(t->num);
    case TK::Var:
      if (ctx.syms.vars[t->ref].sort != SymbolTable::kRealSort)
        fail(Err::ObjectSortAtom, "object variable in arithmetic", t->span);
      return Poly::var(ctx.varOf(t));
    case TK::Add: return qeTermToPoly(ctx, t->args[0]) + qeTermToPoly(ctx, t->args[1]);
    case TK::Sub: return qeTermToPoly(ctx, t->args[0]) - qeTermToPoly(ctx, t->args[1]);
    case TK::Mul: return qeTermToPoly(ctx, t->args[0]) * qeTermToPoly(ctx, t->args[1]);
    case TK::Neg: return -qeTermToPoly(ctx, t->args[0]);
    case TK::Pow: return qeTermToPoly(ctx, t->args[0]).pow(t->ipow);
    case TK::Div: {
      Poly den = qeTermToPoly(ctx, t->args[1]);
      if (den.isConst()) {
        if (den.isZero()) fail(Err::SolveFailed, "division by zero", t->span);
        return qeTermToPoly(ctx, t->args[0]) * Poly::num(Rat(1) / den.constVal());
      }
      return alienParam(ctx, t, "division");
    }
    case TK::App: return alienParam(ctx, t, "function application");
    case TK::Cond: return alienParam(ctx, t, "conditional term");
  }
  fail(Err::SolveFailed, "malformed term", t->span);
}

QFP qeFormulaToQF(QeCtx& ctx, const FormulaP& f) {
  switch (f->kind) {
    case FK::True: return qfTrue();
    case FK::False: return qfFalse();
    case FK::Cmp: {
      int sort = sortOfTerm(ctx.syms, f->lhs);
      if (ctx.syms.isObjectSort(sort)) {
        if (mentionsBlockVar(ctx, f->lhs) || mentionsBlockVar(ctx, f->rhs))
          fail(Err::ObjectSortAtom, "object term depends on a quantified variable",
               f->span);
        return qfOLit(ctx.olitOf(f->lhs, f->rhs), f->rel == Rel::Ne);
      }
      Poly l = qeTermToPoly(ctx, f->lhs), r = qeTermToPoly(ctx, f->rhs);
      switch (f->rel) {
        case Rel::Eq: return qfAtom(QRel::Eq, l - r);
        case Rel::Ne: return qfAtom(QRel::Ne, l - r);
        case Rel::Ge: return qfAtom(QRel::Ge, l - r);
        case Rel::Gt: return qfAtom(QRel::Gt, l - r);
        case Rel::Le: return qfAtom(QRel::Ge, r - l);
        case Rel::Lt: return qfAtom(QRel::Gt, r - l);
      }
      return qfTrue();
    }
    case FK::Not: return qfNot(qeFormulaToQF(ctx, f->kids[0]));
    case FK::And: return qfAnd({qeFormulaToQF(ctx, f->kids[0]), qeFormulaToQF(ctx, f->kids[1])});
    case FK::Or: return qfOr({qeFormulaToQF(ctx, f->kids[0]), qeFormulaToQF(ctx, f->kids[1])});
    case FK::Imply:
      return qfOr({qfNot(qeFormulaToQF(ctx, f->kids[0])), qeFormulaToQF(ctx, f->kids[1])});
    case FK::Equiv: {
      QFP a = qeFormulaToQF(ctx, f->kids[0]), b = qeFormulaToQF(ctx, f->kids[1]);
      return qfOr({qfAnd({a, b}), qfAnd({qfNot(a), qfNot(b)})});
    }
    case FK::Forall:
    case FK::Exists:
      fail(Err::QeInapplicable, "nested quantifier reached the matrix conversion",
           f->span);
    case FK::Box:
    case FK::Diamond:
      fail(Err::QeInapplicable, "modal operator inside an arithmetic formula", f->span);
  }
  fail(Err::QeInapplicable, "malformed formula", f->span);
}

namespace {

TermP polyToTerm(const QeCtx& ctx, const Poly& p) {
  if (p.isZero()) return mkNum(Rat(0));
  TermP acc;
  bool accNeg = false;
  for (const auto& [m, c] : p.terms) {
    TermP monoTerm;
    Rat coeff = c < 0 ? Rat(-c) : c;
    for (const auto& [v, e] : m) {
      TermP base = ctx.polyVarTerm[(size_t)v];
      TermP powed = e == 1 ? base : mkPow(base, e);
      monoTerm = monoTerm ? mkBin(TK::Mul, monoTerm, powed) : powed;
    }
    if (!monoTerm) monoTerm = mkNum(coeff);
    else if (coeff != 1) monoTerm = mkBin(TK::Mul, mkNum(coeff), monoTerm);
    if (!acc) {
      acc = monoTerm;
      accNeg = c < 0;
      if (accNeg) acc = mkNeg(acc);
    } else {
      acc = mkBin(c < 0 ? TK::Sub : TK::Add, acc, monoTerm);
    }
  }
  return acc;
}

}  // namespace

FormulaP qeQFToFormula(const QeCtx& ctx, const QFP& q) {
  switch (q->kind) {
    case QK::Tru: return mkBoolConst(true);
    case QK::Fls: return mkBoolConst(false);
    case QK::Atom: {
      // Split p rel 0 into positive and negated-negative parts so the result
      // reads without unary minus: b - a > 0 becomes a < b.
      Poly pos, neg;
      for (const auto& [m, c] : q->p.terms) {
        Poly mono;
        mono.terms[m] = c < 0 ? Rat(-c) : c;
        if (c < 0) neg = neg + mono;
        else pos = pos + mono;
      }
      TermP posT = polyToTerm(ctx, pos), negT = polyToTerm(ctx, neg);
      switch (q->rel) {
        case QRel::Eq: return mkCmp(Rel::Eq, posT, negT);
        case QRel::Ne: return mkCmp(Rel::Ne, posT, negT);
        case QRel::Ge:
          return neg.isZero() ? mkCmp(Rel::Ge, posT, negT) : mkCmp(Rel::Le, negT, posT);
        case QRel::Gt:
          return neg.isZero() ? mkCmp(Rel::Gt, posT, negT) : mkCmp(Rel::Lt, negT, posT);
      }
      fail(Err::QeInapplicable, "malformed atom");
    }
    case QK::OLit: {
      const auto& [a, b] = ctx.olitPair[(size_t)q->olit];
      return mkCmp(q->oneg ? Rel::Ne : Rel::Eq, a, b);
    }
    case QK::And:
    case QK::Or: {
      FormulaP acc = qeQFToFormula(ctx, q->kids[0]);
      for (size_t i = 1; i < q->kids.size(); ++i)
        acc = mkBinF(q->kind == QK::And ? FK::And : FK::Or, acc,
                     qeQFToFormula(ctx, q->kids[i]));
      return acc;
    }
  }
  fail(Err::QeInapplicable, "malformed matrix");
}

// ---------------------------------------------------------------------------
// Linear virtual substitution (Loos–Weispfenning test points)
// ---------------------------------------------------------------------------

namespace {

int maxDegreeIn(const QFP& q, int v) {
  int d = 0;
  if (q->kind == QK::Atom) return q->p.degreeIn(v);
  for (const auto& k : q->kids) d = std::max(d, maxDegreeIn(k, v));
  return d;
}

void collectAtoms(const QFP& q, std::vector<QFP>& out) {
  if (q->kind == QK::Atom) {
    out.push_back(q);
    return;
  }
  for (const auto& k : q->kids) collectAtoms(k, out);
}

// Substitute v := -infinity into one atom p = a*v + b.
QFP substMinusInf(const Poly& a, const Poly& b, QRel rel) {
  switch (rel) {
    case QRel::Eq: return qfAnd({qfAtom(QRel::Eq, a), qfAtom(QRel::Eq, b)});
    case QRel::Ne: return qfOr({qfAtom(QRel::Ne, a), qfAtom(QRel::Ne, b)});
    case QRel::Ge:
      return qfOr({qfAtom(QRel::Gt, -a), qfAnd({qfAtom(QRel::Eq, a), qfAtom(QRel::Ge, b)})});
    case QRel::Gt:
      return qfOr({qfAtom(QRel::Gt, -a), qfAnd({qfAtom(QRel::Eq, a), qfAtom(QRel::Gt, b)})});
  }
  return qfTrue();
}

// Substitute v := -bc/ac (guardSign = sign of ac under the current guard)
// into p = a*v + b: the value a*(-bc/ac) + b has the sign of N = ac*b - a*bc
// multiplied by guardSign.
QFP substRoot(const Poly& N, QRel rel, int guardSign) {
  switch (rel) {
    case QRel::Eq: return qfAtom(QRel::Eq, N);
    case QRel::Ne: return qfAtom(QRel::Ne, N);
    case QRel::Ge: return qfAtom(QRel::Ge, guardSign > 0 ? N : -N);
    case QRel::Gt: return qfAtom(QRel::Gt, guardSign > 0 ? N : -N);
  }
  return qfTrue();
}

// Substitute v := root + epsilon. The atom value just right of the root has
// the sign of N if N != 0, otherwise the sign of the slope a.
QFP substRootEps(const Poly& N, const Poly& a, QRel rel, int guardSign) {
  Poly Ns = guardSign > 0 ? N : -N;
  switch (rel) {
    case QRel::Eq:  // zero on an open interval forces the zero polynomial
      return qfAnd({qfAtom(QRel::Eq, a), qfAtom(QRel::Eq, N)});
    case QRel::Ne: return qfOr({qfAtom(QRel::Ne, a), qfAtom(QRel::Ne, N)});
    case QRel::Ge:
      return qfOr({qfAtom(QRel::Gt, Ns), qfAnd({qfAtom(QRel::Eq, N), qfAtom(QRel::Ge, a)})});
    case QRel::Gt:
      return qfOr({qfAtom(QRel::Gt, Ns), qfAnd({qfAtom(QRel::Eq, N), qfAtom(QRel::Gt, a)})});
  }
  return qfTrue();
}

struct LinAtom {
  Poly a, b;  // p = a*v + b
  QRel rel;
};

LinAtom splitLinear(const QFP& atom, int v) {
  auto cs = atom->p.coeffsIn(v);
  if (cs.size() > 2) fail(Err::UnsupportedDegree, "atom is not linear");
  LinAtom la;
  la.b = cs.empty() ? Poly() : cs[0];
  la.a = cs.size() > 1 ? cs[1] : Poly();
  la.rel = atom->rel;
  return la;
}

QFP elimLinear(QeCtx& ctx, const QFP& q, int v) {
  std::vector<QFP> atoms;
  collectAtoms(q, atoms);
  std::vector<QFP> disjuncts;

  // Substitution of a test point t into the whole matrix.
  auto substAll = [&](const std::function<QFP(const LinAtom&)>& perAtom) {
    return qfMapAtoms(q, [&](QRel rel, const Poly& p) -> QFP {
      if (!p.mentions(v)) {
        auto f = std::make_shared<QF>();
        f->kind = QK::Atom;
        f->rel = rel;
        f->p = p;
        return QFP(f);
      }
      QFP wrapped = qfAtom(rel, p);
      if (wrapped->kind != QK::Atom)  // constant-folded away
        return wrapped;
      return perAtom(splitLinear(wrapped, v));
    });
  };

  // Test point -infinity.
  disjuncts.push_back(substAll([&](const LinAtom& la) { return substMinusInf(la.a, la.b, la.rel); }));

  // Roots of every atom that can bound the satisfying set from below.
  for (const auto& atom : atoms) {
    if (!atom->p.mentions(v)) continue;
    LinAtom root = splitLinear(atom, v);
    if (root.a.isZero()) continue;
    bool eps = root.rel == QRel::Gt || root.rel == QRel::Ne;
    // Guard on the sign of the leading coefficient; constants need one branch.
    for (int guardSign : {+1, -1}) {
      if (root.a.isConst() && ratSign(root.a.constVal()) != guardSign) continue;
      QFP guard = root.a.isConst()
                      ? qfTrue()
                      : qfAtom(QRel::Gt, guardSign > 0 ? root.a : -root.a);
      QFP body = substAll([&](const LinAtom& la) -> QFP {
        Poly N = root.a * la.b - la.a * root.b;
        return eps ? substRootEps(N, la.a, la.rel, guardSign)
                   : substRoot(N, la.rel, guardSign);
      });
      disjuncts.push_back(qfAnd({guard, body}));
    }
  }
  return qfOr(std::move(disjuncts));
}

// ---------------------------------------------------------------------------
// Even-power reduction and the univariate decision fallback
// ---------------------------------------------------------------------------

bool allDegreesEven(const QFP& q, int v) {
  if (q->kind == QK::Atom) {
    auto cs = q->p.coeffsIn(v);
    for (size_t k = 1; k < cs.size(); k += 2)
      if (!cs[k].isZero()) return false;
    return true;
  }
  for (const auto& k : q->kids)
    if (!allDegreesEven(k, v)) return false;
  return true;
}

QFP substEvenPowers(const QFP& q, int v, int u) {
  return qfMapAtoms(q, [&](QRel rel, const Poly& p) {
    auto cs = p.coeffsIn(v);
    Poly out;
    Poly uvar = Poly::var(u);
    for (size_t k = 0; k < cs.size(); k += 2) out = out + cs[k] * uvar.pow((int)k / 2);
    return qfAtom(rel, out);
  });
}

int qfEvalSigns(const QFP& q, const std::map<std::string, int>& sign) {
  switch (q->kind) {
    case QK::Tru: return 1;
    case QK::Fls: return 0;
    case QK::Atom: {
      int s = sign.at(q->p.str());
      switch (q->rel) {
        case QRel::Eq: return s == 0;
        case QRel::Ne: return s != 0;
        case QRel::Ge: return s >= 0;
        case QRel::Gt: return s > 0;
      }
      return 0;
    }
    case QK::OLit: fail(Err::ObjectSortAtom, "object literal in a univariate decision");
    case QK::And:
      for (const auto& k : q->kids)
        if (!qfEvalSigns(k, sign)) return 0;
      return 1;
    case QK::Or:
      for (const auto& k : q->kids)
        if (qfEvalSigns(k, sign)) return 1;
      return 0;
  }
  return 0;
}

// Refine an open root interval one bisection step.
void refineStep(const UPoly& q, RootInterval& iv) {
  if (iv.exact()) return;
  Rat mid = (iv.lo + iv.hi) / 2;
  Rat val = upEval(q, mid);
  if (val == 0) {
    iv = {mid, mid};
    return;
  }
  if (ratSign(upEval(q, iv.lo)) * ratSign(val) < 0) iv.hi = mid;
  else iv.lo = mid;
}

// Decide exists v. q where q mentions nothing but v.
QFP decideUnivariate(const QFP& q, int v) {
  std::set<int> vars;
  qfCollectVars(q, vars);
  vars.erase(v);
  if (!vars.empty() || qfHasOLit(q))
    fail(Err::UnsupportedDegree,
         "nonlinear quantified variable with parameters is outside the "
         "supported fragment");

  std::vector<QFP> atoms;
  collectAtoms(q, atoms);
  std::map<std::string, UPoly> upolys;
  for (const auto& a : atoms) upolys.emplace(a->p.str(), upFromPoly(a->p, v));

  // All sign changes happen at roots of the product.
  UPoly prod{Rat(1)};
  for (const auto& [key, up] : upolys) {
    UPoly next(prod.size() + up.size() - 1, Rat(0));
    for (size_t i = 0; i < prod.size(); ++i)
      for (size_t j = 0; j < up.size(); ++j) next[i + j] += prod[i] * up[j];
    prod = upNormalize(std::move(next));
  }
  UPoly Q = upSqfree(prod);
  auto roots = isolateRoots(Q);
  // Separate the intervals so open cells exist between them.
  for (size_t i = 0; i + 1 < roots.size(); ++i) {
    int rounds = 0;
    while (!(roots[i].hi < roots[i + 1].lo)) {
      refineStep(Q, roots[i]);
      refineStep(Q, roots[i + 1]);
      if (++rounds > 4096) fail(Err::SolveFailed, "root separation failed");
    }
  }

  std::vector<std::map<std::string, int>> cells;
  auto openCell = [&](const Rat& x) {
    std::map<std::string, int> s;
    for (const auto& [key, up] : upolys) s[key] = ratSign(upEval(up, x));
    cells.push_back(std::move(s));
  };
  if (roots.empty()) {
    openCell(Rat(0));
  } else {
    openCell(roots.front().lo - 1);
    for (size_t i = 0; i < roots.size(); ++i) {
      std::map<std::string, int> s;
      for (const auto& [key, up] : upolys) s[key] = signAtRoot(up, Q, roots[i]);
      cells.push_back(std::move(s));
      if (i + 1 < roots.size()) openCell((roots[i].hi + roots[i + 1].lo) / 2);
    }
    openCell(roots.back().hi + 1);
  }
  for (const auto& cell : cells)
    if (qfEvalSigns(q, cell)) return qfTrue();
  return qfFalse();
}

}  // namespace

QFP qeElimExists(QeCtx& ctx, QFP q, int v) {
  if (!qfMentions(q, v)) return q;
  int deg = maxDegreeIn(q, v);
  if (deg <= 1) return elimLinear(ctx, q, v);
  if (allDegreesEven(q, v)) {
    // v only occurs in even powers: u = v^2 ranges over [0, inf).
    int u = ctx.varOf(mkVar(ctx.syms.freshVar(SymbolTable::kRealSort)));
    QFP shifted = qfAnd({qfAtom(QRel::Ge, Poly::var(u)), substEvenPowers(q, v, u)});
    return qeElimExists(ctx, shifted, u);
  }
  return decideUnivariate(q, v);
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

namespace {

FormulaP qeWalk(SymbolTable& syms, const FormulaP& f) {
  switch (f->kind) {
    case FK::True:
    case FK::False: return f;
    case FK::Box:
    case FK::Diamond:
      fail(Err::QeInapplicable, "modal operator under quantifier elimination", f->span);
    case FK::Forall:
    case FK::Exists: {
      FK kind = f->kind;
      std::vector<int> block;
      FormulaP body = f;
      while (body->kind == kind) {
        if (syms.isObjectSort(body->sort))
          fail(Err::ObjectSortAtom, "quantifier over an object sort", body->span);
        block.push_back(body->var);
        body = body->kids[0];
      }
      FormulaP inner = qeWalk(syms, body);
      QeCtx ctx(syms);
      ctx.blockVars.insert(block.begin(), block.end());
      QFP matrix = qeFormulaToQF(ctx, inner);
      if (kind == FK::Forall) matrix = qfNot(matrix);
      std::vector<int> pvs;
      for (int v : block) pvs.push_back(ctx.varOf(mkVar(v)));
      while (!pvs.empty()) {
        // lowest max-degree first keeps the substitution linear when possible
        size_t best = 0;
        int bestDeg = 1 << 30;
        for (size_t i = 0; i < pvs.size(); ++i) {
          int d = maxDegreeIn(matrix, pvs[i]);
          if (d < bestDeg) {
            bestDeg = d;
            best = i;
          }
        }
        int pv = pvs[best];
        pvs.erase(pvs.begin() + best);
        matrix = qeElimExists(ctx, matrix, pv);
      }
      if (kind == FK::Forall) matrix = qfNot(matrix);
      return qeQFToFormula(ctx, matrix);
    }
    default: {
      // Quantifier-free once the kids are processed: round-trip the whole
      // subformula through the normalized matrix so ground atoms fold and
      // boolean structure simplifies.
      FormulaP g = f;
      if (f->kind != FK::Cmp) {
        auto h = std::make_shared<Formula>(*f);
        for (auto& k : h->kids) k = qeWalk(syms, k);
        g = h;
      }
      QeCtx ctx(syms);
      return qeQFToFormula(ctx, qeFormulaToQF(ctx, g));
    }
  }
}

}  // namespace

FormulaP qe(SymbolTable& syms, const FormulaP& f) {
  return qeWalk(syms, expandConditionals(f));
}

bool qeDecide(SymbolTable& syms, const FormulaP& f) {
  // Close over free real variables; reject free object variables.
  std::vector<int> fv;
  collectFreeVars(f, fv);
  FormulaP closed = f;
  for (int v : fv) {
    if (syms.vars[v].sort != SymbolTable::kRealSort)
      fail(Err::ObjectSortAtom, "free object variable in an arithmetic goal", f->span);
    closed = mkQuant(FK::Forall, v, SymbolTable::kRealSort, closed, f->span);
  }
  FormulaP res = qe(syms, closed);
  if (res->kind == FK::True) return true;
  if (res->kind == FK::False) return false;
  fail(Err::QeInapplicable, "goal did not reduce to a truth value", f->span);
}

}  // namespace qdl
