#include "qdl/ode.hpp"

#include <functional>
#include <map>

#include "qdl/poly.hpp"
#include "qdl/qe.hpp"
#include "qdl/subst.hpp"

namespace qdl {
namespace {

// ---------------------------------------------------------------------------
// Polynomials in the time variable whose coefficients are time-free terms.
// Index k holds the coefficient of timeVar^k. Keeping coefficients symbolic
// (instead of flattening through Poly) preserves the shape of the input —
// solutions print as x(i) + v(i)*t + a(i)/2*t^2, not as normal forms.
// ---------------------------------------------------------------------------

using TimePoly = std::vector<TermP>;

bool numIs(const TermP& t, long v) { return t->kind == TK::Num && t->num == v; }

TermP sAdd(const TermP& a, const TermP& b) {
  if (numIs(a, 0)) return b;
  if (numIs(b, 0)) return a;
  if (a->kind == TK::Num && b->kind == TK::Num) return mkNum(a->num + b->num);
  return mkBin(TK::Add, a, b);
}
TermP sSub(const TermP& a, const TermP& b) {
  if (numIs(b, 0)) return a;
  if (a->kind == TK::Num && b->kind == TK::Num) return mkNum(a->num - b->num);
  if (numIs(a, 0)) return mkNeg(b);
  return mkBin(TK::Sub, a, b);
}
TermP sMul(const TermP& a, const TermP& b) {
  if (numIs(a, 0) || numIs(b, 0)) return mkNum(Rat(0));
  if (numIs(a, 1)) return b;
  if (numIs(b, 1)) return a;
  if (a->kind == TK::Num && b->kind == TK::Num) return mkNum(a->num * b->num);
  return mkBin(TK::Mul, a, b);
}
TermP sScale(const Rat& q, const TermP& a) {
  if (q == 1) return a;
  if (a->kind == TK::Num) return mkNum(q * a->num);
  return mkBin(TK::Mul, mkNum(q), a);
}
TermP sDivBy(const TermP& a, const Rat& q) {
  if (q == 1) return a;
  if (a->kind == TK::Num) return mkNum(a->num / q);
  return mkBin(TK::Div, a, mkNum(q));
}

TermP tpCoeff(const TimePoly& p, size_t k) { return k < p.size() ? p[k] : mkNum(Rat(0)); }

TimePoly tpAdd(const TimePoly& a, const TimePoly& b) {
  TimePoly r(std::max(a.size(), b.size()));
  for (size_t k = 0; k < r.size(); ++k) r[k] = sAdd(tpCoeff(a, k), tpCoeff(b, k));
  return r;
}
TimePoly tpSub(const TimePoly& a, const TimePoly& b) {
  TimePoly r(std::max(a.size(), b.size()));
  for (size_t k = 0; k < r.size(); ++k) r[k] = sSub(tpCoeff(a, k), tpCoeff(b, k));
  return r;
}
TimePoly tpNeg(const TimePoly& a) {
  TimePoly r(a.size());
  for (size_t k = 0; k < a.size(); ++k) r[k] = numIs(a[k], 0) ? a[k] : mkNeg(a[k]);
  return r;
}
TimePoly tpMul(const TimePoly& a, const TimePoly& b) {
  if (a.empty() || b.empty()) return {};
  TimePoly r(a.size() + b.size() - 1, mkNum(Rat(0)));
  for (size_t i = 0; i < a.size(); ++i) {
    if (numIs(a[i], 0)) continue;
    for (size_t j = 0; j < b.size(); ++j) r[i + j] = sAdd(r[i + j], sMul(a[i], b[j]));
  }
  return r;
}
TimePoly tpDeriv(const TimePoly& p) {
  TimePoly r;
  for (size_t k = 1; k < p.size(); ++k) r.push_back(sScale(Rat((long)k), p[k]));
  return r;
}
TimePoly tpIntegrate(const TimePoly& p, TermP init) {
  TimePoly r{std::move(init)};
  for (size_t k = 0; k < p.size(); ++k) r.push_back(sDivBy(p[k], Rat((long)(k + 1))));
  return r;
}
TermP tpToTerm(const TimePoly& p, int timeVar) {
  TermP acc;
  for (size_t k = 0; k < p.size(); ++k) {
    if (numIs(p[k], 0)) continue;
    TermP mono = k == 0   ? p[k]
                 : k == 1 ? sMul(p[k], mkVar(timeVar))
                          : sMul(p[k], mkPow(mkVar(timeVar), (int)k));
    acc = acc ? sAdd(acc, mono) : mono;
  }
  return acc ? acc : mkNum(Rat(0));
}

// Views a term as a polynomial in timeVar. Anything the time variable does
// not reach is a single opaque coefficient; a division must have a time-free
// divisor; time under an application or conditional is not polynomial.
std::optional<TimePoly> timePolyOf(const TermP& t, int timeVar) {
  if (!termMentionsVar(t, timeVar)) return TimePoly{t};
  switch (t->kind) {
    case TK::Var: return TimePoly{mkNum(Rat(0)), mkNum(Rat(1))};
    case TK::Add:
    case TK::Sub:
    case TK::Mul: {
      auto a = timePolyOf(t->args[0], timeVar), b = timePolyOf(t->args[1], timeVar);
      if (!a || !b) return std::nullopt;
      if (t->kind == TK::Add) return tpAdd(*a, *b);
      if (t->kind == TK::Sub) return tpSub(*a, *b);
      return tpMul(*a, *b);
    }
    case TK::Div: {
      if (termMentionsVar(t->args[1], timeVar)) return std::nullopt;
      auto a = timePolyOf(t->args[0], timeVar);
      if (!a) return std::nullopt;
      TimePoly r(a->size());
      for (size_t k = 0; k < a->size(); ++k) {
        const TermP& c = (*a)[k];
        if (numIs(c, 0)) r[k] = c;
        else if (c->kind == TK::Num && t->args[1]->kind == TK::Num)
          r[k] = mkNum(c->num / t->args[1]->num);
        else r[k] = mkBin(TK::Div, c, t->args[1]);
      }
      return r;
    }
    case TK::Neg: {
      auto a = timePolyOf(t->args[0], timeVar);
      if (!a) return std::nullopt;
      return tpNeg(*a);
    }
    case TK::Pow: {
      if (t->ipow < 0) return std::nullopt;
      auto a = timePolyOf(t->args[0], timeVar);
      if (!a) return std::nullopt;
      TimePoly r{mkNum(Rat(1))};
      for (int k = 0; k < t->ipow; ++k) r = tpMul(r, *a);
      return r;
    }
    default: return std::nullopt;  // App/Cond reached by the time variable
  }
}

// One flow per evolved function: its equation's argument pattern and the
// solution term to put in place of matching reads.
struct Flow {
  const std::vector<TermP>* pattern = nullptr;
  TermP term;
};

// Replaces every application of an evolved function by its flow. An evolved
// read whose arguments differ from the equation's own pattern (or one buried
// in a conditional's guard) has no closed form here.
std::optional<TermP> substFlows(const TermP& t, const std::map<int, Flow>& flows) {
  switch (t->kind) {
    case TK::Num:
    case TK::Var: return t;
    case TK::Cond:
      for (const auto& [fn, fl] : flows)
        if (formulaMentionsFunc(t->cond, fn)) return std::nullopt;
      [[fallthrough]];
    default: {
      std::vector<TermP> args;
      args.reserve(t->args.size());
      bool changed = false;
      for (const auto& a0 : t->args) {
        auto a = substFlows(a0, flows);
        if (!a) return std::nullopt;
        changed = changed || *a != a0;
        args.push_back(std::move(*a));
      }
      if (t->kind == TK::App) {
        auto it = flows.find(t->ref);
        if (it != flows.end()) {
          const auto& pat = *it->second.pattern;
          if (args.size() != pat.size()) return std::nullopt;
          for (size_t k = 0; k < pat.size(); ++k)
            if (!eqTerm(args[k], pat[k])) return std::nullopt;
          return it->second.term;
        }
      }
      if (!changed) return t;
      auto u = std::make_shared<Term>(*t);
      u->args = std::move(args);
      return u;
    }
  }
}

bool polyZero(SymbolTable& syms, const TermP& t) {
  QeCtx ctx(syms);
  return qeTermToPoly(ctx, t).isZero();
}

}  // namespace

OdeCheck checkQOdeSolution(SymbolTable& syms, const Program& ode, const QOdeSolution& sol) {
  OdeCheck bad;
  if (ode.kind != PK::QOde || sol.timeVar < 0) {
    bad.eqnIndex = 0;
    return bad;
  }
  std::map<int, Flow> flows;
  for (const auto& it : sol.items) flows[it.fn] = {&it.args, it.rhs};

  // pass 1: every equation is covered, under its own pattern, by a flow that
  // is polynomial in time
  std::vector<TimePoly> tps(ode.odes.size());
  for (size_t k = 0; k < ode.odes.size(); ++k) {
    const OdeItem& eqn = ode.odes[k];
    bad.eqnIndex = (int)k;
    auto it = flows.find(eqn.fn);
    if (it == flows.end()) return bad;
    const auto& pat = *it->second.pattern;
    if (pat.size() != eqn.args.size()) return bad;
    bool match = true;
    for (size_t j = 0; j < pat.size(); ++j) match = match && eqTerm(pat[j], eqn.args[j]);
    if (!match) return bad;
    auto tp = timePolyOf(it->second.term, sol.timeVar);
    if (!tp) return bad;
    tps[k] = std::move(*tp);
  }

  // pass 2: at time zero every flow starts at its own symbol
  for (size_t k = 0; k < ode.odes.size(); ++k) {
    const OdeItem& eqn = ode.odes[k];
    TermP gap = sSub(tpCoeff(tps[k], 0), mkApp(eqn.fn, eqn.args));
    if (!polyZero(syms, gap)) {
      bad.eqnIndex = (int)k;
      bad.residual = gap;
      return bad;
    }
  }

  // pass 3: the time derivative of each flow equals its slope with every
  // evolved read replaced by the claimed flows
  for (size_t k = 0; k < ode.odes.size(); ++k) {
    const OdeItem& eqn = ode.odes[k];
    bad.eqnIndex = (int)k;
    auto rhsFlow = substFlows(eqn.rhs, flows);
    if (!rhsFlow) return bad;
    auto rhsTp = timePolyOf(*rhsFlow, sol.timeVar);
    if (!rhsTp) return bad;
    TermP gap = tpToTerm(tpSub(tpDeriv(tps[k]), *rhsTp), sol.timeVar);
    if (!polyZero(syms, gap)) {
      bad.residual = gap;
      return bad;
    }
  }

  OdeCheck good;
  good.ok = true;
  return good;
}

std::optional<QOdeSolution> solveQOde(SymbolTable& syms, const Program& ode) {
  if (ode.kind != PK::QOde) return std::nullopt;
  const auto& eqs = ode.odes;
  if (eqs.empty()) return std::nullopt;

  // one equation per function
  std::map<int, size_t> byFn;
  for (size_t k = 0; k < eqs.size(); ++k)
    if (!byFn.emplace(eqs[k].fn, k).second) return std::nullopt;

  // argument patterns must not read evolved state: a pattern that moves over
  // time has no fixed initial value to integrate from
  for (const auto& e : eqs)
    for (const auto& arg : e.args)
      for (const auto& [fn, j] : byFn)
        if (termMentionsFunc(arg, fn)) return std::nullopt;

  // dependency order: an equation waits for every evolved symbol its slope
  // reads; any cycle (including direct feedback) leaves the polynomial world
  std::vector<size_t> order;
  std::vector<int> state(eqs.size(), 0);  // 0 unseen, 1 on the stack, 2 done
  std::function<bool(size_t)> visit = [&](size_t k) -> bool {
    if (state[k] == 2) return true;
    if (state[k] == 1) return false;
    state[k] = 1;
    for (const auto& [fn, j] : byFn)
      if (termMentionsFunc(eqs[k].rhs, fn) && !visit(j)) return false;
    state[k] = 2;
    order.push_back(k);
    return true;
  };
  for (size_t k = 0; k < eqs.size(); ++k)
    if (!visit(k)) return std::nullopt;

  QOdeSolution sol;
  sol.timeVar = syms.freshVar(SymbolTable::kRealSort);
  sol.qvar = ode.qvar;
  sol.qsort = ode.qsort;
  sol.items.resize(eqs.size());
  std::map<int, Flow> flows;
  for (size_t k : order) {
    auto rhsFlow = substFlows(eqs[k].rhs, flows);
    if (!rhsFlow) return std::nullopt;
    auto tp = timePolyOf(*rhsFlow, sol.timeVar);
    if (!tp) return std::nullopt;
    TermP flowT = tpToTerm(tpIntegrate(*tp, mkApp(eqs[k].fn, eqs[k].args)), sol.timeVar);
    sol.items[k] = {eqs[k].fn, eqs[k].args, flowT};
    flows[eqs[k].fn] = {&eqs[k].args, flowT};
  }

  // the checker is the gatekeeper: nothing leaves the solver unvalidated
  if (!checkQOdeSolution(syms, ode, sol).ok) return std::nullopt;
  return sol;
}

ProgramP solutionUpdate(SymbolTable& syms, const QOdeSolution& sol, const TermP& time) {
  std::vector<AssignItem> items;
  items.reserve(sol.items.size());
  for (const auto& it : sol.items)
    items.push_back({it.fn, it.args, substVarT(syms, it.rhs, sol.timeVar, time)});
  return mkQAssign(sol.qvar, sol.qsort, std::move(items));
}

EvolveStep mkEvolveUpdate(SymbolTable& syms, const Program& ode, const QOdeSolution& sol,
                          const TermP& time, int tee) {
  EvolveStep st;
  st.update = solutionUpdate(syms, sol, time);
  if (ode.domain && ode.domain->kind != FK::True) {
    ProgramP atTee = solutionUpdate(syms, sol, mkVar(tee));
    FormulaP range = mkBinF(FK::And, mkCmp(Rel::Le, mkNum(Rat(0)), mkVar(tee)),
                            mkCmp(Rel::Le, mkVar(tee), time));
    st.guard = mkQuant(FK::Forall, tee, SymbolTable::kRealSort,
                       mkBinF(FK::Imply, range, mkModal(FK::Box, atTee, ode.domain)));
  } else {
    st.guard = mkBoolConst(true);
  }
  return st;
}

}  // namespace qdl
