#include "qdl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qdl/ode.hpp"
#include "qdl/parse.hpp"
#include "qdl/print.hpp"
#include "qdl/qe.hpp"

namespace qdl {
namespace {

TV tvAnd(TV a, TV b) { return std::min(a, b); }
TV tvOr(TV a, TV b) { return std::max(a, b); }
TV tvOf(bool b) { return b ? TV::True : TV::False; }

std::string diffStr(const SymbolTable& syms, const State& before, const State& after) {
  std::vector<std::string> parts;
  for (const auto& [fn, tab] : after.funcs) {
    const FuncDecl& d = syms.funcs[(size_t)fn];
    std::string name = d.isEps ? "eps" : d.name;
    for (const auto& [args, val] : tab.entries) {
      Value old = before.lookup(fn, args);
      if (old == val) continue;
      std::string s = name;
      if (!args.empty()) {
        s += "(";
        for (size_t i = 0; i < args.size(); ++i) {
          if (i) s += ", ";
          s += valueStr(syms, args[i]);
        }
        s += ")";
      }
      parts.push_back(s + ": " + valueStr(syms, old) + " -> " + valueStr(syms, val));
    }
  }
  for (const auto& [sort, n] : after.nextFresh) {
    auto it = before.nextFresh.find(sort);
    for (int i = it == before.nextFresh.end() ? 0 : it->second; i < n; ++i)
      parts.push_back("new " + syms.sortNames[(size_t)sort] + "#" + std::to_string(i));
  }
  if (parts.empty()) return "(no change)";
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "; ";
    out += parts[i];
  }
  return out;
}

void pushTrace(const SymbolTable& syms, const State& before, State& after, const ProgramP& frag) {
  after.trace.push_back("step " + std::to_string(before.trace.size()) + ": " +
                        printProgram(syms, frag) + " -> " + diffStr(syms, before, after));
}

// --- grounding real-quantified subformulas into closed arithmetic -----------
//
// Everything outside the scope of the real quantifiers being decided is
// evaluated against the state: function applications become numerals, object
// quantifiers expand over the visible domain, object equalities collapse to
// constants. A nullptr result means the subformula cannot be reduced (it
// reads a table at a quantified real position, or contains a modality).

TermP groundT(const Simulator& sim, const State& st, const TermP& t, const Env& env,
              std::set<int>& scoped);

FormulaP groundF(const Simulator& sim, const SymbolTable& syms, const State& st,
                 const FormulaP& f, const Env& env, std::set<int>& scoped) {
  switch (f->kind) {
    case FK::True:
    case FK::False: return f;
    case FK::Cmp: {
      if (sortOfTerm(syms, f->lhs) != SymbolTable::kRealSort) {
        for (int v : scoped)
          if (termMentionsVar(f->lhs, v) || termMentionsVar(f->rhs, v)) return nullptr;
        try {
          bool eq = sim.evalTerm(st, f->lhs, env) == sim.evalTerm(st, f->rhs, env);
          return mkBoolConst(f->rel == Rel::Eq ? eq : !eq);
        } catch (const QdlError&) {
          return nullptr;
        }
      }
      TermP a = groundT(sim, st, f->lhs, env, scoped);
      TermP b = groundT(sim, st, f->rhs, env, scoped);
      if (!a || !b) return nullptr;
      return mkCmp(f->rel, a, b);
    }
    case FK::Forall:
    case FK::Exists: {
      if (f->sort == SymbolTable::kRealSort) {
        bool fresh = scoped.insert(f->var).second;
        FormulaP b = groundF(sim, syms, st, f->kids[0], env, scoped);
        if (fresh) scoped.erase(f->var);
        if (!b) return nullptr;
        return mkQuant(f->kind, f->var, f->sort, b);
      }
      // object quantifier: expand over the visible members
      FormulaP acc = mkBoolConst(f->kind == FK::Forall);
      for (const Value& e : st.visible(f->sort)) {
        Env env2 = env;
        env2[f->var] = e;
        FormulaP b = groundF(sim, syms, st, f->kids[0], env2, scoped);
        if (!b) return nullptr;
        acc = mkBinF(f->kind == FK::Forall ? FK::And : FK::Or, acc, b);
      }
      return acc;
    }
    case FK::Box:
    case FK::Diamond: return nullptr;
    default: {
      auto g = std::make_shared<Formula>(*f);
      for (auto& k : g->kids) {
        k = groundF(sim, syms, st, k, env, scoped);
        if (!k) return nullptr;
      }
      return g;
    }
  }
}

TermP groundT(const Simulator& sim, const State& st, const TermP& t, const Env& env,
              std::set<int>& scoped) {
  switch (t->kind) {
    case TK::Num: return t;
    case TK::Var: {
      if (scoped.count(t->ref)) return t;
      auto it = env.find(t->ref);
      if (it != env.end() && it->second.isReal()) return mkNum(it->second.r);
      return nullptr;
    }
    case TK::App: {
      // the table is opaque to arithmetic: its arguments must be evaluable now
      for (int v : scoped)
        if (termMentionsVar(t, v)) return nullptr;
      try {
        return mkNum(sim.evalTerm(st, t, env).r);
      } catch (const QdlError&) {
        return nullptr;
      }
    }
    case TK::Cond: {
      for (int v : scoped)
        if (formulaMentionsVar(t->cond, v)) return nullptr;
      TV c = sim.decideFormula(st, t->cond, env);
      if (c == TV::Unknown) return nullptr;
      return groundT(sim, st, t->args[c == TV::True ? 0 : 1], env, scoped);
    }
    default: {
      auto u = std::make_shared<Term>(*t);
      for (auto& a : u->args) {
        a = groundT(sim, st, a, env, scoped);
        if (!a) return nullptr;
      }
      return u;
    }
  }
}

}  // namespace

// --- evaluation --------------------------------------------------------------

Value Simulator::evalTerm(const State& st, const TermP& t, const Env& env) const {
  switch (t->kind) {
    case TK::Num: return Value::real(t->num);
    case TK::Var: {
      auto it = env.find(t->ref);
      if (it == env.end())
        fail(Err::TypeError, "unbound variable " + syms_.vars[(size_t)t->ref].name, t->span);
      return it->second;
    }
    case TK::App: {
      std::vector<Value> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) args.push_back(evalTerm(st, a, env));
      return st.lookup(t->ref, args);
    }
    case TK::Cond: {
      TV c = decideFormula(st, t->cond, env);
      if (c == TV::Unknown) fail(Err::SolveFailed, "conditional guard undecided", t->span);
      return evalTerm(st, t->args[c == TV::True ? 0 : 1], env);
    }
    case TK::Neg: return Value::real(-evalTerm(st, t->args[0], env).r);
    case TK::Pow: {
      Rat b = evalTerm(st, t->args[0], env).r;
      int e = t->ipow;
      if (e < 0) {
        if (b == 0) fail(Err::SolveFailed, "zero to a negative power", t->span);
        b = 1 / b;
        e = -e;
      }
      Rat r(1);
      for (int i = 0; i < e; ++i) r *= b;
      return Value::real(r);
    }
    default: {
      Rat a = evalTerm(st, t->args[0], env).r;
      Rat b = evalTerm(st, t->args[1], env).r;
      switch (t->kind) {
        case TK::Add: return Value::real(a + b);
        case TK::Sub: return Value::real(a - b);
        case TK::Mul: return Value::real(a * b);
        case TK::Div:
          if (b == 0) fail(Err::SolveFailed, "division by zero", t->span);
          return Value::real(a / b);
        default: fail(Err::SolveFailed, "unexpected term shape", t->span);
      }
    }
  }
}

// --- three-valued decisions ---------------------------------------------------

TV Simulator::compare(const State& st, Rel rel, const Value& a, const Value& b) const {
  if (a.sort != b.sort) fail(Err::TypeError, "comparison between different sorts");
  if (!a.isReal()) {
    if (rel == Rel::Eq) return tvOf(a.obj == b.obj);
    if (rel == Rel::Ne) return tvOf(a.obj != b.obj);
    fail(Err::TypeError, "object sorts admit only = and !=");
  }
  // numeric integration leaves values approximate: margins below the
  // tolerance are too close to call rather than false counterexamples
  if (st.taint && std::fabs(Rat(a.r - b.r).get_d()) < opts_.eqMargin) return TV::Unknown;
  switch (rel) {
    case Rel::Eq: return tvOf(a.r == b.r);
    case Rel::Ne: return tvOf(a.r != b.r);
    case Rel::Ge: return tvOf(a.r >= b.r);
    case Rel::Gt: return tvOf(a.r > b.r);
    case Rel::Le: return tvOf(a.r <= b.r);
    case Rel::Lt: return tvOf(a.r < b.r);
  }
  return TV::Unknown;
}

TV Simulator::decideFormula(const State& st, const FormulaP& f, const Env& env) const {
  switch (f->kind) {
    case FK::True: return TV::True;
    case FK::False: return TV::False;
    case FK::Cmp:
      return compare(st, f->rel, evalTerm(st, f->lhs, env), evalTerm(st, f->rhs, env));
    case FK::Not: return tvNot(decideFormula(st, f->kids[0], env));
    case FK::And:
      return tvAnd(decideFormula(st, f->kids[0], env), decideFormula(st, f->kids[1], env));
    case FK::Or:
      return tvOr(decideFormula(st, f->kids[0], env), decideFormula(st, f->kids[1], env));
    case FK::Imply:
      return tvOr(tvNot(decideFormula(st, f->kids[0], env)), decideFormula(st, f->kids[1], env));
    case FK::Equiv: {
      TV a = decideFormula(st, f->kids[0], env), b = decideFormula(st, f->kids[1], env);
      if (a == TV::Unknown || b == TV::Unknown) return TV::Unknown;
      return tvOf(a == b);
    }
    case FK::Forall:
    case FK::Exists:
      if (f->sort == SymbolTable::kRealSort) return decideRealQuantViaQe(st, f, env);
      return decideQuantified(st, f, env);
    case FK::Box:
    case FK::Diamond: return decideModal(st, f, env);
  }
  return TV::Unknown;
}

TV Simulator::decideQuantified(const State& st, const FormulaP& f, const Env& env) const {
  bool all = f->kind == FK::Forall;
  TV acc = all ? TV::True : TV::False;
  for (const Value& e : st.visible(f->sort)) {
    Env env2 = env;
    env2[f->var] = e;
    TV v = decideFormula(st, f->kids[0], env2);
    acc = all ? tvAnd(acc, v) : tvOr(acc, v);
    if (acc == (all ? TV::False : TV::True)) break;
  }
  return acc;
}

TV Simulator::decideRealQuantViaQe(const State& st, const FormulaP& f, const Env& env) const {
  if (st.taint) return TV::Unknown;  // exact elimination over approximate values lies
  std::set<int> scoped;
  FormulaP g = groundF(*this, syms_, st, f, env, scoped);
  if (!g) return TV::Unknown;
  try {
    SymbolTable tmp = syms_;
    return tvOf(qeDecide(tmp, g));
  } catch (const QdlError&) {
    return TV::Unknown;
  }
}

TV Simulator::decideModal(const State& st, const FormulaP& f, const Env& env) const {
  bool box = f->kind == FK::Box;
  Successors succ;
  try {
    succ = successors(st, f->prog, env);
  } catch (const QdlError&) {
    return TV::Unknown;  // bound and solver effects are absorbed, not raised
  }
  TV acc = box ? TV::True : TV::False;
  for (const State& n : succ.states) {
    TV v = decideFormula(n, f->kids[0], env);
    if (box && v == TV::False) {
      lastTrace_ = n.trace;
      return TV::False;
    }
    if (!box && v == TV::True) return TV::True;
    acc = box ? tvAnd(acc, v) : tvOr(acc, v);
  }
  // an enumerated refutation/witness is definite; anything else needs the
  // successor list to be provably complete
  return succ.exact ? acc : TV::Unknown;
}

// --- successor enumeration ----------------------------------------------------

Successors Simulator::runAssign(const State& st, const Program& p, const Env& env) const {
  Successors out;
  bool constantItem = false;
  if (p.qvar >= 0)
    for (const auto& it : p.items) constantItem = constantItem || it.args.empty();

  auto apply = [&](const Value* pick) -> State {
    State nx = st;
    for (const auto& it : p.items) {
      if (p.qvar >= 0 && !it.args.empty()) {
        // an indexed position updates every visible member simultaneously
        for (const Value& e : st.visible(p.qsort)) {
          Env env2 = env;
          env2[p.qvar] = e;
          std::vector<Value> args;
          args.reserve(it.args.size());
          for (const auto& a : it.args) args.push_back(evalTerm(st, a, env2));
          nx.update(it.fn, args, evalTerm(st, it.rhs, env2));
        }
      } else {
        Env env2 = env;
        if (p.qvar >= 0) env2[p.qvar] = *pick;
        std::vector<Value> args;
        args.reserve(it.args.size());
        for (const auto& a : it.args) args.push_back(evalTerm(st, a, env2));
        nx.update(it.fn, args, evalTerm(st, it.rhs, env2));
      }
    }
    return nx;
  };

  ProgramP frag = std::make_shared<Program>(p);
  std::set<std::string> seen;
  if (p.qvar >= 0 && constantItem) {
    // a constant position takes one value per choice of the quantified member
    for (const Value& e : st.visible(p.qsort)) {
      State nx = apply(&e);
      if (!seen.insert(nx.key()).second) continue;
      pushTrace(syms_, st, nx, frag);
      out.states.push_back(std::move(nx));
    }
  } else {
    State nx = apply(nullptr);
    pushTrace(syms_, st, nx, frag);
    out.states.push_back(std::move(nx));
  }
  return out;
}

Successors Simulator::runOde(const State& st, const Program& p, const Env& env) const {
  Successors out;
  out.exact = false;  // a finite grid never exhausts continuous durations
  ProgramP frag = std::make_shared<Program>(p);
  std::vector<Value> range =
      p.qvar >= 0 ? st.visible(p.qsort) : std::vector<Value>{Value::real(Rat(0))};

  auto domainHolds = [&](const State& s) -> TV {
    if (p.domain->kind == FK::True) return TV::True;
    TV acc = TV::True;
    for (const Value& e : range) {
      Env env2 = env;
      if (p.qvar >= 0) env2[p.qvar] = e;
      acc = tvAnd(acc, decideFormula(s, p.domain, env2));
      if (acc == TV::False) break;
    }
    return acc;
  };

  TV at0 = domainHolds(st);
  if (at0 == TV::False) {
    out.exact = true;  // even a zero-duration evolution needs the domain
    return out;
  }
  if (at0 == TV::Unknown) return out;

  SymbolTable solveTab = syms_;
  std::optional<QOdeSolution> sol = solveQOde(solveTab, p);

  // positions being evolved, with their per-member environments
  struct Pos {
    int fn;
    std::vector<Value> args;
    Env env2;
  };
  std::vector<Pos> ps;
  for (const Value& e : range)
    for (const auto& it : p.odes) {
      Pos pos;
      pos.fn = it.fn;
      pos.env2 = env;
      if (p.qvar >= 0) pos.env2[p.qvar] = e;
      for (const auto& a : it.args) pos.args.push_back(evalTerm(st, a, pos.env2));
      ps.push_back(std::move(pos));
    }

  std::set<std::string> seen;
  auto emit = [&](State nx) {
    if (!seen.insert(nx.key()).second) return;
    pushTrace(syms_, st, nx, frag);
    out.states.push_back(std::move(nx));
  };

  for (const Rat& dur : opts_.timeGrid) {
    if (dur == 0) {
      emit(st);
      continue;
    }
    if (sol) {
      // closed form: evaluate the flow exactly at each substep and the end
      auto stateAt = [&](const Rat& t) -> State {
        State nx = st;
        for (const Value& e : range)
          for (const auto& item : sol->items) {
            Env env2 = env;
            if (p.qvar >= 0) env2[p.qvar] = e;
            env2[sol->timeVar] = Value::real(t);
            std::vector<Value> args;
            for (const auto& a : item.args) args.push_back(evalTerm(st, a, env2));
            nx.update(item.fn, args, evalTerm(st, item.rhs, env2));
          }
        return nx;
      };
      bool ok = true;
      for (int j = 1; j <= opts_.odeSubsteps && ok; ++j)
        ok = domainHolds(stateAt(dur * Rat(j) / Rat(opts_.odeSubsteps))) == TV::True;
      if (ok) emit(stateAt(dur));
      continue;
    }
    // numeric fallback: classical fourth-order steps over all positions
    std::vector<double> ys;
    ys.reserve(ps.size());
    for (const Pos& pos : ps) ys.push_back(st.lookup(pos.fn, pos.args).r.get_d());
    auto mkTemp = [&](const std::vector<double>& v) -> State {
      State s = st;
      s.taint = true;
      for (size_t i = 0; i < ps.size(); ++i)
        s.update(ps[i].fn, ps[i].args, Value::real(Rat(v[i])));
      return s;
    };
    auto slopes = [&](const std::vector<double>& v) -> std::vector<double> {
      State s = mkTemp(v);
      std::vector<double> d;
      d.reserve(ps.size());
      size_t k = 0;
      for (const Value& e : range) {
        (void)e;
        for (const auto& it : p.odes)
          d.push_back(evalTerm(s, it.rhs, ps[k++].env2).r.get_d());
      }
      return d;
    };
    double h = dur.get_d() / opts_.odeSubsteps;
    bool ok = true;
    for (int step = 0; step < opts_.odeSubsteps && ok; ++step) {
      std::vector<double> k1 = slopes(ys);
      std::vector<double> y2(ys), y3(ys), y4(ys);
      for (size_t i = 0; i < ys.size(); ++i) y2[i] += h / 2 * k1[i];
      std::vector<double> k2 = slopes(y2);
      for (size_t i = 0; i < ys.size(); ++i) y3[i] += h / 2 * k2[i];
      std::vector<double> k3 = slopes(y3);
      for (size_t i = 0; i < ys.size(); ++i) y4[i] += h * k3[i];
      std::vector<double> k4 = slopes(y4);
      for (size_t i = 0; i < ys.size(); ++i)
        ys[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      ok = domainHolds(mkTemp(ys)) == TV::True;
    }
    if (ok) emit(mkTemp(ys));
  }
  return out;
}

Successors Simulator::runStar(const State& st, const Program& p, const Env& env) const {
  Successors out;
  std::set<std::string> seen{st.key()};
  out.states.push_back(st);
  std::vector<State> frontier{st};
  for (int it = 0; it < opts_.maxLoopUnroll && !frontier.empty(); ++it) {
    std::vector<State> next;
    for (const State& m : frontier) {
      Successors s = successors(m, p.a, env);
      out.exact = out.exact && s.exact;
      for (auto& v : s.states) {
        if (!seen.insert(v.key()).second) continue;
        out.states.push_back(v);
        next.push_back(std::move(v));
      }
    }
    if ((int)out.states.size() > opts_.maxBranch)
      fail(Err::BoundExceeded, "loop enumeration exceeded the branch budget");
    frontier = std::move(next);
  }
  // exhausted only if the frontier closed before the unroll bound
  if (!frontier.empty()) out.exact = false;
  return out;
}

Successors Simulator::successors(const State& st, const ProgramP& p, const Env& env) const {
  switch (p->kind) {
    case PK::QAssign: return runAssign(st, *p, env);
    case PK::QOde: return runOde(st, *p, env);
    case PK::Test: {
      TV v = decideFormula(st, p->test, env);
      Successors s;
      if (v == TV::True) {
        State nx = st;
        pushTrace(syms_, st, nx, p);
        s.states.push_back(std::move(nx));
      }
      s.exact = v != TV::Unknown;
      return s;
    }
    case PK::New: {
      Successors s;
      int idx = st.nextFresh.at(p->newSort);
      if (idx >= st.domainSize.at(p->newSort)) {
        s.exact = false;  // the bounded pool ran dry, not the logic
        return s;
      }
      Value fresh = Value::object(p->newSort, idx);
      if (!(st.lookup(syms_.epsOf(p->newSort), {fresh}).r == 0))
        fail(Err::SolveFailed, "pool object is already created");
      std::vector<Value> nargs;
      nargs.reserve(p->newArgs.size());
      for (const auto& a : p->newArgs) nargs.push_back(evalTerm(st, a, env));
      State nx = st;
      nx.nextFresh[p->newSort] = idx + 1;
      nx.update(p->newFn, nargs, fresh);
      nx.update(syms_.epsOf(p->newSort), {fresh}, Value::real(Rat(1)));
      pushTrace(syms_, st, nx, p);
      s.states.push_back(std::move(nx));
      return s;
    }
    case PK::Choice: {
      Successors a = successors(st, p->a, env);
      Successors b = successors(st, p->b, env);
      Successors s;
      s.exact = a.exact && b.exact;
      std::set<std::string> seen;
      for (auto& v : a.states)
        if (seen.insert(v.key()).second) s.states.push_back(std::move(v));
      for (auto& v : b.states)
        if (seen.insert(v.key()).second) s.states.push_back(std::move(v));
      if ((int)s.states.size() > opts_.maxBranch)
        fail(Err::BoundExceeded, "choice exceeded the branch budget");
      return s;
    }
    case PK::Seq: {
      Successors a = successors(st, p->a, env);
      Successors s;
      s.exact = a.exact;
      std::set<std::string> seen;
      for (const State& m : a.states) {
        Successors b = successors(m, p->b, env);
        s.exact = s.exact && b.exact;
        for (auto& v : b.states)
          if (seen.insert(v.key()).second) s.states.push_back(std::move(v));
        if ((int)s.states.size() > opts_.maxBranch)
          fail(Err::BoundExceeded, "sequence exceeded the branch budget");
      }
      return s;
    }
    case PK::Star: return runStar(st, *p, env);
  }
  return {};
}

// --- falsification -------------------------------------------------------------

FalsifyResult falsify(const Problem& prob, int nStates, uint64_t seed, const SimOpts& opts) {
  FalsifyResult res;
  std::mt19937_64 rng(seed);
  Simulator sim(*prob.syms, opts);
  for (int n = 0; n < nStates; ++n) {
    State st = randomState(*prob.syms, rng, opts);
    res.samplesTried = n + 1;
    sim.clearTrace();
    TV v;
    try {
      v = sim.decideFormula(st, prob.conjecture, {});
    } catch (const QdlError&) {
      v = TV::Unknown;
    }
    if (v == TV::False) {
      res.falsified = true;
      res.witness = stateStr(*prob.syms, st);
      res.trace = sim.lastTrace();
      return res;
    }
  }
  return res;
}

}  // namespace qdl
