#include "qdl/parse.hpp"

namespace qdl {

namespace {

struct Checker {
  const SymbolTable& syms;

  int term(const TermP& t) {
    switch (t->kind) {
      case TK::Num: return SymbolTable::kRealSort;
      case TK::Var:
        if (t->ref < 0 || t->ref >= (int)syms.vars.size())
          fail(Err::TypeError, "unbound variable reference", t->span);
        return syms.vars[t->ref].sort;
      case TK::App: {
        const auto& d = syms.funcs.at(t->ref);
        if (t->args.size() != d.argSorts.size())
          fail(Err::TypeError, d.name + ": wrong number of arguments", t->span);
        for (size_t i = 0; i < t->args.size(); ++i)
          if (term(t->args[i]) != d.argSorts[i])
            fail(Err::TypeError, d.name + ": argument sort mismatch", t->span);
        return d.retSort;
      }
      case TK::Add:
      case TK::Sub:
      case TK::Mul:
      case TK::Div:
        requireReal(t->args[0]);
        requireReal(t->args[1]);
        return SymbolTable::kRealSort;
      case TK::Neg:
        requireReal(t->args[0]);
        return SymbolTable::kRealSort;
      case TK::Pow:
        requireReal(t->args[0]);
        if (t->ipow < 0) fail(Err::TypeError, "negative exponent", t->span);
        return SymbolTable::kRealSort;
      case TK::Cond: {
        formula(t->cond);
        if (formulaHasModality(t->cond))
          fail(Err::TypeError, "conditional guard must not contain modalities", t->span);
        int a = term(t->args[0]), b = term(t->args[1]);
        if (a != b) fail(Err::TypeError, "conditional branches differ in sort", t->span);
        return a;
      }
    }
    fail(Err::TypeError, "malformed term", t->span);
  }

  void requireReal(const TermP& t) {
    if (term(t) != SymbolTable::kRealSort)
      fail(Err::TypeError, "arithmetic on a non-real term", t->span);
  }

  void formula(const FormulaP& f) {
    switch (f->kind) {
      case FK::True:
      case FK::False: return;
      case FK::Cmp: {
        int a = term(f->lhs), b = term(f->rhs);
        if (a != b) fail(Err::TypeError, "comparison between different sorts", f->span);
        if (syms.isObjectSort(a) && f->rel != Rel::Eq && f->rel != Rel::Ne)
          fail(Err::TypeError, "object sorts admit only = and !=", f->span);
        return;
      }
      case FK::Forall:
      case FK::Exists:
        if (f->var < 0 || syms.vars[f->var].sort != f->sort)
          fail(Err::TypeError, "binder sort mismatch", f->span);
        formula(f->kids[0]);
        return;
      case FK::Box:
      case FK::Diamond:
        program(f->prog);
        formula(f->kids[0]);
        return;
      default:
        for (const auto& k : f->kids) formula(k);
        return;
    }
  }

  // A quantified update of f(s) is injective in the bound variable i when s
  // is empty (one shared position: the paper's nondeterministic form) or one
  // of its components is literally i. Anything else could map two objects to
  // the same position and is rejected.
  void checkInjective(int qvar, const std::vector<TermP>& args, const std::string& who,
                      Span sp) {
    if (qvar < 0 || args.empty()) return;
    for (const auto& a : args)
      if (a->kind == TK::Var && a->ref == qvar) return;
    fail(Err::TypeError, who + ": not injective (argument list must carry the bound variable)",
         sp);
  }

  void program(const ProgramP& p) {
    switch (p->kind) {
      case PK::QAssign:
        for (const auto& it : p->items) {
          const auto& d = syms.funcs.at(it.fn);
          if (it.args.size() != d.argSorts.size())
            fail(Err::TypeError, d.name + ": wrong number of arguments", p->span);
          for (size_t i = 0; i < it.args.size(); ++i)
            if (term(it.args[i]) != d.argSorts[i])
              fail(Err::TypeError, d.name + ": argument sort mismatch", p->span);
          if (term(it.rhs) != d.retSort)
            fail(Err::TypeError, d.name + ": assigned value has the wrong sort", p->span);
          checkInjective(p->qvar, it.args, d.name, p->span);
        }
        return;
      case PK::QOde:
        for (const auto& it : p->odes) {
          const auto& d = syms.funcs.at(it.fn);
          if (d.retSort != SymbolTable::kRealSort)
            fail(Err::TypeError, "only real-valued functions can evolve", p->span);
          if (it.args.size() != d.argSorts.size())
            fail(Err::TypeError, d.name + ": wrong number of arguments", p->span);
          for (size_t i = 0; i < it.args.size(); ++i) {
            if (term(it.args[i]) != d.argSorts[i])
              fail(Err::TypeError, d.name + ": argument sort mismatch", p->span);
            if (termMentionsFunc(it.args[i], it.fn))
              fail(Err::TypeError, d.name + " occurs in its own argument list", p->span);
          }
          requireReal(it.rhs);
          checkInjective(p->qvar, it.args, d.name, p->span);
        }
        formula(p->domain);
        if (formulaHasModality(p->domain))
          fail(Err::TypeError, "evolution domain must not contain modalities", p->span);
        return;
      case PK::Test: formula(p->test); return;
      case PK::New: {
        const auto& d = syms.funcs.at(p->newFn);
        if (!p->newArgs.empty() || !d.argSorts.empty())
          fail(Err::UnsupportedFeature, "new target must be a 0-ary function", p->span);
        if (d.retSort != p->newSort || !syms.isObjectSort(p->newSort))
          fail(Err::TypeError, "new requires a matching object sort", p->span);
        return;
      }
      case PK::Choice:
      case PK::Seq:
        program(p->a);
        program(p->b);
        return;
      case PK::Star: program(p->a); return;
    }
  }
};

}  // namespace

void typecheckFormula(const SymbolTable& syms, const FormulaP& f) {
  Checker{syms}.formula(f);
}

void typecheckProblem(const Problem& p) {
  Checker c{*p.syms};
  c.formula(p.conjecture);
  for (const auto& inv : p.invariants)
    if (inv) c.formula(inv);
  for (const auto& [v, f] : p.variants) {
    if (p.syms->vars[v].sort != SymbolTable::kRealSort)
      fail(Err::TypeError, "variant variable must be real", f->span);
    c.formula(f);
  }
}

}  // namespace qdl
