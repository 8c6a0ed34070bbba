#include "qdl/ast.hpp"

#include <algorithm>

namespace qdl {

bool eqTerm(const TermP& a, const TermP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TK::Num: return a->num == b->num;
    case TK::Var: return a->ref == b->ref;
    case TK::App:
      if (a->ref != b->ref || a->args.size() != b->args.size()) return false;
      break;
    case TK::Pow:
      if (a->ipow != b->ipow) return false;
      break;
    case TK::Cond:
      if (!eqFormula(a->cond, b->cond)) return false;
      break;
    default: break;
  }
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!eqTerm(a->args[i], b->args[i])) return false;
  return true;
}

bool eqFormula(const FormulaP& a, const FormulaP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FK::True:
    case FK::False: return true;
    case FK::Cmp:
      return a->rel == b->rel && eqTerm(a->lhs, b->lhs) && eqTerm(a->rhs, b->rhs);
    case FK::Forall:
    case FK::Exists:
      if (a->var != b->var || a->sort != b->sort) return false;
      break;
    case FK::Box:
    case FK::Diamond:
      if (!eqProgram(a->prog, b->prog)) return false;
      break;
    default: break;
  }
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); ++i)
    if (!eqFormula(a->kids[i], b->kids[i])) return false;
  return true;
}

static bool eqTermVec(const std::vector<TermP>& a, const std::vector<TermP>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!eqTerm(a[i], b[i])) return false;
  return true;
}

bool eqProgram(const ProgramP& a, const ProgramP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case PK::QAssign: {
      if (a->qvar != b->qvar || a->qsort != b->qsort) return false;
      if (a->items.size() != b->items.size()) return false;
      for (size_t i = 0; i < a->items.size(); ++i) {
        const auto& x = a->items[i];
        const auto& y = b->items[i];
        if (x.fn != y.fn || !eqTermVec(x.args, y.args) || !eqTerm(x.rhs, y.rhs))
          return false;
      }
      return true;
    }
    case PK::QOde: {
      if (a->qvar != b->qvar || a->qsort != b->qsort) return false;
      if (a->odes.size() != b->odes.size()) return false;
      for (size_t i = 0; i < a->odes.size(); ++i) {
        const auto& x = a->odes[i];
        const auto& y = b->odes[i];
        if (x.fn != y.fn || !eqTermVec(x.args, y.args) || !eqTerm(x.rhs, y.rhs))
          return false;
      }
      return eqFormula(a->domain, b->domain);
    }
    case PK::Test: return eqFormula(a->test, b->test);
    case PK::New:
      return a->newFn == b->newFn && a->newSort == b->newSort &&
             eqTermVec(a->newArgs, b->newArgs);
    case PK::Choice:
    case PK::Seq: return eqProgram(a->a, b->a) && eqProgram(a->b, b->b);
    case PK::Star: return eqProgram(a->a, b->a);
  }
  return false;
}

// --- free-variable occurrence ----------------------------------------------

bool termMentionsVar(const TermP& t, int var) {
  if (!t) return false;
  if (t->kind == TK::Var) return t->ref == var;
  if (t->kind == TK::Cond && formulaMentionsVar(t->cond, var)) return true;
  for (const auto& a : t->args)
    if (termMentionsVar(a, var)) return true;
  return false;
}

bool formulaMentionsVar(const FormulaP& f, int var) {
  if (!f) return false;
  switch (f->kind) {
    case FK::Cmp:
      return termMentionsVar(f->lhs, var) || termMentionsVar(f->rhs, var);
    case FK::Forall:
    case FK::Exists:
      if (f->var == var) return false;  // bound here
      break;
    case FK::Box:
    case FK::Diamond:
      if (programMentionsVar(f->prog, var)) return true;
      break;
    default: break;
  }
  for (const auto& k : f->kids)
    if (formulaMentionsVar(k, var)) return true;
  return false;
}

bool programMentionsVar(const ProgramP& p, int var) {
  if (!p) return false;
  switch (p->kind) {
    case PK::QAssign: {
      if (p->qvar == var) return false;
      for (const auto& it : p->items) {
        for (const auto& a : it.args)
          if (termMentionsVar(a, var)) return true;
        if (termMentionsVar(it.rhs, var)) return true;
      }
      return false;
    }
    case PK::QOde: {
      if (p->qvar == var) return false;
      for (const auto& it : p->odes) {
        for (const auto& a : it.args)
          if (termMentionsVar(a, var)) return true;
        if (termMentionsVar(it.rhs, var)) return true;
      }
      return formulaMentionsVar(p->domain, var);
    }
    case PK::Test: return formulaMentionsVar(p->test, var);
    case PK::New: {
      for (const auto& a : p->newArgs)
        if (termMentionsVar(a, var)) return true;
      return false;
    }
    case PK::Choice:
    case PK::Seq: return programMentionsVar(p->a, var) || programMentionsVar(p->b, var);
    case PK::Star: return programMentionsVar(p->a, var);
  }
  return false;
}

// --- function-symbol occurrence (anywhere, bound or not) -------------------

bool termMentionsFunc(const TermP& t, int fn) {
  if (!t) return false;
  if (t->kind == TK::App && t->ref == fn) return true;
  if (t->kind == TK::Cond && formulaMentionsFunc(t->cond, fn)) return true;
  for (const auto& a : t->args)
    if (termMentionsFunc(a, fn)) return true;
  return false;
}

bool formulaMentionsFunc(const FormulaP& f, int fn) {
  if (!f) return false;
  if (f->kind == FK::Cmp)
    return termMentionsFunc(f->lhs, fn) || termMentionsFunc(f->rhs, fn);
  if ((f->kind == FK::Box || f->kind == FK::Diamond) &&
      programMentionsFunc(f->prog, fn))
    return true;
  for (const auto& k : f->kids)
    if (formulaMentionsFunc(k, fn)) return true;
  return false;
}

bool programMentionsFunc(const ProgramP& p, int fn) {
  if (!p) return false;
  switch (p->kind) {
    case PK::QAssign:
      for (const auto& it : p->items) {
        if (it.fn == fn) return true;
        for (const auto& a : it.args)
          if (termMentionsFunc(a, fn)) return true;
        if (termMentionsFunc(it.rhs, fn)) return true;
      }
      return false;
    case PK::QOde:
      for (const auto& it : p->odes) {
        if (it.fn == fn) return true;
        for (const auto& a : it.args)
          if (termMentionsFunc(a, fn)) return true;
        if (termMentionsFunc(it.rhs, fn)) return true;
      }
      return formulaMentionsFunc(p->domain, fn);
    case PK::Test: return formulaMentionsFunc(p->test, fn);
    case PK::New:
      if (p->newFn == fn) return true;
      for (const auto& a : p->newArgs)
        if (termMentionsFunc(a, fn)) return true;
      return false;
    case PK::Choice:
    case PK::Seq: return programMentionsFunc(p->a, fn) || programMentionsFunc(p->b, fn);
    case PK::Star: return programMentionsFunc(p->a, fn);
  }
  return false;
}

// --- free variables ---------------------------------------------------------

static void addUnique(std::vector<int>& out, int v) {
  if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

static void freeVarsT(const TermP& t, std::vector<int>& bound, std::vector<int>& out);
static void freeVarsP(const ProgramP& p, std::vector<int>& bound, std::vector<int>& out);

static void freeVarsF(const FormulaP& f, std::vector<int>& bound, std::vector<int>& out) {
  if (!f) return;
  switch (f->kind) {
    case FK::Cmp:
      freeVarsT(f->lhs, bound, out);
      freeVarsT(f->rhs, bound, out);
      return;
    case FK::Forall:
    case FK::Exists: {
      bound.push_back(f->var);
      freeVarsF(f->kids[0], bound, out);
      bound.pop_back();
      return;
    }
    case FK::Box:
    case FK::Diamond:
      freeVarsP(f->prog, bound, out);
      break;
    default: break;
  }
  for (const auto& k : f->kids) freeVarsF(k, bound, out);
}

static void freeVarsT(const TermP& t, std::vector<int>& bound, std::vector<int>& out) {
  if (!t) return;
  if (t->kind == TK::Var) {
    if (std::find(bound.begin(), bound.end(), t->ref) == bound.end())
      addUnique(out, t->ref);
    return;
  }
  if (t->kind == TK::Cond) freeVarsF(t->cond, bound, out);
  for (const auto& a : t->args) freeVarsT(a, bound, out);
}

static void freeVarsP(const ProgramP& p, std::vector<int>& bound, std::vector<int>& out) {
  if (!p) return;
  switch (p->kind) {
    case PK::QAssign: {
      if (p->qvar >= 0) bound.push_back(p->qvar);
      for (const auto& it : p->items) {
        for (const auto& a : it.args) freeVarsT(a, bound, out);
        freeVarsT(it.rhs, bound, out);
      }
      if (p->qvar >= 0) bound.pop_back();
      return;
    }
    case PK::QOde: {
      if (p->qvar >= 0) bound.push_back(p->qvar);
      for (const auto& it : p->odes) {
        for (const auto& a : it.args) freeVarsT(a, bound, out);
        freeVarsT(it.rhs, bound, out);
      }
      freeVarsF(p->domain, bound, out);
      if (p->qvar >= 0) bound.pop_back();
      return;
    }
    case PK::Test: freeVarsF(p->test, bound, out); return;
    case PK::New:
      for (const auto& a : p->newArgs) freeVarsT(a, bound, out);
      return;
    case PK::Choice:
    case PK::Seq:
      freeVarsP(p->a, bound, out);
      freeVarsP(p->b, bound, out);
      return;
    case PK::Star: freeVarsP(p->a, bound, out); return;
  }
}

void collectFreeVars(const FormulaP& f, std::vector<int>& out) {
  std::vector<int> bound;
  freeVarsF(f, bound, out);
}
void collectFreeVarsT(const TermP& t, std::vector<int>& out) {
  std::vector<int> bound;
  freeVarsT(t, bound, out);
}

bool formulaHasModality(const FormulaP& f) {
  if (!f) return false;
  if (f->kind == FK::Box || f->kind == FK::Diamond) return true;
  if (f->kind == FK::Cmp) return false;  // Cond guards are modality-free by construction
  for (const auto& k : f->kids)
    if (formulaHasModality(k)) return true;
  return false;
}

}  // namespace qdl
