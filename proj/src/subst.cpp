#include "qdl/subst.hpp"

namespace qdl {

std::set<int> boundFuncs(const ProgramP& p, const SymbolTable& syms) {
  std::set<int> out;
  if (!p) return out;
  switch (p->kind) {
    case PK::QAssign:
      for (const auto& it : p->items) out.insert(it.fn);
      break;
    case PK::QOde:
      for (const auto& it : p->odes) out.insert(it.fn);
      break;
    case PK::Test: break;
    case PK::New:
      out.insert(p->newFn);
      out.insert(syms.epsOf(p->newSort));
      break;
    case PK::Choice:
    case PK::Seq: {
      out = boundFuncs(p->a, syms);
      auto b = boundFuncs(p->b, syms);
      out.insert(b.begin(), b.end());
      break;
    }
    case PK::Star: out = boundFuncs(p->a, syms); break;
  }
  return out;
}

void collectFuncsT(const TermP& t, std::set<int>& out) {
  if (!t) return;
  if (t->kind == TK::App) out.insert(t->ref);
  if (t->kind == TK::Cond) collectFuncsF(t->cond, out);
  for (const auto& a : t->args) collectFuncsT(a, out);
}

static void collectFuncsP(const ProgramP& p, std::set<int>& out) {
  if (!p) return;
  switch (p->kind) {
    case PK::QAssign:
      for (const auto& it : p->items) {
        out.insert(it.fn);
        for (const auto& a : it.args) collectFuncsT(a, out);
        collectFuncsT(it.rhs, out);
      }
      break;
    case PK::QOde:
      for (const auto& it : p->odes) {
        out.insert(it.fn);
        for (const auto& a : it.args) collectFuncsT(a, out);
        collectFuncsT(it.rhs, out);
      }
      collectFuncsF(p->domain, out);
      break;
    case PK::Test: collectFuncsF(p->test, out); break;
    case PK::New:
      out.insert(p->newFn);
      for (const auto& a : p->newArgs) collectFuncsT(a, out);
      break;
    case PK::Choice:
    case PK::Seq:
      collectFuncsP(p->a, out);
      collectFuncsP(p->b, out);
      break;
    case PK::Star: collectFuncsP(p->a, out); break;
  }
}

void collectFuncsF(const FormulaP& f, std::set<int>& out) {
  if (!f) return;
  if (f->kind == FK::Cmp) {
    collectFuncsT(f->lhs, out);
    collectFuncsT(f->rhs, out);
    return;
  }
  if (f->kind == FK::Box || f->kind == FK::Diamond) collectFuncsP(f->prog, out);
  for (const auto& k : f->kids) collectFuncsF(k, out);
}

// --- variable substitution ---------------------------------------------------

TermP substVarT(SymbolTable& syms, const TermP& t, int var, const TermP& repl) {
  if (!t || !termMentionsVar(t, var)) return t;
  if (t->kind == TK::Var) return repl;  // mentions check guarantees t->ref == var
  auto u = std::make_shared<Term>(*t);
  for (auto& a : u->args) a = substVarT(syms, a, var, repl);
  if (t->kind == TK::Cond) u->cond = substVarF(syms, t->cond, var, repl);
  return u;
}

static ProgramP renameQvar(SymbolTable& syms, const Program& p, int nv) {
  auto q = std::make_shared<Program>(p);
  TermP nvT = mkVar(nv);
  int old = p.qvar;
  q->qvar = nv;
  for (auto& it : q->items) {
    for (auto& a : it.args) a = substVarT(syms, a, old, nvT);
    it.rhs = substVarT(syms, it.rhs, old, nvT);
  }
  for (auto& it : q->odes) {
    for (auto& a : it.args) a = substVarT(syms, a, old, nvT);
    it.rhs = substVarT(syms, it.rhs, old, nvT);
  }
  if (q->domain) q->domain = substVarF(syms, q->domain, old, nvT);
  return q;
}

ProgramP substVarP(SymbolTable& syms, const ProgramP& p, int var, const TermP& repl) {
  if (!p || !programMentionsVar(p, var)) return p;
  switch (p->kind) {
    case PK::QAssign:
    case PK::QOde: {
      ProgramP src = p;
      if (p->qvar >= 0 && termMentionsVar(repl, p->qvar))
        src = renameQvar(syms, *p, syms.freshVar(p->qsort));
      auto q = std::make_shared<Program>(*src);
      for (auto& it : q->items) {
        for (auto& a : it.args) a = substVarT(syms, a, var, repl);
        it.rhs = substVarT(syms, it.rhs, var, repl);
      }
      for (auto& it : q->odes) {
        for (auto& a : it.args) a = substVarT(syms, a, var, repl);
        it.rhs = substVarT(syms, it.rhs, var, repl);
      }
      if (q->domain) q->domain = substVarF(syms, q->domain, var, repl);
      return q;
    }
    case PK::Test: {
      auto q = std::make_shared<Program>(*p);
      q->test = substVarF(syms, p->test, var, repl);
      return q;
    }
    case PK::New: {
      auto q = std::make_shared<Program>(*p);
      for (auto& a : q->newArgs) a = substVarT(syms, a, var, repl);
      return q;
    }
    case PK::Choice:
    case PK::Seq: {
      auto q = std::make_shared<Program>(*p);
      q->a = substVarP(syms, p->a, var, repl);
      q->b = substVarP(syms, p->b, var, repl);
      return q;
    }
    case PK::Star: {
      auto q = std::make_shared<Program>(*p);
      q->a = substVarP(syms, p->a, var, repl);
      return q;
    }
  }
  return p;
}

FormulaP substVarF(SymbolTable& syms, const FormulaP& f, int var, const TermP& repl) {
  if (!f || !formulaMentionsVar(f, var)) return f;
  switch (f->kind) {
    case FK::Cmp:
      return mkCmp(f->rel, substVarT(syms, f->lhs, var, repl),
                   substVarT(syms, f->rhs, var, repl), f->span);
    case FK::Forall:
    case FK::Exists: {
      int bv = f->var;
      FormulaP body = f->kids[0];
      if (termMentionsVar(repl, bv)) {  // α-rename the binder to avoid capture
        int nv = syms.freshVar(f->sort);
        body = substVarF(syms, body, bv, mkVar(nv));
        bv = nv;
      }
      return mkQuant(f->kind, bv, f->sort, substVarF(syms, body, var, repl), f->span);
    }
    case FK::Box:
    case FK::Diamond: {
      std::set<int> rfuncs;
      collectFuncsT(repl, rfuncs);
      if (!rfuncs.empty()) {
        auto bound = boundFuncs(f->prog, syms);
        for (int fn : rfuncs)
          if (bound.count(fn))
            fail(Err::NotAdmissible,
                 "substitute mentions " + syms.funcs[fn].name +
                     ", which the modality can change",
                 f->span);
      }
      return mkModal(f->kind, substVarP(syms, f->prog, var, repl),
                     substVarF(syms, f->kids[0], var, repl), f->span);
    }
    default: {
      auto g = std::make_shared<Formula>(*f);
      for (auto& k : g->kids) k = substVarF(syms, k, var, repl);
      return g;
    }
  }
}

// --- ground term replacement -------------------------------------------------

bool termOccursT(const TermP& t, const TermP& pat) {
  if (!t) return false;
  if (eqTerm(t, pat)) return true;
  if (t->kind == TK::Cond && termOccursF(t->cond, pat)) return true;
  for (const auto& a : t->args)
    if (termOccursT(a, pat)) return true;
  return false;
}

static bool termOccursP(const ProgramP& p, const TermP& pat) {
  if (!p) return false;
  switch (p->kind) {
    case PK::QAssign:
      for (const auto& it : p->items) {
        for (const auto& a : it.args)
          if (termOccursT(a, pat)) return true;
        if (termOccursT(it.rhs, pat)) return true;
      }
      return false;
    case PK::QOde:
      for (const auto& it : p->odes) {
        for (const auto& a : it.args)
          if (termOccursT(a, pat)) return true;
        if (termOccursT(it.rhs, pat)) return true;
      }
      return termOccursF(p->domain, pat);
    case PK::Test: return termOccursF(p->test, pat);
    case PK::New:
      for (const auto& a : p->newArgs)
        if (termOccursT(a, pat)) return true;
      return false;
    case PK::Choice:
    case PK::Seq: return termOccursP(p->a, pat) || termOccursP(p->b, pat);
    case PK::Star: return termOccursP(p->a, pat);
  }
  return false;
}

bool termOccursF(const FormulaP& f, const TermP& pat) {
  if (!f) return false;
  if (f->kind == FK::Cmp) return termOccursT(f->lhs, pat) || termOccursT(f->rhs, pat);
  if ((f->kind == FK::Box || f->kind == FK::Diamond) && termOccursP(f->prog, pat))
    return true;
  for (const auto& k : f->kids)
    if (termOccursF(k, pat)) return true;
  return false;
}

TermP replaceGroundTermT(const TermP& t, const TermP& pat, const TermP& repl) {
  if (!t) return t;
  if (eqTerm(t, pat)) return repl;
  bool changed = false;
  std::vector<TermP> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) {
    TermP r = replaceGroundTermT(a, pat, repl);
    changed |= r != a;
    args.push_back(std::move(r));
  }
  if (!changed) return t;
  auto u = std::make_shared<Term>(*t);
  u->args = std::move(args);
  return u;
}

FormulaP replaceGroundTermF(const SymbolTable& syms, const FormulaP& f, const TermP& pat,
                            const TermP& repl) {
  if (!f || !termOccursF(f, pat)) return f;
  switch (f->kind) {
    case FK::Cmp:
      return mkCmp(f->rel, replaceGroundTermT(f->lhs, pat, repl),
                   replaceGroundTermT(f->rhs, pat, repl), f->span);
    case FK::Forall:
    case FK::Exists:
      if (termMentionsVar(pat, f->var))
        fail(Err::NotAdmissible, "replaced term mentions a quantified variable", f->span);
      return mkQuant(f->kind, f->var, f->sort,
                     replaceGroundTermF(syms, f->kids[0], pat, repl), f->span);
    case FK::Box:
    case FK::Diamond: {
      std::set<int> pfuncs;
      collectFuncsT(pat, pfuncs);
      auto bound = boundFuncs(f->prog, syms);
      for (int fn : pfuncs)
        if (bound.count(fn))
          fail(Err::NotAdmissible,
               "occurrence of the replaced term is under a modality changing " +
                   syms.funcs[fn].name,
               f->span);
      if (termOccursP(f->prog, pat))
        fail(Err::NotAdmissible, "replaced term occurs inside a program", f->span);
      return mkModal(f->kind, f->prog, replaceGroundTermF(syms, f->kids[0], pat, repl),
                     f->span);
    }
    default: {
      auto g = std::make_shared<Formula>(*f);
      for (auto& k : g->kids) k = replaceGroundTermF(syms, k, pat, repl);
      return g;
    }
  }
}

}  // namespace qdl
