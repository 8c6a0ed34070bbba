#include "qdl/desugar.hpp"

namespace qdl {

namespace {

// Innermost conditional: children are searched before the node itself.
const Term* findCondT(const TermP& t) {
  if (!t) return nullptr;
  for (const auto& a : t->args)
    if (const Term* c = findCondT(a)) return c;
  if (t->kind == TK::Cond) return t.get();
  return nullptr;
}

TermP replaceNode(const TermP& t, const Term* target, const TermP& repl) {
  if (t.get() == target) return repl;
  if (!t) return t;
  bool changed = false;
  std::vector<TermP> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) {
    TermP r = replaceNode(a, target, repl);
    changed |= r != a;
    args.push_back(std::move(r));
  }
  if (!changed) return t;
  auto u = std::make_shared<Term>(*t);
  u->args = std::move(args);
  return u;
}

bool termHasCond(const TermP& t) { return findCondT(t) != nullptr; }

FormulaP expandAtom(const FormulaP& f) {
  const Term* c = findCondT(f->lhs);
  if (!c) c = findCondT(f->rhs);
  if (!c) return f;
  TermP thenLhs = replaceNode(f->lhs, c, c->args[0]);
  TermP thenRhs = replaceNode(f->rhs, c, c->args[0]);
  TermP elseLhs = replaceNode(f->lhs, c, c->args[1]);
  TermP elseRhs = replaceNode(f->rhs, c, c->args[1]);
  FormulaP guard = expandConditionals(c->cond);
  FormulaP thenF = expandAtom(mkCmp(f->rel, thenLhs, thenRhs, f->span));
  FormulaP elseF = expandAtom(mkCmp(f->rel, elseLhs, elseRhs, f->span));
  return mkBinF(FK::And, mkBinF(FK::Imply, guard, thenF, f->span),
                mkBinF(FK::Imply, mkNot(guard, f->span), elseF, f->span), f->span);
}

}  // namespace

bool hasConditionalAtom(const FormulaP& f) {
  if (!f) return false;
  if (f->kind == FK::Cmp) return termHasCond(f->lhs) || termHasCond(f->rhs);
  if (f->kind == FK::Box || f->kind == FK::Diamond)
    return hasConditionalAtom(f->kids[0]);
  for (const auto& k : f->kids)
    if (hasConditionalAtom(k)) return true;
  return false;
}

FormulaP expandConditionals(const FormulaP& f) {
  if (!f) return f;
  switch (f->kind) {
    case FK::True:
    case FK::False: return f;
    case FK::Cmp: return expandAtom(f);
    case FK::Box:
    case FK::Diamond: {
      FormulaP body = expandConditionals(f->kids[0]);
      if (body == f->kids[0]) return f;
      return mkModal(f->kind, f->prog, body, f->span);
    }
    case FK::Forall:
    case FK::Exists: {
      FormulaP body = expandConditionals(f->kids[0]);
      if (body == f->kids[0]) return f;
      return mkQuant(f->kind, f->var, f->sort, body, f->span);
    }
    default: {
      std::vector<FormulaP> kids;
      bool changed = false;
      for (const auto& k : f->kids) {
        FormulaP r = expandConditionals(k);
        changed |= r != k;
        kids.push_back(std::move(r));
      }
      if (!changed) return f;
      auto g = std::make_shared<Formula>(*f);
      g->kids = std::move(kids);
      return g;
    }
  }
}

}  // namespace qdl
