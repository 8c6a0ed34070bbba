// Helpers shared by the unit tests: exact evaluation of variable-free
// formulas (independent of the library's own deciders) and error capture.
#pragma once
#include <functional>

#include "doctest.h"
#include "qdl/ast.hpp"

namespace qdltest {

using namespace qdl;

inline bool groundFormula(const FormulaP& f);

inline Rat groundTerm(const TermP& t) {
  switch (t->kind) {
    case TK::Num: return t->num;
    case TK::Add: return groundTerm(t->args[0]) + groundTerm(t->args[1]);
    case TK::Sub: return groundTerm(t->args[0]) - groundTerm(t->args[1]);
    case TK::Mul: return groundTerm(t->args[0]) * groundTerm(t->args[1]);
    case TK::Div: return groundTerm(t->args[0]) / groundTerm(t->args[1]);
    case TK::Neg: return -groundTerm(t->args[0]);
    case TK::Pow: {
      Rat b = groundTerm(t->args[0]), r(1);
      for (int i = 0; i < t->ipow; ++i) r *= b;
      return r;
    }
    case TK::Cond:
      return groundFormula(t->cond) ? groundTerm(t->args[0]) : groundTerm(t->args[1]);
    default: FAIL("term is not ground"); return Rat(0);
  }
}

inline bool groundFormula(const FormulaP& f) {
  switch (f->kind) {
    case FK::True: return true;
    case FK::False: return false;
    case FK::Cmp: {
      Rat a = groundTerm(f->lhs), b = groundTerm(f->rhs);
      switch (f->rel) {
        case Rel::Eq: return a == b;
        case Rel::Ne: return a != b;
        case Rel::Ge: return a >= b;
        case Rel::Gt: return a > b;
        case Rel::Le: return a <= b;
        case Rel::Lt: return a < b;
      }
      return false;
    }
    case FK::Not: return !groundFormula(f->kids[0]);
    case FK::And: return groundFormula(f->kids[0]) && groundFormula(f->kids[1]);
    case FK::Or: return groundFormula(f->kids[0]) || groundFormula(f->kids[1]);
    case FK::Imply: return !groundFormula(f->kids[0]) || groundFormula(f->kids[1]);
    case FK::Equiv: return groundFormula(f->kids[0]) == groundFormula(f->kids[1]);
    default: FAIL("formula is not ground"); return false;
  }
}

inline Err codeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const QdlError& e) {
    return e.code;
  }
  return Err::IoError;  // sentinel: nothing was thrown
}

}  // namespace qdltest
