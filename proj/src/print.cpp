#include "qdl/print.hpp"

#include <sstream>

namespace qdl {

std::string relStr(Rel r) {
  switch (r) {
    case Rel::Eq: return "=";
    case Rel::Ne: return "!=";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
    case Rel::Le: return "<=";
    case Rel::Lt: return "<";
  }
  return "?";
}

namespace {

// Term precedence: 0 add/sub, 1 mul/div, 2 neg, 3 pow, 4 atom.
// Formula precedence: 0 equiv, 1 imply, 2 or, 3 and, 4 unary, 5 atom.
// Quantifiers scope to the end of the formula (dot notation), so they count
// as level 0 when deciding whether the context needs parentheses.
// Program precedence: 0 choice, 1 seq, 2 assignment forms, 3 delimited.

struct Printer {
  const SymbolTable& syms;
  std::ostringstream os;

  std::string funcName(int f) const {
    const auto& d = syms.funcs[f];
    return d.isEps ? "eps" : d.name;
  }

  void term(const TermP& t, int ctx) {
    switch (t->kind) {
      case TK::Num: {
        // "p/q" contains a division, "-p" a sign: both need parens where a
        // bare atom would bind tighter than their spelling.
        bool neg = ratSign(t->num) < 0;
        bool wrap = (neg && ctx > 2) || (t->num.get_den() != 1 && ctx > 1);
        if (wrap) os << '(';
        os << ratStr(t->num);
        if (wrap) os << ')';
        return;
      }
      case TK::Var: os << syms.vars[t->ref].name; return;
      case TK::App: {
        os << funcName(t->ref);
        if (!t->args.empty()) {
          os << '(';
          for (size_t i = 0; i < t->args.size(); ++i) {
            if (i) os << ", ";
            term(t->args[i], 0);
          }
          os << ')';
        }
        return;
      }
      case TK::Add:
      case TK::Sub: {
        if (ctx > 0) os << '(';
        term(t->args[0], 0);
        os << (t->kind == TK::Add ? " + " : " - ");
        term(t->args[1], 1);
        if (ctx > 0) os << ')';
        return;
      }
      case TK::Mul:
      case TK::Div: {
        if (ctx > 1) os << '(';
        term(t->args[0], 1);
        os << (t->kind == TK::Mul ? " * " : " / ");
        term(t->args[1], 2);
        if (ctx > 1) os << ')';
        return;
      }
      case TK::Neg: {
        if (ctx > 2) os << '(';
        os << '-';
        term(t->args[0], 3);
        if (ctx > 2) os << ')';
        return;
      }
      case TK::Pow: {
        term(t->args[0], 4);
        os << '^' << t->ipow;
        return;
      }
      case TK::Cond: {
        os << "(if ";
        formula(t->cond, 0);
        os << " then ";
        term(t->args[0], 0);
        os << " else ";
        term(t->args[1], 0);
        os << ')';
        return;
      }
    }
  }

  void formula(const FormulaP& f, int ctx) {
    switch (f->kind) {
      case FK::True: os << "true"; return;
      case FK::False: os << "false"; return;
      case FK::Cmp:
        if (ctx > 4) os << '(';
        term(f->lhs, 0);
        os << ' ' << relStr(f->rel) << ' ';
        term(f->rhs, 0);
        if (ctx > 4) os << ')';
        return;
      case FK::Not:
        os << '!';
        formula(f->kids[0], 5);
        return;
      case FK::And:
      case FK::Or: {
        int lvl = f->kind == FK::And ? 3 : 2;
        if (ctx > lvl) os << '(';
        formula(f->kids[0], lvl);
        os << (f->kind == FK::And ? " & " : " | ");
        formula(f->kids[1], lvl + 1);
        if (ctx > lvl) os << ')';
        return;
      }
      case FK::Imply:
      case FK::Equiv: {
        int lvl = f->kind == FK::Imply ? 1 : 0;
        if (ctx > lvl) os << '(';
        formula(f->kids[0], lvl + 1);
        os << (f->kind == FK::Imply ? " -> " : " <-> ");
        formula(f->kids[1], lvl);
        if (ctx > lvl) os << ')';
        return;
      }
      case FK::Forall:
      case FK::Exists: {  // scope runs to the end, so acts like level 0
        if (ctx > 0) os << '(';
        os << (f->kind == FK::Forall ? "forall " : "exists ");
        os << syms.sortNames[f->sort] << ' ' << syms.vars[f->var].name << ". ";
        formula(f->kids[0], 0);
        if (ctx > 0) os << ')';
        return;
      }
      case FK::Box:
      case FK::Diamond: {
        os << (f->kind == FK::Box ? '[' : '<');
        program(f->prog, 0);
        os << (f->kind == FK::Box ? ']' : '>');
        formula(f->kids[0], 4);
        return;
      }
    }
  }

  void assignItem(const AssignItem& it) {
    os << funcName(it.fn);
    if (!it.args.empty()) {
      os << '(';
      for (size_t i = 0; i < it.args.size(); ++i) {
        if (i) os << ", ";
        term(it.args[i], 0);
      }
      os << ')';
    }
    os << " := ";
    term(it.rhs, 0);
  }

  void program(const ProgramP& p, int ctx) {
    switch (p->kind) {
      case PK::QAssign: {
        bool quant = p->qvar >= 0;
        bool wrap = ctx > 2;
        if (wrap) os << '(';
        if (quant)
          os << "forall " << syms.sortNames[p->qsort] << ' '
             << syms.vars[p->qvar].name << ". ";
        if (p->items.size() == 1) {
          assignItem(p->items[0]);
        } else {
          os << '(';
          for (size_t i = 0; i < p->items.size(); ++i) {
            if (i) os << ", ";
            assignItem(p->items[i]);
          }
          os << ')';
        }
        if (wrap) os << ')';
        return;
      }
      case PK::QOde: {
        if (p->qvar >= 0)
          os << "forall " << syms.sortNames[p->qsort] << ' '
             << syms.vars[p->qvar].name << ". ";
        os << '{';
        for (size_t i = 0; i < p->odes.size(); ++i) {
          const auto& it = p->odes[i];
          if (i) os << ", ";
          os << funcName(it.fn);
          if (!it.args.empty()) {
            os << '(';
            for (size_t j = 0; j < it.args.size(); ++j) {
              if (j) os << ", ";
              term(it.args[j], 0);
            }
            os << ')';
          }
          os << "' = ";
          term(it.rhs, 0);
        }
        if (p->domain && p->domain->kind != FK::True) {
          os << " & ";
          formula(p->domain, 0);
        }
        os << '}';
        return;
      }
      case PK::Test: {
        bool wrap = ctx > 2;  // ?phi* would splice the star into phi's term
        if (wrap) os << '(';
        os << '?';
        formula(p->test, 4);
        if (wrap) os << ')';
        return;
      }
      case PK::New: {
        bool wrap = ctx > 2;
        if (wrap) os << '(';
        os << funcName(p->newFn);
        if (!p->newArgs.empty()) {
          os << '(';
          for (size_t i = 0; i < p->newArgs.size(); ++i) {
            if (i) os << ", ";
            term(p->newArgs[i], 0);
          }
          os << ')';
        }
        os << " := new " << syms.sortNames[p->newSort];
        if (wrap) os << ')';
        return;
      }
      case PK::Choice: {
        if (ctx > 0) os << '(';
        program(p->a, 0);
        os << " ++ ";
        program(p->b, 1);
        if (ctx > 0) os << ')';
        return;
      }
      case PK::Seq: {
        if (ctx > 1) os << '(';
        program(p->a, 1);
        os << "; ";
        program(p->b, 2);
        if (ctx > 1) os << ')';
        return;
      }
      case PK::Star:
        program(p->a, 3);
        os << '*';
        return;
    }
  }
};

}  // namespace

std::string printTerm(const SymbolTable& syms, const TermP& t) {
  Printer p{syms};
  p.term(t, 0);
  return p.os.str();
}
std::string printFormula(const SymbolTable& syms, const FormulaP& f) {
  Printer p{syms};
  p.formula(f, 0);
  return p.os.str();
}
std::string printProgram(const SymbolTable& syms, const ProgramP& p0) {
  Printer p{syms};
  p.program(p0, 0);
  return p.os.str();
}

}  // namespace qdl
