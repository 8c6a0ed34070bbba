#pragma once
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdl/diag.hpp"
#include "qdl/rat.hpp"

namespace qdl {

// ---------------------------------------------------------------------------
// Sorts and symbols
//
// Sort 0 is always the reals ("R"); user files declare object sorts.
// Function symbols are flexible (state-dependent) interpreted symbols; logical
// variables are the only thing quantifiers bind. Each object sort gets an
// implicit createdness function eps : C -> R used by the actualist sugar.
// ---------------------------------------------------------------------------

struct FuncDecl {
  std::string name;
  std::vector<int> argSorts;
  int retSort = 0;
  bool isEps = false;  // implicit createdness flag function of an object sort
};

struct VarDecl {
  std::string name;
  int sort = 0;
};

struct SymbolTable {
  std::vector<std::string> sortNames{"R"};
  std::vector<FuncDecl> funcs;
  std::vector<VarDecl> vars;
  std::map<std::string, int> sortIx{{"R", 0}};
  std::map<std::string, int> funcIx;
  std::map<std::string, int> varIx;
  std::map<int, int> epsIx;  // object sort -> func id of its eps
  int freshCounter = 0;      // drives $k / sk$k names deterministically

  static constexpr int kRealSort = 0;

  int addSort(const std::string& n) {
    if (sortIx.count(n)) fail(Err::SyntaxError, "duplicate sort " + n);
    int id = (int)sortNames.size();
    sortNames.push_back(n);
    sortIx[n] = id;
    // implicit createdness function for the new object sort
    int f = addFunc("eps$" + n, {id}, kRealSort);
    funcs[f].isEps = true;
    epsIx[id] = f;
    return id;
  }
  int addFunc(const std::string& n, std::vector<int> argSorts, int ret) {
    if (funcIx.count(n) || varIx.count(n))
      fail(Err::SyntaxError, "duplicate symbol " + n);
    int id = (int)funcs.size();
    funcs.push_back({n, std::move(argSorts), ret, false});
    funcIx[n] = id;
    return id;
  }
  int addVar(const std::string& n, int sort) {
    if (funcIx.count(n)) fail(Err::SyntaxError, "duplicate symbol " + n);
    auto it = varIx.find(n);
    if (it != varIx.end()) {
      if (vars[it->second].sort != sort)
        fail(Err::TypeError, "variable " + n + " redeclared at a different sort");
      return it->second;
    }
    int id = (int)vars.size();
    vars.push_back({n, sort});
    varIx[n] = id;
    return id;
  }
  int sortOf(const std::string& n) const {
    auto it = sortIx.find(n);
    if (it == sortIx.end()) fail(Err::SyntaxError, "unknown sort " + n);
    return it->second;
  }
  int epsOf(int sort) const {
    auto it = epsIx.find(sort);
    if (it == epsIx.end()) fail(Err::TypeError, "sort has no createdness function");
    return it->second;
  }
  int freshVar(int sort) { return addVar("$" + std::to_string(++freshCounter), sort); }
  int freshSkolem(std::vector<int> argSorts, int ret) {
    return addFunc("sk$" + std::to_string(++freshCounter), std::move(argSorts), ret);
  }
  bool isObjectSort(int s) const { return s != kRealSort; }
};

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

struct Term;
struct Formula;
struct Program;
using TermP = std::shared_ptr<const Term>;
using FormulaP = std::shared_ptr<const Formula>;
using ProgramP = std::shared_ptr<const Program>;

enum class TK { Num, Var, App, Add, Sub, Mul, Div, Neg, Pow, Cond };

struct Term {
  TK kind;
  Span span;
  Rat num;                  // Num
  int ref = -1;             // Var: var id; App: func id
  std::vector<TermP> args;  // App arguments / operator operands
  int ipow = 0;             // Pow exponent (args[0] is the base)
  FormulaP cond;            // Cond guard (args[0]=then, args[1]=else)
};

inline TermP mkNum(Rat r, Span sp = {}) {
  auto t = std::make_shared<Term>();
  t->kind = TK::Num;
  t->num = std::move(r);
  t->span = sp;
  return t;
}
inline TermP mkVar(int v, Span sp = {}) {
  auto t = std::make_shared<Term>();
  t->kind = TK::Var;
  t->ref = v;
  t->span = sp;
  return t;
}
inline TermP mkApp(int f, std::vector<TermP> args, Span sp = {}) {
  auto t = std::make_shared<Term>();
  t->kind = TK::App;
  t->ref = f;
  t->args = std::move(args);
  t->span = sp;
  return t;
}
inline TermP mkBin(TK k, TermP a, TermP b, Span sp = {}) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  t->args = {std::move(a), std::move(b)};
  t->span = sp;
  return t;
}
inline TermP mkNeg(TermP a, Span sp = {}) {
  if (a->kind == TK::Num) return mkNum(-a->num, sp);  // keep numerals canonical
  auto t = std::make_shared<Term>();
  t->kind = TK::Neg;
  t->args = {std::move(a)};
  t->span = sp;
  return t;
}
inline TermP mkPow(TermP a, int e, Span sp = {}) {
  auto t = std::make_shared<Term>();
  t->kind = TK::Pow;
  t->args = {std::move(a)};
  t->ipow = e;
  t->span = sp;
  return t;
}
inline TermP mkCond(FormulaP c, TermP th, TermP el, Span sp = {}) {
  auto t = std::make_shared<Term>();
  t->kind = TK::Cond;
  t->cond = std::move(c);
  t->args = {std::move(th), std::move(el)};
  t->span = sp;
  return t;
}

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

enum class Rel { Eq, Ne, Ge, Gt, Le, Lt };
enum class FK { True, False, Cmp, Not, And, Or, Imply, Equiv, Forall, Exists, Box, Diamond };

struct Formula {
  FK kind;
  Span span;
  Rel rel = Rel::Eq;  // Cmp
  TermP lhs, rhs;     // Cmp
  std::vector<FormulaP> kids;
  int var = -1, sort = -1;  // Forall/Exists binder
  ProgramP prog;            // Box/Diamond (kids[0] = postcondition)
};

inline FormulaP mkBoolConst(bool b, Span sp = {}) {
  auto f = std::make_shared<Formula>();
  f->kind = b ? FK::True : FK::False;
  f->span = sp;
  return f;
}
inline FormulaP mkCmp(Rel r, TermP a, TermP b, Span sp = {}) {
  auto f = std::make_shared<Formula>();
  f->kind = FK::Cmp;
  f->rel = r;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  f->span = sp;
  return f;
}
inline FormulaP mkNot(FormulaP a, Span sp = {}) {
  auto f = std::make_shared<Formula>();
  f->kind = FK::Not;
  f->kids = {std::move(a)};
  f->span = sp;
  return f;
}
inline FormulaP mkBinF(FK k, FormulaP a, FormulaP b, Span sp = {}) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->kids = {std::move(a), std::move(b)};
  f->span = sp;
  return f;
}
inline FormulaP mkQuant(FK k, int var, int sort, FormulaP body, Span sp = {}) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->var = var;
  f->sort = sort;
  f->kids = {std::move(body)};
  f->span = sp;
  return f;
}
inline FormulaP mkModal(FK k, ProgramP p, FormulaP body, Span sp = {}) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->prog = std::move(p);
  f->kids = {std::move(body)};
  f->span = sp;
  return f;
}

// ---------------------------------------------------------------------------
// Programs (quantified hybrid programs)
// ---------------------------------------------------------------------------

enum class PK { QAssign, QOde, Test, New, Choice, Seq, Star };

struct AssignItem {
  int fn = -1;
  std::vector<TermP> args;
  TermP rhs;
};
struct OdeItem {
  int fn = -1;
  std::vector<TermP> args;
  TermP rhs;
};

struct Program {
  PK kind;
  Span span;
  int qvar = -1, qsort = -1;     // QAssign/QOde binder; -1 = unquantified
  std::vector<AssignItem> items; // QAssign
  std::vector<OdeItem> odes;     // QOde
  FormulaP domain;               // QOde evolution domain (never null; True if absent)
  FormulaP test;                 // Test
  int newFn = -1;                // New: newFn(newArgs) := new <newSort>
  std::vector<TermP> newArgs;
  int newSort = -1;
  ProgramP a, b;                 // Choice/Seq children; Star uses a
};

inline ProgramP mkQAssign(int qvar, int qsort, std::vector<AssignItem> items, Span sp = {}) {
  auto p = std::make_shared<Program>();
  p->kind = PK::QAssign;
  p->qvar = qvar;
  p->qsort = qsort;
  p->items = std::move(items);
  p->span = sp;
  return p;
}
inline ProgramP mkQOde(int qvar, int qsort, std::vector<OdeItem> odes, FormulaP domain, Span sp = {}) {
  auto p = std::make_shared<Program>();
  p->kind = PK::QOde;
  p->qvar = qvar;
  p->qsort = qsort;
  p->odes = std::move(odes);
  p->domain = std::move(domain);
  p->span = sp;
  return p;
}
inline ProgramP mkTest(FormulaP f, Span sp = {}) {
  auto p = std::make_shared<Program>();
  p->kind = PK::Test;
  p->test = std::move(f);
  p->span = sp;
  return p;
}
inline ProgramP mkNew(int fn, std::vector<TermP> args, int sortC, Span sp = {}) {
  auto p = std::make_shared<Program>();
  p->kind = PK::New;
  p->newFn = fn;
  p->newArgs = std::move(args);
  p->newSort = sortC;
  p->span = sp;
  return p;
}
inline ProgramP mkBinP(PK k, ProgramP a, ProgramP b, Span sp = {}) {
  auto p = std::make_shared<Program>();
  p->kind = k;
  p->a = std::move(a);
  p->b = std::move(b);
  p->span = sp;
  return p;
}
inline ProgramP mkStar(ProgramP a, Span sp = {}) {
  auto p = std::make_shared<Program>();
  p->kind = PK::Star;
  p->a = std::move(a);
  p->span = sp;
  return p;
}

// ---------------------------------------------------------------------------
// Problems
// ---------------------------------------------------------------------------

struct Problem {
  std::shared_ptr<SymbolTable> syms;
  FormulaP conjecture;
  std::vector<FormulaP> invariants;                 // loop hints, by star occurrence
  std::vector<std::pair<int, FormulaP>> variants;   // (variant variable, formula)
  std::string source;
};

// Structural equality modulo spans.
bool eqTerm(const TermP& a, const TermP& b);
bool eqFormula(const FormulaP& a, const FormulaP& b);
bool eqProgram(const ProgramP& a, const ProgramP& b);

// Occurrence checks used throughout the kernel.
bool termMentionsVar(const TermP& t, int var);
bool formulaMentionsVar(const FormulaP& f, int var);   // free occurrence
bool programMentionsVar(const ProgramP& p, int var);
bool termMentionsFunc(const TermP& t, int fn);
bool formulaMentionsFunc(const FormulaP& f, int fn);
bool programMentionsFunc(const ProgramP& p, int fn);

// Free logical variables (vars not bound by a quantifier).
void collectFreeVars(const FormulaP& f, std::vector<int>& out);
void collectFreeVarsT(const TermP& t, std::vector<int>& out);

bool formulaHasModality(const FormulaP& f);

}  // namespace qdl
