#pragma once
#include "qdl/ast.hpp"
#include "qdl/qf.hpp"

namespace qdl {

// Shared abstraction between the AST and polynomial worlds. Real logical
// variables map to polynomial variables; any other real-valued subterm a
// polynomial cannot express (function applications, conditionals, divisions
// by non-constants) becomes an opaque parameter variable, which is exact as
// long as it does not depend on a variable being eliminated. Ground
// object-sort equalities become opaque literals.
struct QeCtx {
  SymbolTable& syms;
  std::set<int> blockVars;  // variables currently being eliminated
  std::vector<TermP> polyVarTerm;
  std::map<std::string, int> polyVarByKey;
  std::vector<std::pair<TermP, TermP>> olitPair;
  std::map<std::string, int> olitByKey;

  explicit QeCtx(SymbolTable& s) : syms(s) {}
  int varOf(const TermP& t);
  int olitOf(const TermP& a, const TermP& b);
};

Poly qeTermToPoly(QeCtx& ctx, const TermP& t);
QFP qeFormulaToQF(QeCtx& ctx, const FormulaP& f);
FormulaP qeQFToFormula(const QeCtx& ctx, const QFP& q);

// Eliminates one existential real variable from a quantifier-free matrix.
QFP qeElimExists(QeCtx& ctx, QFP q, int polyVar);

// Full quantifier elimination: rewrites f into an equivalent formula without
// real quantifiers. Object-sort quantifiers and modalities are rejected.
FormulaP qe(SymbolTable& syms, const FormulaP& f);

// qe specialized to closed conjectures: true if f reduces to the constant
// true, false if it reduces to the constant false, error otherwise.
bool qeDecide(SymbolTable& syms, const FormulaP& f);

}  // namespace qdl
