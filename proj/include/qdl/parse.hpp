#pragma once
#include <string>

#include "qdl/ast.hpp"

namespace qdl {

// Parse a full problem file (declarations + "problem:" conjecture).
Problem parseProblem(const std::string& src);

// Parse a single term/formula/program against an existing symbol table.
// New quantifier binders are declared on the fly; allowDollar additionally
// permits the machine-generated $k / sk$k names used in proof scripts.
TermP parseTermStr(SymbolTable& syms, const std::string& s, bool allowDollar = true);
FormulaP parseFormulaStr(SymbolTable& syms, const std::string& s, bool allowDollar = true);
ProgramP parseProgramStr(SymbolTable& syms, const std::string& s, bool allowDollar = true);

// Static sort of a well-formed term (0 = R).
int sortOfTerm(const SymbolTable& syms, const TermP& t);

// Post-parse validation: sorts, arities, admissible constructs.
void typecheckProblem(const Problem& p);
void typecheckFormula(const SymbolTable& syms, const FormulaP& f);

}  // namespace qdl
