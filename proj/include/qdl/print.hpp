#pragma once
#include <string>

#include "qdl/ast.hpp"

namespace qdl {

// Precedence-aware pretty printers. Output re-parses to a structurally equal
// AST (modulo spans); actualist sugar is emitted in expanded form.
std::string printTerm(const SymbolTable& syms, const TermP& t);
std::string printFormula(const SymbolTable& syms, const FormulaP& f);
std::string printProgram(const SymbolTable& syms, const ProgramP& p);

std::string relStr(Rel r);

}  // namespace qdl
