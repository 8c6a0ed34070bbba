#pragma once
#include <set>

#include "qdl/ast.hpp"

namespace qdl {

// Function symbols a program can change: assignment targets, evolved
// functions, and for object creation the target plus the sort's createdness
// function.
std::set<int> boundFuncs(const ProgramP& p, const SymbolTable& syms);

void collectFuncsT(const TermP& t, std::set<int>& out);
void collectFuncsF(const FormulaP& f, std::set<int>& out);

// Capture-avoiding substitution of a logical variable by a term. Quantifier
// capture is resolved by renaming the binder; an occurrence inside a modality
// that binds a function symbol of the replacement cannot be renamed away and
// raises NotAdmissible.
TermP substVarT(SymbolTable& syms, const TermP& t, int var, const TermP& repl);
FormulaP substVarF(SymbolTable& syms, const FormulaP& f, int var, const TermP& repl);
ProgramP substVarP(SymbolTable& syms, const ProgramP& p, int var, const TermP& repl);

// Replaces every syntactic occurrence of a ground term. Occurrences under a
// modality binding one of the term's function symbols raise NotAdmissible.
TermP replaceGroundTermT(const TermP& t, const TermP& pat, const TermP& repl);
FormulaP replaceGroundTermF(const SymbolTable& syms, const FormulaP& f, const TermP& pat,
                            const TermP& repl);

bool termOccursT(const TermP& t, const TermP& pat);
bool termOccursF(const FormulaP& f, const TermP& pat);

}  // namespace qdl
