#pragma once
#include "qdl/ast.hpp"

namespace qdl {

// Rewrites every comparison atom containing an if-then-else term into the
// guard-split boolean combination, innermost conditional first:
//   P(if c then a else b)  ~~>  (c -> P(a)) & (!c -> P(b))
// Programs under modalities are left untouched; their conditionals are
// resolved when the enclosing modality is reduced.
FormulaP expandConditionals(const FormulaP& f);

// True if some comparison atom of f (outside programs) contains a conditional.
bool hasConditionalAtom(const FormulaP& f);

}  // namespace qdl
