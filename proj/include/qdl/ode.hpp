#pragma once
#include <optional>

#include "qdl/ast.hpp"

namespace qdl {

// Closed-form polynomial solution of a quantified differential equation
// group. Each item's rhs is the solution as a polynomial in the fresh real
// variable timeVar, with the symbolic initial value f(args) at timeVar = 0.
struct QOdeSolution {
  int timeVar = -1;
  int qvar = -1, qsort = -1;
  std::vector<AssignItem> items;  // one per equation, in system order
};

// Solves by integrating along the dependency order of the evolved symbols.
// Returns nothing when the system has no polynomial solution of this form:
// a symbol feeds back into its own derivative (directly or through a cycle),
// an evolved symbol occurs under a different argument pattern than its own
// equation, or a slope is not polynomial in the evolved applications.
// Every returned solution has passed checkQOdeSolution.
std::optional<QOdeSolution> solveQOde(SymbolTable& syms, const Program& ode);

// Outcome of the independent symbolic validation. Checks run in passes over
// the whole system — coverage and shape, then initial values, then slopes —
// so a wrong starting value is reported at its own equation rather than where
// it leaks into another slope. On failure eqnIndex names the first offending
// equation (system order) of the first failing pass, and residual carries the
// nonzero difference as a polynomial identity over opaque applications:
//   sol_f(0)   - f(args)                     (initial-value mismatch), or
//   d/dt sol_f - rhs_f[g(args_g) -> sol_g]   (slope mismatch).
struct OdeCheck {
  bool ok = false;
  int eqnIndex = -1;
  TermP residual;
};
OdeCheck checkQOdeSolution(SymbolTable& syms, const Program& ode, const QOdeSolution& sol);

// The solution as a quantified update at a given time term.
ProgramP solutionUpdate(SymbolTable& syms, const QOdeSolution& sol, const TermP& time);

// Ingredients of the flow at duration `time`: the update program, and the
// evolution-domain guard
//   forall tee (0 <= tee & tee <= time -> [update at tee] domain)
// which collapses to `true` when the domain is trivial. `tee` must be a fresh
// real variable supplied by the caller.
struct EvolveStep {
  ProgramP update;
  FormulaP guard;
};
EvolveStep mkEvolveUpdate(SymbolTable& syms, const Program& ode, const QOdeSolution& sol,
                          const TermP& time, int tee);

}  // namespace qdl
