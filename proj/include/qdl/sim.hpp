#pragma once
#include <optional>

#include "qdl/state.hpp"

namespace qdl {

// Kleene three-valued verdicts: Unknown captures everything the bounded,
// sampled exploration cannot settle exactly.
enum class TV { False, Unknown, True };
inline TV tvNot(TV a) { return a == TV::True ? TV::False : a == TV::False ? TV::True : TV::Unknown; }

using Env = std::map<int, Value>;  // logical variable bindings

struct Successors {
  std::vector<State> states;
  bool exact = true;  // true when the list is provably exhaustive
};

class Simulator {
 public:
  Simulator(const SymbolTable& syms, SimOpts opts) : syms_(syms), opts_(opts) {}

  Value evalTerm(const State& st, const TermP& t, const Env& env) const;
  TV decideFormula(const State& st, const FormulaP& f, const Env& env) const;
  Successors successors(const State& st, const ProgramP& p, const Env& env) const;

  // Diagnostic: the trace of the successor that most recently refuted a Box
  // (or witnessed nothing); lets callers report a replayable path.
  const std::vector<std::string>& lastTrace() const { return lastTrace_; }
  void clearTrace() { lastTrace_.clear(); }

 private:
  const SymbolTable& syms_;
  SimOpts opts_;
  mutable std::vector<std::string> lastTrace_;

  TV compare(const State& st, Rel rel, const Value& a, const Value& b) const;
  TV decideQuantified(const State& st, const FormulaP& f, const Env& env) const;
  TV decideModal(const State& st, const FormulaP& f, const Env& env) const;
  TV decideRealQuantViaQe(const State& st, const FormulaP& f, const Env& env) const;
  Successors runAssign(const State& st, const Program& p, const Env& env) const;
  Successors runOde(const State& st, const Program& p, const Env& env) const;
  Successors runStar(const State& st, const Program& p, const Env& env) const;
};

struct FalsifyResult {
  bool falsified = false;
  int samplesTried = 0;
  std::string witness;             // stateStr of the counterexample
  std::vector<std::string> trace;  // program path inside the failing modality
};

// Random search for a state falsifying the conjecture. Only definite
// (three-valued False) verdicts count.
FalsifyResult falsify(const Problem& prob, int nStates, uint64_t seed, const SimOpts& opts);

}  // namespace qdl
