#pragma once
#include <map>

#include "qdl/ast.hpp"

namespace qdl {

struct Sequent {
  std::vector<FormulaP> ante, succ;
};

std::string sequentStr(const SymbolTable& syms, const Sequent& s);

// One rule application: the rule name, a formula position (side 0 = antecedent,
// 1 = succedent; idx selects the formula; path descends through subformula
// children for rewrite rules), plus named arguments such as instantiation
// terms or invariants.
struct RuleApp {
  std::string rule;
  int side = 1;
  int idx = 0;
  std::vector<int> path;
  std::map<std::string, std::string> args;
};

struct ProofNode {
  int id = 0;
  int parent = -1;
  Sequent seq;
  std::string rule;  // empty while the goal is open
  RuleApp app;
  std::vector<int> children;
  std::string note;  // rule-specific record, e.g. the arithmetic rewrite of iall
};

class ProofTree {
 public:
  ProofTree(std::shared_ptr<SymbolTable> syms, Sequent root);

  std::shared_ptr<SymbolTable> syms;
  std::vector<ProofNode> nodes;

  const ProofNode& node(int id) const { return nodes.at((size_t)id); }
  std::vector<int> openGoals() const;
  bool closed() const;

  // Applies a rule to an open goal, appending child nodes (none for a closing
  // rule). Throws RuleMismatch/NotAdmissible/... when the rule does not fit.
  void applyRule(int goalId, const RuleApp& app);

  // The names applied along the path from the root, depth-first.
  std::vector<std::string> ruleSequence() const;
};

// All rule names applyRule understands.
const std::vector<std::string>& kernelRuleNames();

}  // namespace qdl
