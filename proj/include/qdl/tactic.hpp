#pragma once
#include "qdl/rules.hpp"

namespace qdl {

// Text format, one application per line:
//   goal <id> <rule> at <side>:<idx>[/<p0.p1...>] [with key="value" ...]
// Blank lines and #-comments are skipped. Goal ids refer to the node numbering
// produced by replaying the script in order from the root.
std::vector<RuleApp> parseTacticScript(const std::string& text, std::vector<int>& goalIds);

// Replays a script on a fresh tree for the conjecture.
ProofTree replayTactic(const Problem& prob, const std::string& text);

std::string tacticLine(int goalId, const RuleApp& app);
std::string exportTactic(const ProofTree& tree);  // reproduces the tree

std::string proofJson(const ProofTree& tree);  // schema 1, sorted keys

// Replays and checks: every goal closed. Throws ProofMismatch on failure.
void checkProof(const Problem& prob, const std::string& tacticText);

Sequent conjectureSequent(const Problem& prob);

}  // namespace qdl
