#pragma once
#include "qdl/rules.hpp"

namespace qdl {

struct ProveOpts {
  int maxSteps = 4000;
  double timeoutSec = 60.0;
  bool useInvariants = true;  // consult the problem's invariant/variant hints
};

// Saturation-style search: structural rules first, then quantifier and
// arithmetic steps. Returns true when every goal closed.
bool proveAuto(ProofTree& tree, const Problem& prob, const ProveOpts& opts);

}  // namespace qdl
