#pragma once
#include <string>

#include "qdl/rules.hpp"
#include "qdl/sim.hpp"

namespace qdl {

// Machine-readable reports (schema 1). Keys are emitted sorted so output is
// byte-stable across runs; no timestamps or environment data.
std::string proveReportJson(const ProofTree& tree, bool closed, const std::string& method);
std::string falsifyReportJson(const FalsifyResult& res, uint64_t seed);
std::string qeReportJson(const std::string& input, const std::string& result);
std::string errorReportJson(const std::string& code, const std::string& message);

}  // namespace qdl
