#pragma once
#include <stdexcept>
#include <string>
#include <cstdint>

namespace qdl {

struct Span {
  uint32_t lo = 0, hi = 0;
};

// Error taxonomy shared across modules. Every user-facing failure is one of
// these codes plus a message (and a source span when one is known).
enum class Err {
  SyntaxError,
  TypeError,
  UnsupportedFeature,
  NotAdmissible,
  RuleMismatch,
  QeInapplicable,
  UnsupportedDegree,
  ObjectSortAtom,
  SolveFailed,
  BoundExceeded,
  ProofMismatch,
  IoError,
};

inline const char* errName(Err e) {
  switch (e) {
    case Err::SyntaxError: return "SyntaxError";
    case Err::TypeError: return "TypeError";
    case Err::UnsupportedFeature: return "UnsupportedFeature";
    case Err::NotAdmissible: return "NotAdmissible";
    case Err::RuleMismatch: return "RuleMismatch";
    case Err::QeInapplicable: return "QeInapplicable";
    case Err::UnsupportedDegree: return "UnsupportedDegree";
    case Err::ObjectSortAtom: return "ObjectSortAtom";
    case Err::SolveFailed: return "SolveFailed";
    case Err::BoundExceeded: return "BoundExceeded";
    case Err::ProofMismatch: return "ProofMismatch";
    case Err::IoError: return "IoError";
  }
  return "?";
}

class QdlError : public std::runtime_error {
 public:
  Err code;
  Span span;
  QdlError(Err c, const std::string& msg, Span sp = {})
      : std::runtime_error(std::string(errName(c)) + ": " + msg), code(c), span(sp) {}
};

[[noreturn]] inline void fail(Err c, const std::string& msg, Span sp = {}) {
  throw QdlError(c, msg, sp);
}

}  // namespace qdl
