#pragma once
#include <gmpxx.h>
#include <string>
#include <cstdint>
#include <stdexcept>

namespace qdl {

// Exact rational numbers. All symbolic arithmetic in the toolkit is exact;
// doubles appear only in the numeric ODE fallback (which taints its results).
using Rat = mpq_class;

inline Rat ratOf(long n, long d = 1) {
  Rat r(n, d);
  r.canonicalize();
  return r;
}

// Parses "p", "-p/q" or a finite decimal like "0.125" exactly.
// Base 10 is forced: GMP's default base 0 reads a leading zero as octal.
inline Rat ratParse(const std::string& s) {
  auto dot = s.find('.');
  if (dot == std::string::npos) {
    Rat r(s, 10);
    r.canonicalize();
    return r;
  }
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  std::string den = "1" + std::string(s.size() - dot - 1, '0');
  Rat r(digits + "/" + den, 10);
  r.canonicalize();
  return r;
}

inline std::string ratStr(const Rat& r) { return r.get_str(); }

inline int ratSign(const Rat& r) { return sgn(r); }

inline double ratDouble(const Rat& r) { return r.get_d(); }

}  // namespace qdl
