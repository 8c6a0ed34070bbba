#pragma once
#include <vector>

#include "qdl/poly.hpp"

namespace qdl {

// Dense univariate polynomials over Q: coeff[i] multiplies x^i, no trailing
// zero coefficients.
using UPoly = std::vector<Rat>;

UPoly upNormalize(UPoly p);
UPoly upFromPoly(const Poly& p, int v);  // fails if another variable occurs
int upDegree(const UPoly& p);            // -1 for the zero polynomial
Rat upEval(const UPoly& p, const Rat& x);
UPoly upDeriv(const UPoly& p);
UPoly upGcd(UPoly a, UPoly b);           // monic gcd
UPoly upSqfree(const UPoly& p);          // p / gcd(p, p')
UPoly upDeflate(const UPoly& p, const Rat& root);  // exact division by (x - root)

// A root location: either an exact rational point (lo == hi) or an open
// interval lo < hi containing exactly one root, with p(lo), p(hi) != 0.
struct RootInterval {
  Rat lo, hi;
  bool exact() const { return lo == hi; }
};

// All real roots of p (repeated roots reported once), as pairwise disjoint
// intervals in ascending order. Roots expressible with a power-of-two
// denominator of at most 2^48 come back exact; every inexact interval has a
// strict sign change of the squarefree part and does not contain zero.
std::vector<RootInterval> isolateRoots(const UPoly& p);

// Shrinks iv (tracked as a root of q, squarefree) until excl is strictly
// outside the closed interval.
void refineExcludePoint(const UPoly& q, RootInterval& iv, const Rat& excl);

// Sign of p at the unique root of q (squarefree) inside iv.
int signAtRoot(const UPoly& p, const UPoly& q, RootInterval iv);

Rat cauchyBound(const UPoly& p);
int sturmCountOpen(const UPoly& p, const Rat& lo, const Rat& hi);  // roots in (lo, hi), endpoints non-roots

}  // namespace qdl
