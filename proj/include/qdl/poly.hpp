#pragma once
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qdl/diag.hpp"
#include "qdl/rat.hpp"

namespace qdl {

// Monomial: sorted (variable, exponent>0) pairs. Variables are abstract ids;
// callers maintain the mapping to logical variables or abstracted terms.
using Mono = std::vector<std::pair<int, int>>;

struct Poly {
  std::map<Mono, Rat> terms;  // invariant: no zero coefficients

  static Poly num(const Rat& r) {
    Poly p;
    if (r != 0) p.terms[{}] = r;
    return p;
  }
  static Poly var(int v) {
    Poly p;
    p.terms[{{v, 1}}] = Rat(1);
    return p;
  }

  bool isZero() const { return terms.empty(); }
  bool isConst() const { return terms.empty() || (terms.size() == 1 && terms.begin()->first.empty()); }
  Rat constVal() const { return terms.empty() ? Rat(0) : terms.begin()->second; }

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator-() const;
  Poly pow(int e) const;
  bool operator==(const Poly& o) const { return terms == o.terms; }
  bool operator<(const Poly& o) const { return terms < o.terms; }

  int degreeIn(int v) const;
  int totalDegree() const;
  void collectVars(std::set<int>& out) const;
  bool mentions(int v) const { return degreeIn(v) > 0; }

  // Coefficient polynomials with respect to one variable; index = power.
  std::vector<Poly> coeffsIn(int v) const;
  Poly coeffOf(int v, int k) const;
  Poly substPoly(int v, const Poly& q) const;
  Poly derivative(int v) const;
  Rat eval(const std::map<int, Rat>& asg) const;

  // Divides by the (positive) rational content; preserves sign.
  Poly scaledByContent() const;
  // scaledByContent with the leading coefficient forced positive: a canonical
  // representative of the class {c*p : c != 0}.
  Poly canonicalPositive() const;

  std::string str() const;  // debug form: vars print as x<id>
};

}  // namespace qdl
