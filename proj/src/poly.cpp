#include "qdl/poly.hpp"

#include <algorithm>
#include <sstream>

namespace qdl {

static Mono monoMul(const Mono& a, const Mono& b) {
  Mono out;
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) out.push_back(a[i++]);
    else if (i == a.size() || b[j].first < a[i].first) out.push_back(b[j++]);
    else {
      out.push_back({a[i].first, a[i].second + b[j].second});
      ++i, ++j;
    }
  }
  return out;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (const auto& [m, c] : o.terms) {
    auto it = r.terms.find(m);
    if (it == r.terms.end()) r.terms[m] = c;
    else {
      it->second += c;
      if (it->second == 0) r.terms.erase(it);
    }
  }
  return r;
}
Poly Poly::operator-() const {
  Poly r;
  for (const auto& [m, c] : terms) r.terms[m] = -c;
  return r;
}
Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Poly& o) const {
  Poly r;
  for (const auto& [m1, c1] : terms)
    for (const auto& [m2, c2] : o.terms) {
      Mono m = monoMul(m1, m2);
      auto it = r.terms.find(m);
      if (it == r.terms.end()) {
        Rat c = c1 * c2;
        if (c != 0) r.terms[m] = c;
      } else {
        it->second += c1 * c2;
        if (it->second == 0) r.terms.erase(it);
      }
    }
  return r;
}

Poly Poly::pow(int e) const {
  Poly r = Poly::num(Rat(1));
  Poly b = *this;
  while (e > 0) {
    if (e & 1) r = r * b;
    b = b * b;
    e >>= 1;
  }
  return r;
}

int Poly::degreeIn(int v) const {
  int d = 0;
  for (const auto& [m, c] : terms)
    for (const auto& [var, e] : m)
      if (var == v) d = std::max(d, e);
  return d;
}

int Poly::totalDegree() const {
  int d = 0;
  for (const auto& [m, c] : terms) {
    int s = 0;
    for (const auto& [var, e] : m) s += e;
    d = std::max(d, s);
  }
  return d;
}

void Poly::collectVars(std::set<int>& out) const {
  for (const auto& [m, c] : terms)
    for (const auto& [var, e] : m) out.insert(var);
}

std::vector<Poly> Poly::coeffsIn(int v) const {
  std::vector<Poly> out((size_t)degreeIn(v) + 1);
  for (const auto& [m, c] : terms) {
    int e = 0;
    Mono rest;
    for (const auto& [var, exp] : m) {
      if (var == v) e = exp;
      else rest.push_back({var, exp});
    }
    out[(size_t)e].terms[rest] = out[(size_t)e].terms.count(rest)
                                     ? out[(size_t)e].terms[rest] + c
                                     : c;
    if (out[(size_t)e].terms[rest] == 0) out[(size_t)e].terms.erase(rest);
  }
  return out;
}

Poly Poly::coeffOf(int v, int k) const {
  Poly out;
  for (const auto& [m, c] : terms) {
    int e = 0;
    Mono rest;
    for (const auto& [var, exp] : m) {
      if (var == v) e = exp;
      else rest.push_back({var, exp});
    }
    if (e != k) continue;
    auto it = out.terms.find(rest);
    if (it == out.terms.end()) out.terms[rest] = c;
    else {
      it->second += c;
      if (it->second == 0) out.terms.erase(it);
    }
  }
  return out;
}

Poly Poly::substPoly(int v, const Poly& q) const {
  Poly out;
  auto cs = coeffsIn(v);
  // Horner evaluation from the top coefficient down.
  for (size_t k = cs.size(); k-- > 0;) out = out * q + cs[k];
  return out;
}

Poly Poly::derivative(int v) const {
  Poly out;
  for (const auto& [m, c] : terms) {
    Mono dm;
    int e = 0;
    for (const auto& [var, exp] : m) {
      if (var == v) {
        e = exp;
        if (exp > 1) dm.push_back({var, exp - 1});
      } else {
        dm.push_back({var, exp});
      }
    }
    if (e == 0) continue;
    auto it = out.terms.find(dm);
    Rat add = c * e;
    if (it == out.terms.end()) out.terms[dm] = add;
    else {
      it->second += add;
      if (it->second == 0) out.terms.erase(it);
    }
  }
  return out;
}

Rat Poly::eval(const std::map<int, Rat>& asg) const {
  Rat sum(0);
  for (const auto& [m, c] : terms) {
    Rat prod = c;
    for (const auto& [var, e] : m) {
      auto it = asg.find(var);
      if (it == asg.end()) fail(Err::SolveFailed, "polynomial variable without a value");
      Rat base = it->second;
      for (int k = 0; k < e; ++k) prod *= base;
    }
    sum += prod;
  }
  return sum;
}

Poly Poly::scaledByContent() const {
  if (terms.empty()) return *this;
  mpz_class num(0), den(1);
  for (const auto& [m, c] : terms) {
    num = gcd(num, c.get_num());
    den = lcm(den, c.get_den());
  }
  Rat scale(den, num);  // multiply by den/num clears denominators and content
  scale.canonicalize();
  if (scale < 0) scale = -scale;
  Poly r;
  for (const auto& [m, c] : terms) r.terms[m] = c * scale;
  return r;
}

Poly Poly::canonicalPositive() const {
  Poly r = scaledByContent();
  if (!r.terms.empty() && ratSign(r.terms.rbegin()->second) < 0) return -r;
  return r;
}

std::string Poly::str() const {
  if (terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
    const auto& [m, c] = *it;
    if (!first) os << " + ";
    first = false;
    os << ratStr(c);
    for (const auto& [var, e] : m) {
      os << "*x" << var;
      if (e > 1) os << '^' << e;
    }
  }
  return os.str();
}

}  // namespace qdl
