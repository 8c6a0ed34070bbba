#include "qdl/sturm.hpp"

#include <algorithm>

namespace qdl {

UPoly upNormalize(UPoly p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
  return p;
}

UPoly upFromPoly(const Poly& p, int v) {
  UPoly out;
  for (const auto& [m, c] : p.terms) {
    int e = 0;
    for (const auto& [var, exp] : m) {
      if (var == v) e = exp;
      else fail(Err::UnsupportedDegree, "polynomial is not univariate");
    }
    if ((int)out.size() <= e) out.resize((size_t)e + 1, Rat(0));
    out[(size_t)e] += c;
  }
  return upNormalize(std::move(out));
}

int upDegree(const UPoly& p) { return (int)p.size() - 1; }

Rat upEval(const UPoly& p, const Rat& x) {
  Rat acc(0);
  for (size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

UPoly upDeriv(const UPoly& p) {
  UPoly out;
  for (size_t i = 1; i < p.size(); ++i) out.push_back(p[i] * (long)i);
  return upNormalize(std::move(out));
}

static UPoly upMonic(UPoly p) {
  p = upNormalize(std::move(p));
  if (p.empty()) return p;
  Rat lead = p.back();
  for (auto& c : p) c /= lead;
  return p;
}

// Remainder of a by b (b nonzero).
static UPoly upRem(UPoly a, const UPoly& b) {
  a = upNormalize(std::move(a));
  while ((int)a.size() >= (int)b.size() && !a.empty()) {
    Rat q = a.back() / b.back();
    size_t shift = a.size() - b.size();
    for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= q * b[i];
    a = upNormalize(std::move(a));
  }
  return a;
}

UPoly upGcd(UPoly a, UPoly b) {
  a = upNormalize(std::move(a));
  b = upNormalize(std::move(b));
  while (!b.empty()) {
    UPoly r = upRem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return upMonic(std::move(a));
}

static UPoly upDivExact(const UPoly& a, const UPoly& b) {
  UPoly rem = a, q(a.size(), Rat(0));
  rem = upNormalize(std::move(rem));
  while ((int)rem.size() >= (int)b.size() && !rem.empty()) {
    Rat c = rem.back() / b.back();
    size_t shift = rem.size() - b.size();
    q[shift] = c;
    for (size_t i = 0; i < b.size(); ++i) rem[shift + i] -= c * b[i];
    rem = upNormalize(std::move(rem));
  }
  if (!rem.empty()) fail(Err::SolveFailed, "inexact polynomial division");
  return upNormalize(std::move(q));
}

UPoly upSqfree(const UPoly& p) {
  if (upDegree(p) <= 1) return p;
  UPoly g = upGcd(p, upDeriv(p));
  if (upDegree(g) <= 0) return p;
  return upDivExact(p, g);
}

UPoly upDeflate(const UPoly& p, const Rat& root) {
  // synthetic division by (x - root)
  UPoly q(p.size() > 0 ? p.size() - 1 : 0, Rat(0));
  Rat carry(0);
  for (size_t i = p.size(); i-- > 1;) {
    carry = p[i] + carry * root;
    q[i - 1] = carry;
  }
  return upNormalize(std::move(q));
}

Rat cauchyBound(const UPoly& p) {
  if (p.size() <= 1) return Rat(1);
  Rat lead = abs(p.back());
  Rat m(0);
  for (size_t i = 0; i + 1 < p.size(); ++i) m = std::max(m, Rat(abs(p[i])));
  return Rat(1) + m / lead;
}

namespace {

// Sturm chain with sign-normalized remainders.
std::vector<UPoly> sturmChain(const UPoly& p) {
  std::vector<UPoly> chain;
  chain.push_back(upNormalize(p));
  UPoly d = upDeriv(p);
  if (!d.empty()) chain.push_back(d);
  while (chain.size() >= 2) {
    UPoly r = upRem(chain[chain.size() - 2], chain.back());
    if (r.empty()) break;
    for (auto& c : r) c = -c;
    chain.push_back(std::move(r));
  }
  return chain;
}

int variationsAt(const std::vector<UPoly>& chain, const Rat& x) {
  int count = 0, prev = 0;
  for (const auto& q : chain) {
    int s = ratSign(upEval(q, x));
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++count;
    prev = s;
  }
  return count;
}

}  // namespace

int sturmCountOpen(const UPoly& p, const Rat& lo, const Rat& hi) {
  if (upDegree(p) <= 0) return 0;
  if (upEval(p, lo) == 0 || upEval(p, hi) == 0)
    fail(Err::SolveFailed, "sturm endpoints must not be roots");
  auto chain = sturmChain(p);
  return variationsAt(chain, lo) - variationsAt(chain, hi);
}

namespace {

// Smallest power of two >= r (for r >= 1). Power-of-two outer bounds keep
// every bisection point dyadic, so dyadic roots are hit exactly.
Rat pow2Above(const Rat& r) {
  Rat b(1);
  while (b < r) b *= 2;
  return b;
}

// One bisection step on an interval with a strict sign change of p.
void bisectStep(const UPoly& p, RootInterval& iv) {
  Rat mid = (iv.lo + iv.hi) / 2;
  Rat val = upEval(p, mid);
  if (val == 0) {
    iv = {mid, mid};
    return;
  }
  if (ratSign(upEval(p, iv.lo)) * ratSign(val) < 0) iv.hi = mid;
  else iv.lo = mid;
}

// Tightens a fresh isolating interval: snaps roots with a small power-of-two
// denominator to exact points and pushes zero out of inexact intervals (a
// root exactly at zero is always caught by the midpoint probe first).
void refineInterval(const UPoly& p, RootInterval& iv) {
  for (int round = 0; round < 48 && !iv.exact(); ++round) bisectStep(p, iv);
  while (!iv.exact() && iv.lo < 0 && 0 < iv.hi) bisectStep(p, iv);
}

}  // namespace

std::vector<RootInterval> isolateRoots(const UPoly& p0) {
  UPoly p = upSqfree(upNormalize(p0));
  std::vector<RootInterval> out;
  if (upDegree(p) <= 0) return out;

  Rat bound = pow2Above(cauchyBound(p));
  auto chain = sturmChain(p);

  struct Seg {
    Rat lo, hi;
    int count;
  };
  std::vector<Seg> work;
  int total = variationsAt(chain, -bound) - variationsAt(chain, bound);
  work.push_back({-bound, bound, total});
  while (!work.empty()) {
    Seg s = work.back();
    work.pop_back();
    if (s.count == 0) continue;
    if (s.count == 1 && ratSign(upEval(p, s.lo)) * ratSign(upEval(p, s.hi)) < 0) {
      RootInterval iv{s.lo, s.hi};
      refineInterval(p, iv);
      out.push_back(iv);
      continue;
    }
    Rat mid = (s.lo + s.hi) / 2;
    if (upEval(p, mid) == 0) {
      // Exact rational root: deflate and isolate the remaining roots globally
      // (anything found so far is rediscovered, so start over). Keeping the
      // deflated root strictly outside every other interval preserves the
      // sign-change invariant for the full polynomial.
      out.clear();
      out.push_back({mid, mid});
      UPoly q = upDeflate(p, mid);
      for (auto iv : isolateRoots(q)) {
        if (!iv.exact()) refineExcludePoint(q, iv, mid);
        out.push_back(iv);
      }
      std::sort(out.begin(), out.end(),
                [](const RootInterval& a, const RootInterval& b) { return a.lo < b.lo; });
      return out;
    }
    int left = variationsAt(chain, s.lo) - variationsAt(chain, mid);
    work.push_back({s.lo, mid, left});
    work.push_back({mid, s.hi, s.count - left});
  }
  std::sort(out.begin(), out.end(),
            [](const RootInterval& a, const RootInterval& b) { return a.lo < b.lo; });
  return out;
}

void refineExcludePoint(const UPoly& q, RootInterval& iv, const Rat& excl) {
  while (!iv.exact() && iv.lo <= excl && excl <= iv.hi) bisectStep(q, iv);
}

namespace {

// Moves an endpoint of iv slightly inward so p does not vanish on it, keeping
// q's root inside. Returns false if the exact root was hit (iv collapses).
bool cleanEndpoint(const UPoly& p, const UPoly& q, RootInterval& iv, bool low) {
  Rat& end = low ? iv.lo : iv.hi;
  if (upEval(p, end) != 0) return true;
  int qs = ratSign(upEval(q, end));
  Rat c = (iv.lo + iv.hi) / 2;
  // Halve toward the endpoint until we are between it and q's root, off p's roots.
  for (;;) {
    Rat qc = upEval(q, c);
    if (qc == 0) {
      iv = {c, c};
      return false;
    }
    if (ratSign(qc) == qs && upEval(p, c) != 0) {
      end = c;
      return true;
    }
    c = (end + c) / 2;
  }
}

}  // namespace

int signAtRoot(const UPoly& p0, const UPoly& q, RootInterval iv) {
  UPoly p = upNormalize(p0);
  if (p.empty()) return 0;
  if (p.size() == 1) return ratSign(p[0]);
  if (iv.exact()) return ratSign(upEval(p, iv.lo));
  if (!cleanEndpoint(p, q, iv, true) || !cleanEndpoint(p, q, iv, false))
    return ratSign(upEval(p, iv.lo));
  UPoly ps = upSqfree(p);
  UPoly g = upGcd(ps, q);
  if (upDegree(g) >= 1 && sturmCountOpen(g, iv.lo, iv.hi) == 1)
    return 0;  // p shares this very root with q
  // Shrink until p has no root inside, then sample anywhere.
  while (sturmCountOpen(ps, iv.lo, iv.hi) > 0) {
    Rat mid = (iv.lo + iv.hi) / 2;
    Rat val = upEval(q, mid);
    if (val == 0) {
      iv = {mid, mid};
      return ratSign(upEval(p, mid));
    }
    if (ratSign(upEval(q, iv.lo)) * ratSign(val) < 0) iv.hi = mid;
    else iv.lo = mid;
    if (!cleanEndpoint(p, q, iv, true) || !cleanEndpoint(p, q, iv, false))
      return ratSign(upEval(p, iv.lo));
  }
  Rat mid = (iv.lo + iv.hi) / 2;
  return ratSign(upEval(p, mid));
}

}  // namespace qdl
