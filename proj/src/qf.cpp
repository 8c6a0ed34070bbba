#include "qdl/qf.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace qdl {

namespace {

QFP mkLeaf(QK k) {
  auto f = std::make_shared<QF>();
  f->kind = k;
  return f;
}
const QFP kTru = mkLeaf(QK::Tru);
const QFP kFls = mkLeaf(QK::Fls);

// Sign sets as bitmasks: 1 = negative, 2 = zero, 4 = positive.
int atomMask(QRel r, bool posSign) {
  switch (r) {
    case QRel::Eq: return 2;
    case QRel::Ne: return 5;
    case QRel::Ge: return posSign ? 6 : 3;
    case QRel::Gt: return posSign ? 4 : 1;
  }
  return 7;
}

QFP maskToAtom(int mask, const Poly& q) {
  auto raw = [](QRel r, const Poly& p) {
    auto f = std::make_shared<QF>();
    f->kind = QK::Atom;
    f->rel = r;
    f->p = p;
    return QFP(f);
  };
  switch (mask) {
    case 0: return kFls;
    case 7: return kTru;
    case 2: return raw(QRel::Eq, q);
    case 5: return raw(QRel::Ne, q);
    case 6: return raw(QRel::Ge, q);
    case 3: return raw(QRel::Ge, -q);
    case 4: return raw(QRel::Gt, q);
    case 1: return raw(QRel::Gt, -q);
  }
  return kTru;
}

}  // namespace

QFP qfTrue() { return kTru; }
QFP qfFalse() { return kFls; }
QFP qfBool(bool b) { return b ? kTru : kFls; }

QFP qfAtom(QRel r, const Poly& p) {
  if (p.isConst()) {
    int s = ratSign(p.constVal());
    switch (r) {
      case QRel::Eq: return qfBool(s == 0);
      case QRel::Ne: return qfBool(s != 0);
      case QRel::Ge: return qfBool(s >= 0);
      case QRel::Gt: return qfBool(s > 0);
    }
  }
  auto f = std::make_shared<QF>();
  f->kind = QK::Atom;
  f->rel = r;
  f->p = p.scaledByContent();
  return f;
}

QFP qfOLit(int id, bool neg) {
  auto f = std::make_shared<QF>();
  f->kind = QK::OLit;
  f->olit = id;
  f->oneg = neg;
  return f;
}

std::string qfKey(const QFP& f) {
  switch (f->kind) {
    case QK::Tru: return "T";
    case QK::Fls: return "F";
    case QK::Atom: {
      const char* r = f->rel == QRel::Eq   ? "="
                      : f->rel == QRel::Ne ? "!"
                      : f->rel == QRel::Ge ? ">="
                                           : ">";
      return std::string("A") + r + f->p.str();
    }
    case QK::OLit: return std::string(f->oneg ? "O!" : "O=") + std::to_string(f->olit);
    case QK::And:
    case QK::Or: {
      std::string s = f->kind == QK::And ? "&(" : "|(";
      for (const auto& k : f->kids) s += qfKey(k) + ",";
      return s + ")";
    }
  }
  return "?";
}

namespace {

QFP junction(QK kind, std::vector<QFP> kids) {
  const bool isAnd = kind == QK::And;
  const QFP unit = isAnd ? kTru : kFls;
  const QFP zero = isAnd ? kFls : kTru;

  // Flatten, drop units, short-circuit on the absorbing element.
  std::vector<QFP> flat;
  for (auto& k : kids) {
    if (k->kind == kind) {
      for (const auto& g : k->kids) flat.push_back(g);
    } else if (k->kind == zero->kind) {
      return zero;
    } else if (k->kind != unit->kind) {
      flat.push_back(k);
    }
  }

  // Merge atoms on the same canonical polynomial via sign sets, and object
  // literals by id.
  std::map<std::string, std::pair<Poly, int>> signs;  // key -> (canonical, mask)
  std::map<int, int> omask;                           // olit id -> bits: 1 eq, 2 ne
  std::vector<QFP> rest;
  std::vector<std::string> restKeys;
  for (const auto& k : flat) {
    if (k->kind == QK::Atom) {
      Poly q = k->p.canonicalPositive();
      bool pos = k->p.terms == q.terms;
      int m = atomMask(k->rel, pos);
      std::string key = q.str();
      auto it = signs.find(key);
      if (it == signs.end()) signs.emplace(key, std::make_pair(q, m));
      else it->second.second = isAnd ? (it->second.second & m) : (it->second.second | m);
    } else if (k->kind == QK::OLit) {
      omask[k->olit] |= k->oneg ? 2 : 1;
    } else {
      std::string key = qfKey(k);
      if (std::find(restKeys.begin(), restKeys.end(), key) == restKeys.end()) {
        restKeys.push_back(key);
        rest.push_back(k);
      }
    }
  }

  std::vector<QFP> out;
  for (const auto& [key, qm] : signs) {
    QFP a = maskToAtom(qm.second, qm.first);
    if (a->kind == zero->kind) return zero;
    if (a->kind != unit->kind) out.push_back(a);
  }
  for (const auto& [id, m] : omask) {
    if (m == 3) return zero;  // x=y together with x!=y
    out.push_back(qfOLit(id, m == 2));
  }
  for (auto& k : rest) out.push_back(std::move(k));

  if (out.empty()) return unit;
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end(),
            [](const QFP& a, const QFP& b) { return qfKey(a) < qfKey(b); });
  auto f = std::make_shared<QF>();
  f->kind = kind;
  f->kids = std::move(out);
  return f;
}

}  // namespace

QFP qfAnd(std::vector<QFP> kids) { return junction(QK::And, std::move(kids)); }
QFP qfOr(std::vector<QFP> kids) { return junction(QK::Or, std::move(kids)); }

QFP qfNot(const QFP& f) {
  switch (f->kind) {
    case QK::Tru: return kFls;
    case QK::Fls: return kTru;
    case QK::Atom:
      switch (f->rel) {
        case QRel::Eq: return qfAtom(QRel::Ne, f->p);
        case QRel::Ne: return qfAtom(QRel::Eq, f->p);
        case QRel::Ge: return qfAtom(QRel::Gt, -f->p);
        case QRel::Gt: return qfAtom(QRel::Ge, -f->p);
      }
      return kTru;
    case QK::OLit: return qfOLit(f->olit, !f->oneg);
    case QK::And:
    case QK::Or: {
      std::vector<QFP> kids;
      kids.reserve(f->kids.size());
      for (const auto& k : f->kids) kids.push_back(qfNot(k));
      return f->kind == QK::And ? qfOr(std::move(kids)) : qfAnd(std::move(kids));
    }
  }
  return kTru;
}

QFP qfMapAtoms(const QFP& f, const std::function<QFP(QRel, const Poly&)>& atomMap) {
  switch (f->kind) {
    case QK::Atom: return atomMap(f->rel, f->p);
    case QK::And:
    case QK::Or: {
      std::vector<QFP> kids;
      kids.reserve(f->kids.size());
      for (const auto& k : f->kids) kids.push_back(qfMapAtoms(k, atomMap));
      return f->kind == QK::And ? qfAnd(std::move(kids)) : qfOr(std::move(kids));
    }
    default: return f;
  }
}

bool qfEval(const QFP& f, const std::map<int, Rat>& asg,
            const std::function<bool(int, bool)>* olitVal) {
  switch (f->kind) {
    case QK::Tru: return true;
    case QK::Fls: return false;
    case QK::Atom: {
      int s = ratSign(f->p.eval(asg));
      switch (f->rel) {
        case QRel::Eq: return s == 0;
        case QRel::Ne: return s != 0;
        case QRel::Ge: return s >= 0;
        case QRel::Gt: return s > 0;
      }
      return false;
    }
    case QK::OLit:
      if (!olitVal) fail(Err::SolveFailed, "object literal in a pure-real context");
      return (*olitVal)(f->olit, f->oneg);
    case QK::And:
      for (const auto& k : f->kids)
        if (!qfEval(k, asg, olitVal)) return false;
      return true;
    case QK::Or:
      for (const auto& k : f->kids)
        if (qfEval(k, asg, olitVal)) return true;
      return false;
  }
  return false;
}

void qfCollectVars(const QFP& f, std::set<int>& out) {
  if (f->kind == QK::Atom) f->p.collectVars(out);
  for (const auto& k : f->kids) qfCollectVars(k, out);
}

bool qfMentions(const QFP& f, int var) {
  if (f->kind == QK::Atom) return f->p.mentions(var);
  for (const auto& k : f->kids)
    if (qfMentions(k, var)) return true;
  return false;
}

bool qfHasOLit(const QFP& f) {
  if (f->kind == QK::OLit) return true;
  for (const auto& k : f->kids)
    if (qfHasOLit(k)) return true;
  return false;
}

}  // namespace qdl
