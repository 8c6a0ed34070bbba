#pragma once
#include <functional>
#include <memory>

#include "qdl/poly.hpp"

namespace qdl {

// Quantifier-free real-arithmetic formulas in negation normal form.
// Atoms compare a polynomial against zero; object-sort (in)equalities over
// ground terms travel through elimination untouched as opaque literals
// identified by an id the caller maintains.

enum class QRel { Eq, Ne, Ge, Gt };
enum class QK { Tru, Fls, Atom, OLit, And, Or };

struct QF;
using QFP = std::shared_ptr<const QF>;

struct QF {
  QK kind;
  QRel rel = QRel::Eq;  // Atom
  Poly p;               // Atom: p rel 0
  int olit = -1;        // OLit id
  bool oneg = false;    // OLit negation
  std::vector<QFP> kids;
};

QFP qfTrue();
QFP qfFalse();
QFP qfBool(bool b);
// Constant-folds and divides by the positive content.
QFP qfAtom(QRel r, const Poly& p);
QFP qfOLit(int id, bool neg);
// Flatten + dedupe + per-polynomial sign-set merging + short circuits.
QFP qfAnd(std::vector<QFP> kids);
QFP qfOr(std::vector<QFP> kids);
QFP qfNot(const QFP& f);

// Rebuilds f bottom-up, replacing every Atom through atomMap (which may
// return an arbitrary QF). OLits and constants pass through.
QFP qfMapAtoms(const QFP& f, const std::function<QFP(QRel, const Poly&)>& atomMap);

bool qfEval(const QFP& f, const std::map<int, Rat>& asg,
            const std::function<bool(int, bool)>* olitVal = nullptr);
void qfCollectVars(const QFP& f, std::set<int>& out);
bool qfMentions(const QFP& f, int var);
bool qfHasOLit(const QFP& f);
std::string qfKey(const QFP& f);  // canonical structural key

}  // namespace qdl
