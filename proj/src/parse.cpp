#include "qdl/parse.hpp"

#include <cctype>
#include <cstring>
#include <optional>

namespace qdl {

namespace {

enum class TokK { Id, Num, Punct, End };

struct Tok {
  TokK kind;
  std::string text;
  Rat num;
  uint32_t lo = 0, hi = 0;
};

const char* kPuncts[] = {"<->", ":=", "++", "->", "<=", ">=", "!=", "(", ")",
                         "{",   "}",  "[",  "]",  "<",  ">",  ",",  ";", ".",
                         "?",   "!",  "*",  "+",  "-",  "/",  "^",  "=", "&",
                         "|",   ":",  "'"};

std::vector<Tok> lex(const std::string& src, bool allowDollar) {
  std::vector<Tok> out;
  size_t i = 0, n = src.size();
  auto isIdStart = [&](char c) {
    return std::isalpha((unsigned char)c) || c == '_' || (allowDollar && c == '$');
  };
  auto isIdChar = [&](char c) {
    return std::isalnum((unsigned char)c) || c == '_' || (allowDollar && c == '$');
  };
  while (i < n) {
    char c = src[i];
    if (std::isspace((unsigned char)c)) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      size_t j = src.find("*/", i + 2);
      if (j == std::string::npos) fail(Err::SyntaxError, "unterminated comment", {(uint32_t)i, (uint32_t)n});
      i = j + 2;
      continue;
    }
    uint32_t lo = (uint32_t)i;
    if (std::isdigit((unsigned char)c)) {
      size_t j = i;
      while (j < n && std::isdigit((unsigned char)src[j])) ++j;
      if (j < n && src[j] == '.' && j + 1 < n && std::isdigit((unsigned char)src[j + 1])) {
        ++j;
        while (j < n && std::isdigit((unsigned char)src[j])) ++j;
      }
      std::string text = src.substr(i, j - i);
      out.push_back({TokK::Num, text, ratParse(text), lo, (uint32_t)j});
      i = j;
      continue;
    }
    if (isIdStart(c)) {
      size_t j = i;
      while (j < n && isIdChar(src[j])) ++j;
      out.push_back({TokK::Id, src.substr(i, j - i), Rat(0), lo, (uint32_t)j});
      i = j;
      continue;
    }
    bool matched = false;
    for (const char* p : kPuncts) {
      size_t len = std::strlen(p);
      if (src.compare(i, len, p) == 0) {
        out.push_back({TokK::Punct, p, Rat(0), lo, (uint32_t)(i + len)});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched)
      fail(Err::SyntaxError, std::string("unexpected character '") + c + "'", {lo, lo + 1});
  }
  out.push_back({TokK::End, "", Rat(0), (uint32_t)n, (uint32_t)n});
  return out;
}

struct Parser {
  SymbolTable& syms;
  std::vector<Tok> toks;
  size_t pos = 0;

  const Tok& peek(int k = 0) const {
    size_t j = pos + k;
    return j < toks.size() ? toks[j] : toks.back();
  }
  const Tok& next() { return toks[pos < toks.size() - 1 ? pos++ : pos]; }
  bool isP(const char* p) const { return peek().kind == TokK::Punct && peek().text == p; }
  bool isId(const char* w) const { return peek().kind == TokK::Id && peek().text == w; }
  bool eatP(const char* p) {
    if (!isP(p)) return false;
    ++pos;
    return true;
  }
  void expectP(const char* p) {
    if (!eatP(p)) fail(Err::SyntaxError, std::string("expected '") + p + "'", peek().lo == peek().hi ? Span{peek().lo, peek().lo + 1} : Span{peek().lo, peek().hi});
  }
  std::string expectIdent() {
    if (peek().kind != TokK::Id) fail(Err::SyntaxError, "expected identifier", {peek().lo, peek().hi});
    return next().text;
  }
  [[noreturn]] void err(const std::string& m) { fail(Err::SyntaxError, m, {peek().lo, peek().hi}); }

  bool isQuantWord() const {
    return isId("forall") || isId("exists") || isId("forallE") || isId("existsE");
  }

  // --- terms ---------------------------------------------------------------

  TermP term() { return addsub(); }

  TermP addsub() {
    TermP t = muldiv();
    for (;;) {
      Span sp{peek().lo, peek().hi};
      if (eatP("+")) t = mkBin(TK::Add, t, muldiv(), sp);
      else if (eatP("-")) t = mkBin(TK::Sub, t, muldiv(), sp);
      else return t;
    }
  }
  TermP muldiv() {
    TermP t = unaryT();
    for (;;) {
      Span sp{peek().lo, peek().hi};
      if (eatP("*")) t = mkBin(TK::Mul, t, unaryT(), sp);
      else if (eatP("/")) {
        TermP d = unaryT();
        // rational literals: numeral/numeral folds to one exact constant
        if (t->kind == TK::Num && d->kind == TK::Num) {
          if (d->num == 0) fail(Err::SyntaxError, "division by zero in constant", sp);
          t = mkNum(t->num / d->num, {t->span.lo, d->span.hi});
        } else {
          t = mkBin(TK::Div, t, d, sp);
        }
      } else {
        return t;
      }
    }
  }
  TermP unaryT() {
    Span sp{peek().lo, peek().hi};
    if (eatP("-")) {
      TermP t = unaryT();
      if (t->kind == TK::Num) return mkNum(-t->num, {sp.lo, t->span.hi});
      return mkNeg(t, sp);
    }
    return powerT();
  }
  TermP powerT() {
    TermP t = atomT();
    if (eatP("^")) {
      if (peek().kind != TokK::Num || peek().num.get_den() != 1)
        err("exponent must be an integer literal");
      long e = (long)peek().num.get_num().get_si();
      if (e < 0) err("negative exponents are not supported");
      next();
      return mkPow(t, (int)e, t->span);
    }
    return t;
  }

  TermP atomT() {
    const Tok& t = peek();
    Span sp{t.lo, t.hi};
    if (t.kind == TokK::Num) {
      next();
      return mkNum(t.num, sp);
    }
    if (isId("if")) {
      next();
      FormulaP c = formula();
      if (formulaHasModality(c)) fail(Err::TypeError, "conditional guard must not contain modalities", sp);
      if (!isId("then")) err("expected 'then'");
      next();
      TermP a = term();
      if (!isId("else")) err("expected 'else'");
      next();
      TermP b = term();
      return mkCond(c, a, b, sp);
    }
    if (eatP("(")) {
      TermP inner = term();
      expectP(")");
      return inner;
    }
    if (t.kind == TokK::Id) {
      std::string name = next().text;
      if (isP("(")) {
        next();
        std::vector<TermP> args;
        if (!isP(")")) {
          args.push_back(term());
          while (eatP(",")) args.push_back(term());
        }
        expectP(")");
        int fn = resolveFunc(name, args, sp);  // resolve before args are moved from
        return mkApp(fn, std::move(args), sp);
      }
      // bare identifier: variable if declared, else 0-ary function
      auto vit = syms.varIx.find(name);
      if (vit != syms.varIx.end()) return mkVar(vit->second, sp);
      auto fit = syms.funcIx.find(name);
      if (fit != syms.funcIx.end()) {
        if (!syms.funcs[fit->second].argSorts.empty())
          fail(Err::TypeError, name + " expects arguments", sp);
        return mkApp(fit->second, {}, sp);
      }
      fail(Err::SyntaxError, "unknown symbol " + name, sp);
    }
    err("expected a term");
  }

  int resolveFunc(const std::string& name, const std::vector<TermP>& args, Span sp) {
    if (name == "eps") {
      if (args.size() != 1)
        fail(Err::TypeError, "eps takes exactly one argument", sp);
      int s = sortOfTerm(syms, args[0]);
      if (!syms.isObjectSort(s))
        fail(Err::TypeError, "eps argument must have an object sort", sp);
      return syms.epsOf(s);
    }
    auto it = syms.funcIx.find(name);
    if (it == syms.funcIx.end()) fail(Err::SyntaxError, "unknown function " + name, sp);
    return it->second;
  }

  // --- formulas --------------------------------------------------------------

  FormulaP formula() { return equivF(); }

  FormulaP equivF() {
    FormulaP a = implyF();
    Span sp{peek().lo, peek().hi};
    if (eatP("<->")) return mkBinF(FK::Equiv, a, equivF(), sp);
    return a;
  }
  FormulaP implyF() {
    FormulaP a = orF();
    Span sp{peek().lo, peek().hi};
    if (eatP("->")) return mkBinF(FK::Imply, a, implyF(), sp);
    return a;
  }
  FormulaP orF() {
    FormulaP a = andF();
    for (;;) {
      Span sp{peek().lo, peek().hi};
      if (eatP("|")) a = mkBinF(FK::Or, a, andF(), sp);
      else return a;
    }
  }
  FormulaP andF() {
    FormulaP a = unaryF();
    for (;;) {
      Span sp{peek().lo, peek().hi};
      if (eatP("&")) a = mkBinF(FK::And, a, unaryF(), sp);
      else return a;
    }
  }

  FormulaP unaryF() {
    Span sp{peek().lo, peek().hi};
    if (eatP("!")) return mkNot(unaryF(), sp);
    if (isQuantWord()) return quantF();
    if (eatP("[")) {
      ProgramP p = program();
      expectP("]");
      return mkModal(FK::Box, p, unaryF(), sp);
    }
    if (eatP("<")) {
      ProgramP p = program();
      expectP(">");
      return mkModal(FK::Diamond, p, unaryF(), sp);
    }
    return atomF();
  }

  FormulaP quantF() {
    Span sp{peek().lo, peek().hi};
    std::string word = next().text;
    bool isAll = word == "forall" || word == "forallE";
    bool actual = word == "forallE" || word == "existsE";
    int sort = syms.sortOf(expectIdent());
    if (actual && !syms.isObjectSort(sort))
      fail(Err::TypeError, word + " requires an object sort", sp);
    std::vector<int> binders;
    binders.push_back(syms.addVar(expectIdent(), sort));
    while (eatP(",")) binders.push_back(syms.addVar(expectIdent(), sort));
    expectP(".");
    FormulaP body = formula();
    for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
      int v = *it;
      FormulaP b = body;
      if (actual) {
        FormulaP created =
            mkCmp(Rel::Eq, mkApp(syms.epsOf(sort), {mkVar(v, sp)}, sp), mkNum(Rat(1), sp), sp);
        b = mkBinF(isAll ? FK::Imply : FK::And, created, b, sp);
      }
      body = mkQuant(isAll ? FK::Forall : FK::Exists, v, sort, b, sp);
    }
    return body;
  }

  FormulaP atomF() {
    Span sp{peek().lo, peek().hi};
    if (isId("true")) {
      next();
      return mkBoolConst(true, sp);
    }
    if (isId("false")) {
      next();
      return mkBoolConst(false, sp);
    }
    // Try term-relop-term, falling back to a parenthesized formula.
    size_t save = pos;
    std::optional<QdlError> attempt;
    try {
      TermP a = term();
      Rel r;
      if (eatP("=")) r = Rel::Eq;
      else if (eatP("!=")) r = Rel::Ne;
      else if (eatP(">=")) r = Rel::Ge;
      else if (eatP(">")) r = Rel::Gt;
      else if (eatP("<=")) r = Rel::Le;
      else if (eatP("<")) r = Rel::Lt;
      else err("expected a relation");
      TermP b = term();
      checkCmpSorts(r, a, b, sp);
      return mkCmp(r, a, b, sp);
    } catch (const QdlError& e) {
      if (e.code != Err::SyntaxError) throw;  // sort errors are real errors
      attempt = e;
      pos = save;
    }
    if (eatP("(")) {
      FormulaP f = formula();
      expectP(")");
      return f;
    }
    // Neither alternative applies; report whichever diagnosis got further.
    if (attempt && attempt->span.lo > peek().lo) throw *attempt;
    err("expected a formula");
  }

  void checkCmpSorts(Rel r, const TermP& a, const TermP& b, Span sp) {
    int sa = sortOfTerm(syms, a), sb = sortOfTerm(syms, b);
    if (sa != sb) fail(Err::TypeError, "comparison between different sorts", sp);
    if (syms.isObjectSort(sa) && r != Rel::Eq && r != Rel::Ne)
      fail(Err::TypeError, "object sorts admit only = and !=", sp);
  }

  // --- programs --------------------------------------------------------------

  ProgramP program() { return choiceP(); }

  ProgramP choiceP() {
    ProgramP a = seqP();
    for (;;) {
      Span sp{peek().lo, peek().hi};
      if (eatP("++")) a = mkBinP(PK::Choice, a, seqP(), sp);
      else return a;
    }
  }
  ProgramP seqP() {
    ProgramP a = starP();
    for (;;) {
      Span sp{peek().lo, peek().hi};
      if (eatP(";")) a = mkBinP(PK::Seq, a, starP(), sp);
      else return a;
    }
  }
  ProgramP starP() {
    ProgramP a = primaryP();
    while (isP("*")) {
      Span sp{peek().lo, peek().hi};
      next();
      a = mkStar(a, sp);
    }
    return a;
  }

  AssignItem assignItemP() {
    Span sp{peek().lo, peek().hi};
    std::string name = expectIdent();
    std::vector<TermP> args;
    if (eatP("(")) {
      if (!isP(")")) {
        args.push_back(term());
        while (eatP(",")) args.push_back(term());
      }
      expectP(")");
    }
    int fn = resolveFunc(name, args, sp);
    expectP(":=");
    if (isId("new")) err("'new' is not valid in an assignment list");
    TermP rhs = term();
    checkAssignSorts(fn, args, rhs, sp);
    return {fn, std::move(args), rhs};
  }

  void checkAssignSorts(int fn, const std::vector<TermP>& args, const TermP& rhs, Span sp) {
    const auto& d = syms.funcs[fn];
    if (args.size() != d.argSorts.size())
      fail(Err::TypeError, d.name + ": wrong number of arguments", sp);
    for (size_t i = 0; i < args.size(); ++i)
      if (sortOfTerm(syms, args[i]) != d.argSorts[i])
        fail(Err::TypeError, d.name + ": argument sort mismatch", sp);
    if (sortOfTerm(syms, rhs) != d.retSort)
      fail(Err::TypeError, d.name + ": assigned value has the wrong sort", sp);
  }

  OdeItem odeItemP(bool actual, int qvar, int qsort, std::vector<OdeItem>& extra) {
    Span sp{peek().lo, peek().hi};
    std::string name = expectIdent();
    std::vector<TermP> args;
    if (eatP("(")) {
      if (!isP(")")) {
        args.push_back(term());
        while (eatP(",")) args.push_back(term());
      }
      expectP(")");
    }
    int fn = resolveFunc(name, args, sp);
    expectP("'");
    bool second = eatP("'");
    expectP("=");
    TermP rhs = term();
    if (syms.funcs[fn].retSort != SymbolTable::kRealSort)
      fail(Err::TypeError, "only real-valued functions can evolve", sp);
    if (sortOfTerm(syms, rhs) != SymbolTable::kRealSort)
      fail(Err::TypeError, "slope must be real-valued", sp);
    auto mask = [&](TermP slope) -> TermP {
      if (!actual) return slope;
      TermP e = mkApp(syms.epsOf(qsort), {mkVar(qvar, sp)}, sp);
      return mkBin(TK::Mul, e, slope, sp);
    };
    if (second) {
      // x(s)'' = θ expands through the declared companion velocity v_<x>.
      auto it = syms.funcIx.find("v_" + name);
      if (it == syms.funcIx.end())
        fail(Err::TypeError, "x'' needs a declared companion function v_" + name, sp);
      int vfn = it->second;
      if (syms.funcs[vfn].argSorts != syms.funcs[fn].argSorts ||
          syms.funcs[vfn].retSort != SymbolTable::kRealSort)
        fail(Err::TypeError, "v_" + name + " must have the same signature as " + name, sp);
      extra.push_back({vfn, args, mask(rhs)});
      return {fn, args, mask(mkApp(vfn, args, sp))};
    }
    return {fn, std::move(args), mask(rhs)};
  }

  ProgramP odeGroupP(bool actual, int qvar, int qsort, Span sp) {
    expectP("{");
    std::vector<OdeItem> odes, extra;
    odes.push_back(odeItemP(actual, qvar, qsort, extra));
    while (eatP(",")) odes.push_back(odeItemP(actual, qvar, qsort, extra));
    for (auto& e : extra) odes.push_back(std::move(e));
    FormulaP domain = mkBoolConst(true, sp);
    if (eatP("&")) {
      domain = formula();
      if (formulaHasModality(domain))
        fail(Err::TypeError, "evolution domain must not contain modalities", sp);
      if (actual) {
        FormulaP created = mkCmp(
            Rel::Eq, mkApp(syms.epsOf(qsort), {mkVar(qvar, sp)}, sp), mkNum(Rat(1), sp), sp);
        domain = mkBinF(FK::Imply, created, domain, sp);
      }
    }
    expectP("}");
    return mkQOde(qvar, qsort, std::move(odes), domain, sp);
  }

  ProgramP primaryP() {
    Span sp{peek().lo, peek().hi};
    if (eatP("?")) {
      FormulaP f = unaryF();
      return mkTest(f, sp);
    }
    if (isQuantWord()) {
      std::string word = next().text;
      if (word == "exists" || word == "existsE")
        fail(Err::SyntaxError, "programs quantify universally", sp);
      bool actual = word == "forallE";
      int sort = syms.sortOf(expectIdent());
      if (!syms.isObjectSort(sort))
        fail(Err::TypeError, "program quantifiers range over object sorts", sp);
      int qvar = syms.addVar(expectIdent(), sort);
      expectP(".");
      if (isQuantWord())
        fail(Err::UnsupportedFeature,
             "nested program quantifiers are not supported; use one block", sp);
      if (isP("{")) return odeGroupP(actual, qvar, sort, sp);
      std::vector<AssignItem> items;
      if (eatP("(")) {
        items.push_back(assignItemP());
        while (eatP(",")) items.push_back(assignItemP());
        expectP(")");
      } else {
        items.push_back(assignItemP());
      }
      if (actual) {
        // forallE C i. f(s) := θ  updates only created members:
        // the rest keep their old value.
        TermP created = mkApp(syms.epsOf(sort), {mkVar(qvar, sp)}, sp);
        FormulaP guard = mkCmp(Rel::Eq, created, mkNum(Rat(1), sp), sp);
        for (auto& it : items)
          it.rhs = mkCond(guard, it.rhs, mkApp(it.fn, it.args, sp), sp);
      }
      return mkQAssign(qvar, sort, std::move(items), sp);
    }
    if (isP("{")) return odeGroupP(false, -1, -1, sp);
    if (isP("(")) {
      // Either a grouped program or an unquantified assignment list.
      size_t save = pos;
      next();
      try {
        std::vector<AssignItem> items;
        items.push_back(assignItemP());
        if (isP(",")) {
          while (eatP(",")) items.push_back(assignItemP());
          expectP(")");
          return mkQAssign(-1, -1, std::move(items), sp);
        }
        if (eatP(")") && !isP("*")) return mkQAssign(-1, -1, std::move(items), sp);
      } catch (const QdlError& e) {
        if (e.code != Err::SyntaxError) throw;  // sort errors are real errors
      }
      pos = save;
      expectP("(");
      ProgramP p = program();
      expectP(")");
      return p;
    }
    if (peek().kind == TokK::Id) {
      // single assignment or new
      std::string name = expectIdent();
      std::vector<TermP> args;
      if (eatP("(")) {
        if (!isP(")")) {
          args.push_back(term());
          while (eatP(",")) args.push_back(term());
        }
        expectP(")");
      }
      int fn = resolveFunc(name, args, sp);
      expectP(":=");
      if (isId("new")) {
        next();
        int sort = syms.sortOf(expectIdent());
        if (!syms.isObjectSort(sort))
          fail(Err::TypeError, "new requires an object sort", sp);
        if (!args.empty())
          fail(Err::UnsupportedFeature, "new target must be a 0-ary function", sp);
        if (syms.funcs[fn].retSort != sort)
          fail(Err::TypeError, name + " does not have sort " + syms.sortNames[sort], sp);
        return mkNew(fn, {}, sort, sp);
      }
      TermP rhs = term();
      checkAssignSorts(fn, args, rhs, sp);
      return mkQAssign(-1, -1, {{fn, std::move(args), rhs}}, sp);
    }
    err("expected a program");
  }

  // --- declarations ----------------------------------------------------------

  Problem problemFile(const std::string& src) {
    Problem prob;
    prob.source = src;
    for (;;) {
      if (isId("sort")) {
        next();
        std::string n = expectIdent();
        if (n == "eps" || n == "R") err("reserved name " + n);
        syms.addSort(n);
        expectP(";");
      } else if (isId("func")) {
        next();
        int ret = syms.sortOf(expectIdent());
        std::string n = expectIdent();
        if (n == "eps") err("eps is reserved");
        std::vector<int> argSorts;
        if (eatP("(")) {
          if (!isP(")")) {
            argSorts.push_back(syms.sortOf(expectIdent()));
            while (eatP(",")) argSorts.push_back(syms.sortOf(expectIdent()));
          }
          expectP(")");
        }
        syms.addFunc(n, std::move(argSorts), ret);
        expectP(";");
      } else if (isId("var")) {
        next();
        int sort = syms.sortOf(expectIdent());
        std::string n = expectIdent();
        if (n == "eps") err("eps is reserved");
        syms.addVar(n, sort);
        expectP(";");
      } else if (isId("invariant")) {
        next();
        size_t idx = prob.invariants.size();
        if (eatP("[")) {
          if (peek().kind != TokK::Num || peek().num.get_den() != 1) err("expected loop index");
          idx = (size_t)peek().num.get_num().get_ui();
          next();
          expectP("]");
        }
        expectP(":");
        FormulaP f = formula();
        expectP(";");
        if (prob.invariants.size() <= idx) prob.invariants.resize(idx + 1);
        prob.invariants[idx] = f;
      } else if (isId("variant")) {
        next();
        std::string vn = expectIdent();
        auto it = syms.varIx.find(vn);
        if (it == syms.varIx.end()) err("unknown variant variable " + vn);
        if (syms.vars[it->second].sort != SymbolTable::kRealSort)
          fail(Err::TypeError, "variant variable must be real", {peek().lo, peek().hi});
        expectP(":");
        FormulaP f = formula();
        expectP(";");
        prob.variants.emplace_back(it->second, f);
      } else if (isId("problem")) {
        next();
        expectP(":");
        prob.conjecture = formula();
        eatP(";");
        if (peek().kind != TokK::End) err("trailing input after problem");
        return prob;
      } else {
        err("expected a declaration or 'problem:'");
      }
    }
  }
};

}  // namespace

int sortOfTerm(const SymbolTable& syms, const TermP& t) {
  switch (t->kind) {
    case TK::Num: return SymbolTable::kRealSort;
    case TK::Var: return syms.vars[t->ref].sort;
    case TK::App: return syms.funcs[t->ref].retSort;
    case TK::Cond: return sortOfTerm(syms, t->args[0]);
    default: return SymbolTable::kRealSort;
  }
}

Problem parseProblem(const std::string& src) {
  auto symsPtr = std::make_shared<SymbolTable>();
  Parser p{*symsPtr, lex(src, /*allowDollar=*/false)};
  Problem prob = p.problemFile(src);
  prob.syms = symsPtr;
  typecheckProblem(prob);
  return prob;
}

TermP parseTermStr(SymbolTable& syms, const std::string& s, bool allowDollar) {
  Parser p{syms, lex(s, allowDollar)};
  TermP t = p.term();
  if (p.peek().kind != TokK::End) p.err("trailing input after term");
  return t;
}
FormulaP parseFormulaStr(SymbolTable& syms, const std::string& s, bool allowDollar) {
  Parser p{syms, lex(s, allowDollar)};
  FormulaP f = p.formula();
  if (p.peek().kind != TokK::End) p.err("trailing input after formula");
  typecheckFormula(syms, f);
  return f;
}
ProgramP parseProgramStr(SymbolTable& syms, const std::string& s, bool allowDollar) {
  Parser p{syms, lex(s, allowDollar)};
  ProgramP pr = p.program();
  if (p.peek().kind != TokK::End) p.err("trailing input after program");
  return pr;
}

}  // namespace qdl
