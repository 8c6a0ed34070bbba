#pragma once
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qdl/ast.hpp"

namespace qdl {

// A first-order value: a rational or a member of a finite object domain.
struct Value {
  int sort = 0;  // 0 = R
  Rat r;
  int obj = -1;

  static Value real(Rat x) { return {0, std::move(x), -1}; }
  static Value object(int sort, int idx) { return {sort, Rat(0), idx}; }
  bool isReal() const { return sort == 0; }
  bool operator==(const Value& o) const {
    return sort == o.sort && (isReal() ? r == o.r : obj == o.obj);
  }
  bool operator<(const Value& o) const {
    if (sort != o.sort) return sort < o.sort;
    return isReal() ? r < o.r : obj < o.obj;
  }
};

struct FuncTable {
  std::map<std::vector<Value>, Value> entries;
  Value def;  // value for argument tuples without an entry
};

// Finite interpretation + state. Object domains have a fixed enumerable size;
// indices below createdBase start out created (eps = 1), the rest form the
// allocation pool for `new`.
struct State {
  std::map<int, int> domainSize;  // object sort -> enumerable size
  std::map<int, int> nextFresh;   // object sort -> next pool index for new
  std::map<int, FuncTable> funcs;
  bool taint = false;                // some values came from numeric integration
  std::vector<std::string> trace;    // how this state was reached (not identity)

  Value lookup(int fn, const std::vector<Value>& args) const;
  void update(int fn, const std::vector<Value>& args, Value v);
  std::vector<Value> domain(int sort) const;   // every object id, incl. unallocated pool
  std::vector<Value> visible(int sort) const;  // what quantifiers range over: ids below nextFresh
  std::string key() const;  // canonical identity (ignores trace)
};

struct SimOpts {
  int carrierSize = 3;     // created members per object sort
  int poolSize = 2;        // allocatable spares per object sort
  int maxLoopUnroll = 8;   // star iterations explored
  int maxBranch = 2000;    // successor-state cap per modality
  double eqMargin = 1e-9;  // comparison margin once tainted
  std::vector<Rat> timeGrid = {Rat(0), Rat(1, 4), Rat(1, 2), Rat(1), Rat(2)};
  int odeSubsteps = 16;    // domain checks and RK4 steps per duration
};

// A random finite interpretation consistent with the declarations.
State randomState(const SymbolTable& syms, std::mt19937_64& rng, const SimOpts& opts);

std::string valueStr(const SymbolTable& syms, const Value& v);
std::string stateStr(const SymbolTable& syms, const State& st);  // canonical listing

}  // namespace qdl
