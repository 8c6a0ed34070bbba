#include "qdl/state.hpp"

#include <algorithm>
#include <sstream>

namespace qdl {

Value State::lookup(int fn, const std::vector<Value>& args) const {
  auto it = funcs.find(fn);
  if (it == funcs.end()) fail(Err::SolveFailed, "uninterpreted function in state");
  auto e = it->second.entries.find(args);
  return e != it->second.entries.end() ? e->second : it->second.def;
}

void State::update(int fn, const std::vector<Value>& args, Value v) {
  funcs[fn].entries[args] = std::move(v);
}

std::vector<Value> State::domain(int sort) const {
  auto it = domainSize.find(sort);
  int n = it == domainSize.end() ? 0 : it->second;
  std::vector<Value> out;
  out.reserve((size_t)n);
  for (int i = 0; i < n; ++i) out.push_back(Value::object(sort, i));
  return out;
}

std::vector<Value> State::visible(int sort) const {
  auto it = nextFresh.find(sort);
  int n = it == nextFresh.end() ? 0 : it->second;
  std::vector<Value> out;
  out.reserve((size_t)n);
  for (int i = 0; i < n; ++i) out.push_back(Value::object(sort, i));
  return out;
}

std::string valueStr(const SymbolTable& syms, const Value& v) {
  if (v.isReal()) return ratStr(v.r);
  return syms.sortNames[(size_t)v.sort] + "#" + std::to_string(v.obj);
}

std::string State::key() const {
  std::ostringstream os;
  for (const auto& [s, n] : domainSize) os << 'd' << s << ':' << n << ';';
  for (const auto& [s, n] : nextFresh) os << 'n' << s << ':' << n << ';';
  os << (taint ? "~;" : ";");
  for (const auto& [fn, tab] : funcs) {
    os << 'f' << fn << '=';
    os << (tab.def.isReal() ? ratStr(tab.def.r) : "o" + std::to_string(tab.def.obj));
    for (const auto& [args, val] : tab.entries) {
      os << '(';
      for (const auto& a : args)
        os << (a.isReal() ? ratStr(a.r) : "o" + std::to_string(a.obj)) << ',';
      os << ")->" << (val.isReal() ? ratStr(val.r) : "o" + std::to_string(val.obj)) << ';';
    }
  }
  return os.str();
}

std::string stateStr(const SymbolTable& syms, const State& st) {
  std::ostringstream os;
  for (const auto& [sort, n] : st.domainSize)
    os << "sort " << syms.sortNames[(size_t)sort] << ": " << n << " objects\n";
  std::vector<std::string> lines;
  for (const auto& [fn, tab] : st.funcs) {
    const auto& d = syms.funcs[(size_t)fn];
    std::string name = d.isEps ? "eps" : d.name;
    if (d.argSorts.empty()) {
      lines.push_back(name + " = " + valueStr(syms, tab.def));
      continue;
    }
    for (const auto& [args, val] : tab.entries) {
      std::string s = name + "(";
      for (size_t i = 0; i < args.size(); ++i) {
        if (i) s += ", ";
        s += valueStr(syms, args[i]);
      }
      lines.push_back(s + ") = " + valueStr(syms, val));
    }
    lines.push_back(name + "(...) = " + valueStr(syms, tab.def));
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines) os << l << '\n';
  return os.str();
}

namespace {

Value randomValue(const SymbolTable& syms, int sort, std::mt19937_64& rng,
                  const State& st) {
  if (sort == SymbolTable::kRealSort) {
    std::uniform_int_distribution<int> num(-8, 8);
    std::uniform_int_distribution<int> denPick(0, 2);
    int dens[3] = {1, 2, 4};
    Rat r(num(rng), dens[denPick(rng)]);
    r.canonicalize();
    return Value::real(r);
  }
  int n = st.domainSize.at(sort);
  std::uniform_int_distribution<int> pick(0, n - 1);
  return Value::object(sort, pick(rng));
}

// All argument tuples over object domains; returns false if any slot is real.
bool enumerateArgs(const State& st, const std::vector<int>& argSorts,
                   std::vector<std::vector<Value>>& out) {
  for (int s : argSorts)
    if (s == SymbolTable::kRealSort) return false;
  std::vector<std::vector<Value>> acc{{}};
  for (int s : argSorts) {
    auto dom = st.domain(s);
    std::vector<std::vector<Value>> next;
    for (const auto& prefix : acc)
      for (const auto& v : dom) {
        auto row = prefix;
        row.push_back(v);
        next.push_back(std::move(row));
      }
    acc = std::move(next);
  }
  out = std::move(acc);
  return true;
}

}  // namespace

State randomState(const SymbolTable& syms, std::mt19937_64& rng, const SimOpts& opts) {
  State st;
  for (size_t s = 1; s < syms.sortNames.size(); ++s) {
    st.domainSize[(int)s] = opts.carrierSize + opts.poolSize;
    st.nextFresh[(int)s] = opts.carrierSize;
  }
  for (size_t fn = 0; fn < syms.funcs.size(); ++fn) {
    const auto& d = syms.funcs[fn];
    FuncTable tab;
    if (d.isEps) {
      tab.def = Value::real(Rat(0));
      int sort = d.argSorts[0];
      for (int i = 0; i < opts.carrierSize; ++i)
        tab.entries[{Value::object(sort, i)}] = Value::real(Rat(1));
      st.funcs[(int)fn] = std::move(tab);
      continue;
    }
    tab.def = randomValue(syms, d.retSort, rng, st);
    std::vector<std::vector<Value>> tuples;
    if (!d.argSorts.empty() && enumerateArgs(st, d.argSorts, tuples))
      for (auto& args : tuples)
        tab.entries[args] = randomValue(syms, d.retSort, rng, st);
    st.funcs[(int)fn] = std::move(tab);
  }
  return st;
}

}  // namespace qdl
