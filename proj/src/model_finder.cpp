// Finite model search in the style of MACE: clauses are flattened so that
// every function application occurs as f(x1..xn) = y over variables, then
// grounded over the domain {0..n-1} and handed to the SAT solver together
// with the functionality constraints of every function table.

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "elfe/provers.hpp"
#include "sat.hpp"

namespace elfe::provers {

using fol::Formula;
using fol::Term;
using K = Formula::Kind;

// --------------------------------------------------------- FiniteModel

namespace {

const FiniteModel::Table* findTable(const std::vector<FiniteModel::Table>& ts,
                                    const std::string& name, int arity) {
  for (const auto& t : ts)
    if (t.symbol == name && t.arity == arity) return &t;
  return nullptr;
}

std::size_t tupleIndex(std::span<const int> args, int n) {
  std::size_t idx = 0;
  for (int a : args) idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(a);
  return idx;
}

std::size_t power(int n, int k) {
  std::size_t r = 1;
  for (int i = 0; i < k; ++i) r *= static_cast<std::size_t>(n);
  return r;
}

}  // namespace

const FiniteModel::Table* FiniteModel::function(const std::string& name,
                                                int arity) const {
  return findTable(functions, name, arity);
}

const FiniteModel::Table* FiniteModel::predicate(const std::string& name,
                                                 int arity) const {
  return findTable(predicates, name, arity);
}

int FiniteModel::evaluate(const Term& t,
                          const std::map<std::string, int>& env) const {
  if (t.isVariable()) {
    auto it = env.find(t.name());
    if (it == env.end()) throw std::invalid_argument("unbound variable " + t.name());
    return it->second;
  }
  std::vector<int> args;
  for (const auto& a : t.args()) args.push_back(evaluate(a, env));
  const Table* tab = function(t.name(), static_cast<int>(args.size()));
  if (!tab) throw std::invalid_argument("no interpretation for " + t.name());
  return tab->values[tupleIndex(args, domainSize)];
}

bool FiniteModel::evaluate(const Formula& f, std::map<std::string, int>& env) const {
  switch (f.kind()) {
    case K::Top:
      return true;
    case K::Bottom:
      return false;
    case K::Predicate: {
      std::vector<int> args;
      for (const auto& a : f.terms()) args.push_back(evaluate(a, env));
      const Table* tab = predicate(f.symbol(), static_cast<int>(args.size()));
      if (!tab) throw std::invalid_argument("no interpretation for " + f.symbol());
      return tab->values[tupleIndex(args, domainSize)] != 0;
    }
    case K::Equals:
      return evaluate(f.terms()[0], env) == evaluate(f.terms()[1], env);
    case K::Not:
      return !evaluate(f.body(), env);
    case K::And:
      return evaluate(f.lhs(), env) && evaluate(f.rhs(), env);
    case K::Or:
      return evaluate(f.lhs(), env) || evaluate(f.rhs(), env);
    case K::Implies:
      return !evaluate(f.lhs(), env) || evaluate(f.rhs(), env);
    case K::Iff:
      return evaluate(f.lhs(), env) == evaluate(f.rhs(), env);
    case K::Forall:
    case K::Exists: {
      bool universal = f.kind() == K::Forall;
      auto saved = env.find(f.var()) == env.end()
                       ? std::optional<int>{}
                       : std::optional<int>{env[f.var()]};
      bool result = universal;
      for (int d = 0; d < domainSize; ++d) {
        env[f.var()] = d;
        if (evaluate(f.body(), env) != universal) {
          result = !universal;
          break;
        }
      }
      if (saved)
        env[f.var()] = *saved;
      else
        env.erase(f.var());
      return result;
    }
  }
  return false;
}

bool FiniteModel::evaluate(const Formula& f) const {
  std::map<std::string, int> env;
  return evaluate(f, env);
}

std::string FiniteModel::toString() const {
  auto elem = [](int d) { return "e" + std::to_string(d); };
  auto tuples = [&](int arity, const std::function<void(const std::vector<int>&, std::size_t)>& fn) {
    std::vector<int> args(static_cast<std::size_t>(arity), 0);
    std::size_t total = power(domainSize, arity);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (int k = arity - 1; k >= 0; --k) {
        args[static_cast<std::size_t>(k)] = static_cast<int>(rest % static_cast<std::size_t>(domainSize));
        rest /= static_cast<std::size_t>(domainSize);
      }
      fn(args, idx);
    }
  };
  auto app = [&](const std::string& s, const std::vector<int>& args) {
    std::string out = s;
    if (!args.empty()) {
      out += "(";
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ",";
        out += elem(args[i]);
      }
      out += ")";
    }
    return out;
  };
  std::ostringstream os;
  os << "fof(model, fi_domain, ! [X] : (";
  for (int d = 0; d < domainSize; ++d) os << (d ? " | " : "") << "X = " << elem(d);
  os << ")).\n";
  std::vector<std::string> parts;
  for (const auto& t : functions)
    tuples(t.arity, [&](const std::vector<int>& args, std::size_t idx) {
      parts.push_back(app(t.symbol, args) + " = " + elem(t.values[idx]));
    });
  if (!parts.empty()) {
    os << "fof(model, fi_functors, (";
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? " & " : "") << parts[i];
    os << ")).\n";
  }
  parts.clear();
  for (const auto& t : predicates)
    tuples(t.arity, [&](const std::vector<int>& args, std::size_t idx) {
      parts.push_back((t.values[idx] ? "" : "~") + app(t.symbol, args));
    });
  if (!parts.empty()) {
    os << "fof(model, fi_predicates, (";
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? " & " : "") << parts[i];
    os << ")).\n";
  }
  return os.str();
}

// -------------------------------------------------------------- search

namespace {

struct Symbol {
  std::string name;
  int arity;
};

// f(args) = value, p(args), or args[0] = args[1]; arguments are clause
// variables.
struct FlatLit {
  enum Kind { Pred, Fun, VarEq } kind;
  bool pos;
  int sym;
  std::vector<int> args;
  int value = -1;
};

struct FlatClause {
  std::vector<FlatLit> lits;
  int nvars = 0;
};

class Flattener {
 public:
  std::vector<Symbol> funcs, preds;
  std::vector<int> constantOrder;  // function ids of arity 0, first use first

  FlatClause flatten(const Clause& c) {
    FlatClause out;
    vars_.clear();
    defs_.clear();
    cur_ = &out;
    for (const auto& l : c.literals) {
      const Formula& a = l.atom;
      if (a.kind() == K::Equals) {
        const Term& s = a.terms()[0];
        const Term& t = a.terms()[1];
        if (!s.isVariable() || !t.isVariable()) {
          // Keep one application as f(x..) = y instead of a definition.
          const Term& app = s.isVariable() ? t : s;
          const Term& other = s.isVariable() ? s : t;
          FlatLit fl{FlatLit::Fun, l.positive, funcId(app), argVars(app), termVar(other)};
          out.lits.push_back(std::move(fl));
        } else {
          out.lits.push_back({FlatLit::VarEq, l.positive, -1, {termVar(s), termVar(t)}});
        }
      } else {
        std::vector<int> args;
        for (const auto& t : a.terms()) args.push_back(termVar(t));
        out.lits.push_back({FlatLit::Pred, l.positive,
                            predId(a.symbol(), static_cast<int>(args.size())),
                            std::move(args)});
      }
    }
    return out;
  }

  int predId(const std::string& name, int arity) {
    auto [it, inserted] = predIds_.try_emplace({name, arity}, static_cast<int>(preds.size()));
    if (inserted) preds.push_back({name, arity});
    return it->second;
  }

  int funcId(const std::string& name, int arity) {
    auto [it, inserted] = funcIds_.try_emplace({name, arity}, static_cast<int>(funcs.size()));
    if (inserted) {
      funcs.push_back({name, arity});
      if (arity == 0) constantOrder.push_back(it->second);
    }
    return it->second;
  }

 private:
  std::map<std::pair<std::string, int>, int> funcIds_, predIds_;
  std::map<std::string, int> vars_;
  std::map<std::pair<int, std::vector<int>>, int> defs_;
  FlatClause* cur_ = nullptr;

  int funcId(const Term& t) { return funcId(t.name(), static_cast<int>(t.args().size())); }

  std::vector<int> argVars(const Term& t) {
    std::vector<int> out;
    for (const auto& a : t.args()) out.push_back(termVar(a));
    return out;
  }

  int termVar(const Term& t) {
    if (t.isVariable()) {
      auto [it, inserted] = vars_.try_emplace(t.name(), cur_->nvars);
      if (inserted) ++cur_->nvars;
      return it->second;
    }
    int f = funcId(t);
    std::vector<int> args = argVars(t);
    auto key = std::make_pair(f, args);
    if (auto it = defs_.find(key); it != defs_.end()) return it->second;
    int v = cur_->nvars++;
    defs_.emplace(key, v);
    // f(args) != v, i.e. v stands for the value of the application.
    cur_->lits.push_back({FlatLit::Fun, false, f, std::move(args), v});
    return v;
  }
};

void collectFormulaSymbols(const Formula& f, Flattener& fl) {
  std::function<void(const Term&)> term = [&](const Term& t) {
    if (t.isVariable()) return;
    fl.funcId(t.name(), static_cast<int>(t.args().size()));
    for (const auto& a : t.args()) term(a);
  };
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    if (g.kind() == K::Predicate)
      fl.predId(g.symbol(), static_cast<int>(g.terms().size()));
    for (const auto& t : g.terms()) term(t);
    for (const auto& c : g.children()) go(c);
  };
  go(f);
}

class Grounder {
 public:
  Grounder(const Flattener& fl, int n) : fl_(fl), n_(n) {
    for (const auto& s : fl.funcs) {
      funcBase_.push_back(solver.numVars());
      std::size_t count = power(n, s.arity) * static_cast<std::size_t>(n);
      for (std::size_t i = 0; i < count; ++i) solver.newVar();
    }
    for (const auto& s : fl.preds) {
      predBase_.push_back(solver.numVars());
      std::size_t count = power(n, s.arity);
      for (std::size_t i = 0; i < count; ++i) solver.newVar();
    }
  }

  sat::Solver solver;

  int funVar(int f, std::span<const int> args, int value) const {
    return funcBase_[static_cast<std::size_t>(f)] +
           static_cast<int>(tupleIndex(args, n_) * static_cast<std::size_t>(n_)) + value;
  }
  int predVar(int p, std::span<const int> args) const {
    return predBase_[static_cast<std::size_t>(p)] + static_cast<int>(tupleIndex(args, n_));
  }

  bool functionality() {
    for (std::size_t f = 0; f < fl_.funcs.size(); ++f) {
      int arity = fl_.funcs[f].arity;
      std::vector<int> args(static_cast<std::size_t>(arity), 0);
      std::size_t total = power(n_, arity);
      for (std::size_t idx = 0; idx < total; ++idx) {
        decode(idx, args);
        std::vector<int> some;
        for (int v = 0; v < n_; ++v) some.push_back(sat::mkLit(funVar(static_cast<int>(f), args, v)));
        if (!solver.addClause(some)) return false;
        for (int a = 0; a < n_; ++a)
          for (int b = a + 1; b < n_; ++b)
            if (!solver.addClause({sat::mkLit(funVar(static_cast<int>(f), args, a), true),
                                   sat::mkLit(funVar(static_cast<int>(f), args, b), true)}))
              return false;
      }
    }
    return true;
  }

  // Constants introduce domain elements in order: c_i <= i, and c_i = e > 0
  // only if some earlier constant is e - 1.
  bool symmetryBreaking() {
    const auto& order = fl_.constantOrder;
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (int e = 1; e < n_; ++e) {
        std::vector<int> clause{sat::mkLit(funVar(order[i], {}, e), true)};
        if (static_cast<std::size_t>(e) <= i)
          for (std::size_t j = 0; j < i; ++j) clause.push_back(sat::mkLit(funVar(order[j], {}, e - 1)));
        if (!solver.addClause(clause)) return false;
      }
    }
    return true;
  }

  bool ground(const FlatClause& c) {
    std::vector<int> assignment(static_cast<std::size_t>(c.nvars), 0);
    std::size_t total = power(n_, c.nvars);
    std::vector<int> lits;
    std::vector<int> args;
    for (std::size_t idx = 0; idx < total; ++idx) {
      decode(idx, assignment);
      lits.clear();
      bool satisfied = false;
      for (const auto& l : c.lits) {
        args.clear();
        for (int v : l.args) args.push_back(assignment[static_cast<std::size_t>(v)]);
        if (l.kind == FlatLit::VarEq) {
          if ((args[0] == args[1]) == l.pos) {
            satisfied = true;
            break;
          }
          continue;
        }
        int var = l.kind == FlatLit::Pred
                      ? predVar(l.sym, args)
                      : funVar(l.sym, args, assignment[static_cast<std::size_t>(l.value)]);
        lits.push_back(sat::mkLit(var, !l.pos));
      }
      if (satisfied) continue;
      if (!solver.addClause(lits)) return false;
    }
    return true;
  }

  FiniteModel extract() const {
    FiniteModel m;
    m.domainSize = n_;
    std::vector<int> args;
    for (std::size_t f = 0; f < fl_.funcs.size(); ++f) {
      FiniteModel::Table t{fl_.funcs[f].name, fl_.funcs[f].arity, {}};
      std::size_t total = power(n_, t.arity);
      args.assign(static_cast<std::size_t>(t.arity), 0);
      for (std::size_t idx = 0; idx < total; ++idx) {
        decode(idx, args);
        int value = 0;
        for (int v = 0; v < n_; ++v)
          if (solver.value(funVar(static_cast<int>(f), args, v))) value = v;
        t.values.push_back(value);
      }
      m.functions.push_back(std::move(t));
    }
    for (std::size_t p = 0; p < fl_.preds.size(); ++p) {
      FiniteModel::Table t{fl_.preds[p].name, fl_.preds[p].arity, {}};
      std::size_t total = power(n_, t.arity);
      args.assign(static_cast<std::size_t>(t.arity), 0);
      for (std::size_t idx = 0; idx < total; ++idx) {
        decode(idx, args);
        t.values.push_back(solver.value(predVar(static_cast<int>(p), args)) ? 1 : 0);
      }
      m.predicates.push_back(std::move(t));
    }
    return m;
  }

 private:
  const Flattener& fl_;
  int n_;
  std::vector<int> funcBase_, predBase_;

  void decode(std::size_t idx, std::vector<int>& out) const {
    for (std::size_t k = out.size(); k-- > 0;) {
      out[k] = static_cast<int>(idx % static_cast<std::size_t>(n_));
      idx /= static_cast<std::size_t>(n_);
    }
  }
};

}  // namespace

std::optional<FiniteModel> findModel(std::span<const Formula> axioms,
                                     const Formula& conjecture,
                                     const ModelSearchLimits& limits,
                                     std::stop_token stop) {
  auto deadline = std::chrono::steady_clock::now() + limits.maxTime;
  std::vector<Formula> all(axioms.begin(), axioms.end());
  all.push_back(Formula::negate(conjecture));

  Flattener fl;
  // Symbols of the input come first, skolem functions after them.
  for (const auto& f : all) collectFormulaSymbols(f, fl);
  std::size_t inputFuncs = fl.funcs.size();
  std::size_t inputPreds = fl.preds.size();

  auto clauses = clausify(all, ClausifyOptions{.equalityAxioms = false});
  std::vector<FlatClause> flat;
  for (const auto& c : clauses) flat.push_back(fl.flatten(c));

  for (int n = 1; n <= limits.maxDomain; ++n) {
    if (stop.stop_requested() || std::chrono::steady_clock::now() > deadline) break;
    std::size_t estimate = 0;
    for (const auto& c : flat) estimate += power(n, c.nvars);
    for (const auto& s : fl.funcs)
      estimate += power(n, s.arity) * (1 + static_cast<std::size_t>(n * (n - 1) / 2));
    if (estimate > limits.maxGroundClauses) break;

    Grounder g(fl, n);
    bool consistent = g.functionality() && g.symmetryBreaking();
    for (std::size_t i = 0; consistent && i < flat.size(); ++i) {
      consistent = g.ground(flat[i]);
      if ((i & 15) == 0 && (stop.stop_requested() || std::chrono::steady_clock::now() > deadline))
        return std::nullopt;
    }
    if (!consistent) continue;
    auto r = g.solver.solve(stop, deadline);
    if (!r) return std::nullopt;
    if (!*r) continue;

    FiniteModel m = g.extract();
    // Report the input symbols only; skolem functions are search artifacts.
    m.functions.resize(inputFuncs);
    m.predicates.resize(inputPreds);
    for (const auto& f : all)
      if (!m.evaluate(f))
        throw std::logic_error("model finder produced an invalid model for " + fol::render(f));
    return m;
  }
  return std::nullopt;
}

}  // namespace elfe::provers
