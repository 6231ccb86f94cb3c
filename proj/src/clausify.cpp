#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "elfe/provers.hpp"

namespace elfe::provers {

using fol::Formula;
using fol::Term;
using K = Formula::Kind;

namespace {

class Clausifier {
 public:
  explicit Clausifier(std::span<const Formula> all) {
    for (const auto& f : all) {
      auto s = fol::symbolsOf(f);
      used_.insert(s.begin(), s.end());
    }
  }

  std::vector<Clause> run(const Formula& f) {
    Formula n = nnf(f, true);
    Formula s = skolemize(n, {});
    std::vector<Clause> out;
    for (auto& lits : cnf(s)) {
      if (auto c = normalize(std::move(lits))) out.push_back(std::move(*c));
    }
    return out;
  }

 private:
  std::set<std::string> used_;
  int varCounter_ = 0;
  int skolemCounter_ = 0;

  std::string freshVar() {
    // Bound variables get globally unique names so that dropping the
    // quantifiers cannot merge unrelated variables.
    for (;;) {
      std::string n = "V" + std::to_string(varCounter_++) + "'";
      if (used_.insert(n).second) return n;
    }
  }

  std::string freshSkolem() {
    for (;;) {
      std::string n = "sk" + std::to_string(skolemCounter_++);
      if (used_.insert(n).second) return n;
    }
  }

  Formula quant(bool universal, const std::string& v, const Formula& body,
                bool positive) {
    std::string nv = freshVar();
    Formula b = nnf(fol::substitute(body, v, Term::variable(nv)), positive);
    return universal ? Formula::forall(nv, b) : Formula::exists(nv, b);
  }

  Formula nnf(const Formula& f, bool positive) {
    switch (f.kind()) {
      case K::Predicate:
      case K::Equals:
        return positive ? f : Formula::negate(f);
      case K::Top:
        return positive ? Formula::top() : Formula::bottom();
      case K::Bottom:
        return positive ? Formula::bottom() : Formula::top();
      case K::Not:
        return nnf(f.body(), !positive);
      case K::And:
        return positive ? Formula::conj(nnf(f.lhs(), true), nnf(f.rhs(), true))
                        : Formula::disj(nnf(f.lhs(), false), nnf(f.rhs(), false));
      case K::Or:
        return positive ? Formula::disj(nnf(f.lhs(), true), nnf(f.rhs(), true))
                        : Formula::conj(nnf(f.lhs(), false), nnf(f.rhs(), false));
      case K::Implies:
        return positive ? Formula::disj(nnf(f.lhs(), false), nnf(f.rhs(), true))
                        : Formula::conj(nnf(f.lhs(), true), nnf(f.rhs(), false));
      case K::Iff:
        if (positive)
          return Formula::conj(
              Formula::disj(nnf(f.lhs(), false), nnf(f.rhs(), true)),
              Formula::disj(nnf(f.lhs(), true), nnf(f.rhs(), false)));
        return Formula::conj(
            Formula::disj(nnf(f.lhs(), true), nnf(f.rhs(), true)),
            Formula::disj(nnf(f.lhs(), false), nnf(f.rhs(), false)));
      case K::Forall:
        return quant(positive, f.var(), f.body(), positive);
      case K::Exists:
        return quant(!positive, f.var(), f.body(), positive);
    }
    return f;
  }

  Formula skolemize(const Formula& f, std::vector<std::string> universals) {
    switch (f.kind()) {
      case K::And:
        return Formula::conj(skolemize(f.lhs(), universals),
                             skolemize(f.rhs(), universals));
      case K::Or:
        return Formula::disj(skolemize(f.lhs(), universals),
                             skolemize(f.rhs(), universals));
      case K::Forall: {
        universals.push_back(f.var());
        return Formula::forall(f.var(), skolemize(f.body(), universals));
      }
      case K::Exists: {
        auto free = fol::freeVars(f);
        std::vector<Term> args;
        for (const auto& u : universals)
          if (free.contains(u)) args.push_back(Term::variable(u));
        Term sk = Term::apply(freshSkolem(), std::move(args));
        return skolemize(fol::substitute(f.body(), f.var(), sk), universals);
      }
      default:
        return f;
    }
  }

  using Cnf = std::vector<std::vector<Literal>>;

  static Cnf cnf(const Formula& f) {
    switch (f.kind()) {
      case K::Top:
        return {};
      case K::Bottom:
        return {{}};
      case K::Predicate:
      case K::Equals:
        return {{Literal{true, f}}};
      case K::Not:
        return {{Literal{false, f.body()}}};
      case K::Forall:
        return cnf(f.body());
      case K::And: {
        Cnf l = cnf(f.lhs());
        Cnf r = cnf(f.rhs());
        l.insert(l.end(), std::make_move_iterator(r.begin()),
                 std::make_move_iterator(r.end()));
        return l;
      }
      case K::Or: {
        Cnf l = cnf(f.lhs());
        Cnf r = cnf(f.rhs());
        Cnf out;
        out.reserve(l.size() * r.size());
        for (const auto& a : l)
          for (const auto& b : r) {
            auto c = a;
            c.insert(c.end(), b.begin(), b.end());
            out.push_back(std::move(c));
          }
        return out;
      }
      default:
        return {};
    }
  }

  // Drops duplicates, detects tautologies, renames variables to X0, X1, ...
  static std::optional<Clause> normalize(std::vector<Literal> lits) {
    std::vector<Literal> kept;
    for (auto& l : lits) {
      if (l.atom.kind() == K::Equals && l.atom.terms()[0] == l.atom.terms()[1]) {
        if (l.positive) return std::nullopt;
        continue;
      }
      if (std::find(kept.begin(), kept.end(), l) != kept.end()) continue;
      Literal neg{!l.positive, l.atom};
      if (std::find(kept.begin(), kept.end(), neg) != kept.end())
        return std::nullopt;
      kept.push_back(std::move(l));
    }
    std::map<std::string, Term> ren;
    for (const auto& l : kept)
      for (const auto& v : fol::freeVarList(l.atom))
        if (!ren.contains(v))
          ren.emplace(v, Term::variable("X" + std::to_string(ren.size())));
    Clause c;
    for (auto& l : kept)
      c.literals.push_back({l.positive, fol::substitute(l.atom, ren)});
    return c;
  }
};

void collectArities(const Term& t, std::map<std::string, int>& funcs) {
  if (t.isVariable()) return;
  funcs.emplace(t.name(), static_cast<int>(t.args().size()));
  for (const auto& a : t.args()) collectArities(a, funcs);
}

std::vector<Clause> equalityAxiomsFor(
    const std::vector<std::vector<Clause>>& groups) {
  std::map<std::string, int> funcs, preds;
  bool hasEq = false;
  for (const auto& g : groups)
    for (const auto& c : g)
      for (const auto& l : c.literals) {
        if (l.atom.kind() == K::Equals)
          hasEq = true;
        else
          preds.emplace(l.atom.symbol(), static_cast<int>(l.atom.terms().size()));
        for (const auto& t : l.atom.terms()) collectArities(t, funcs);
      }
  if (!hasEq) return {};
  auto X = [](int i) { return Term::variable("X" + std::to_string(i)); };
  auto eq = [](Term a, Term b) { return Formula::equals(std::move(a), std::move(b)); };
  std::vector<Clause> out;
  out.push_back({{{true, eq(X(0), X(0))}}});
  out.push_back({{{false, eq(X(0), X(1))}, {true, eq(X(1), X(0))}}});
  out.push_back({{{false, eq(X(0), X(1))},
                  {false, eq(X(1), X(2))},
                  {true, eq(X(0), X(2))}}});
  // Congruence, one argument position at a time: X0 = X1 is the changed
  // position, the other positions use X2, X3, ...
  auto argsWith = [&](int arity, int pos, const Term& t) {
    std::vector<Term> args;
    int next = 2;
    for (int i = 0; i < arity; ++i) args.push_back(i == pos ? t : X(next++));
    return args;
  };
  for (const auto& [f, n] : funcs) {
    for (int i = 0; i < n; ++i) {
      out.push_back({{{false, eq(X(0), X(1))},
                      {true, eq(Term::apply(f, argsWith(n, i, X(0))),
                                Term::apply(f, argsWith(n, i, X(1))))}}});
    }
  }
  for (const auto& [p, n] : preds) {
    for (int i = 0; i < n; ++i) {
      out.push_back({{{false, eq(X(0), X(1))},
                      {false, Formula::predicate(p, argsWith(n, i, X(0)))},
                      {true, Formula::predicate(p, argsWith(n, i, X(1)))}}});
    }
  }
  return out;
}

}  // namespace

std::string render(const Clause& c) {
  if (c.literals.empty()) return "⊥";
  std::string out;
  for (std::size_t i = 0; i < c.literals.size(); ++i) {
    if (i) out += " ∨ ";
    const auto& l = c.literals[i];
    std::string a = fol::render(l.atom);
    out += l.positive ? a : (l.atom.kind() == K::Equals ? "¬(" + a + ")" : "¬" + a);
  }
  return out;
}

ClausifiedProblem clausifyEach(std::span<const Formula> formulas,
                               const ClausifyOptions& opts) {
  Clausifier cl(formulas);
  ClausifiedProblem out;
  for (const auto& f : formulas) out.perFormula.push_back(cl.run(f));
  if (opts.equalityAxioms) out.equalityAxioms = equalityAxiomsFor(out.perFormula);
  return out;
}

std::vector<Clause> clausify(std::span<const Formula> formulas,
                             const ClausifyOptions& opts) {
  auto p = clausifyEach(formulas, opts);
  std::vector<Clause> out;
  for (auto& g : p.perFormula)
    out.insert(out.end(), std::make_move_iterator(g.begin()),
               std::make_move_iterator(g.end()));
  out.insert(out.end(), p.equalityAxioms.begin(), p.equalityAxioms.end());
  return out;
}

}  // namespace elfe::provers
