#include "elfe/fol.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <optional>
#include <sstream>

namespace elfe::fol {

// ---------------------------------------------------------------- Term

Term Term::variable(std::string name) {
  return Term(std::make_shared<const Node>(
      Node{Kind::Variable, std::move(name), {}}));
}

Term Term::constant(std::string name) {
  return Term(std::make_shared<const Node>(
      Node{Kind::Constant, std::move(name), {}}));
}

Term Term::apply(std::string symbol, std::vector<Term> args) {
  if (args.empty()) return constant(std::move(symbol));
  return Term(std::make_shared<const Node>(
      Node{Kind::Application, std::move(symbol), std::move(args)}));
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  return a.kind() == b.kind() && a.name() == b.name() &&
         std::equal(a.args().begin(), a.args().end(), b.args().begin(),
                    b.args().end());
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  if (auto c = a.name() <=> b.name(); c != 0) return c;
  return std::lexicographical_compare_three_way(
      a.args().begin(), a.args().end(), b.args().begin(), b.args().end());
}

// ------------------------------------------------------------- Formula

namespace {

void collectTermVars(const Term& t, std::vector<std::string>& out,
                     std::set<std::string>& seen) {
  if (t.isVariable()) {
    if (seen.insert(t.name()).second) out.push_back(t.name());
    return;
  }
  for (const auto& a : t.args()) collectTermVars(a, out, seen);
}

void collectFree(const Formula& f, std::vector<std::string>& bound,
                 std::vector<std::string>& out, std::set<std::string>& seen) {
  auto visitTerm = [&](const Term& t, auto&& self) -> void {
    if (t.isVariable()) {
      if (std::find(bound.begin(), bound.end(), t.name()) == bound.end() &&
          seen.insert(t.name()).second)
        out.push_back(t.name());
      return;
    }
    for (const auto& a : t.args()) self(a, self);
  };
  switch (f.kind()) {
    case Formula::Kind::Predicate:
    case Formula::Kind::Equals:
      for (const auto& t : f.terms()) visitTerm(t, visitTerm);
      return;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      bound.push_back(f.var());
      collectFree(f.body(), bound, out, seen);
      bound.pop_back();
      return;
    default:
      for (const auto& c : f.children()) collectFree(c, bound, out, seen);
  }
}

bool bindsVar(const Formula& f, const std::string& v) {
  if (f.isQuantifier() && f.var() == v) return true;
  for (const auto& c : f.children())
    if (bindsVar(c, v)) return true;
  return false;
}

std::string freshName(const std::string& base,
                      const std::set<std::string>& used) {
  for (int i = 0;; ++i) {
    std::string cand = base + std::to_string(i);
    if (!used.contains(cand)) return cand;
  }
}

// Renames every binder of v inside f (v is about to be bound outside).
Formula renameInnerBinders(const Formula& f, const std::string& v,
                           std::set<std::string>& used) {
  if (!bindsVar(f, v)) return f;
  if (f.isQuantifier() && f.var() == v) {
    std::string fresh = freshName(v, used);
    used.insert(fresh);
    Formula body = substitute(f.body(), v, Term::variable(fresh));
    return f.kind() == Formula::Kind::Forall ? Formula::forall(fresh, body)
                                             : Formula::exists(fresh, body);
  }
  switch (f.kind()) {
    case Formula::Kind::Not:
      return Formula::negate(renameInnerBinders(f.body(), v, used));
    case Formula::Kind::And:
      return Formula::conj(renameInnerBinders(f.lhs(), v, used),
                           renameInnerBinders(f.rhs(), v, used));
    case Formula::Kind::Or:
      return Formula::disj(renameInnerBinders(f.lhs(), v, used),
                           renameInnerBinders(f.rhs(), v, used));
    case Formula::Kind::Implies:
      return Formula::implies(renameInnerBinders(f.lhs(), v, used),
                              renameInnerBinders(f.rhs(), v, used));
    case Formula::Kind::Iff:
      return Formula::iff(renameInnerBinders(f.lhs(), v, used),
                          renameInnerBinders(f.rhs(), v, used));
    case Formula::Kind::Forall:
      return Formula::forall(f.var(), renameInnerBinders(f.body(), v, used));
    case Formula::Kind::Exists:
      return Formula::exists(f.var(), renameInnerBinders(f.body(), v, used));
    default:
      return f;
  }
}

}  // namespace

Formula Formula::make(Kind k, std::string symbol, std::vector<Term> terms,
                      std::vector<Formula> children) {
  return Formula(std::make_shared<const Node>(
      Node{k, std::move(symbol), std::move(terms), std::move(children)}));
}

Formula Formula::predicate(std::string symbol, std::vector<Term> args) {
  return make(Kind::Predicate, std::move(symbol), std::move(args), {});
}
Formula Formula::equals(Term lhs, Term rhs) {
  return make(Kind::Equals, "", {std::move(lhs), std::move(rhs)}, {});
}
Formula Formula::negate(Formula f) {
  return make(Kind::Not, "", {}, {std::move(f)});
}
Formula Formula::conj(Formula a, Formula b) {
  return make(Kind::And, "", {}, {std::move(a), std::move(b)});
}
Formula Formula::disj(Formula a, Formula b) {
  return make(Kind::Or, "", {}, {std::move(a), std::move(b)});
}
Formula Formula::implies(Formula a, Formula b) {
  return make(Kind::Implies, "", {}, {std::move(a), std::move(b)});
}
Formula Formula::iff(Formula a, Formula b) {
  return make(Kind::Iff, "", {}, {std::move(a), std::move(b)});
}
Formula Formula::forall(std::string var, Formula body) {
  if (bindsVar(body, var)) {
    auto used = symbolsOf(body);
    used.insert(var);
    body = renameInnerBinders(body, var, used);
  }
  return make(Kind::Forall, std::move(var), {}, {std::move(body)});
}
Formula Formula::exists(std::string var, Formula body) {
  if (bindsVar(body, var)) {
    auto used = symbolsOf(body);
    used.insert(var);
    body = renameInnerBinders(body, var, used);
  }
  return make(Kind::Exists, std::move(var), {}, {std::move(body)});
}
Formula Formula::top() { return make(Kind::Top, "", {}, {}); }
Formula Formula::bottom() { return make(Kind::Bottom, "", {}, {}); }

Formula Formula::conjunction(std::span<const Formula> parts) {
  if (parts.empty()) return top();
  Formula acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = conj(acc, parts[i]);
  return acc;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  return a.kind() == b.kind() && a.symbol() == b.symbol() &&
         std::equal(a.terms().begin(), a.terms().end(), b.terms().begin(),
                    b.terms().end()) &&
         std::equal(a.children().begin(), a.children().end(),
                    b.children().begin(), b.children().end());
}

std::strong_ordering operator<=>(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  if (auto c = a.symbol() <=> b.symbol(); c != 0) return c;
  if (auto c = std::lexicographical_compare_three_way(
          a.terms().begin(), a.terms().end(), b.terms().begin(),
          b.terms().end());
      c != 0)
    return c;
  return std::lexicographical_compare_three_way(
      a.children().begin(), a.children().end(), b.children().begin(),
      b.children().end());
}

// ----------------------------------------------------- variable accounting

std::vector<std::string> freeVarList(const Formula& f) {
  std::vector<std::string> bound, out;
  std::set<std::string> seen;
  collectFree(f, bound, out, seen);
  return out;
}

std::set<std::string> freeVars(const Formula& f) {
  auto l = freeVarList(f);
  return {l.begin(), l.end()};
}

std::vector<std::string> termVars(const Term& t) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  collectTermVars(t, out, seen);
  return out;
}

void collectSymbols(const Term& t, std::set<std::string>& out) {
  out.insert(t.name());
  for (const auto& a : t.args()) collectSymbols(a, out);
}

std::set<std::string> symbolsOf(const Formula& f) {
  std::set<std::string> out;
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    if (!g.symbol().empty()) out.insert(g.symbol());
    for (const auto& t : g.terms()) collectSymbols(t, out);
    for (const auto& c : g.children()) go(c);
  };
  go(f);
  return out;
}

std::set<std::string> constantsOf(const Formula& f) {
  std::set<std::string> out;
  std::function<void(const Term&)> term = [&](const Term& t) {
    if (t.isConstant()) out.insert(t.name());
    for (const auto& a : t.args()) term(a);
  };
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    for (const auto& t : g.terms()) term(t);
    for (const auto& c : g.children()) go(c);
  };
  go(f);
  return out;
}

bool isClosed(const Formula& f) { return freeVarList(f).empty(); }

// ----------------------------------------------------------- substitution

Term substitute(const Term& term, const std::string& v, const Term& t) {
  switch (term.kind()) {
    case Term::Kind::Variable:
      return term.name() == v ? t : term;
    case Term::Kind::Constant:
      return term;
    case Term::Kind::Application: {
      std::vector<Term> args;
      args.reserve(term.args().size());
      for (const auto& a : term.args()) args.push_back(substitute(a, v, t));
      return Term::apply(term.name(), std::move(args));
    }
  }
  return term;
}

namespace {

Term substTerm(const Term& term, const std::map<std::string, Term>& s) {
  switch (term.kind()) {
    case Term::Kind::Variable: {
      auto it = s.find(term.name());
      return it == s.end() ? term : it->second;
    }
    case Term::Kind::Constant:
      return term;
    case Term::Kind::Application: {
      std::vector<Term> args;
      args.reserve(term.args().size());
      for (const auto& a : term.args()) args.push_back(substTerm(a, s));
      return Term::apply(term.name(), std::move(args));
    }
  }
  return term;
}

Formula rebuild(const Formula& f, std::vector<Formula> kids) {
  switch (f.kind()) {
    case Formula::Kind::Not:
      return Formula::negate(std::move(kids[0]));
    case Formula::Kind::And:
      return Formula::conj(std::move(kids[0]), std::move(kids[1]));
    case Formula::Kind::Or:
      return Formula::disj(std::move(kids[0]), std::move(kids[1]));
    case Formula::Kind::Implies:
      return Formula::implies(std::move(kids[0]), std::move(kids[1]));
    case Formula::Kind::Iff:
      return Formula::iff(std::move(kids[0]), std::move(kids[1]));
    case Formula::Kind::Forall:
      return Formula::forall(f.var(), std::move(kids[0]));
    case Formula::Kind::Exists:
      return Formula::exists(f.var(), std::move(kids[0]));
    default:
      return f;
  }
}

Formula substMap(const Formula& f, std::map<std::string, Term> s) {
  if (s.empty()) return f;
  switch (f.kind()) {
    case Formula::Kind::Predicate: {
      std::vector<Term> args;
      for (const auto& t : f.terms()) args.push_back(substTerm(t, s));
      return Formula::predicate(f.symbol(), std::move(args));
    }
    case Formula::Kind::Equals:
      return Formula::equals(substTerm(f.terms()[0], s),
                             substTerm(f.terms()[1], s));
    case Formula::Kind::Top:
    case Formula::Kind::Bottom:
      return f;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      std::string y = f.var();
      s.erase(y);
      auto free = freeVars(f.body());
      std::erase_if(s, [&](const auto& kv) { return !free.contains(kv.first); });
      if (s.empty()) return f;
      bool capture = false;
      std::set<std::string> used = symbolsOf(f.body());
      for (const auto& [k, t] : s) {
        used.insert(k);
        for (const auto& tv : termVars(t)) {
          used.insert(tv);
          if (tv == y) capture = true;
        }
      }
      Formula body = f.body();
      if (capture) {
        std::string fresh = freshName(y, used);
        body = substitute(body, y, Term::variable(fresh));
        y = fresh;
      }
      body = substMap(body, s);
      return f.kind() == Formula::Kind::Forall ? Formula::forall(y, body)
                                               : Formula::exists(y, body);
    }
    default: {
      std::vector<Formula> kids;
      for (const auto& c : f.children()) kids.push_back(substMap(c, s));
      return rebuild(f, std::move(kids));
    }
  }
}

}  // namespace

Formula substitute(const Formula& f, const std::string& v, const Term& t) {
  return substMap(f, {{v, t}});
}

Formula substitute(const Formula& f, const std::map<std::string, Term>& s) {
  return substMap(f, s);
}

Formula universalClosure(const Formula& f) {
  auto vars = freeVarList(f);
  Formula out = f;
  for (auto it = vars.rbegin(); it != vars.rend(); ++it)
    out = Formula::forall(*it, out);
  return out;
}

std::pair<std::vector<std::string>, Formula> stripForalls(const Formula& f) {
  std::vector<std::string> vars;
  Formula cur = f;
  while (cur.kind() == Formula::Kind::Forall) {
    vars.push_back(cur.var());
    cur = cur.body();
  }
  return {std::move(vars), cur};
}

const std::string* FreezeMap::find(const std::string& var) const {
  for (const auto& [v, c] : entries)
    if (v == var) return &c;
  return nullptr;
}

FreezeResult freeze(const Formula& f, std::span<const std::string> vars,
                    const std::set<std::string>& avoid) {
  if (vars.empty()) return {f, {}};
  auto [prefix, body] = stripForalls(f);
  for (const auto& v : vars)
    if (std::find(prefix.begin(), prefix.end(), v) == prefix.end())
      throw FreezeError("variable '" + v +
                        "' is not universally quantified at the outermost "
                        "level of " + render(f));
  std::set<std::string> used = symbolsOf(f);
  used.insert(avoid.begin(), avoid.end());
  FreezeMap fm;
  std::map<std::string, Term> s;
  for (const auto& v : vars) {
    if (fm.find(v)) continue;
    // Primes are dropped, so x and x' become cx and cx1.
    std::string base = "c";
    for (char ch : v)
      if (ch != '\'') base += ch;
    std::string name = base;
    for (int i = 1; used.contains(name); ++i) name = base + std::to_string(i);
    used.insert(name);
    fm.entries.emplace_back(v, name);
    s.emplace(v, Term::constant(name));
  }
  Formula out = substitute(body, s);
  for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
    if (!fm.find(*it)) out = Formula::forall(*it, out);
  return {out, std::move(fm)};
}

std::vector<Formula> conjuncts(const Formula& f) {
  if (f.kind() != Formula::Kind::And) return {f};
  auto l = conjuncts(f.lhs());
  auto r = conjuncts(f.rhs());
  l.insert(l.end(), r.begin(), r.end());
  return l;
}

bool sameUpToConjunctOrder(const Formula& a, const Formula& b) {
  auto ca = conjuncts(a);
  auto cb = conjuncts(b);
  if (ca.size() != cb.size()) return false;
  if (ca.size() == 1) {
    if (a.kind() != b.kind() || a.symbol() != b.symbol()) return false;
    if (!std::equal(a.terms().begin(), a.terms().end(), b.terms().begin(),
                    b.terms().end()))
      return false;
    if (a.children().size() != b.children().size()) return false;
    for (std::size_t i = 0; i < a.children().size(); ++i)
      if (!sameUpToConjunctOrder(a.children()[i], b.children()[i]))
        return false;
    return true;
  }
  std::vector<bool> used(cb.size(), false);
  for (const auto& x : ca) {
    bool found = false;
    for (std::size_t j = 0; j < cb.size(); ++j) {
      if (!used[j] && sameUpToConjunctOrder(x, cb[j])) {
        used[j] = found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------- render

bool isIdentifierChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '\'';
}

namespace {

class Renderer {
 public:
  std::string term(const Term& t) {
    std::string out;
    switch (t.kind()) {
      case Term::Kind::Variable:
        if (!isBound(t.name())) out += '?';
        out += t.name();
        return out;
      case Term::Kind::Constant:
        if (isBound(t.name())) out += '#';
        out += t.name();
        return out;
      case Term::Kind::Application:
        out = t.name() + "(";
        for (std::size_t i = 0; i < t.args().size(); ++i) {
          if (i) out += ',';
          out += term(t.args()[i]);
        }
        return out + ")";
    }
    return out;
  }

  // Precedence levels: quantifier 0, iff 1, implies 2, or 3, and 4,
  // unary 5, atom 6.
  static int level(const Formula& f) {
    switch (f.kind()) {
      case Formula::Kind::Forall:
      case Formula::Kind::Exists:
        return 0;
      case Formula::Kind::Iff:
        return 1;
      case Formula::Kind::Implies:
        return 2;
      case Formula::Kind::Or:
        return 3;
      case Formula::Kind::And:
        return 4;
      case Formula::Kind::Not:
        return 5;
      default:
        return 6;
    }
  }

  std::string formula(const Formula& f, int required = 0) {
    if (level(f) < required) return "(" + formula(f, 0) + ")";
    switch (f.kind()) {
      case Formula::Kind::Top:
        return "⊤";
      case Formula::Kind::Bottom:
        return "⊥";
      case Formula::Kind::Predicate: {
        std::string out = f.symbol();
        if (!f.terms().empty()) {
          out += '(';
          for (std::size_t i = 0; i < f.terms().size(); ++i) {
            if (i) out += ',';
            out += term(f.terms()[i]);
          }
          out += ')';
        }
        return out;
      }
      case Formula::Kind::Equals:
        return term(f.terms()[0]) + " = " + term(f.terms()[1]);
      case Formula::Kind::Not:
        return "¬" + formula(f.body(), 5);
      case Formula::Kind::And:
        return formula(f.lhs(), 4) + " ∧ " + formula(f.rhs(), 5);
      case Formula::Kind::Or:
        return formula(f.lhs(), 3) + " ∨ " + formula(f.rhs(), 4);
      case Formula::Kind::Implies:
        return formula(f.lhs(), 3) + " → " + formula(f.rhs(), 2);
      case Formula::Kind::Iff:
        return formula(f.lhs(), 2) + " ↔ " + formula(f.rhs(), 2);
      case Formula::Kind::Forall:
        return forallChain(f);
      case Formula::Kind::Exists: {
        std::vector<std::string> vars;
        Formula cur = f;
        while (cur.kind() == Formula::Kind::Exists) {
          vars.push_back(cur.var());
          cur = cur.body();
        }
        return quantified("∃", vars, {}, cur);
      }
    }
    return {};
  }

 private:
  std::vector<std::string> bound_;

  bool isBound(const std::string& n) const {
    return std::find(bound_.begin(), bound_.end(), n) != bound_.end();
  }

  std::string quantified(const char* q, const std::vector<std::string>& vars,
                         const std::vector<Formula>& guards,
                         const Formula& body) {
    std::string out = q;
    for (const auto& v : vars) bound_.push_back(v);
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (i) out += ", ";
      out += guards.empty() ? vars[i] : formula(guards[i], 6);
    }
    out += ". " + formula(body, 0);
    bound_.resize(bound_.size() - vars.size());
    return out;
  }

  std::string forallChain(const Formula& f) {
    auto [vars, body] = stripForalls(f);
    if (body.kind() == Formula::Kind::Implies) {
      auto guards = leftConjuncts(body.lhs());
      if (guards.size() == vars.size()) {
        bool ok = true;
        for (std::size_t i = 0; ok && i < vars.size(); ++i) {
          const auto& g = guards[i];
          ok = g.kind() == Formula::Kind::Predicate && !g.terms().empty() &&
               g.terms()[0].isVariable() && g.terms()[0].name() == vars[i];
        }
        // Distinct variables only; a repeated name would not re-parse.
        std::set<std::string> distinct(vars.begin(), vars.end());
        if (ok && distinct.size() == vars.size())
          return quantified("∀", vars, guards, body.rhs());
      }
    }
    return quantified("∀", vars, {}, body);
  }

  static std::vector<Formula> leftConjuncts(const Formula& f) {
    std::vector<Formula> out;
    Formula cur = f;
    while (cur.kind() == Formula::Kind::And) {
      out.push_back(cur.rhs());
      cur = cur.lhs();
    }
    out.push_back(cur);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

// ------------------------------------------------------------------ parse

class RawParser {
 public:
  explicit RawParser(std::string_view text) : text_(text) {}

  Formula parseAll() {
    Formula f = formula();
    skipWs();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<std::string> bound_;

  [[noreturn]] void fail(const std::string& msg) {
    throw SyntaxError(msg, pos_);
  }

  void skipWs() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r'))
      ++pos_;
  }

  bool peek(std::string_view tok) {
    skipWs();
    return text_.substr(pos_, tok.size()) == tok;
  }

  bool accept(std::string_view tok) {
    if (!peek(tok)) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  std::string ident() {
    skipWs();
    std::size_t start = pos_;
    while (pos_ < text_.size() && isIdentifierChar(text_[pos_])) ++pos_;
    if (start == pos_) fail("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  bool isBound(const std::string& n) const {
    return std::find(bound_.begin(), bound_.end(), n) != bound_.end();
  }

  Formula formula() {
    if (peek("∀") || peek("∃")) return quantified();
    return iff();
  }

  Formula quantified() {
    bool universal = accept("∀");
    if (!universal) expect("∃");
    std::vector<std::string> vars;
    std::vector<std::pair<std::string, std::size_t>> guardSpans;
    // Guards may mention any variable of the binder list, so bind the
    // identifiers first and parse guard arguments afterwards.
    std::vector<std::size_t> guardStarts;
    do {
      std::size_t start = (skipWs(), pos_);
      std::string name = ident();
      if (accept("(")) {
        if (!universal) fail("guarded binder under ∃");
        guardStarts.push_back(start);
        // First argument is the bound variable.
        std::string v = ident();
        vars.push_back(v);
        int depth = 1;
        while (pos_ < text_.size() && depth > 0) {
          if (text_[pos_] == '(') ++depth;
          if (text_[pos_] == ')') --depth;
          ++pos_;
        }
        if (depth != 0) fail("unbalanced guard");
      } else {
        vars.push_back(name);
      }
    } while (accept(","));
    if (!guardStarts.empty() && guardStarts.size() != vars.size())
      fail("either every binder is guarded or none is");
    expect(".");
    std::size_t bodyPos = pos_;
    for (const auto& v : vars) bound_.push_back(v);
    std::vector<Formula> guards;
    for (std::size_t g : guardStarts) {
      pos_ = g;
      guards.push_back(atom());
    }
    pos_ = bodyPos;
    Formula body = formula();
    bound_.resize(bound_.size() - vars.size());
    if (!guards.empty()) body = Formula::implies(Formula::conjunction(guards), body);
    for (auto it = vars.rbegin(); it != vars.rend(); ++it)
      body = universal ? Formula::forall(*it, body) : Formula::exists(*it, body);
    return body;
  }

  Formula iff() {
    Formula l = implication();
    if (accept("↔")) return Formula::iff(l, implication());
    return l;
  }

  Formula implication() {
    Formula l = disjunction();
    if (accept("→")) return Formula::implies(l, implication());
    return l;
  }

  Formula disjunction() {
    Formula l = conjunction();
    while (accept("∨")) l = Formula::disj(l, conjunction());
    return l;
  }

  Formula conjunction() {
    Formula l = unary();
    while (accept("∧")) l = Formula::conj(l, unary());
    return l;
  }

  Formula unary() {
    if (accept("¬")) return Formula::negate(unary());
    if (accept("(")) {
      Formula f = formula();
      expect(")");
      return f;
    }
    if (accept("⊤")) return Formula::top();
    if (accept("⊥")) return Formula::bottom();
    return atom();
  }

  Formula atom() {
    skipWs();
    std::size_t start = pos_;
    bool marked = peek("?") || peek("#");
    Term t = term();
    if (accept("=")) return Formula::equals(t, term());
    if (marked || t.isVariable())
      throw SyntaxError("expected '=' after term", start);
    std::vector<Term> args(t.args().begin(), t.args().end());
    return Formula::predicate(t.name(), std::move(args));
  }

  Term term() {
    if (accept("?")) return Term::variable(ident());
    if (accept("#")) return Term::constant(ident());
    std::string name = ident();
    if (accept("(")) {
      std::vector<Term> args;
      do args.push_back(term());
      while (accept(","));
      expect(")");
      return Term::apply(name, std::move(args));
    }
    if (isBound(name)) return Term::variable(name);
    return Term::constant(name);
  }
};

}  // namespace

std::string render(const Formula& f) { return Renderer().formula(f); }
std::string render(const Term& t) { return Renderer().term(t); }

Formula parseFormula(std::string_view text) {
  return RawParser(text).parseAll();
}

}  // namespace elfe::fol
