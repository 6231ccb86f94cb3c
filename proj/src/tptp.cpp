#include "elfe/tptp.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace elfe {

std::string_view toString(ProverStatus s) {
  switch (s) {
    case ProverStatus::Theorem: return "Theorem";
    case ProverStatus::CounterSatisfiable: return "CounterSatisfiable";
    case ProverStatus::Satisfiable: return "Satisfiable";
    case ProverStatus::Unknown: return "Unknown";
    case ProverStatus::Timeout: return "Timeout";
    case ProverStatus::Error: return "Error";
  }
  return "Unknown";
}

}  // namespace elfe

namespace elfe::tptp {

using fol::Formula;
using fol::Term;

SyntaxError::SyntaxError(const std::string& msg, std::size_t offset)
    : std::runtime_error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}

std::string lowerWord(std::string_view name) {
  auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  std::string out;
  for (char c : name) {
    if (c == '\'')
      out += "_p";
    else if (alnum(c))
      out += c;
  }
  if (out.empty()) return out;
  if (!std::islower(static_cast<unsigned char>(out[0]))) out = "s_" + out;
  return out;
}

namespace {

// ------------------------------------------------------------ emitting

class Mangler {
 public:
  std::string functor(const std::string& name) {
    if (auto it = names_.find(name); it != names_.end()) return it->second;
    std::string base = lowerWord(name);
    if (base.empty()) throw std::invalid_argument("identifier '" + name + "' has no TPTP form");
    std::string m = base;
    for (int k = 2; taken_.count(m); ++k) m = base + "_" + std::to_string(k);
    taken_.insert(m);
    names_.emplace(name, m);
    return m;
  }

  // Record formula over TPTP names; bound variables X, X1, ... in order.
  Formula record(const Formula& f) {
    counter_ = 0;
    std::map<std::string, std::string> env;
    return formula(f, env);
  }

 private:
  std::map<std::string, std::string> names_;
  std::set<std::string> taken_;
  int counter_ = 0;

  Term term(const Term& t, const std::map<std::string, std::string>& env) {
    if (t.isVariable()) {
      auto it = env.find(t.name());
      if (it == env.end()) throw std::invalid_argument("free variable '" + t.name() + "'");
      return Term::variable(it->second);
    }
    if (t.isConstant()) return Term::constant(functor(t.name()));
    std::vector<Term> args;
    for (const auto& a : t.args()) args.push_back(term(a, env));
    return Term::apply(functor(t.name()), std::move(args));
  }

  Formula formula(const Formula& f, std::map<std::string, std::string>& env) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::Predicate: {
        std::vector<Term> args;
        for (const auto& a : f.terms()) args.push_back(term(a, env));
        return Formula::predicate(functor(f.symbol()), std::move(args));
      }
      case K::Equals:
        return Formula::equals(term(f.terms()[0], env), term(f.terms()[1], env));
      case K::Not:
        return Formula::negate(formula(f.body(), env));
      case K::And:
        return Formula::conj(formula(f.lhs(), env), formula(f.rhs(), env));
      case K::Or:
        return Formula::disj(formula(f.lhs(), env), formula(f.rhs(), env));
      case K::Implies:
        return Formula::implies(formula(f.lhs(), env), formula(f.rhs(), env));
      case K::Iff:
        return Formula::iff(formula(f.lhs(), env), formula(f.rhs(), env));
      case K::Forall:
      case K::Exists: {
        std::string v = counter_ == 0 ? "X" : "X" + std::to_string(counter_);
        ++counter_;
        auto saved = env.find(f.var()) != env.end()
                         ? std::optional<std::string>(env[f.var()])
                         : std::nullopt;
        env[f.var()] = v;
        Formula body = formula(f.body(), env);
        if (saved)
          env[f.var()] = *saved;
        else
          env.erase(f.var());
        return f.kind() == K::Forall ? Formula::forall(v, body) : Formula::exists(v, body);
      }
      case K::Top:
      case K::Bottom:
        return f;
    }
    return f;
  }
};

void writeTerm(std::ostream& out, const Term& t) {
  out << t.name();
  if (t.isApplication() && !t.args().empty()) {
    out << '(';
    for (std::size_t i = 0; i < t.args().size(); ++i) {
      if (i) out << ',';
      writeTerm(out, t.args()[i]);
    }
    out << ')';
  }
}

void writeFormula(std::ostream& out, const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Predicate:
      out << f.symbol();
      if (!f.terms().empty()) {
        out << '(';
        for (std::size_t i = 0; i < f.terms().size(); ++i) {
          if (i) out << ',';
          writeTerm(out, f.terms()[i]);
        }
        out << ')';
      }
      return;
    case K::Equals:
      writeTerm(out, f.terms()[0]);
      out << " = ";
      writeTerm(out, f.terms()[1]);
      return;
    case K::Not:
      if (f.body().kind() == K::Equals) {
        writeTerm(out, f.body().terms()[0]);
        out << " != ";
        writeTerm(out, f.body().terms()[1]);
        return;
      }
      out << "~ ";
      writeFormula(out, f.body());
      return;
    case K::And:
    case K::Or:
    case K::Implies:
    case K::Iff: {
      const char* op = f.kind() == K::And ? " & "
                       : f.kind() == K::Or ? " | "
                       : f.kind() == K::Implies ? " => "
                                                : " <=> ";
      out << '(';
      writeFormula(out, f.lhs());
      out << op;
      writeFormula(out, f.rhs());
      out << ')';
      return;
    }
    case K::Forall:
    case K::Exists: {
      out << (f.kind() == K::Forall ? "! [" : "? [");
      const Formula* cur = &f;
      bool first = true;
      while (cur->kind() == f.kind()) {
        out << (first ? "" : ",") << cur->var();
        first = false;
        cur = &cur->body();
      }
      out << "] : ";
      writeFormula(out, *cur);
      return;
    }
    case K::Top:
      out << "$true";
      return;
    case K::Bottom:
      out << "$false";
      return;
  }
}

}  // namespace

Problem emit(std::span<const NamedFormula> axioms, const Formula& conjecture) {
  Mangler m;
  Problem p;
  std::set<std::string> names{"goal"};
  for (const auto& a : axioms) {
    std::string base = lowerWord(a.name);
    if (base.empty()) base = "axiom";
    std::string name = base;
    for (int k = 2; names.count(name); ++k) name = base + "_" + std::to_string(k);
    names.insert(name);
    p.records.push_back({name, Role::Axiom, m.record(a.formula)});
  }
  p.records.push_back({"goal", Role::Conjecture, m.record(conjecture)});
  return p;
}

Problem emit(const kernel::Obligation& ob) {
  std::vector<NamedFormula> axioms;
  for (const auto& e : ob.axioms) axioms.push_back({e.id, e.formula});
  return emit(axioms, ob.conjecture);
}

std::string Problem::toText() const {
  std::ostringstream out;
  for (const auto& r : records) {
    out << "fof(" << r.name << ", " << (r.role == Role::Conjecture ? "conjecture" : "axiom")
        << ", ";
    writeFormula(out, r.formula);
    out << ").\n";
  }
  return out.str();
}

// ------------------------------------------------------------ reading

namespace {

class FofReader {
 public:
  explicit FofReader(std::string_view text) : s_(text) {}

  Problem run() {
    Problem p;
    for (skip(); pos_ < s_.size(); skip()) {
      std::string kw = word();
      if (kw != "fof") fail("expected fof");
      expect("(");
      Record r;
      r.name = name();
      expect(",");
      std::string role = word();
      if (role == "conjecture")
        r.role = Role::Conjecture;
      else if (role == "axiom" || role == "hypothesis" || role == "definition" ||
               role == "lemma" || role == "theorem" || role == "assumption")
        r.role = Role::Axiom;
      else
        fail("unsupported role '" + role + "'");
      expect(",");
      r.formula = formula();
      expect(")");
      expect(".");
      p.records.push_back(std::move(r));
    }
    return p;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos_); }

  void skip() {
    for (;;) {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '%') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (s_.substr(pos_, 2) == "/*") {
        auto end = s_.find("*/", pos_ + 2);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 2;
      } else {
        return;
      }
    }
  }

  bool at(std::string_view tok) {
    skip();
    return s_.substr(pos_, tok.size()) == tok;
  }
  bool accept(std::string_view tok) {
    if (!at(tok)) return false;
    pos_ += tok.size();
    return true;
  }
  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  static bool wordChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  std::string word() {
    skip();
    std::size_t start = pos_;
    if (pos_ < s_.size() && s_[pos_] == '$') ++pos_;
    while (pos_ < s_.size() && wordChar(s_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a word");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string name() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '\'') {
      auto end = s_.find('\'', pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated quoted name");
      std::string n(s_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return n;
    }
    return word();
  }

  bool upperNext() {
    skip();
    return pos_ < s_.size() && std::isupper(static_cast<unsigned char>(s_[pos_]));
  }

  Formula formula() {
    Formula l = unitary();
    if (accept("<=>")) return Formula::iff(l, unitary());
    if (accept("=>")) return Formula::implies(l, unitary());
    if (accept("<~>")) return Formula::negate(Formula::iff(l, unitary()));
    if (accept("<=")) return Formula::implies(unitary(), l);
    if (accept("~|")) return Formula::negate(Formula::disj(l, unitary()));
    if (accept("~&")) return Formula::negate(Formula::conj(l, unitary()));
    if (at("&")) {
      while (accept("&")) l = Formula::conj(l, unitary());
    } else if (at("|")) {
      while (accept("|")) l = Formula::disj(l, unitary());
    }
    return l;
  }

  Formula unitary() {
    if (accept("(")) {
      Formula f = formula();
      expect(")");
      return f;
    }
    if (at("~") && !at("~|") && !at("~&")) {
      ++pos_;
      return Formula::negate(unitary());
    }
    if (at("!") && !at("!=")) {
      ++pos_;
      return quantified(true);
    }
    if (accept("?")) return quantified(false);
    return atom();
  }

  Formula quantified(bool universal) {
    expect("[");
    std::vector<std::string> vars;
    do {
      if (!upperNext()) fail("expected a variable");
      vars.push_back(word());
    } while (accept(","));
    expect("]");
    expect(":");
    Formula body = unitary();
    for (auto it = vars.rbegin(); it != vars.rend(); ++it)
      body = universal ? Formula::forall(*it, body) : Formula::exists(*it, body);
    return body;
  }

  Formula atom() {
    if (accept("$true")) return Formula::top();
    if (accept("$false")) return Formula::bottom();
    std::size_t start = pos_;
    Term t = term();
    if (accept("!=")) return Formula::negate(Formula::equals(t, term()));
    if (at("=") && !at("=>")) {
      ++pos_;
      return Formula::equals(t, term());
    }
    if (t.isVariable()) {
      pos_ = start;
      fail("variable used as a formula");
    }
    if (t.isConstant()) return Formula::predicate(t.name());
    return Formula::predicate(t.name(), {t.args().begin(), t.args().end()});
  }

  Term term() {
    bool variable = upperNext();
    std::string n = word();
    if (variable) return Term::variable(n);
    if (!accept("(")) return Term::constant(n);
    std::vector<Term> args;
    do {
      args.push_back(term());
    } while (accept(","));
    expect(")");
    return Term::apply(n, std::move(args));
  }
};

}  // namespace

Problem parseFof(std::string_view text) { return FofReader(text).run(); }

ProverVerdict parseSzs(std::string_view output) {
  ProverVerdict v;
  v.output = std::string(output);
  std::istringstream in{std::string(output)};
  std::string line;
  bool found = false, inModel = false;
  std::string model;
  bool hasModel = false;
  while (std::getline(in, line)) {
    if (inModel) {
      if (line.find("SZS output end") != std::string::npos) {
        inModel = false;
        hasModel = true;
        continue;
      }
      model += line + "\n";
      continue;
    }
    if (line.find("SZS output start") != std::string::npos) {
      inModel = true;
      model.clear();
      continue;
    }
    auto at = line.find("SZS status");
    if (found || at == std::string::npos) continue;
    std::istringstream words(line.substr(at + 10));
    std::string status;
    words >> status;
    found = true;
    static const std::map<std::string, ProverStatus> kStatus = {
        {"Theorem", ProverStatus::Theorem},
        {"ContradictoryAxioms", ProverStatus::Theorem},
        {"Unsatisfiable", ProverStatus::Theorem},
        {"CounterSatisfiable", ProverStatus::CounterSatisfiable},
        {"CounterTheorem", ProverStatus::CounterSatisfiable},
        {"Satisfiable", ProverStatus::Satisfiable},
        {"Timeout", ProverStatus::Timeout},
        {"ResourceOut", ProverStatus::Timeout},
        {"GaveUp", ProverStatus::Unknown},
        {"Unknown", ProverStatus::Unknown},
        {"Error", ProverStatus::Error},
        {"OSError", ProverStatus::Error},
        {"InputError", ProverStatus::Error},
        {"SyntaxError", ProverStatus::Error},
        {"SemanticError", ProverStatus::Error},
        {"UsageError", ProverStatus::Error},
    };
    auto it = kStatus.find(status);
    v.status = it == kStatus.end() ? ProverStatus::Unknown : it->second;
  }
  if (hasModel && (v.status == ProverStatus::CounterSatisfiable ||
                   v.status == ProverStatus::Satisfiable))
    v.model = model;
  return v;
}

}  // namespace elfe::tptp
