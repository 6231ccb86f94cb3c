#pragma once

// First-order terms and formulas.
//
// Terms and formulas are immutable trees with shared structure; copying a
// value copies a pointer. Equality is structural: bound variable names are
// part of the structure.

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace elfe::fol {

class Term {
 public:
  enum class Kind { Variable, Constant, Application };

  static Term variable(std::string name);
  static Term constant(std::string name);
  static Term apply(std::string symbol, std::vector<Term> args);

  Kind kind() const { return node_->kind; }
  bool isVariable() const { return kind() == Kind::Variable; }
  bool isConstant() const { return kind() == Kind::Constant; }
  bool isApplication() const { return kind() == Kind::Application; }

  // Variable name, constant name or function symbol.
  const std::string& name() const { return node_->name; }
  std::span<const Term> args() const { return node_->args; }

  friend bool operator==(const Term& a, const Term& b);
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  struct Node {
    Kind kind;
    std::string name;
    std::vector<Term> args;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

class Formula {
 public:
  enum class Kind {
    Predicate,
    Equals,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Forall,
    Exists,
    Top,
    Bottom
  };

  static Formula predicate(std::string symbol, std::vector<Term> args = {});
  static Formula equals(Term lhs, Term rhs);
  static Formula negate(Formula f);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  static Formula implies(Formula a, Formula b);
  static Formula iff(Formula a, Formula b);
  // Quantifier constructors rename inner binders of the same variable so that
  // no variable is bound twice on one binder path.
  static Formula forall(std::string var, Formula body);
  static Formula exists(std::string var, Formula body);
  static Formula top();
  static Formula bottom();

  // Left-nested conjunction of the given formulas; top() when empty.
  static Formula conjunction(std::span<const Formula> parts);

  Kind kind() const { return node_->kind; }
  bool isAtom() const {
    return kind() == Kind::Predicate || kind() == Kind::Equals;
  }
  bool isBinary() const {
    return kind() == Kind::And || kind() == Kind::Or ||
           kind() == Kind::Implies || kind() == Kind::Iff;
  }
  bool isQuantifier() const {
    return kind() == Kind::Forall || kind() == Kind::Exists;
  }

  // Predicate symbol, or the bound variable of a quantifier.
  const std::string& symbol() const { return node_->symbol; }
  const std::string& var() const { return node_->symbol; }
  // Predicate arguments, or {lhs, rhs} for Equals.
  std::span<const Term> terms() const { return node_->terms; }
  // Operand(s) of connectives; body of quantifiers.
  std::span<const Formula> children() const { return node_->children; }
  const Formula& lhs() const { return node_->children[0]; }
  const Formula& rhs() const { return node_->children[1]; }
  const Formula& body() const { return node_->children[0]; }

  friend bool operator==(const Formula& a, const Formula& b);
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b);

 private:
  struct Node {
    Kind kind;
    std::string symbol;
    std::vector<Term> terms;
    std::vector<Formula> children;
  };
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula make(Kind k, std::string symbol, std::vector<Term> terms,
                      std::vector<Formula> children);
  std::shared_ptr<const Node> node_;
};

// Variables in order of first textual occurrence, without duplicates.
std::vector<std::string> freeVarList(const Formula& f);
std::set<std::string> freeVars(const Formula& f);
std::vector<std::string> termVars(const Term& t);

// Every identifier occurring anywhere in f: variables (free and bound),
// constants, function and predicate symbols.
std::set<std::string> symbolsOf(const Formula& f);
void collectSymbols(const Term& t, std::set<std::string>& out);

// Constant names occurring in f.
std::set<std::string> constantsOf(const Formula& f);

bool isClosed(const Formula& f);

// Capture-avoiding substitution of t for the free occurrences of v.
Formula substitute(const Formula& f, const std::string& v, const Term& t);
Term substitute(const Term& term, const std::string& v, const Term& t);

// Simultaneous substitution of free variables.
Formula substitute(const Formula& f, const std::map<std::string, Term>& s);

// Quantifies all free variables, first occurrence outermost.
Formula universalClosure(const Formula& f);

// Splits the maximal prefix of universal quantifiers: returns the
// variables in binding order and the remaining body.
std::pair<std::vector<std::string>, Formula> stripForalls(const Formula& f);

struct FreezeMap {
  std::vector<std::pair<std::string, std::string>> entries;  // var -> constant

  bool empty() const { return entries.empty(); }
  const std::string* find(const std::string& var) const;
};

class FreezeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FreezeResult {
  Formula formula;
  FreezeMap map;
};

// Removes the outer universal quantifiers for `vars` and replaces each by a
// fresh constant "c<name>" (primes dropped, numeric suffix on collision)
// that occurs neither in f nor in `avoid`. Throws FreezeError when a
// variable is not bound in the outermost universal prefix.
FreezeResult freeze(const Formula& f, std::span<const std::string> vars,
                    const std::set<std::string>& avoid = {});

// Splits nested conjunctions into their conjuncts (left to right).
std::vector<Formula> conjuncts(const Formula& f);

// Structural equality modulo the order (and grouping) of conjunctions.
bool sameUpToConjunctOrder(const Formula& a, const Formula& b);

// Deterministic, re-parseable text. Bound variables print bare, free
// variables with a leading '?', constants bare (or with '#' when shadowed by
// a bound variable of the same name). A universal prefix whose body is an
// implication guarded by one atom per variable prints in guarded form
// "∀set(A), set(B). φ".
std::string render(const Formula& f);
std::string render(const Term& t);

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " at offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Inverse of render.
Formula parseFormula(std::string_view text);

bool isIdentifierChar(char c);

}  // namespace elfe::fol
