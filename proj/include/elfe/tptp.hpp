#pragma once

// TPTP first-order form: problems for external provers and the SZS status
// lines they print back.

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "elfe/fol.hpp"
#include "elfe/kernel.hpp"
#include "elfe/verdict.hpp"

namespace elfe::tptp {

enum class Role { Axiom, Conjecture };

struct Record {
  std::string name;
  Role role = Role::Axiom;
  // Formula over TPTP names: functors lowercase words, bound variables
  // X, X1, X2, ... numbered per record in binding order.
  fol::Formula formula = fol::Formula::top();

  friend bool operator==(const Record&, const Record&) = default;
};

struct Problem {
  std::vector<Record> records;  // axioms in context order, then "goal"

  // One "fof(name, role, formula)." line per record.
  std::string toText() const;
  friend bool operator==(const Problem&, const Problem&) = default;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& msg, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct NamedFormula {
  std::string name;
  fol::Formula formula;
};

// Axiom names are the sanitized statement ids, the conjecture is "goal".
// Throws std::invalid_argument when an identifier has no TPTP form.
Problem emit(std::span<const NamedFormula> axioms, const fol::Formula& conjecture);
Problem emit(const kernel::Obligation& ob);

// Functor / record name for an identifier: kept when it already is a TPTP
// lower word, otherwise primes become "_p", other characters are dropped
// and a leading non-lowercase character gets an "s_" prefix.
std::string lowerWord(std::string_view name);

// Reads fof records; "%" comments and blank lines are skipped.
Problem parseFof(std::string_view text);

// First "SZS status" line: Theorem, ContradictoryAxioms, Unsatisfiable ->
// Theorem; CounterSatisfiable, CounterTheorem -> CounterSatisfiable;
// Satisfiable; Timeout, ResourceOut -> Timeout; error statuses -> Error;
// anything else or no status line -> Unknown. The model is the text
// between "SZS output start" and "SZS output end".
ProverVerdict parseSzs(std::string_view output);

}  // namespace elfe::tptp
