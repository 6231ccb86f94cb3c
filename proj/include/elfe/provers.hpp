#pragma once

// Clausification, the built-in resolution prover, the finite model finder,
// external prover processes and the portfolio that races them.

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include "elfe/fol.hpp"
#include "elfe/verdict.hpp"

namespace elfe::kernel {
struct Obligation;
}

namespace elfe::provers {

struct Literal {
  bool positive = true;
  fol::Formula atom;  // Predicate or Equals

  friend bool operator==(const Literal&, const Literal&) = default;
};

// Disjunction of literals. Variables are fol variables named X0, X1, ...
// and are local to the clause.
struct Clause {
  std::vector<Literal> literals;

  bool empty() const { return literals.empty(); }
  friend bool operator==(const Clause&, const Clause&) = default;
};

std::string render(const Clause& c);

struct ClausifyOptions {
  // Append reflexivity, symmetry, transitivity and congruence axioms when
  // "=" occurs in the input.
  bool equalityAxioms = true;
};

// NNF, skolemization with fresh "sk"-prefixed symbols, CNF by distribution.
// Input formulas must be closed.
std::vector<Clause> clausify(std::span<const fol::Formula> formulas,
                             const ClausifyOptions& opts = {});

// Clauses of each input formula separately (sharing one skolem namespace),
// followed by the equality axioms for the whole set.
struct ClausifiedProblem {
  std::vector<std::vector<Clause>> perFormula;
  std::vector<Clause> equalityAxioms;
};
ClausifiedProblem clausifyEach(std::span<const fol::Formula> formulas,
                               const ClausifyOptions& opts = {});

struct ResolutionLimits {
  std::size_t maxClauses = 50000;
  std::chrono::milliseconds maxTime{10000};
};

enum class ProofResult { Theorem, Unknown };

struct ResolutionStats {
  std::size_t generated = 0;
  std::size_t kept = 0;
  std::size_t given = 0;
  std::chrono::milliseconds elapsed{0};
};

// Given-clause saturation over clausify(axioms ∪ {¬conjecture}) with
// ordered resolution, factoring, superposition and demodulation under KBO,
// plus subsumption. Returns Theorem only when the empty clause is derived.
ProofResult resolutionProve(std::span<const fol::Formula> axioms,
                            const fol::Formula& conjecture,
                            const ResolutionLimits& limits = {},
                            std::stop_token stop = {},
                            ResolutionStats* stats = nullptr);

// Finite interpretation over the domain {0, ..., size-1}.
struct FiniteModel {
  int domainSize = 0;
  // symbol/arity -> table indexed by the mixed-radix encoding of the
  // argument tuple (first argument most significant).
  struct Table {
    std::string symbol;
    int arity = 0;
    std::vector<int> values;  // element for functions, 0/1 for predicates
  };
  std::vector<Table> functions;   // including constants (arity 0)
  std::vector<Table> predicates;  // including propositions (arity 0)

  const Table* function(const std::string& name, int arity) const;
  const Table* predicate(const std::string& name, int arity) const;

  // Evaluates a closed formula; symbols without a table throw.
  bool evaluate(const fol::Formula& f) const;
  int evaluate(const fol::Term& t,
               const std::map<std::string, int>& env) const;
  bool evaluate(const fol::Formula& f, std::map<std::string, int>& env) const;

  // TPTP finite-interpretation style listing.
  std::string toString() const;
};

struct ModelSearchLimits {
  int maxDomain = 4;
  std::chrono::milliseconds maxTime{10000};
  // Domain sizes whose grounding would exceed this many clauses are skipped.
  std::size_t maxGroundClauses = 2'000'000;
};

// Searches domain sizes 1..maxDomain for an interpretation satisfying all
// axioms and falsifying the conjecture. Every returned model has been
// checked by evaluation.
std::optional<FiniteModel> findModel(std::span<const fol::Formula> axioms,
                                     const fol::Formula& conjecture,
                                     const ModelSearchLimits& limits = {},
                                     std::stop_token stop = {});

// ------------------------------------------------------------ portfolio

enum class ProverKind { External, InternalResolution, InternalModelFinder };

struct ProverConfig {
  std::string name;
  ProverKind kind = ProverKind::External;
  // Shell command with "{file}" (exactly once) and optionally "{timeout}".
  std::string command;
  std::chrono::seconds timeLimit{5};
};

// Built-in configurations with the default limits.
ProverConfig internalResolutionConfig();
ProverConfig internalModelFinderConfig();

// Checks the placeholder rule; throws std::invalid_argument.
void validate(const ProverConfig& cfg);

// Reads {"provers": [{"name", "command", "timeout"}...]}; throws on
// malformed input.
std::vector<ProverConfig> loadProverConfigs(const std::string& path);

// Writes the problem to a temporary file and runs the command with a wall
// clock cap of timeLimit plus a grace period. Never throws for process
// failures: they become Error verdicts.
ProverVerdict runExternal(const ProverConfig& cfg, const std::string& problem,
                          std::stop_token stop = {});

// Process-wide cap on concurrently running external provers (default 8).
// Callers beyond the cap wait for a slot.
void setMaxExternalProcesses(std::size_t n);

struct NamedVerdict {
  std::string prover;
  ProverVerdict verdict;
};

enum class ObligationStatus { Proved, Refuted, Unknown, Error };

struct ObligationResult {
  ObligationStatus status = ObligationStatus::Unknown;
  std::string prover;  // winning prover for Proved / Refuted
  std::optional<std::string> model;
  std::string diagnostics;
  std::vector<NamedVerdict> verdicts;
  std::chrono::milliseconds elapsed{0};
};

// Pure combination rule: Theorem -> Proved, model-bearing answer ->
// Refuted, both -> Error, neither -> Unknown. The winner is the first
// decisive prover in `configOrder`.
ObligationResult combineVerdicts(std::span<const NamedVerdict> verdicts,
                                 std::span<const std::string> configOrder);

// Runs every configured prover concurrently on the obligation; the first
// decisive verdict cancels the rest.
ObligationResult portfolio(const kernel::Obligation& ob,
                           std::span<const ProverConfig> cfgs);

// Same, on formulas directly (problem text is used for external provers).
ObligationResult portfolio(std::span<const fol::Formula> axioms,
                           const fol::Formula& conjecture,
                           const std::string& tptpProblem,
                           std::span<const ProverConfig> cfgs);

}  // namespace elfe::provers
