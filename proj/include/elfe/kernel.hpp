#pragma once

// Statement sequences. A document becomes one root sequence: definitions
// and axioms are Assumed, lemmas get a proof tree built from four sound
// constructions (forall intro, implies intro, goal split, cornerstone).
// Leaves proved ByContext / BySubContext become obligations.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "elfe/fol.hpp"
#include "elfe/language.hpp"

namespace elfe::kernel {

using language::SourceSpan;

enum class ProofKind { Assumed, ByContext, BySubContext, BySequence, BySplit };

const char* toString(ProofKind k);

struct Statement {
  std::string id;
  fol::Formula goal = fol::Formula::top();
  ProofKind proof = ProofKind::Assumed;
  std::vector<std::string> hints;     // BySubContext: referenced statement ids
  std::vector<Statement> children;    // BySequence / BySplit
  SourceSpan span;
  std::string file;                   // library name, empty for the main text
  bool local = false;                 // created inside a lemma proof
  bool implicit = false;              // no source sentence of its own

  bool isLeaf() const {
    return proof == ProofKind::ByContext || proof == ProofKind::BySubContext;
  }
};

struct ContextEntry {
  std::string id;
  fol::Formula formula = fol::Formula::top();
  bool local = false;
};

using Context = std::vector<ContextEntry>;

struct Obligation {
  std::string id;
  Context axioms;
  fol::Formula conjecture = fol::Formula::top();
  SourceSpan span;
  std::string file;
  bool restricted = false;  // came from a BySubContext leaf
};

class ElaborationError : public std::runtime_error {
 public:
  ElaborationError(const std::string& message, SourceSpan span, std::string file = {});
  const SourceSpan& span() const { return span_; }
  const std::string& file() const { return file_; }
  std::string message() const { return message_; }

 private:
  std::string message_;
  SourceSpan span_;
  std::string file_;
};

// Root of the whole document: goal ⊤, BySequence over one statement per
// Definition / Axiom / Lemma item in document order.
Statement elaborate(const language::Document& doc);

// Proof tree of a single lemma with the given id; inner statements are
// numbered "<id>_s1", "<id>_s2", ... in preorder. Fresh constants avoid the
// symbols in `avoid`. Hints stay item names until elaborate() resolves them.
Statement elaborateLemma(const language::Item& lemma, const std::string& id,
                         const std::set<std::string>& avoid = {});

// Γ of the statement with the given id: goals of preceding siblings in
// BySequence parents plus the parent's context; BySplit children only see
// their parent's context. nullopt when the id is absent.
std::optional<Context> context(const Statement& root, const std::string& id);

const Statement* find(const Statement& root, const std::string& id);

// One obligation per ByContext / BySubContext leaf in depth-first order.
// BySubContext leaves get the hinted statements plus every context entry
// created inside the enclosing lemma. Throws ElaborationError for unknown
// hints.
std::vector<Obligation> collectObligations(const Statement& root);

// The four constructions, usable on their own.
Statement forallIntro(const std::string& id, const fol::Formula& goal, Statement body);
Statement impliesIntro(const std::string& id, const fol::Formula& goal,
                       Statement assumption, Statement body);
Statement splitGoal(const std::string& id, const fol::Formula& goal,
                    Statement soundness, std::vector<Statement> alternatives);
Statement cornerstone(const std::string& id, const fol::Formula& goal,
                      Statement derived, Statement rest);

}  // namespace elfe::kernel
