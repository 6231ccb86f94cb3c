#pragma once

// The controlled language: tokens with source spans, documents made of
// Include / Notation / Let / Definition / Axiom / Lemma items, proof steps,
// and the translation of sentences into first-order formulas.
//
// Pipeline: tokenize -> parse -> resolveIncludes -> desugar ->
// applyLetBindings. load() runs all of it.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "elfe/fol.hpp"

namespace elfe::language {

// 1-based lines and columns (columns count code points); the end position
// is exclusive. Offsets are byte offsets into the text.
struct SourceSpan {
  int startLine = 0;
  int startCol = 0;
  int endLine = 0;
  int endCol = 0;
  std::size_t startOffset = 0;
  std::size_t endOffset = 0;

  bool valid() const { return startLine > 0; }
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

// Smallest span covering both.
SourceSpan cover(const SourceSpan& a, const SourceSpan& b);

enum class TokenKind { Word, Symbol, Punct };

struct Token {
  TokenKind kind;
  std::string text;
  SourceSpan span;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, SourceSpan span,
             std::vector<std::string> expected = {}, std::string file = {});
  const SourceSpan& span() const { return span_; }
  const std::vector<std::string>& expected() const { return expected_; }
  // Library name when the error is inside an included file.
  const std::string& file() const { return file_; }
  std::string message() const { return message_; }

 private:
  std::string message_;
  SourceSpan span_;
  std::vector<std::string> expected_;
  std::string file_;
};

// Identifiers are runs of [A-Za-z0-9_']. Non-ASCII symbols are one token
// each, except runs of superscripts ("⁻¹"). "%" starts a comment that runs
// to the end of the line. Throws ParseError on invalid UTF-8.
std::vector<Token> tokenize(std::string_view text);

// ------------------------------------------------------------ notations

struct NotationPattern {
  enum class Kind { Term, Predicate };
  struct Part {
    bool placeholder = false;
    std::string text;
    friend bool operator==(const Part&, const Part&) = default;
  };

  std::string symbol;
  Kind kind = Kind::Term;
  std::vector<Part> parts;

  int arity() const;
  // Literal structure with placeholders as "_", e.g. "_ : _ → _".
  std::string skeleton() const;
};

// Builds a pattern from its declaration tokens: alphabetic tokens are the
// placeholders. Patterns containing a relational literal (":", "→", "⊆",
// "≤", ...) form predicates, all others form terms. Throws ParseError when
// the pattern has no literal part.
NotationPattern makeNotation(const std::string& symbol,
                             std::span<const Token> pattern);

class NotationRegistry {
 public:
  // Re-declaring an identical pattern is a no-op; the same skeleton with a
  // different symbol is an ambiguity error.
  void add(NotationPattern p, const SourceSpan& where = {});
  std::span<const NotationPattern> patterns() const { return patterns_; }

 private:
  std::vector<NotationPattern> patterns_;
};

// Parses a formula or term of the controlled language. The whole token
// slice must be consumed. Unknown words in term position are variables.
fol::Formula parseSentence(std::span<const Token> tokens,
                           const NotationRegistry& notations);
fol::Term parseTerm(std::span<const Token> tokens,
                    const NotationRegistry& notations);

// ------------------------------------------------------------ documents

struct Step {
  enum class Kind { Assume, Then, Hence, Case, Proof };
  Kind kind = Kind::Then;
  std::vector<Token> tokens;           // the formula
  std::optional<fol::Formula> formula;  // filled by desugar
  std::vector<std::string> hints;      // "by" names
  std::vector<Step> body;              // Case and Proof blocks
  SourceSpan span;                     // sentence, or block header
  SourceSpan endSpan;                  // "qed." of a block
};

struct Item {
  enum class Kind { Include, Notation, Let, Definition, Axiom, Lemma };
  Kind kind = Kind::Definition;
  std::string name;
  std::vector<std::string> includes;
  std::vector<Token> tokens;  // formula, notation pattern or Let clause
  std::optional<NotationPattern> notation;

  // Let: groups of newly bound variables with their guard.
  struct LetGroup {
    std::vector<std::string> vars;
    fol::Formula guard;
  };
  std::vector<LetGroup> letGroups;

  std::optional<fol::Formula> formula;    // desugared, may have free variables
  std::optional<fol::Formula> statement;  // closed, Let guards applied
  bool letGuarded = false;                // statement starts with Let guards

  bool hasProof = false;
  std::vector<Step> proof;
  SourceSpan span;      // the header sentence
  SourceSpan proofEnd;  // final "qed."
  std::string file;     // library name; empty for the main text
};

struct Document {
  std::vector<Item> items;
};

Document parse(std::span<const Token> tokens);
inline Document parse(std::string_view text) { return parse(tokenize(text)); }

// Splices included libraries ("<name>.elfe" on the search path) before the
// including document's items, depth first, each library once. Throws
// ParseError for missing libraries and include cycles.
Document resolveIncludes(Document doc,
                         std::span<const std::filesystem::path> searchPath);

// Locates "<name>.elfe"; nullopt when absent.
std::optional<std::filesystem::path> findLibrary(
    const std::string& name, std::span<const std::filesystem::path> searchPath);

// Registers notations in document order and translates every formula,
// Let clause and proof step.
void desugar(Document& doc);

// Closes Definition / Axiom / Lemma formulas: Let-bound variables they
// mention (with the variables of their guards) are universally quantified
// in declaration order with the guards as antecedent; remaining free
// variables are closed inside. Let scopes are per file.
void applyLetBindings(Document& doc);

Document load(std::string_view text,
              std::span<const std::filesystem::path> searchPath);

}  // namespace elfe::language
