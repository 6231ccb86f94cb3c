#pragma once

// The whole pipeline for one text: load, elaborate, collect obligations,
// run the prover portfolio on each, and report a status per statement and
// per source line.

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "elfe/language.hpp"
#include "elfe/provers.hpp"

namespace elfe::verifier {

using language::SourceSpan;

enum class Status { ParsedOnly, AssumedOk, Proved, Unknown, Refuted, ParseError };

const char* toString(Status s);
std::optional<Status> statusFromString(std::string_view s);

enum class Color { Green, Orange, Red };

const char* toString(Color c);

// Assumed and proved statements are green, failures red. Unchecked
// statements are orange, and so are ByContext leaves in the internal view.
Color statusColor(Status s);

struct StatementReport {
  std::string id;
  SourceSpan span;
  std::string file;                     // library name, empty for the main text
  Status status = Status::ParsedOnly;
  std::string kind;                     // proof kind of the statement
  std::string prover;                   // winner for Proved / Refuted
  std::optional<std::string> model;     // Refuted only
  std::optional<std::string> tptp;      // obligations only
  std::optional<std::string> obligation;  // rendered conjecture
  std::optional<std::string> message;     // diagnostics
  std::chrono::milliseconds elapsed{0};
};

Color statusColor(const StatementReport& r, bool internalView);

struct LineStatus {
  int line = 0;
  Status status = Status::ParsedOnly;
};

struct Report {
  bool verified = true;
  // Assumed sentences and proof obligations in source order.
  std::vector<StatementReport> statements;
  // Worst status per main-text line that belongs to a statement.
  std::vector<LineStatus> lines;
  std::chrono::milliseconds elapsed{0};
};

struct Options {
  std::vector<std::filesystem::path> libPath;
  // Empty: the built-in resolution prover and model finder.
  std::vector<provers::ProverConfig> provers;
  // Overrides every prover's own limit.
  std::optional<std::chrono::seconds> timeout;
  // Each obligation's problem is written there as "<id>.p".
  std::optional<std::filesystem::path> emitDir;
  // False: elaborate only, obligations stay ParsedOnly.
  bool check = true;
  // Obligations verified at the same time; 0 picks the core count.
  unsigned parallelism = 0;
};

// ELFE_LIB_PATH (":"-separated) when set, otherwise ./lib followed by the
// library directory of the source tree.
std::vector<std::filesystem::path> defaultLibraryPath();

// Never throws for problems in the text: they become ParseError entries.
Report verifyText(std::string_view text, const Options& options);

// {verified, statements: [{id, span: {startLine, startCol, endLine, endCol},
//  status, kind, prover?, model?, tptp?, obligation?, message?, file?, ms}],
//  lines: [{line, status, color}], ms}. Timings are written as 0 when
// `timings` is false so the output only depends on the verdicts.
std::string toJson(const Report& r, bool timings = true, int indent = -1);

}  // namespace elfe::verifier
