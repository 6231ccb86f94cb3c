// Batch front-end: verify one text, print a per-line summary or JSON.
// Exit status 0 verified, 1 not verified, 2 usage or parse error.

#include <unistd.h>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "elfe/verifier.hpp"

namespace {

using namespace elfe;

std::vector<std::string> splitLines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

const char* ansi(verifier::Color c) {
  switch (c) {
    case verifier::Color::Green: return "\033[32m";
    case verifier::Color::Orange: return "\033[33m";
    case verifier::Color::Red: return "\033[31m";
  }
  return "";
}

void printHuman(const verifier::Report& rep, const std::string& text, bool color, bool verbose) {
  const auto lines = splitLines(text);
  const char* reset = color ? "\033[0m" : "";
  for (const auto& l : rep.lines) {
    auto c = verifier::statusColor(l.status);
    std::string src = l.line >= 1 && l.line <= static_cast<int>(lines.size()) ? lines[l.line - 1] : "";
    std::cout << (color ? ansi(c) : "") << std::setw(4) << l.line << "  " << std::left
              << std::setw(10) << verifier::toString(l.status) << std::right << reset << "  "
              << src << "\n";
  }
  for (const auto& s : rep.statements) {
    bool failed = s.status != verifier::Status::Proved && s.status != verifier::Status::AssumedOk;
    if (!failed && !verbose) continue;
    if (!verbose && s.status == verifier::Status::ParsedOnly) continue;
    auto c = verifier::statusColor(s, verbose);
    std::cout << "\n"
              << (color ? ansi(c) : "") << s.id << ": " << verifier::toString(s.status) << reset;
    if (!s.file.empty()) std::cout << " in " << s.file;
    if (s.span.valid()) std::cout << " (line " << s.span.startLine << ", column " << s.span.startCol << ")";
    if (!s.kind.empty()) std::cout << " [" << s.kind << "]";
    if (!s.prover.empty()) std::cout << " by " << s.prover;
    if (s.elapsed.count()) std::cout << ", " << s.elapsed.count() << " ms";
    std::cout << "\n";
    if (s.obligation) std::cout << "  goal: " << *s.obligation << "\n";
    if (s.message)
      for (const auto& m : splitLines(*s.message)) std::cout << "  " << m << "\n";
    if (s.model) std::cout << "  countermodel:\n" << *s.model;
    if (verbose && s.tptp) std::cout << *s.tptp;
  }
  std::cout << "\n" << (rep.verified ? "verified" : "not verified") << " (" << rep.elapsed.count()
            << " ms)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checks a proof text written in the Elfe language."};
  std::string input;
  std::vector<std::string> libs;
  std::vector<std::string> proverNames;
  std::string configPath;
  int timeout = 0;
  std::string emitDir;
  bool asJson = false, verbose = false, noCheck = false;
  app.add_option("input", input, "Text to verify, '-' for stdin")->required();
  app.add_option("--lib", libs, "Library directory (repeatable)");
  app.add_option("--provers", proverNames, "Provers to run, by name")->delimiter(',');
  app.add_option("--config", configPath, "Prover configuration (JSON)");
  app.add_option("--timeout", timeout, "Seconds per obligation and prover")->check(CLI::PositiveNumber);
  app.add_option("--emit-tptp", emitDir, "Write each obligation as <id>.p here");
  app.add_flag("--json", asJson, "Print the report as JSON");
  app.add_flag("--verbose", verbose, "Show every statement with its obligation");
  app.add_flag("--no-check", noCheck, "Elaborate only, do not call provers");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::vector<provers::ProverConfig> available = {provers::internalResolutionConfig(),
                                                  provers::internalModelFinderConfig()};
  if (!configPath.empty()) {
    try {
      auto loaded = provers::loadProverConfigs(configPath);
      available.insert(available.end(), loaded.begin(), loaded.end());
    } catch (const std::exception& e) {
      std::cerr << "elfe: " << e.what() << "\n";
      return 2;
    }
  }
  verifier::Options opts;
  if (proverNames.empty()) {
    opts.provers = available;
  } else {
    for (const auto& n : proverNames) {
      auto it = std::find_if(available.begin(), available.end(),
                             [&](const auto& c) { return c.name == n; });
      if (it == available.end()) {
        std::cerr << "elfe: unknown prover '" << n << "'\n";
        return 2;
      }
      opts.provers.push_back(*it);
    }
  }
  if (libs.empty())
    opts.libPath = verifier::defaultLibraryPath();
  else
    opts.libPath.assign(libs.begin(), libs.end());
  if (timeout > 0) opts.timeout = std::chrono::seconds(timeout);
  if (!emitDir.empty()) opts.emitDir = emitDir;
  opts.check = !noCheck;

  std::string text;
  if (input == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    std::ifstream in(input, std::ios::binary);
    if (!in) {
      std::cerr << "elfe: cannot read '" << input << "'\n";
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  auto rep = verifier::verifyText(text, opts);
  if (asJson)
    std::cout << verifier::toJson(rep, true, 2) << "\n";
  else
    printHuman(rep, text, ::isatty(STDOUT_FILENO) != 0, verbose);

  bool parseError = std::any_of(rep.statements.begin(), rep.statements.end(), [](const auto& s) {
    return s.status == verifier::Status::ParseError;
  });
  if (parseError) return 2;
  return rep.verified ? 0 : 1;
}
