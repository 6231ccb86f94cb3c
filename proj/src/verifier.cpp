#include "elfe/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <thread>

#include "elfe/kernel.hpp"
#include "elfe/tptp.hpp"
#include "json.hpp"

namespace elfe::verifier {

namespace {

using Clock = std::chrono::steady_clock;

int severity(Status s) {
  switch (s) {
    case Status::AssumedOk: return 0;
    case Status::Proved: return 1;
    case Status::ParsedOnly: return 2;
    case Status::Unknown: return 3;
    case Status::Refuted: return 4;
    case Status::ParseError: return 5;
  }
  return 0;
}

Status worse(Status a, Status b) { return severity(a) >= severity(b) ? a : b; }

std::string fileName(const std::string& id) {
  std::string out;
  for (char c : id)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') ? c : '_';
  return out;
}

struct Pending {
  std::size_t entry;
  const kernel::Obligation* ob;
};

void collect(const kernel::Statement& s, const std::string& file,
             const std::map<std::string, const kernel::Obligation*>& obligations,
             std::vector<StatementReport>& out, std::vector<Pending>& pending) {
  if (s.isLeaf()) {
    StatementReport r;
    r.id = s.id;
    r.span = s.span;
    r.file = file;
    r.kind = kernel::toString(s.proof);
    auto it = obligations.find(s.id);
    if (it != obligations.end()) {
      r.obligation = fol::render(it->second->conjecture);
      pending.push_back({out.size(), it->second});
    }
    out.push_back(std::move(r));
    return;
  }
  if (s.proof == kernel::ProofKind::Assumed && !s.implicit && file.empty()) {
    StatementReport r;
    r.id = s.id;
    r.span = s.span;
    r.status = Status::AssumedOk;
    r.kind = kernel::toString(s.proof);
    out.push_back(std::move(r));
  }
  for (const auto& c : s.children) collect(c, file, obligations, out, pending);
}

void check(StatementReport& r, const kernel::Obligation& ob, const Options& options,
           const std::vector<provers::ProverConfig>& cfgs) {
  const auto start = Clock::now();
  try {
    r.tptp = tptp::emit(ob).toText();
  } catch (const std::exception& e) {
    r.message = std::string("no TPTP form: ") + e.what();
  }
  if (options.emitDir && r.tptp) {
    std::error_code ec;
    std::filesystem::create_directories(*options.emitDir, ec);
    std::ofstream out(*options.emitDir / (fileName(r.id) + ".p"));
    out << *r.tptp;
    if (!out) r.message = "cannot write " + (*options.emitDir / (fileName(r.id) + ".p")).string();
  }
  if (!options.check) return;
  auto res = provers::portfolio(ob, cfgs);
  switch (res.status) {
    case provers::ObligationStatus::Proved:
      r.status = Status::Proved;
      r.prover = res.prover;
      break;
    case provers::ObligationStatus::Refuted:
      r.status = Status::Refuted;
      r.prover = res.prover;
      r.model = res.model ? *res.model : std::string();
      break;
    case provers::ObligationStatus::Unknown:
    case provers::ObligationStatus::Error:
      r.status = Status::Unknown;
      if (!res.diagnostics.empty()) r.message = res.diagnostics;
      break;
  }
  r.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
}

Report errorReport(const std::string& message, SourceSpan span, const std::string& file) {
  Report rep;
  rep.verified = false;
  StatementReport r;
  r.id = "error";
  r.span = span;
  r.file = file;
  r.status = Status::ParseError;
  r.message = file.empty() ? message : file + ": " + message;
  rep.statements.push_back(r);
  if (file.empty() && span.valid()) {
    for (int l = span.startLine; l <= std::max(span.startLine, span.endLine); ++l)
      rep.lines.push_back({l, Status::ParseError});
  } else {
    rep.lines.push_back({1, Status::ParseError});
  }
  return rep;
}

}  // namespace

const char* toString(Status s) {
  switch (s) {
    case Status::ParsedOnly: return "ParsedOnly";
    case Status::AssumedOk: return "AssumedOk";
    case Status::Proved: return "Proved";
    case Status::Unknown: return "Unknown";
    case Status::Refuted: return "Refuted";
    case Status::ParseError: return "ParseError";
  }
  return "ParsedOnly";
}

std::optional<Status> statusFromString(std::string_view s) {
  for (auto st : {Status::ParsedOnly, Status::AssumedOk, Status::Proved, Status::Unknown,
                  Status::Refuted, Status::ParseError})
    if (s == toString(st)) return st;
  return std::nullopt;
}

const char* toString(Color c) {
  switch (c) {
    case Color::Green: return "green";
    case Color::Orange: return "orange";
    case Color::Red: return "red";
  }
  return "red";
}

Color statusColor(Status s) {
  switch (s) {
    case Status::AssumedOk:
    case Status::Proved: return Color::Green;
    case Status::ParsedOnly: return Color::Orange;
    case Status::Unknown:
    case Status::Refuted:
    case Status::ParseError: return Color::Red;
  }
  return Color::Red;
}

Color statusColor(const StatementReport& r, bool internalView) {
  if (internalView && r.status == Status::Proved && r.kind == "ByContext") return Color::Orange;
  return statusColor(r.status);
}

std::vector<std::filesystem::path> defaultLibraryPath() {
  std::vector<std::filesystem::path> out;
  if (const char* env = std::getenv("ELFE_LIB_PATH"); env && *env) {
    std::string_view rest = env;
    while (!rest.empty()) {
      auto colon = rest.find(':');
      auto part = rest.substr(0, colon);
      if (!part.empty()) out.emplace_back(part);
      if (colon == std::string_view::npos) break;
      rest.remove_prefix(colon + 1);
    }
    return out;
  }
  out.emplace_back("lib");
#ifdef ELFE_DEFAULT_LIB_DIR
  out.emplace_back(ELFE_DEFAULT_LIB_DIR);
#endif
  return out;
}

Report verifyText(std::string_view text, const Options& options) {
  const auto start = Clock::now();
  language::Document doc;
  kernel::Statement root;
  std::vector<kernel::Obligation> obligations;
  try {
    doc = language::load(text, options.libPath);
    root = kernel::elaborate(doc);
    obligations = kernel::collectObligations(root);
  } catch (const language::ParseError& e) {
    return errorReport(e.message(), e.span(), e.file());
  } catch (const kernel::ElaborationError& e) {
    return errorReport(e.message(), e.span(), e.file());
  } catch (const std::exception& e) {
    return errorReport(e.what(), {}, {});
  }

  std::map<std::string, const kernel::Obligation*> byId;
  for (const auto& ob : obligations) byId[ob.id] = &ob;

  // One top-level statement per item with a closed statement.
  std::vector<const language::Item*> items;
  for (const auto& it : doc.items)
    if (it.statement) items.push_back(&it);

  Report rep;
  std::vector<Pending> pending;
  struct Extent {
    int first, last;
    std::size_t begin, end;  // entries of this item
  };
  std::vector<Extent> extents;
  for (std::size_t i = 0; i < root.children.size() && i < items.size(); ++i) {
    const auto& item = *items[i];
    std::size_t begin = rep.statements.size();
    collect(root.children[i], item.file, byId, rep.statements, pending);
    if (item.file.empty()) {
      int last = item.hasProof && item.proofEnd.valid() ? item.proofEnd.endLine : item.span.endLine;
      extents.push_back({item.span.startLine, last, begin, rep.statements.size()});
    }
  }

  std::vector<provers::ProverConfig> cfgs = options.provers;
  if (cfgs.empty())
    cfgs = {provers::internalResolutionConfig(), provers::internalModelFinderConfig()};
  if (options.timeout)
    for (auto& c : cfgs) c.timeLimit = *options.timeout;

  unsigned workers = options.parallelism ? options.parallelism
                                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(pending.size()));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k; (k = next++) < pending.size();)
          check(rep.statements[pending[k].entry], *pending[k].ob, options, cfgs);
      });
  }

  // Line statuses: the worst entry covering the line, otherwise the worst
  // entry of the enclosing item.
  std::map<int, Status> lines;
  for (const auto& e : extents) {
    Status whole = Status::AssumedOk;
    for (std::size_t k = e.begin; k < e.end; ++k) whole = worse(whole, rep.statements[k].status);
    for (int l = e.first; l <= e.last; ++l) {
      std::optional<Status> s;
      for (std::size_t k = e.begin; k < e.end; ++k) {
        const auto& sp = rep.statements[k].span;
        if (sp.startLine <= l && l <= sp.endLine) s = s ? worse(*s, rep.statements[k].status)
                                                        : rep.statements[k].status;
      }
      auto st = s.value_or(whole);
      auto [it, fresh] = lines.emplace(l, st);
      if (!fresh) it->second = worse(it->second, st);
    }
  }
  for (auto [l, s] : lines) rep.lines.push_back({l, s});

  std::stable_sort(rep.statements.begin(), rep.statements.end(),
                   [](const StatementReport& a, const StatementReport& b) {
                     if (a.file.empty() != b.file.empty()) return !a.file.empty();
                     return a.span.startOffset < b.span.startOffset;
                   });
  rep.verified = std::all_of(rep.statements.begin(), rep.statements.end(),
                             [](const StatementReport& r) {
                               return r.status == Status::AssumedOk || r.status == Status::Proved;
                             });
  rep.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return rep;
}

std::string toJson(const Report& r, bool timings, int indent) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["verified"] = r.verified;
  j["statements"] = ordered_json::array();
  for (const auto& s : r.statements) {
    ordered_json e;
    e["id"] = s.id;
    e["span"] = {{"startLine", s.span.startLine},
                 {"startCol", s.span.startCol},
                 {"endLine", s.span.endLine},
                 {"endCol", s.span.endCol}};
    e["status"] = toString(s.status);
    if (!s.kind.empty()) e["kind"] = s.kind;
    if (!s.prover.empty()) e["prover"] = s.prover;
    if (s.model) e["model"] = *s.model;
    if (s.tptp) e["tptp"] = *s.tptp;
    if (s.obligation) e["obligation"] = *s.obligation;
    if (s.message) e["message"] = *s.message;
    if (!s.file.empty()) e["file"] = s.file;
    e["ms"] = timings ? s.elapsed.count() : 0;
    j["statements"].push_back(std::move(e));
  }
  j["lines"] = ordered_json::array();
  for (const auto& l : r.lines)
    j["lines"].push_back(
        {{"line", l.line}, {"status", toString(l.status)}, {"color", toString(statusColor(l.status))}});
  j["ms"] = timings ? r.elapsed.count() : 0;
  return j.dump(indent);
}

}  // namespace elfe::verifier
