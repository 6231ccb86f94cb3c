#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "elfe/kernel.hpp"
#include "elfe/provers.hpp"
#include "elfe/tptp.hpp"
#include "json.hpp"

namespace elfe::provers {

namespace {

using Clock = std::chrono::steady_clock;

constexpr auto kGrace = std::chrono::seconds(2);
constexpr std::string_view kFile = "{file}";
constexpr std::string_view kTimeout = "{timeout}";

std::chrono::milliseconds since(Clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t);
}

std::size_t count(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string_view::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

void replaceAll(std::string& s, std::string_view from, const std::string& to) {
  for (auto p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size()))
    s.replace(p, from.size(), to);
}

std::string shellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

class ProcessSlots {
 public:
  void setLimit(std::size_t n) {
    std::lock_guard lock(m_);
    limit_ = std::max<std::size_t>(n, 1);
    cv_.notify_all();
  }
  // False when stop was requested while waiting.
  bool acquire(std::stop_token stop) {
    std::unique_lock lock(m_);
    while (used_ >= limit_) {
      if (stop.stop_requested()) return false;
      cv_.wait_for(lock, std::chrono::milliseconds(50));
    }
    ++used_;
    return true;
  }
  void release() {
    std::lock_guard lock(m_);
    --used_;
    cv_.notify_one();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::size_t limit_ = 8;
  std::size_t used_ = 0;
};

ProcessSlots& slots() {
  static ProcessSlots s;
  return s;
}

ProverVerdict errorVerdict(std::string msg, Clock::time_point start) {
  ProverVerdict v;
  v.status = ProverStatus::Error;
  v.output = std::move(msg);
  v.elapsed = since(start);
  return v;
}

ProverVerdict cancelled(Clock::time_point start) {
  ProverVerdict v;
  v.output = "cancelled";
  v.elapsed = since(start);
  return v;
}

}  // namespace

ProverConfig internalResolutionConfig() {
  return {"resolution", ProverKind::InternalResolution, "", std::chrono::seconds(10)};
}

ProverConfig internalModelFinderConfig() {
  return {"modelfinder", ProverKind::InternalModelFinder, "", std::chrono::seconds(10)};
}

void validate(const ProverConfig& cfg) {
  if (cfg.name.empty()) throw std::invalid_argument("prover without a name");
  if (cfg.timeLimit.count() <= 0)
    throw std::invalid_argument("prover '" + cfg.name + "': time limit must be positive");
  if (cfg.kind == ProverKind::External && count(cfg.command, kFile) != 1)
    throw std::invalid_argument("prover '" + cfg.name + "': command must contain {file} exactly once");
}

std::vector<ProverConfig> loadProverConfigs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read prover config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("prover config '" + path + "': " + e.what());
  }
  if (!j.is_object() || !j.contains("provers") || !j["provers"].is_array())
    throw std::runtime_error("prover config '" + path + "': expected {\"provers\": [...]}");
  std::vector<ProverConfig> out;
  for (const auto& e : j["provers"]) {
    if (!e.is_object()) throw std::runtime_error("prover config entry is not an object");
    ProverConfig c;
    c.name = e.value("name", "");
    std::string kind = e.value("kind", "external");
    if (kind == "external")
      c.kind = ProverKind::External;
    else if (kind == "internal-resolution")
      c.kind = ProverKind::InternalResolution;
    else if (kind == "internal-model-finder")
      c.kind = ProverKind::InternalModelFinder;
    else
      throw std::runtime_error("prover '" + c.name + "': unknown kind '" + kind + "'");
    c.command = e.value("command", "");
    if (e.contains("timeout")) {
      if (!e["timeout"].is_number_integer())
        throw std::runtime_error("prover '" + c.name + "': timeout must be an integer");
      c.timeLimit = std::chrono::seconds(e["timeout"].get<long>());
    }
    try {
      validate(c);
    } catch (const std::invalid_argument& err) {
      throw std::runtime_error(err.what());
    }
    out.push_back(std::move(c));
  }
  return out;
}

void setMaxExternalProcesses(std::size_t n) { slots().setLimit(n); }

ProverVerdict runExternal(const ProverConfig& cfg, const std::string& problem,
                          std::stop_token stop) {
  const auto start = Clock::now();
  if (!slots().acquire(stop)) return cancelled(start);
  struct Slot {
    ~Slot() { slots().release(); }
  } slot;

  namespace fs = std::filesystem;
  std::string pattern = (fs::temp_directory_path() / "elfe-XXXXXX.p").string();
  int fd = mkstemps(pattern.data(), 2);
  if (fd < 0) return errorVerdict("cannot create temporary problem file", start);
  const fs::path file = pattern;
  struct Remove {
    fs::path p;
    ~Remove() {
      std::error_code ec;
      fs::remove(p, ec);
    }
  } remove{file};
  {
    std::size_t off = 0;
    while (off < problem.size()) {
      auto n = ::write(fd, problem.data() + off, problem.size() - off);
      if (n <= 0) {
        ::close(fd);
        return errorVerdict("cannot write temporary problem file", start);
      }
      off += static_cast<std::size_t>(n);
    }
    ::close(fd);
  }

  std::string command = cfg.command;
  replaceAll(command, kFile, shellQuote(file.string()));
  replaceAll(command, kTimeout, std::to_string(cfg.timeLimit.count()));

  int pipefd[2];
  if (::pipe2(pipefd, O_CLOEXEC) != 0) return errorVerdict("pipe failed", start);
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    return errorVerdict("fork failed", start);
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(pipefd[1], STDOUT_FILENO);
    ::dup2(pipefd[1], STDERR_FILENO);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(pipefd[1]);

  const auto deadline = start + cfg.timeLimit + kGrace;
  std::string output;
  bool timedOut = false, stopped = false, exited = false;
  int wstatus = 0;
  char buf[4096];
  for (;;) {
    pollfd p{pipefd[0], POLLIN, 0};
    int r = ::poll(&p, 1, 50);
    if (r > 0) {
      auto n = ::read(pipefd[0], buf, sizeof buf);
      if (n > 0) {
        output.append(buf, static_cast<std::size_t>(n));
        continue;
      }
      if (n == 0) break;  // every writer is gone
    }
    if (!exited && ::waitpid(pid, &wstatus, WNOHANG) == pid) {
      // Descendants may still hold the pipe; they die with the group.
      exited = true;
      ::kill(-pid, SIGKILL);
    }
    if (stop.stop_requested()) {
      stopped = true;
      break;
    }
    if (Clock::now() > deadline) {
      timedOut = true;
      break;
    }
  }
  ::kill(-pid, SIGKILL);
  if (!exited) ::waitpid(pid, &wstatus, 0);
  ::close(pipefd[0]);

  if (stopped) {
    auto v = cancelled(start);
    v.output = std::move(output);
    return v;
  }
  ProverVerdict v = tptp::parseSzs(output);
  v.elapsed = since(start);
  bool szs = output.find("SZS status") != std::string::npos;
  if (timedOut && !v.decisive()) {
    v.status = ProverStatus::Timeout;
  } else if (!szs) {
    bool failed = !WIFEXITED(wstatus) || WEXITSTATUS(wstatus) != 0;
    if (failed) {
      v.status = ProverStatus::Error;
      if (WIFEXITED(wstatus) && WEXITSTATUS(wstatus) == 127)
        v.output = "command not found: " + command + "\n" + v.output;
    }
  }
  return v;
}

ObligationResult combineVerdicts(std::span<const NamedVerdict> verdicts,
                                 std::span<const std::string> configOrder) {
  auto rank = [&](const std::string& name) {
    auto it = std::find(configOrder.begin(), configOrder.end(), name);
    return it - configOrder.begin();
  };
  ObligationResult res;
  res.verdicts.assign(verdicts.begin(), verdicts.end());
  std::stable_sort(res.verdicts.begin(), res.verdicts.end(),
                   [&](const NamedVerdict& a, const NamedVerdict& b) {
                     return rank(a.prover) < rank(b.prover);
                   });
  const NamedVerdict* proof = nullptr;
  const NamedVerdict* model = nullptr;
  for (const auto& nv : res.verdicts) {
    res.elapsed = std::max(res.elapsed, nv.verdict.elapsed);
    auto s = nv.verdict.status;
    if (s == ProverStatus::Theorem && !proof) proof = &nv;
    if ((s == ProverStatus::CounterSatisfiable || s == ProverStatus::Satisfiable) && !model)
      model = &nv;
  }
  if (proof && model) {
    res.status = ObligationStatus::Error;
    res.diagnostics = "conflicting verdicts: " + proof->prover + " reports Theorem, " +
                      model->prover + " reports " +
                      std::string(toString(model->verdict.status)) + "\n--- " +
                      proof->prover + "\n" + proof->verdict.output + "\n--- " +
                      model->prover + "\n" + model->verdict.output;
  } else if (proof) {
    res.status = ObligationStatus::Proved;
    res.prover = proof->prover;
  } else if (model) {
    res.status = ObligationStatus::Refuted;
    res.prover = model->prover;
    res.model = model->verdict.model;
  } else {
    res.status = ObligationStatus::Unknown;
    std::ostringstream d;
    for (const auto& nv : res.verdicts) {
      d << nv.prover << ": " << toString(nv.verdict.status);
      if (nv.verdict.status == ProverStatus::Error && !nv.verdict.output.empty())
        d << " (" << nv.verdict.output.substr(0, 200) << ")";
      d << "\n";
    }
    res.diagnostics = d.str();
  }
  return res;
}

namespace {

ProverVerdict runInternal(const ProverConfig& cfg, std::span<const fol::Formula> axioms,
                          const fol::Formula& conjecture, std::stop_token stop) {
  const auto start = Clock::now();
  ProverVerdict v;
  try {
    if (cfg.kind == ProverKind::InternalResolution) {
      ResolutionLimits limits;
      limits.maxTime = cfg.timeLimit;
      if (resolutionProve(axioms, conjecture, limits, stop) == ProofResult::Theorem)
        v.status = ProverStatus::Theorem;
    } else {
      ModelSearchLimits limits;
      limits.maxTime = cfg.timeLimit;
      if (auto m = findModel(axioms, conjecture, limits, stop)) {
        v.status = ProverStatus::CounterSatisfiable;
        v.model = m->toString();
      }
    }
  } catch (const std::exception& e) {
    v.status = ProverStatus::Error;
    v.output = e.what();
  }
  if (v.status == ProverStatus::Unknown && stop.stop_requested()) v.output = "cancelled";
  v.elapsed = since(start);
  return v;
}

ObligationResult race(std::span<const fol::Formula> axioms, const fol::Formula& conjecture,
                      const std::optional<std::string>& problem, const std::string& emitError,
                      std::span<const ProverConfig> cfgs) {
  if (cfgs.empty()) throw std::invalid_argument("portfolio needs at least one prover");
  const auto start = Clock::now();
  std::stop_source source;
  std::mutex m;
  std::vector<NamedVerdict> verdicts;
  {
    std::vector<std::jthread> workers;
    for (const auto& cfg : cfgs) {
      workers.emplace_back([&, cfg] {
        ProverVerdict v;
        if (cfg.kind != ProverKind::External)
          v = runInternal(cfg, axioms, conjecture, source.get_token());
        else if (!problem)
          v = errorVerdict(emitError, Clock::now());
        else
          v = runExternal(cfg, *problem, source.get_token());
        if (v.decisive()) source.request_stop();
        std::lock_guard lock(m);
        verdicts.push_back({cfg.name, std::move(v)});
      });
    }
  }
  std::vector<std::string> order;
  for (const auto& c : cfgs) order.push_back(c.name);
  auto res = combineVerdicts(verdicts, order);
  res.elapsed = since(start);
  return res;
}

}  // namespace

ObligationResult portfolio(std::span<const fol::Formula> axioms,
                           const fol::Formula& conjecture,
                           const std::string& tptpProblem,
                           std::span<const ProverConfig> cfgs) {
  return race(axioms, conjecture, tptpProblem, {}, cfgs);
}

ObligationResult portfolio(const kernel::Obligation& ob, std::span<const ProverConfig> cfgs) {
  std::vector<fol::Formula> axioms;
  for (const auto& e : ob.axioms) axioms.push_back(e.formula);
  std::optional<std::string> problem;
  std::string emitError;
  bool external = std::any_of(cfgs.begin(), cfgs.end(), [](const ProverConfig& c) {
    return c.kind == ProverKind::External;
  });
  if (external) {
    try {
      problem = tptp::emit(ob).toText();
    } catch (const std::exception& e) {
      emitError = std::string("cannot emit TPTP: ") + e.what();
    }
  }
  return race(axioms, ob.conjecture, problem, emitError, cfgs);
}

}  // namespace elfe::provers
