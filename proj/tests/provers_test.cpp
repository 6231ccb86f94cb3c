#include <gtest/gtest.h>
#include <signal.h>
#include <sys/stat.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <thread>

#include "elfe/provers.hpp"
#include "elfe/tptp.hpp"
#include "random_formulas.hpp"
#include "support.hpp"

using namespace elfe;
using namespace elfe::provers;
using fol::Formula;
using fol::Term;

namespace {

using Assignment = std::map<std::string, bool>;

// ------------------------------------------------------------ truth tables

Formula randomProp(std::mt19937& rng, int depth) {
  auto atom = [&] { return Formula::predicate(std::string(1, "abcd"[rng() % 4])); };
  if (depth == 0) {
    int k = static_cast<int>(rng() % 10);
    return k == 0 ? Formula::top() : k == 1 ? Formula::bottom() : atom();
  }
  switch (rng() % 7) {
    case 0: return Formula::negate(randomProp(rng, depth - 1));
    case 1: return Formula::conj(randomProp(rng, depth - 1), randomProp(rng, depth - 1));
    case 2: return Formula::disj(randomProp(rng, depth - 1), randomProp(rng, depth - 1));
    case 3: return Formula::implies(randomProp(rng, depth - 1), randomProp(rng, depth - 1));
    case 4: return Formula::iff(randomProp(rng, depth - 1), randomProp(rng, depth - 1));
    default: return atom();
  }
}

bool eval(const Formula& f, const Assignment& a) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Predicate: return a.at(f.symbol());
    case K::Top: return true;
    case K::Bottom: return false;
    case K::Not: return !eval(f.body(), a);
    case K::And: return eval(f.lhs(), a) && eval(f.rhs(), a);
    case K::Or: return eval(f.lhs(), a) || eval(f.rhs(), a);
    case K::Implies: return !eval(f.lhs(), a) || eval(f.rhs(), a);
    case K::Iff: return eval(f.lhs(), a) == eval(f.rhs(), a);
    default: throw std::logic_error("not propositional");
  }
}

bool eval(const std::vector<Clause>& cs, const Assignment& a) {
  return std::all_of(cs.begin(), cs.end(), [&](const Clause& c) {
    return std::any_of(c.literals.begin(), c.literals.end(), [&](const Literal& l) {
      return a.at(l.atom.symbol()) == l.positive;
    });
  });
}

std::vector<Assignment> allAssignments() {
  std::vector<Assignment> out;
  for (int m = 0; m < 16; ++m)
    out.push_back({{"a", m & 1}, {"b", (m >> 1) & 1}, {"c", (m >> 2) & 1}, {"d", (m >> 3) & 1}});
  return out;
}

bool entails(const std::vector<Formula>& axioms, const Formula& goal) {
  for (const auto& a : allAssignments()) {
    bool ax = std::all_of(axioms.begin(), axioms.end(), [&](const Formula& f) { return eval(f, a); });
    if (ax && !eval(goal, a)) return false;
  }
  return true;
}

// ------------------------------------------------------------ stub provers

class Stubs : public ::testing::Test {
 protected:
  std::filesystem::path dir;

  void SetUp() override {
    dir = std::filesystem::temp_directory_path() /
          ("elfe-stubs-" + std::to_string(::getpid()) + "-" +
           ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir);
  }
  void TearDown() override { std::filesystem::remove_all(dir); }

  std::string script(const std::string& name, const std::string& body) {
    auto p = dir / name;
    std::ofstream(p) << "#!/bin/sh\n" << body << "\n";
    ::chmod(p.c_str(), 0755);
    return p.string();
  }

  ProverConfig stub(const std::string& name, const std::string& body, int limit = 5) {
    ProverConfig c;
    c.name = name;
    c.command = script(name + ".sh", body) + " {file}";
    c.timeLimit = std::chrono::seconds(limit);
    return c;
  }
};

bool processGone(int pid) {
  std::ifstream stat("/proc/" + std::to_string(pid) + "/stat");
  if (!stat) return true;
  std::string content;
  std::getline(stat, content);
  auto close = content.rfind(')');
  return close != std::string::npos && close + 2 < content.size() && content[close + 2] == 'Z';
}

bool waitGone(int pid) {
  for (int i = 0; i < 50 && !processGone(pid); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  return processGone(pid);
}

int readPid(const std::filesystem::path& p) {
  int pid = 0;
  for (int i = 0; i < 100 && !pid; ++i) {
    std::ifstream in(p);
    in >> pid;
    if (!pid) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return pid;
}

}  // namespace

// ------------------------------------------------------------ clausify

TEST(Clausify, ImplicationBecomesOneClause) {
  std::vector<Formula> in{fol::parseFormula("∀x. P(x) → Q(x)")};
  auto cs = clausify(in);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(render(cs[0]), "¬P(?X0) ∨ Q(?X0)");
}

TEST(Clausify, ExistentialGetsSkolemConstant) {
  std::vector<Formula> in{fol::parseFormula("∃x. P(x)")};
  auto cs = clausify(in);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(render(cs[0]), "P(sk0)");
}

TEST(Clausify, EqualityAxiomsOnlyWhenEqualityOccurs) {
  std::vector<Formula> eq{fol::parseFormula("f(a) = b ∧ P(a)")};
  auto cs = clausify(eq);
  std::vector<std::string> text;
  for (const auto& c : cs) text.push_back(render(c));
  auto has = [&](const std::string& s) { return std::find(text.begin(), text.end(), s) != text.end(); };
  EXPECT_TRUE(has("?X0 = ?X0"));
  EXPECT_TRUE(has("¬(?X0 = ?X1) ∨ ?X1 = ?X0"));
  EXPECT_TRUE(has("¬(?X0 = ?X1) ∨ ¬(?X1 = ?X2) ∨ ?X0 = ?X2"));
  EXPECT_TRUE(has("¬(?X0 = ?X1) ∨ f(?X0) = f(?X1)"));
  EXPECT_TRUE(has("¬(?X0 = ?X1) ∨ ¬P(?X0) ∨ P(?X1)"));
  std::vector<Formula> plain{fol::parseFormula("P(a)")};
  EXPECT_EQ(clausify(plain).size(), 1u);
  EXPECT_EQ(clausify(eq, {.equalityAxioms = false}).size(), 2u);
}

TEST(Clausify, TruthTableEquisatisfiable) {
  std::mt19937 rng(1);
  const auto assignments = allAssignments();
  for (int t = 0; t < 500; ++t) {
    Formula f = randomProp(rng, 1 + static_cast<int>(rng() % 4));
    std::vector<Formula> in{f};
    auto cs = clausify(in);
    bool satF = false, satC = false;
    for (const auto& a : assignments) {
      bool vf = eval(f, a), vc = eval(cs, a);
      satF |= vf;
      satC |= vc;
      // Distribution keeps the atoms, so the clause set is even equivalent.
      ASSERT_EQ(vf, vc) << fol::render(f);
    }
    ASSERT_EQ(satF, satC) << fol::render(f);
  }
}

TEST(Clausify, VariablesLocalToClause) {
  std::vector<Formula> in{fol::parseFormula("∀x. (P(x) ∧ Q(x))")};
  for (const auto& c : clausify(in))
    for (const auto& l : c.literals)
      for (const auto& v : fol::freeVarList(l.atom)) EXPECT_EQ(v.rfind("X", 0), 0u);
}

// ------------------------------------------------------------ resolution

TEST(Resolution, OneStep) {
  std::vector<Formula> ax{fol::parseFormula("P(a)"), fol::parseFormula("∀x. P(x) → Q(x)")};
  EXPECT_EQ(resolutionProve(ax, fol::parseFormula("Q(a)")), ProofResult::Theorem);
}

TEST(Resolution, NothingFromNothing) {
  ResolutionLimits lim;
  lim.maxTime = std::chrono::milliseconds(500);
  EXPECT_EQ(resolutionProve({}, fol::parseFormula("P(a)"), lim), ProofResult::Unknown);
}

TEST(Resolution, Equality) {
  std::vector<Formula> ax{fol::parseFormula("a = b"), fol::parseFormula("P(f(a))")};
  EXPECT_EQ(resolutionProve(ax, fol::parseFormula("P(f(b))")), ProofResult::Theorem);
}

TEST(Resolution, InjectivityCornerstoneStep) {
  auto obs = testdata::sampleObligations("injective");
  const auto& ob = testdata::obligation(obs, "lemma1_s12");
  std::vector<Formula> ax;
  for (const auto& e : ob.axioms) ax.push_back(e.formula);
  EXPECT_EQ(resolutionProve(ax, ob.conjecture), ProofResult::Theorem);
}

TEST(Resolution, SoundAgainstTruthTables) {
  std::mt19937 rng(5);
  ResolutionLimits lim;
  lim.maxTime = std::chrono::milliseconds(1000);
  int entailed = 0, proved = 0;
  for (int t = 0; t < 500; ++t) {
    std::vector<Formula> ax;
    int n = static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) ax.push_back(randomProp(rng, 2));
    Formula goal = randomProp(rng, 2);
    bool truth = entails(ax, goal);
    auto r = resolutionProve(ax, goal, lim);
    if (r == ProofResult::Theorem) {
      ASSERT_TRUE(truth) << "unsound on case " << t << ": " << fol::render(goal);
      ++proved;
    }
    entailed += truth;
  }
  // Ground problems this small are always settled.
  EXPECT_EQ(proved, entailed);
}

TEST(Resolution, StopTokenEndsTheSearch) {
  std::stop_source src;
  src.request_stop();
  std::vector<Formula> ax{fol::parseFormula("∀x. P(x) → P(f(x))"), fol::parseFormula("P(a)")};
  auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(resolutionProve(ax, fol::parseFormula("Q(a)"), {}, src.get_token()),
            ProofResult::Unknown);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(2));
}

// ------------------------------------------------------------ model finder

TEST(ModelFinder, SmallestDomainMatchesBruteForce) {
  std::vector<Formula> ax{fol::parseFormula("P(a)")};
  Formula goal = fol::parseFormula("P(b)");
  // Brute force: constants a, b and the unary P over domains 1 and 2.
  int smallest = 0;
  for (int n = 1; n <= 2 && !smallest; ++n)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int pm = 0; pm < (1 << n); ++pm)
          if ((pm >> a & 1) && !(pm >> b & 1) && !smallest) smallest = n;
  ASSERT_EQ(smallest, 2);
  auto m = findModel(ax, goal);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->domainSize, smallest);
  EXPECT_TRUE(m->evaluate(ax[0]));
  EXPECT_FALSE(m->evaluate(goal));
  EXPECT_NE(m->function("a", 0)->values[0], m->function("b", 0)->values[0]);
}

TEST(ModelFinder, NoModelForValidConjecture) {
  std::vector<Formula> ax{fol::parseFormula("P(a)")};
  EXPECT_FALSE(findModel(ax, fol::parseFormula("P(a)")));
}

TEST(ModelFinder, RelationsWithoutCaseSplit) {
  auto obs = testdata::sampleObligations("relations_wrong");
  const auto& ob = testdata::obligation(obs, "lemma1_s13");
  std::vector<Formula> ax;
  for (const auto& e : ob.axioms) ax.push_back(e.formula);
  ModelSearchLimits lim;
  lim.maxDomain = 3;
  auto m = findModel(ax, ob.conjecture, lim);
  ASSERT_TRUE(m);
  EXPECT_LE(m->domainSize, 3);
  for (const auto& a : ax) EXPECT_TRUE(m->evaluate(a));
  EXPECT_FALSE(m->evaluate(ob.conjecture));
  // The pair is in the inverse of R but not in R.
  EXPECT_TRUE(m->evaluate(fol::parseFormula("relapp(inverse(cR),cx,cy) ∧ ¬relapp(cR,cx,cy)")));
}

TEST(ModelFinder, EveryModelEvaluatesCorrectly) {
  std::mt19937 rng(3);
  ModelSearchLimits lim;
  lim.maxDomain = 3;
  lim.maxTime = std::chrono::milliseconds(2000);
  ResolutionLimits rl;
  rl.maxTime = std::chrono::milliseconds(300);
  int found = 0;
  for (int t = 0; t < 150; ++t) {
    std::vector<Formula> ax;
    int n = 1 + static_cast<int>(rng() % 2);
    for (int i = 0; i < n; ++i) ax.push_back(fol::universalClosure(elfe::testing::randomFormula(rng, 2)));
    Formula goal = fol::universalClosure(elfe::testing::randomFormula(rng, 2));
    auto m = findModel(ax, goal, lim);
    if (!m) continue;
    ++found;
    for (const auto& a : ax) ASSERT_TRUE(m->evaluate(a)) << "case " << t;
    ASSERT_FALSE(m->evaluate(goal)) << "case " << t;
    // The two provers never contradict each other.
    ASSERT_NE(resolutionProve(ax, goal, rl), ProofResult::Theorem) << "case " << t;
  }
  EXPECT_GT(found, 30);
}

// ------------------------------------------------------------ configs

TEST(Config, PlaceholderRule) {
  ProverConfig c{"e", ProverKind::External, "eprover {file}", std::chrono::seconds(5)};
  EXPECT_NO_THROW(validate(c));
  c.command = "eprover";
  EXPECT_THROW(validate(c), std::invalid_argument);
  c.command = "eprover {file} {file}";
  EXPECT_THROW(validate(c), std::invalid_argument);
  EXPECT_NO_THROW(validate(internalResolutionConfig()));
  EXPECT_NO_THROW(validate(internalModelFinderConfig()));
}

TEST(Config, DefaultLimits) {
  EXPECT_EQ(internalResolutionConfig().timeLimit, std::chrono::seconds(10));
  EXPECT_EQ(ResolutionLimits{}.maxClauses, 50000u);
  EXPECT_EQ(ModelSearchLimits{}.maxDomain, 4);
  EXPECT_EQ(ProverConfig{}.timeLimit, std::chrono::seconds(5));
}

TEST(Config, LoadFromJson) {
  auto p = std::filesystem::temp_directory_path() / "elfe-provers-test.json";
  std::ofstream(p) << R"({"provers": [
      {"name": "eprover", "command": "eprover --cpu-limit={timeout} {file}", "timeout": 7},
      {"name": "mf", "kind": "internal-model-finder"}]})";
  auto cfgs = loadProverConfigs(p.string());
  ASSERT_EQ(cfgs.size(), 2u);
  EXPECT_EQ(cfgs[0].name, "eprover");
  EXPECT_EQ(cfgs[0].timeLimit, std::chrono::seconds(7));
  EXPECT_EQ(cfgs[1].kind, ProverKind::InternalModelFinder);
  std::ofstream(p) << R"({"provers": [{"name": "bad", "command": "x"}]})";
  EXPECT_THROW(loadProverConfigs(p.string()), std::runtime_error);
  std::ofstream(p) << "{not json";
  EXPECT_THROW(loadProverConfigs(p.string()), std::runtime_error);
  std::filesystem::remove(p);
  EXPECT_THROW(loadProverConfigs(p.string()), std::runtime_error);
}

// ------------------------------------------------------------ external

TEST_F(Stubs, TheoremStub) {
  auto v = runExternal(stub("thm", "echo '% SZS status Theorem for x'"), "fof(goal, conjecture, p).\n");
  EXPECT_EQ(v.status, ProverStatus::Theorem);
}

TEST_F(Stubs, ProblemFileAndTimeoutPlaceholders) {
  auto cfg = stub("cat", "grep -q 'fof(goal' \"$1\" && test \"$2\" = 3 && echo 'SZS status Theorem'");
  cfg.command += " {timeout}";
  cfg.timeLimit = std::chrono::seconds(3);
  EXPECT_EQ(runExternal(cfg, "fof(goal, conjecture, p).\n").status, ProverStatus::Theorem);
}

TEST_F(Stubs, CounterSatisfiableWithModel) {
  auto v = runExternal(stub("csa",
                            "echo 'SZS status CounterSatisfiable'\n"
                            "echo 'SZS output start FiniteModel'\necho 'fof(m, fi_domain, $true).'\n"
                            "echo 'SZS output end FiniteModel'"),
                       "");
  EXPECT_EQ(v.status, ProverStatus::CounterSatisfiable);
  ASSERT_TRUE(v.model);
  EXPECT_EQ(*v.model, "fof(m, fi_domain, $true).\n");
}

TEST_F(Stubs, SleeperTimesOutAndLeavesNoProcess) {
  auto pidFile = dir / "pid";
  auto cfg = stub("sleeper", "sleep 60 &\necho $! > " + pidFile.string() + "\nwait", 1);
  auto start = std::chrono::steady_clock::now();
  auto v = runExternal(cfg, "");
  auto took = std::chrono::steady_clock::now() - start;
  EXPECT_EQ(v.status, ProverStatus::Timeout);
  EXPECT_LT(took, std::chrono::seconds(6));
  int pid = readPid(pidFile);
  ASSERT_GT(pid, 0);
  EXPECT_TRUE(waitGone(pid));
}

TEST_F(Stubs, MissingBinaryIsError) {
  ProverConfig c{"missing", ProverKind::External, "/nonexistent/prover {file}", std::chrono::seconds(2)};
  EXPECT_EQ(runExternal(c, "").status, ProverStatus::Error);
}

TEST_F(Stubs, CrashWithoutStatusIsError) {
  EXPECT_EQ(runExternal(stub("crash", "echo boom; exit 3"), "").status, ProverStatus::Error);
  // A clean exit without a status line is merely Unknown.
  EXPECT_EQ(runExternal(stub("quiet", "echo nothing"), "").status, ProverStatus::Unknown);
}

// ------------------------------------------------------------ portfolio

TEST(Combine, Rules) {
  auto v = [](ProverStatus s, std::optional<std::string> model = std::nullopt) {
    ProverVerdict r;
    r.status = s;
    r.model = std::move(model);
    return r;
  };
  std::vector<std::string> order{"a", "b", "c"};
  std::vector<NamedVerdict> thm{{"b", v(ProverStatus::Theorem)}, {"a", v(ProverStatus::Unknown)}};
  auto r = combineVerdicts(thm, order);
  EXPECT_EQ(r.status, ObligationStatus::Proved);
  EXPECT_EQ(r.prover, "b");
  std::vector<NamedVerdict> csa{{"c", v(ProverStatus::CounterSatisfiable, "M")},
                                {"a", v(ProverStatus::Timeout)}};
  r = combineVerdicts(csa, order);
  EXPECT_EQ(r.status, ObligationStatus::Refuted);
  EXPECT_EQ(r.model, "M");
  std::vector<NamedVerdict> none{{"a", v(ProverStatus::Unknown)}, {"b", v(ProverStatus::Error)}};
  EXPECT_EQ(combineVerdicts(none, order).status, ObligationStatus::Unknown);
  std::vector<NamedVerdict> clash{{"a", v(ProverStatus::Theorem)},
                                  {"b", v(ProverStatus::CounterSatisfiable, "M")}};
  r = combineVerdicts(clash, order);
  EXPECT_EQ(r.status, ObligationStatus::Error);
  EXPECT_NE(r.diagnostics.find("conflicting"), std::string::npos);
}

TEST(Combine, InvariantUnderCompletionOrder) {
  std::mt19937 rng(9);
  const ProverStatus statuses[] = {ProverStatus::Theorem, ProverStatus::CounterSatisfiable,
                                   ProverStatus::Unknown, ProverStatus::Timeout,
                                   ProverStatus::Error};
  std::vector<std::string> order{"p0", "p1", "p2", "p3"};
  for (int t = 0; t < 300; ++t) {
    std::vector<NamedVerdict> vs;
    for (const auto& name : order) {
      ProverVerdict v;
      v.status = statuses[rng() % 5];
      if (v.status == ProverStatus::CounterSatisfiable) v.model = "model of " + name;
      vs.push_back({name, v});
    }
    auto ref = combineVerdicts(vs, order);
    std::sort(vs.begin(), vs.end(), [](auto& a, auto& b) { return a.prover < b.prover; });
    do {
      auto r = combineVerdicts(vs, order);
      ASSERT_EQ(r.status, ref.status);
      ASSERT_EQ(r.prover, ref.prover);
      ASSERT_EQ(r.model, ref.model);
    } while (std::next_permutation(vs.begin(), vs.end(),
                                   [](auto& a, auto& b) { return a.prover < b.prover; }));
  }
}

TEST_F(Stubs, PortfolioStubBeatsSleeper) {
  auto pidFile = dir / "pid";
  std::vector<ProverConfig> cfgs{
      stub("sleeper", "sleep 60 &\necho $! > " + pidFile.string() + "\nwait", 30),
      stub("thm", "sleep 0.3; echo 'SZS status Theorem'")};
  auto start = std::chrono::steady_clock::now();
  auto r = portfolio({}, fol::parseFormula("P(a)"), "fof(goal, conjecture, p(a)).\n", cfgs);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
  EXPECT_EQ(r.status, ObligationStatus::Proved);
  EXPECT_EQ(r.prover, "thm");
  int pid = readPid(pidFile);
  ASSERT_GT(pid, 0);
  EXPECT_TRUE(waitGone(pid)) << "sleeper child survived cancellation";
}

TEST_F(Stubs, PortfolioIndependentOfTiming) {
  std::vector<std::string> delays{"0", "0.2", "0.4"};
  std::sort(delays.begin(), delays.end());
  do {
    std::vector<ProverConfig> cfgs{
        stub("unknown", "sleep " + delays[0] + "; echo 'SZS status GaveUp'"),
        stub("thm", "sleep " + delays[1] + "; echo 'SZS status Theorem'"),
        stub("broken", "sleep " + delays[2] + "; exit 2")};
    auto r = portfolio({}, fol::parseFormula("P"), "fof(goal, conjecture, p).\n", cfgs);
    EXPECT_EQ(r.status, ObligationStatus::Proved) << delays[0] << delays[1] << delays[2];
    EXPECT_EQ(r.prover, "thm");
  } while (std::next_permutation(delays.begin(), delays.end()));
}

TEST_F(Stubs, PortfolioModelFinderRefutes) {
  auto obs = testdata::sampleObligations("relations_wrong");
  const auto& ob = testdata::obligation(obs, "lemma1_s13");
  std::vector<ProverConfig> cfgs{stub("unknown", "echo 'SZS status Unknown'"),
                                 internalModelFinderConfig()};
  auto r = portfolio(ob, cfgs);
  EXPECT_EQ(r.status, ObligationStatus::Refuted);
  EXPECT_EQ(r.prover, "modelfinder");
  ASSERT_TRUE(r.model);
  EXPECT_NE(r.model->find("fi_domain"), std::string::npos);
}

TEST_F(Stubs, PortfolioWithoutDecisiveAnswer) {
  std::vector<ProverConfig> cfgs{stub("u1", "echo 'SZS status GaveUp'"),
                                 stub("u2", "echo 'SZS status Timeout'")};
  auto r = portfolio({}, fol::parseFormula("P"), "fof(goal, conjecture, p).\n", cfgs);
  EXPECT_EQ(r.status, ObligationStatus::Unknown);
  EXPECT_EQ(r.verdicts.size(), 2u);
}

TEST(Portfolio, InternalProversOnInjectivity) {
  auto obs = testdata::sampleObligations("injective");
  std::vector<ProverConfig> cfgs{internalResolutionConfig(), internalModelFinderConfig()};
  for (const auto& ob : obs) {
    auto r = portfolio(ob, cfgs);
    EXPECT_EQ(r.status, ObligationStatus::Proved) << ob.id;
    EXPECT_EQ(r.prover, "resolution");
  }
}
