#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "elfe/tptp.hpp"
#include "support.hpp"

using namespace elfe;
using fol::Formula;
using fol::Term;

namespace {

Formula p(const char* name, std::vector<Term> args = {}) {
  return Formula::predicate(name, std::move(args));
}

std::optional<std::string> onPath(const std::string& exe) {
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  std::string_view rest = path;
  while (!rest.empty()) {
    auto colon = rest.find(':');
    std::filesystem::path cand = std::filesystem::path(rest.substr(0, colon)) / exe;
    if (std::filesystem::exists(cand)) return cand.string();
    if (colon == std::string_view::npos) break;
    rest.remove_prefix(colon + 1);
  }
  return std::nullopt;
}

}  // namespace

TEST(Emit, EmptyContextSingleConjecture) {
  auto prob = tptp::emit({}, Formula::implies(p("p"), p("p")));
  EXPECT_EQ(prob.toText(), "fof(goal, conjecture, (p => p)).\n");
}

TEST(Emit, FrozenConstantsInConjecture) {
  auto obs = testdata::sampleObligations("injective");
  auto text = tptp::emit(testdata::obligation(obs, "lemma1_s12")).toText();
  EXPECT_NE(text.find("fof(goal, conjecture, cx = cx1).\n"), std::string::npos);
  // Axioms come first, in context order, named after their statements.
  EXPECT_EQ(text.rfind("fof(", 0), 0u);
  EXPECT_NE(text.find("fof(injective, axiom,"), std::string::npos);
  EXPECT_NE(text.find("fof(lemma1_s11, axiom,"), std::string::npos);
}

TEST(Emit, BoundVariablesNumberedPerRecord) {
  Formula f = Formula::forall(
      "x", Formula::exists("y", Formula::predicate("R", {Term::variable("x"), Term::variable("y")})));
  auto prob = tptp::emit(std::vector<tptp::NamedFormula>{{"a", f}}, f);
  EXPECT_EQ(prob.toText(),
            "fof(a, axiom, ! [X] : ? [X1] : s_R(X,X1)).\n"
            "fof(goal, conjecture, ! [X] : ? [X1] : s_R(X,X1)).\n");
}

TEST(Emit, Connectives) {
  Term a = Term::constant("a"), b = Term::constant("b");
  Formula f = Formula::iff(Formula::conj(Formula::negate(Formula::equals(a, b)), p("q")),
                           Formula::disj(Formula::negate(p("q")), Formula::top()));
  EXPECT_EQ(tptp::emit({}, f).toText(),
            "fof(goal, conjecture, ((a != b & q) <=> (~ q | $true))).\n");
}

TEST(Emit, ManglingIsCollisionFree) {
  // "x'" mangles to x_p, which is also a legal name on its own.
  Term a = Term::constant("x'"), b = Term::constant("x_p");
  auto prob = tptp::emit({}, Formula::equals(a, b));
  const auto& terms = prob.records.back().formula.terms();
  EXPECT_NE(terms[0].name(), terms[1].name());
  EXPECT_TRUE(terms[0].name() == "x_p_2" || terms[1].name() == "x_p_2");
}

TEST(Emit, RecordNamesUnique) {
  std::vector<tptp::NamedFormula> ax = {{"goal", p("p")}, {"a'", p("q")}, {"a_p", p("r")}};
  auto prob = tptp::emit(ax, p("p"));
  std::set<std::string> names;
  for (const auto& r : prob.records) names.insert(r.name);
  EXPECT_EQ(names.size(), prob.records.size());
  EXPECT_EQ(prob.records.back().name, "goal");
  EXPECT_EQ(prob.records.back().role, tptp::Role::Conjecture);
}

TEST(Emit, UnmappableIdentifierThrows) {
  EXPECT_THROW(tptp::emit({}, Formula::predicate("∘")), std::invalid_argument);
}

TEST(LowerWord, Rules) {
  EXPECT_EQ(tptp::lowerWord("cx"), "cx");
  EXPECT_EQ(tptp::lowerWord("x'"), "x_p");
  EXPECT_EQ(tptp::lowerWord("A"), "s_A");
  EXPECT_EQ(tptp::lowerWord("lemma1_s6"), "lemma1_s6");
  EXPECT_EQ(tptp::lowerWord("1x"), "s_1x");
  EXPECT_EQ(tptp::lowerWord("∘"), "");
}

// Every obligation of every sample survives emit -> text -> parseFof.
TEST(RoundTrip, AllSampleObligations) {
  int count = 0;
  for (const auto& name : testdata::sampleNames())
    for (const auto& ob : testdata::sampleObligations(name)) {
      auto prob = tptp::emit(ob);
      auto text = prob.toText();
      auto back = tptp::parseFof(text);
      EXPECT_EQ(back, prob) << name << " " << ob.id;
      EXPECT_EQ(back.toText(), text) << name << " " << ob.id;
      EXPECT_EQ(back.records.size(), ob.axioms.size() + 1);
      ++count;
    }
  EXPECT_GT(count, 20);
}

TEST(RoundTrip, ByteStable) {
  auto a = testdata::sampleObligations("relations");
  auto b = testdata::sampleObligations("relations");
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(tptp::emit(a[i]).toText(), tptp::emit(b[i]).toText());
}

TEST(RoundTrip, DistinctObligationsGiveDistinctProblems) {
  std::map<std::string, std::string> seen;  // text -> conjecture + axioms
  for (const auto& name : testdata::sampleNames())
    for (const auto& ob : testdata::sampleObligations(name)) {
      std::string key = fol::render(ob.conjecture);
      for (const auto& e : ob.axioms) key += "|" + fol::render(e.formula);
      auto text = tptp::emit(ob).toText();
      auto [it, fresh] = seen.emplace(text, key);
      if (!fresh) EXPECT_EQ(it->second, key) << "two obligations share " << ob.id;
    }
}

TEST(ParseFof, AcceptsCommentsQuotesAndOtherRoles) {
  auto prob = tptp::parseFof(
      "% a comment\n"
      "fof('my axiom', hypothesis, ![X]: (p(X) => q(X))).\n"
      "/* block */ fof(goal,conjecture, (q(a) & ~ (a = b)) | $false).\n");
  ASSERT_EQ(prob.records.size(), 2u);
  EXPECT_EQ(prob.records[0].name, "my axiom");
  EXPECT_EQ(prob.records[0].role, tptp::Role::Axiom);
  EXPECT_EQ(prob.records[1].role, tptp::Role::Conjecture);
}

TEST(ParseFof, SyntaxErrorOffset) {
  try {
    tptp::parseFof("fof(a, axiom, p(X) &).");
    FAIL();
  } catch (const tptp::SyntaxError& e) {
    EXPECT_EQ(e.offset(), 20u);
  }
  EXPECT_THROW(tptp::parseFof("fof(a, axiom, X)."), tptp::SyntaxError);
  EXPECT_THROW(tptp::parseFof("cnf(a, axiom, p)."), tptp::SyntaxError);
}

TEST(Szs, Statuses) {
  EXPECT_EQ(tptp::parseSzs("% SZS status Theorem for prob\n").status, ProverStatus::Theorem);
  EXPECT_EQ(tptp::parseSzs("SZS status Unsatisfiable").status, ProverStatus::Theorem);
  EXPECT_EQ(tptp::parseSzs("SZS status Satisfiable").status, ProverStatus::Satisfiable);
  EXPECT_EQ(tptp::parseSzs("SZS status ResourceOut").status, ProverStatus::Timeout);
  EXPECT_EQ(tptp::parseSzs("SZS status Timeout").status, ProverStatus::Timeout);
  EXPECT_EQ(tptp::parseSzs("SZS status GaveUp").status, ProverStatus::Unknown);
  EXPECT_EQ(tptp::parseSzs("SZS status InputError").status, ProverStatus::Error);
  // The first status line counts.
  EXPECT_EQ(tptp::parseSzs("SZS status Theorem\nSZS status GaveUp\n").status,
            ProverStatus::Theorem);
}

TEST(Szs, CounterSatisfiableWithModel) {
  auto v = tptp::parseSzs(
      "% SZS status CounterSatisfiable for p\n"
      "% SZS output start FiniteModel for p\n"
      "fof(m, fi_domain, ! [X] : X = e0).\n"
      "% SZS output end FiniteModel for p\n");
  EXPECT_EQ(v.status, ProverStatus::CounterSatisfiable);
  ASSERT_TRUE(v.model);
  EXPECT_EQ(*v.model, "fof(m, fi_domain, ! [X] : X = e0).\n");
}

TEST(Szs, GarbageIsUnknownWithOutput) {
  auto v = tptp::parseSzs("segmentation fault\n");
  EXPECT_EQ(v.status, ProverStatus::Unknown);
  EXPECT_FALSE(v.model);
  EXPECT_EQ(v.output, "segmentation fault\n");
}

TEST(Szs, ModelOnlyWithModelStatus) {
  auto v = tptp::parseSzs("SZS status Theorem\nSZS output start Proof\nstuff\nSZS output end Proof\n");
  EXPECT_EQ(v.status, ProverStatus::Theorem);
  EXPECT_FALSE(v.model);
}

// Checked against a real prover when one is installed.
TEST(ExternalProver, AcceptsEmittedProblems) {
  std::optional<std::string> exe;
  std::string cmd;
  if ((exe = onPath("eprover")))
    cmd = *exe + " --auto --tptp3-format --cpu-limit=10 ";
  else if ((exe = onPath("vampire")))
    cmd = *exe + " --mode casc -t 10 ";
  if (!exe) GTEST_SKIP() << "no external TPTP prover on PATH";
  auto obs = testdata::sampleObligations("injective");
  auto file = std::filesystem::temp_directory_path() / "elfe-s6.p";
  std::ofstream(file) << tptp::emit(testdata::obligation(obs, "lemma1_s6")).toText();
  FILE* pipe = ::popen((cmd + file.string() + " 2>&1").c_str(), "r");
  ASSERT_TRUE(pipe);
  std::string out;
  char buf[4096];
  while (auto n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  ::pclose(pipe);
  std::filesystem::remove(file);
  auto v = tptp::parseSzs(out);
  EXPECT_NE(v.status, ProverStatus::Error) << out;
}
