#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "elfe/kernel.hpp"
#include "elfe/provers.hpp"
#include "support.hpp"

using namespace elfe;
using namespace elfe::kernel;
using fol::Formula;

namespace {

std::vector<std::string> leafIds(const Statement& s) {
  std::vector<std::string> out;
  std::function<void(const Statement&)> go = [&](const Statement& n) {
    if (n.isLeaf()) out.push_back(n.id);
    for (const auto& c : n.children) go(c);
  };
  go(s);
  return out;
}

const Statement& child(const Statement& root, const std::string& id) {
  const Statement* s = find(root, id);
  if (!s) throw std::out_of_range(id);
  return *s;
}

// ------------------------------------------------------------ random trees

Formula atom(int i) { return Formula::predicate("p" + std::to_string(i)); }

Statement randomTree(std::mt19937& rng, int depth, int& next) {
  Statement s;
  s.id = "n" + std::to_string(next++);
  s.goal = atom(static_cast<int>(rng() % 7));
  int k = static_cast<int>(rng() % 5);
  if (depth == 0 || k < 2) {
    s.proof = k == 0 ? ProofKind::Assumed : ProofKind::ByContext;
    return s;
  }
  s.proof = k == 4 ? ProofKind::BySplit : ProofKind::BySequence;
  int n = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) s.children.push_back(randomTree(rng, depth - 1, next));
  return s;
}

// Definition 2 written out directly: a child of a sequence sees its
// parent's context and the goals of the siblings before it; a child of a
// split sees its parent's context only.
void expectedContexts(const Statement& s, const std::vector<std::pair<std::string, Formula>>& ctx,
                      std::map<std::string, std::vector<std::pair<std::string, Formula>>>& out) {
  out[s.id] = ctx;
  for (std::size_t i = 0; i < s.children.size(); ++i) {
    auto c = ctx;
    if (s.proof == ProofKind::BySequence)
      for (std::size_t j = 0; j < i; ++j) c.emplace_back(s.children[j].id, s.children[j].goal);
    expectedContexts(s.children[i], c, out);
  }
}

std::vector<std::pair<std::string, std::string>> normalized(
    const std::vector<std::pair<std::string, Formula>>& ctx) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [id, f] : ctx) out.emplace_back(id, fol::render(f));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<std::string, std::string>> normalized(const Context& ctx) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : ctx) out.emplace_back(e.id, fol::render(e.formula));
  std::sort(out.begin(), out.end());
  return out;
}

void forEach(const Statement& s, const std::function<void(const Statement&)>& f) {
  f(s);
  for (const auto& c : s.children) forEach(c, f);
}

// ------------------------------------------------------------ random lemmas

Formula randomProp(std::mt19937& rng, int depth) {
  auto a = [&] { return Formula::predicate(std::string(1, "pqr"[rng() % 3])); };
  if (depth == 0) return rng() % 4 == 0 ? Formula::negate(a()) : a();
  switch (rng() % 5) {
    case 0: return Formula::conj(randomProp(rng, depth - 1), randomProp(rng, depth - 1));
    case 1: return Formula::disj(randomProp(rng, depth - 1), randomProp(rng, depth - 1));
    case 2: return Formula::implies(randomProp(rng, depth - 1), randomProp(rng, depth - 1));
    default: return randomProp(rng, 0);
  }
}

language::Step step(language::Step::Kind k, Formula f) {
  language::Step s;
  s.kind = k;
  s.formula = std::move(f);
  return s;
}

std::vector<language::Step> randomSteps(std::mt19937& rng, const Formula& goal, int depth) {
  using K = language::Step::Kind;
  std::vector<language::Step> out;
  int n = static_cast<int>(rng() % 4);
  if (goal.kind() == Formula::Kind::Implies && rng() % 2)
    out.push_back(step(K::Assume, goal.lhs()));
  for (int i = 0; i < n; ++i) {
    switch (rng() % 6) {
      case 0:
        out.push_back(step(K::Assume, randomProp(rng, 1)));
        out.push_back(step(K::Hence, randomProp(rng, 1)));
        break;
      case 1:
        if (depth > 0) {
          auto c = step(K::Case, randomProp(rng, 0));
          c.body = randomSteps(rng, randomProp(rng, 1), depth - 1);
          c.body.push_back(step(K::Then, randomProp(rng, 1)));
          out.push_back(std::move(c));
          break;
        }
        [[fallthrough]];
      case 2:
        if (depth > 0) {
          Formula psi = randomProp(rng, 1);
          auto p = step(K::Proof, psi);
          p.body = randomSteps(rng, psi, depth - 1);
          out.push_back(std::move(p));
          break;
        }
        [[fallthrough]];
      default:
        out.push_back(step(rng() % 2 ? K::Then : K::Hence, randomProp(rng, 1)));
    }
  }
  Formula last = goal.kind() == Formula::Kind::Implies && !out.empty() &&
                         out.front().kind == K::Assume
                     ? goal.rhs()
                     : goal;
  out.push_back(step(K::Hence, last));
  return out;
}

bool provable(const std::vector<Formula>& axioms, const Formula& goal) {
  provers::ResolutionLimits limits;
  limits.maxTime = std::chrono::milliseconds(2000);
  return provers::resolutionProve(axioms, goal, limits) == provers::ProofResult::Theorem;
}

}  // namespace

// ------------------------------------------------------------ worked example

TEST(Injectivity, ThreeObligations) {
  auto root = testdata::elaborateSample("injective");
  const auto& lemma = root.children.back();
  EXPECT_EQ(leafIds(lemma), (std::vector<std::string>{"lemma1_s6", "lemma1_s11", "lemma1_s12"}));
}

TEST(Injectivity, AlternativeGoalShape) {
  auto root = testdata::elaborateSample("injective");
  const auto& s5 = child(root, "lemma1_s5");
  EXPECT_EQ(s5.proof, ProofKind::BySplit);
  ASSERT_EQ(s5.children.size(), 2u);
  EXPECT_EQ(s5.children[0].id, "lemma1_s6");
  EXPECT_EQ(s5.children[1].id, "lemma1_s7");
  Formula expected = fol::parseFormula(
      "(∀x, x'. funApp(cf,x) = funApp(cf,x') ∧ in(x,cA) ∧ in(x',cA) → x = x') → injective(cf)");
  EXPECT_TRUE(fol::sameUpToConjunctOrder(s5.children[0].goal, expected))
      << fol::render(s5.children[0].goal);
  EXPECT_EQ(s5.children[0].proof, ProofKind::ByContext);
}

TEST(Injectivity, CornerstoneShape) {
  auto root = testdata::elaborateSample("injective");
  const auto& s10 = child(root, "lemma1_s10");
  EXPECT_EQ(s10.proof, ProofKind::BySequence);
  EXPECT_EQ(s10.goal, fol::parseFormula("cx = cx1"));
  ASSERT_EQ(s10.children.size(), 2u);
  EXPECT_EQ(s10.children[0].goal,
            fol::parseFormula("funApp(composition(cg,cf),cx) = funApp(composition(cg,cf),cx1)"));
  EXPECT_EQ(s10.children[1].goal, fol::parseFormula("cx = cx1"));
  // The cornerstone is in the context of the final step.
  auto ctx = context(root, "lemma1_s12");
  ASSERT_TRUE(ctx);
  EXPECT_EQ(ctx->back().id, "lemma1_s11");
}

TEST(Injectivity, FrozenConstantsHaveCPrefix) {
  auto obs = testdata::sampleObligations("injective");
  auto consts = fol::constantsOf(testdata::obligation(obs, "lemma1_s12").conjecture);
  EXPECT_EQ(consts, (std::set<std::string>{"cx", "cx1"}));
}

TEST(Relations, SubContextUsesHintsAndLocalFacts) {
  auto obs = testdata::sampleObligations("relations");
  const auto& ob = testdata::obligation(obs, "lemma1_s15");
  EXPECT_TRUE(ob.restricted);
  std::set<std::string> ids;
  for (const auto& e : ob.axioms) ids.insert(e.id);
  EXPECT_TRUE(ids.count("subrelation"));
  EXPECT_FALSE(ids.count("symmetry"));
  EXPECT_FALSE(ids.count("relationInverse"));
  for (const auto& e : ob.axioms) EXPECT_TRUE(e.local || e.id == "subrelation") << e.id;
}

TEST(Elaboration, Deterministic) {
  for (const auto& name : testdata::sampleNames()) {
    auto a = testdata::sampleObligations(name);
    auto b = testdata::sampleObligations(name);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].id, b[i].id);
      EXPECT_EQ(a[i].conjecture, b[i].conjecture);
      ASSERT_EQ(a[i].axioms.size(), b[i].axioms.size());
      for (std::size_t j = 0; j < a[i].axioms.size(); ++j)
        EXPECT_EQ(a[i].axioms[j].formula, b[i].axioms[j].formula);
    }
  }
}

TEST(Elaboration, AllObligationsClosed) {
  for (const auto& name : testdata::sampleNames())
    for (const auto& ob : testdata::sampleObligations(name)) {
      EXPECT_TRUE(fol::isClosed(ob.conjecture)) << ob.id;
      for (const auto& e : ob.axioms) EXPECT_TRUE(fol::isClosed(e.formula)) << e.id;
    }
}

TEST(Elaboration, UnknownHintIsAnError) {
  auto doc = language::load(
      "Include sets.\nLet A be set.\nLemma: A ⊆ A.\nProof:\n  Then A ⊆ A by nothing.\nqed.\n",
      testdata::libPath());
  EXPECT_THROW(elaborate(doc), ElaborationError);
}

TEST(Elaboration, UnboundVariableIsAnError) {
  auto doc = language::load(
      "Include sets.\nLet A be set.\nLemma: A ⊆ A.\nProof:\n  Then y ∈ A.\n  Hence A ⊆ A.\nqed.\n",
      testdata::libPath());
  try {
    elaborate(doc);
    FAIL();
  } catch (const ElaborationError& e) {
    EXPECT_NE(e.message().find("'y' is not introduced"), std::string::npos);
    EXPECT_EQ(e.span().startLine, 5);
  }
}

TEST(Elaboration, LemmaWithoutProofIsOneObligation) {
  auto doc = language::load("Include sets.\nLet A be set.\nLemma: A ⊆ A.\n", testdata::libPath());
  auto obs = collectObligations(elaborate(doc));
  ASSERT_EQ(obs.size(), 1u);
  EXPECT_FALSE(obs[0].restricted);
}

// ------------------------------------------------------------ properties

TEST(ContextProperty, AgreesWithDefinitionOnRandomTrees) {
  std::mt19937 rng(7);
  for (int t = 0; t < 1000; ++t) {
    int next = 0;
    Statement root = randomTree(rng, 4, next);
    std::map<std::string, std::vector<std::pair<std::string, Formula>>> expected;
    expectedContexts(root, {}, expected);
    forEach(root, [&](const Statement& s) {
      auto got = context(root, s.id);
      ASSERT_TRUE(got) << s.id;
      ASSERT_EQ(normalized(*got), normalized(expected[s.id])) << "tree " << t << " node " << s.id;
    });
  }
}

TEST(ContextProperty, SplitChildrenShareTheirContext) {
  std::mt19937 rng(11);
  auto check = [](const Statement& root) {
    forEach(root, [&](const Statement& s) {
      if (s.proof != ProofKind::BySplit) return;
      auto first = context(root, s.children.front().id);
      for (const auto& c : s.children) EXPECT_EQ(normalized(*context(root, c.id)), normalized(*first));
    });
  };
  for (int t = 0; t < 300; ++t) {
    int next = 0;
    check(randomTree(rng, 4, next));
  }
  for (const auto& name : testdata::sampleNames()) check(testdata::elaborateSample(name));
}

TEST(ContextProperty, MissingIdIsNullopt) {
  auto root = testdata::elaborateSample("complement");
  EXPECT_FALSE(context(root, "no_such_statement"));
}

// If every obligation of a lemma is discharged, its goal follows from the
// lemma's own context.
TEST(SoundnessProperty, DischargedLemmaTreesProveTheirGoal) {
  std::mt19937 rng(2024);
  int trees = 0, discharged = 0;
  for (int attempt = 0; trees < 200 && attempt < 5000; ++attempt) {
    std::vector<Formula> axioms;
    int na = static_cast<int>(rng() % 3);
    for (int i = 0; i < na; ++i) axioms.push_back(randomProp(rng, 1));
    Formula goal = randomProp(rng, 2);

    language::Item lemma;
    lemma.kind = language::Item::Kind::Lemma;
    lemma.statement = goal;
    lemma.formula = goal;
    lemma.hasProof = true;
    lemma.proof = randomSteps(rng, goal, 2);

    Statement root;
    root.id = "root";
    root.proof = ProofKind::BySequence;
    for (std::size_t i = 0; i < axioms.size(); ++i) {
      Statement a;
      a.id = "ax" + std::to_string(i);
      a.goal = axioms[i];
      root.children.push_back(a);
    }
    try {
      root.children.push_back(elaborateLemma(lemma, "lemma"));
    } catch (const ElaborationError&) {
      continue;  // not a well-formed proof text
    }
    ++trees;
    bool all = true;
    for (const auto& ob : collectObligations(root)) {
      std::vector<Formula> ax;
      for (const auto& e : ob.axioms) ax.push_back(e.formula);
      if (!provable(ax, ob.conjecture)) {
        all = false;
        break;
      }
    }
    if (!all) continue;
    ++discharged;
    auto gamma = context(root, "lemma");
    ASSERT_TRUE(gamma);
    std::vector<Formula> ax;
    for (const auto& e : *gamma) ax.push_back(e.formula);
    EXPECT_TRUE(provable(ax, goal)) << "tree " << trees << ": " << fol::render(goal);
  }
  EXPECT_EQ(trees, 200);
  // Enough trees must get through for the property to say something.
  EXPECT_GE(discharged, 20);
  RecordProperty("discharged", discharged);
}
