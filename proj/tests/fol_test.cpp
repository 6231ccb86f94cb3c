#include <gtest/gtest.h>

#include <random>

#include "elfe/fol.hpp"
#include "random_formulas.hpp"

using namespace elfe::fol;

namespace {

Term v(const char* n) { return Term::variable(n); }
Term c(const char* n) { return Term::constant(n); }

}  // namespace

TEST(Fol, SubstituteAvoidsCapture) {
  // ∀y. Q(x,y) with x := f(y)
  Formula f = Formula::forall("y", Formula::predicate("Q", {v("x"), v("y")}));
  Formula g = substitute(f, "x", Term::apply("f", {v("y")}));
  ASSERT_EQ(g.kind(), Formula::Kind::Forall);
  EXPECT_EQ(g.var(), "y0");
  EXPECT_EQ(g.body(), Formula::predicate(
                          "Q", {Term::apply("f", {v("y")}), v("y0")}));
}

TEST(Fol, SubstituteLeavesBoundOccurrences) {
  Formula f = Formula::conj(Formula::predicate("P", {v("x")}),
                            Formula::forall("x", Formula::predicate("P", {v("x")})));
  Formula g = substitute(f, "x", c("a"));
  EXPECT_EQ(render(g), "P(a) ∧ (∀x. P(x))");
}

TEST(Fol, FreezeNamesConstants) {
  Formula f = Formula::forall("x", Formula::predicate("P", {v("x")}));
  std::vector<std::string> vars{"x"};
  auto r = freeze(f, vars);
  EXPECT_EQ(r.formula, Formula::predicate("P", {c("cx")}));
  ASSERT_EQ(r.map.entries.size(), 1u);
  EXPECT_EQ(*r.map.find("x"), "cx");
}

TEST(Fol, FreezeAvoidsExistingSymbols) {
  Formula f = Formula::forall("x", Formula::predicate("P", {v("x"), c("cx")}));
  std::vector<std::string> vars{"x"};
  auto r = freeze(f, vars, {"cx1"});
  EXPECT_EQ(*r.map.find("x"), "cx2");
}

TEST(Fol, FreezeRejectsInnerVariable) {
  Formula f = Formula::conj(Formula::top(),
                            Formula::forall("x", Formula::predicate("P", {v("x")})));
  std::vector<std::string> vars{"x"};
  EXPECT_THROW(freeze(f, vars), FreezeError);
}

TEST(Fol, FreezeKeepsOtherBinders) {
  Formula f = parseFormula("∀x, y. R(x,y)");
  std::vector<std::string> vars{"y"};
  auto r = freeze(f, vars);
  EXPECT_EQ(render(r.formula), "∀x. R(x,cy)");
}

TEST(Fol, UniversalClosureUsesFirstOccurrence) {
  Formula f = Formula::predicate("R", {v("b"), v("a"), v("b")});
  EXPECT_EQ(render(universalClosure(f)), "∀b, a. R(b,a,b)");
}

TEST(Fol, QuantifierRenamesInnerBinder) {
  Formula inner = Formula::forall("x", Formula::predicate("P", {v("x")}));
  Formula f = Formula::forall("x", Formula::conj(Formula::predicate("Q", {v("x")}), inner));
  EXPECT_EQ(render(f), "∀x. Q(x) ∧ (∀x0. P(x0))");
}

TEST(Fol, RenderGuardedForm) {
  Formula body = Formula::implies(
      Formula::conj(Formula::predicate("set", {v("A")}),
                    Formula::predicate("set", {v("B")})),
      Formula::predicate("subset", {v("A"), v("B")}));
  Formula f = Formula::forall("A", Formula::forall("B", body));
  EXPECT_EQ(render(f), "∀set(A), set(B). subset(A,B)");
  EXPECT_EQ(parseFormula(render(f)), f);
}

TEST(Fol, RenderMarksFreeAndShadowed) {
  Formula f = Formula::forall("x", Formula::equals(v("x"), c("x")));
  EXPECT_EQ(render(f), "∀x. x = #x");
  EXPECT_EQ(parseFormula(render(f)), f);
  EXPECT_EQ(render(Formula::predicate("P", {v("z")})), "P(?z)");
}

TEST(Fol, ParseRespectsPrecedence) {
  Formula f = parseFormula("a ∧ b ∨ c → d ↔ e");
  EXPECT_EQ(f.kind(), Formula::Kind::Iff);
  EXPECT_EQ(f.lhs().kind(), Formula::Kind::Implies);
  EXPECT_EQ(f.lhs().lhs().kind(), Formula::Kind::Or);
  EXPECT_EQ(f.lhs().lhs().lhs().kind(), Formula::Kind::And);
  Formula g = parseFormula("a → b → c");
  EXPECT_EQ(g.rhs().kind(), Formula::Kind::Implies);
}

TEST(Fol, ParseRejectsGarbage) {
  EXPECT_THROW(parseFormula("∀x. "), SyntaxError);
  EXPECT_THROW(parseFormula("P(a"), SyntaxError);
  EXPECT_THROW(parseFormula("P(a) Q"), SyntaxError);
}

TEST(Fol, SameUpToConjunctOrder) {
  EXPECT_TRUE(sameUpToConjunctOrder(parseFormula("a ∧ (b ∧ c)"),
                                    parseFormula("c ∧ a ∧ b")));
  EXPECT_FALSE(sameUpToConjunctOrder(parseFormula("a ∧ b"),
                                     parseFormula("a ∧ c")));
  EXPECT_TRUE(sameUpToConjunctOrder(parseFormula("p → a ∧ b"),
                                    parseFormula("p → b ∧ a")));
}

// ---------------------------------------------------------- properties

TEST(FolProperty, RenderParseRoundTrip) {
  std::mt19937 rng(11);
  for (int i = 0; i < 2000; ++i) {
    Formula f = elfe::testing::randomFormula(rng, 4);
    std::string text = render(f);
    Formula back = parseFormula(text);
    ASSERT_EQ(back, f) << text << "\n  re-rendered: " << render(back);
  }
}

TEST(FolProperty, SubstitutionIsCaptureFree) {
  // Every variable of the substituted term stays free after substitution.
  std::mt19937 rng(12);
  for (int i = 0; i < 2000; ++i) {
    Formula f = elfe::testing::randomFormula(rng, 4);
    auto free = freeVarList(f);
    if (free.empty()) continue;
    Term t = elfe::testing::randomTerm(rng, 2, /*withVars=*/true);
    Formula g = substitute(f, free.front(), t);
    auto after = freeVars(g);
    for (const auto& tv : termVars(t))
      ASSERT_TRUE(after.contains(tv)) << render(f) << " [" << free.front()
                                      << " := " << render(t) << "]";
    // Other free variables are untouched.
    for (std::size_t k = 1; k < free.size(); ++k)
      ASSERT_TRUE(after.contains(free[k]));
  }
}

TEST(FolProperty, FreezeConstantsAreFresh) {
  std::mt19937 rng(13);
  for (int i = 0; i < 2000; ++i) {
    Formula f = universalClosure(elfe::testing::randomFormula(rng, 3));
    auto [vars, body] = stripForalls(f);
    if (vars.empty()) continue;
    std::set<std::string> avoid{"c" + vars.front(), "cx1"};
    auto before = symbolsOf(f);
    auto r = freeze(f, vars, avoid);
    EXPECT_TRUE(isClosed(r.formula));
    for (const auto& [var, cname] : r.map.entries) {
      ASSERT_FALSE(before.contains(cname));
      ASSERT_FALSE(avoid.contains(cname));
      ASSERT_EQ(cname.rfind("c", 0), 0u);
    }
  }
}
