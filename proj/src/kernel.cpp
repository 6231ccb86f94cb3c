#include "elfe/kernel.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace elfe::kernel {

using fol::Formula;
using fol::Term;
using language::Item;
using language::Step;

const char* toString(ProofKind k) {
  switch (k) {
    case ProofKind::Assumed: return "Assumed";
    case ProofKind::ByContext: return "ByContext";
    case ProofKind::BySubContext: return "BySubContext";
    case ProofKind::BySequence: return "BySequence";
    case ProofKind::BySplit: return "BySplit";
  }
  return "?";
}

namespace {

std::string where(const SourceSpan& span, const std::string& file) {
  std::string s = file.empty() ? "" : file + ".elfe:";
  if (span.valid()) s += std::to_string(span.startLine) + ":" + std::to_string(span.startCol) + ": ";
  return s;
}

Statement node(const std::string& id, const Formula& goal, ProofKind kind,
               std::vector<Statement> children) {
  Statement s;
  s.id = id;
  s.goal = goal;
  s.proof = kind;
  s.children = std::move(children);
  s.implicit = true;
  if (!s.children.empty()) s.span = s.children.front().span;
  return s;
}

}  // namespace

ElaborationError::ElaborationError(const std::string& message, SourceSpan span, std::string file)
    : std::runtime_error(where(span, file) + message),
      message_(message),
      span_(span),
      file_(std::move(file)) {}

Statement forallIntro(const std::string& id, const Formula& goal, Statement body) {
  std::vector<Statement> c;
  c.push_back(std::move(body));
  return node(id, goal, ProofKind::BySequence, std::move(c));
}

Statement impliesIntro(const std::string& id, const Formula& goal, Statement assumption,
                       Statement body) {
  std::vector<Statement> c;
  c.push_back(std::move(assumption));
  c.push_back(std::move(body));
  return node(id, goal, ProofKind::BySequence, std::move(c));
}

Statement splitGoal(const std::string& id, const Formula& goal, Statement soundness,
                    std::vector<Statement> alternatives) {
  std::vector<Statement> c;
  c.push_back(std::move(soundness));
  for (auto& a : alternatives) c.push_back(std::move(a));
  return node(id, goal, ProofKind::BySplit, std::move(c));
}

Statement cornerstone(const std::string& id, const Formula& goal, Statement derived,
                      Statement rest) {
  std::vector<Statement> c;
  c.push_back(std::move(derived));
  c.push_back(std::move(rest));
  return node(id, goal, ProofKind::BySequence, std::move(c));
}

namespace {

class LemmaElaborator {
 public:
  LemmaElaborator(const Item& lemma, const std::set<std::string>& avoid)
      : lemma_(lemma), used_(avoid) {
    for (const auto& s : fol::symbolsOf(*lemma.statement)) used_.insert(s);
  }

  Statement run(const std::string& id) {
    const Formula& goal = *lemma_.statement;
    Statement root;
    if (!lemma_.hasProof) {
      root = leaf(goal, {}, lemma_.span, false);
    } else {
      root = prove(goal, lemma_.proof, lemma_.proofEnd, lemma_.letGuarded);
    }
    root.span = lemma_.span;
    root.implicit = false;
    root.local = false;
    int counter = 0;
    std::function<void(Statement&)> number = [&](Statement& s) {
      for (auto& c : s.children) {
        c.id = id + "_s" + std::to_string(++counter);
        c.local = true;
        number(c);
      }
    };
    root.id = id;
    number(root);
    checkClosed(root);
    return root;
  }

 private:
  const Item& lemma_;
  std::set<std::string> used_;
  std::map<std::string, Term> subst_;

  [[noreturn]] void error(const std::string& msg, const SourceSpan& span) const {
    throw ElaborationError(msg, span, lemma_.file);
  }

  void checkClosed(const Statement& s) const {
    auto free = fol::freeVarList(s.goal);
    if (!free.empty())
      error("'" + free.front() + "' is not introduced; bind it with Assume or a quantifier",
            s.span);
    for (const auto& c : s.children) checkClosed(c);
  }

  Formula formulaOf(const Step& s) const { return fol::substitute(*s.formula, subst_); }

  Statement leaf(const Formula& goal, const std::vector<std::string>& hints,
                 const SourceSpan& span, bool implicit) const {
    Statement s;
    s.goal = goal;
    s.proof = hints.empty() ? ProofKind::ByContext : ProofKind::BySubContext;
    s.hints = hints;
    s.span = span;
    s.file = lemma_.file;
    s.implicit = implicit;
    return s;
  }

  Statement assumed(const Formula& goal, const SourceSpan& span, bool implicit) const {
    Statement s;
    s.goal = goal;
    s.proof = ProofKind::Assumed;
    s.span = span;
    s.file = lemma_.file;
    s.implicit = implicit;
    return s;
  }

  Statement prove(const Formula& goal, std::span<const Step> steps, const SourceSpan& close,
                  bool autoAssume) {
    if (!steps.empty() || autoAssume) {
      auto [vars, body] = fol::stripForalls(goal);
      if (!vars.empty()) {
        auto frozen = fol::freeze(goal, vars, used_);
        for (const auto& [v, c] : frozen.map.entries) {
          subst_.insert_or_assign(v, Term::constant(c));
          used_.insert(c);
        }
        return forallIntro("", goal, prove(frozen.formula, steps, close, autoAssume));
      }
    }
    if (autoAssume && goal.kind() == Formula::Kind::Implies) {
      return impliesIntro("", goal, assumed(goal.lhs(), lemma_.span, true),
                          prove(goal.rhs(), steps, close, false));
    }
    if (steps.empty()) return leaf(goal, {}, close, true);

    const Step& s = steps.front();
    auto rest = steps.subspan(1);
    switch (s.kind) {
      case Step::Kind::Assume:
        return assume(goal, steps, close);
      case Step::Kind::Then:
      case Step::Kind::Hence: {
        Formula phi = formulaOf(s);
        if (rest.empty() && fol::sameUpToConjunctOrder(phi, goal))
          return leaf(goal, s.hints, s.span, false);
        return cornerstone("", goal, leaf(phi, s.hints, s.span, false),
                           prove(goal, rest, close, false));
      }
      case Step::Kind::Case: {
        if (s.body.empty()) error("empty case body", s.span);
        const Step& last = s.body.back();
        if (last.kind == Step::Kind::Assume || last.kind == Step::Kind::Case)
          error("a case must end with Then or Hence", last.span);
        auto saved = subst_;
        Formula c = formulaOf(s);
        Formula k = formulaOf(last);
        Formula implication = Formula::implies(c, k);
        Statement caseStmt = impliesIntro("", implication, assumed(c, s.span, false),
                                          prove(k, s.body, s.endSpan, false));
        caseStmt.span = s.span;
        subst_ = saved;
        return cornerstone("", goal, std::move(caseStmt), prove(goal, rest, close, false));
      }
      case Step::Kind::Proof: {
        auto saved = subst_;
        Formula psi = fol::universalClosure(formulaOf(s));
        Statement sub = prove(psi, s.body, s.endSpan, false);
        sub.span = s.span;
        subst_ = saved;
        return cornerstone("", goal, std::move(sub), prove(goal, rest, close, false));
      }
    }
    error("unexpected step", s.span);
  }

  // Assume either unfolds the goal's implication or opens an alternative
  // goal Q = ∀x̄. (assumption → first following Hence).
  Statement assume(const Formula& goal, std::span<const Step> steps, const SourceSpan& close) {
    const Step& s = steps.front();
    auto rest = steps.subspan(1);
    Formula phi = formulaOf(s);
    if (goal.kind() == Formula::Kind::Implies && fol::isClosed(phi) &&
        fol::sameUpToConjunctOrder(phi, goal.lhs())) {
      return impliesIntro("", goal, assumed(goal.lhs(), s.span, false),
                          prove(goal.rhs(), rest, close, false));
    }
    auto hence = std::find_if(rest.begin(), rest.end(),
                              [](const Step& k) { return k.kind == Step::Kind::Hence; });
    if (hence == rest.end()) error("Assume has no following Hence to conclude", s.span);
    auto j = static_cast<std::size_t>(hence - rest.begin());

    Formula q = fol::universalClosure(Formula::implies(phi, formulaOf(*hence)));
    auto saved = subst_;
    Statement alternative = prove(q, steps.subspan(0, j + 2), hence->span, false);
    subst_ = saved;

    auto after = rest.subspan(j + 1);
    Formula qp = Formula::implies(q, goal);
    Statement soundness;
    if (after.empty()) {
      soundness = leaf(qp, {}, close, true);
    } else if (after.size() == 1 && after[0].kind == Step::Kind::Hence &&
               fol::sameUpToConjunctOrder(formulaOf(after[0]), goal)) {
      soundness = leaf(qp, after[0].hints, after[0].span, false);
    } else {
      soundness = impliesIntro("", qp, assumed(q, s.span, true), prove(goal, after, close, false));
    }
    std::vector<Statement> alts;
    alts.push_back(std::move(alternative));
    return splitGoal("", goal, std::move(soundness), std::move(alts));
  }
};

void collectFormulaSymbols(const std::vector<Step>& steps, std::set<std::string>& out) {
  for (const auto& s : steps) {
    if (s.formula)
      for (const auto& x : fol::symbolsOf(*s.formula)) out.insert(x);
    collectFormulaSymbols(s.body, out);
  }
}

}  // namespace

Statement elaborateLemma(const Item& lemma, const std::string& id,
                         const std::set<std::string>& avoid) {
  if (!lemma.statement) throw ElaborationError("lemma was not desugared", lemma.span, lemma.file);
  return LemmaElaborator(lemma, avoid).run(id);
}

Statement elaborate(const language::Document& doc) {
  Statement root;
  root.id = "root";
  root.goal = Formula::top();
  root.proof = ProofKind::BySequence;

  std::set<std::string> symbols;
  for (const auto& item : doc.items) {
    if (item.statement)
      for (const auto& x : fol::symbolsOf(*item.statement)) symbols.insert(x);
    collectFormulaSymbols(item.proof, symbols);
  }

  std::set<std::string> ids{"root"};
  std::map<std::string, std::vector<std::string>> byName;  // item name -> ids so far
  auto unique = [&](std::string base) {
    std::string id = base;
    for (int n = 2; ids.count(id); ++n) id = base + "_" + std::to_string(n);
    ids.insert(id);
    return id;
  };

  int lemmas = 0, axioms = 0;
  for (const auto& item : doc.items) {
    if (!item.statement) continue;
    Statement s;
    if (item.kind == Item::Kind::Lemma) {
      std::string id = unique(item.name.empty() ? "lemma" + std::to_string(++lemmas) : item.name);
      s = elaborateLemma(item, id, symbols);
      std::function<void(Statement&)> resolve = [&](Statement& n) {
        std::vector<std::string> resolved;
        for (const auto& h : n.hints) {
          auto it = byName.find(h);
          if (it == byName.end())
            throw ElaborationError("unknown reference '" + h + "'", n.span, item.file);
          resolved.insert(resolved.end(), it->second.begin(), it->second.end());
        }
        n.hints = std::move(resolved);
        for (auto& c : n.children) resolve(c);
        for (const auto& c : n.children) ids.insert(c.id);
      };
      resolve(s);
    } else {
      s.id = unique(item.name.empty() ? "axiom" + std::to_string(++axioms) : item.name);
      s.goal = *item.statement;
      s.proof = ProofKind::Assumed;
      s.span = item.span;
    }
    s.file = item.file;
    if (!item.name.empty()) byName[item.name].push_back(s.id);
    root.children.push_back(std::move(s));
  }
  return root;
}

const Statement* find(const Statement& root, const std::string& id) {
  if (root.id == id) return &root;
  for (const auto& c : root.children)
    if (const Statement* s = find(c, id)) return s;
  return nullptr;
}

namespace {

// Depth-first walk handing each statement its context.
void walk(const Statement& s, Context& ctx,
          const std::function<bool(const Statement&, const Context&)>& visit) {
  if (!visit(s, ctx)) return;
  std::size_t base = ctx.size();
  for (const auto& c : s.children) {
    walk(c, ctx, visit);
    if (s.proof == ProofKind::BySequence) ctx.push_back({c.id, c.goal, c.local});
  }
  ctx.resize(base);
}

}  // namespace

std::optional<Context> context(const Statement& root, const std::string& id) {
  std::optional<Context> out;
  Context ctx;
  walk(root, ctx, [&](const Statement& s, const Context& c) {
    if (out) return false;
    if (s.id == id) {
      out = c;
      return false;
    }
    return true;
  });
  return out;
}

std::vector<Obligation> collectObligations(const Statement& root) {
  std::vector<Obligation> out;
  Context ctx;
  walk(root, ctx, [&](const Statement& s, const Context& c) {
    if (!s.isLeaf()) return true;
    Obligation ob;
    ob.id = s.id;
    ob.conjecture = s.goal;
    ob.span = s.span;
    ob.file = s.file;
    if (s.proof == ProofKind::ByContext) {
      ob.axioms = c;
    } else {
      ob.restricted = true;
      for (const auto& h : s.hints)
        if (std::none_of(c.begin(), c.end(), [&](const ContextEntry& e) { return e.id == h; }))
          throw ElaborationError("reference '" + h + "' is not in the context", s.span, s.file);
      for (const auto& e : c)
        if (e.local || std::find(s.hints.begin(), s.hints.end(), e.id) != s.hints.end())
          ob.axioms.push_back(e);
    }
    out.push_back(std::move(ob));
    return false;
  });
  return out;
}

}  // namespace elfe::kernel
