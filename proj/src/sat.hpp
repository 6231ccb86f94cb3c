#pragma once

// Small CDCL SAT solver used by the finite model finder: two watched
// literals, first-UIP learning, VSIDS with phase saving, Luby restarts.

#include <chrono>
#include <cstdint>
#include <optional>
#include <stop_token>
#include <vector>

namespace elfe::sat {

// Literal encoding: 2 * var + (negated ? 1 : 0).
inline int mkLit(int var, bool negated = false) { return 2 * var + (negated ? 1 : 0); }
inline int negLit(int l) { return l ^ 1; }
inline int litVar(int l) { return l >> 1; }

class Solver {
 public:
  int newVar();
  int numVars() const { return static_cast<int>(assigns_.size()); }
  std::size_t numClauses() const { return clauses_.size(); }

  // Returns false when the formula became trivially unsatisfiable.
  bool addClause(std::vector<int> lits);

  // nullopt when interrupted by the stop token or the deadline.
  std::optional<bool> solve(std::stop_token stop,
                            std::chrono::steady_clock::time_point deadline);

  bool value(int var) const { return model_[static_cast<std::size_t>(var)]; }

 private:
  static constexpr std::int8_t kUndef = 2;

  std::vector<std::vector<int>> clauses_;
  std::vector<std::vector<int>> watches_;  // per literal: clause indices
  std::vector<std::int8_t> assigns_;       // per var: 0 false, 1 true, 2 undef
  std::vector<std::int8_t> phase_;
  std::vector<int> level_;
  std::vector<int> reason_;  // clause index or -1
  std::vector<double> activity_;
  std::vector<int> trail_;
  std::vector<int> trailLim_;
  std::size_t qhead_ = 0;
  double varInc_ = 1.0;
  bool unsat_ = false;
  std::vector<bool> model_;

  // Binary max-heap on activity.
  std::vector<int> heap_;
  std::vector<int> heapPos_;

  std::int8_t litValue(int l) const {
    std::int8_t a = assigns_[static_cast<std::size_t>(litVar(l))];
    if (a == kUndef) return kUndef;
    return static_cast<std::int8_t>(a ^ (l & 1));
  }
  int decisionLevel() const { return static_cast<int>(trailLim_.size()); }
  void assign(int l, int reason);
  int propagate();  // conflicting clause index or -1
  void analyze(int confl, std::vector<int>& learnt, int& btLevel);
  void backtrack(int level);
  void bump(int var);
  void heapUp(int i);
  void heapDown(int i);
  void heapInsert(int var);
  int heapPop();
  void attach(int ci);
};

}  // namespace elfe::sat
