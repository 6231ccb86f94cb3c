#include "sat.hpp"

#include <algorithm>

namespace elfe::sat {

namespace {

// Luby sequence 1 1 2 1 1 2 4 ...
double luby(int i) {
  int size = 1, seq = 0;
  while (size < i + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != i) {
    size = (size - 1) >> 1;
    --seq;
    i = i % size;
  }
  return static_cast<double>(1 << seq);
}

}  // namespace

int Solver::newVar() {
  int v = numVars();
  assigns_.push_back(kUndef);
  phase_.push_back(0);
  level_.push_back(0);
  reason_.push_back(-1);
  activity_.push_back(0.0);
  watches_.emplace_back();
  watches_.emplace_back();
  heapPos_.push_back(-1);
  heapInsert(v);
  return v;
}

void Solver::attach(int ci) {
  const auto& c = clauses_[static_cast<std::size_t>(ci)];
  watches_[static_cast<std::size_t>(negLit(c[0]))].push_back(ci);
  watches_[static_cast<std::size_t>(negLit(c[1]))].push_back(ci);
}

bool Solver::addClause(std::vector<int> lits) {
  if (unsat_) return false;
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  std::vector<int> kept;
  for (std::size_t i = 0; i < lits.size(); ++i) {
    if (i + 1 < lits.size() && lits[i + 1] == negLit(lits[i])) return true;
    std::int8_t v = litValue(lits[i]);
    if (v == 1) return true;  // satisfied at level 0
    if (v == 0) continue;
    kept.push_back(lits[i]);
  }
  if (kept.empty()) {
    unsat_ = true;
    return false;
  }
  if (kept.size() == 1) {
    assign(kept[0], -1);
    if (propagate() >= 0) {
      unsat_ = true;
      return false;
    }
    return true;
  }
  clauses_.push_back(std::move(kept));
  attach(static_cast<int>(clauses_.size()) - 1);
  return true;
}

void Solver::assign(int l, int reason) {
  auto v = static_cast<std::size_t>(litVar(l));
  assigns_[v] = static_cast<std::int8_t>(!(l & 1));
  level_[v] = decisionLevel();
  reason_[v] = reason;
  trail_.push_back(l);
}

int Solver::propagate() {
  while (qhead_ < trail_.size()) {
    int p = trail_[qhead_++];  // p became true; clauses watching ~p... stored under p
    auto& ws = watches_[static_cast<std::size_t>(p)];
    std::size_t i = 0, j = 0;
    int conflict = -1;
    while (i < ws.size()) {
      int ci = ws[i++];
      auto& c = clauses_[static_cast<std::size_t>(ci)];
      int falseLit = negLit(p);
      if (c[0] == falseLit) std::swap(c[0], c[1]);
      if (litValue(c[0]) == 1) {
        ws[j++] = ci;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (litValue(c[k]) != 0) {
          std::swap(c[1], c[k]);
          watches_[static_cast<std::size_t>(negLit(c[1]))].push_back(ci);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = ci;
      if (litValue(c[0]) == 0) {
        conflict = ci;
        while (i < ws.size()) ws[j++] = ws[i++];
      } else {
        assign(c[0], ci);
      }
    }
    ws.resize(j);
    if (conflict >= 0) return conflict;
  }
  return -1;
}

void Solver::bump(int var) {
  auto v = static_cast<std::size_t>(var);
  activity_[v] += varInc_;
  if (activity_[v] > 1e100) {
    for (auto& a : activity_) a *= 1e-100;
    varInc_ *= 1e-100;
  }
  if (heapPos_[v] >= 0) heapUp(heapPos_[v]);
}

void Solver::analyze(int confl, std::vector<int>& learnt, int& btLevel) {
  std::vector<char> seen(assigns_.size(), 0);
  learnt.assign(1, -1);
  int pathCount = 0;
  int p = -1;
  std::size_t index = trail_.size();
  do {
    const auto& c = clauses_[static_cast<std::size_t>(confl)];
    for (std::size_t k = (p == -1 ? 0 : 1); k < c.size(); ++k) {
      int q = c[k];
      auto v = static_cast<std::size_t>(litVar(q));
      if (seen[v] || level_[v] == 0) continue;
      seen[v] = 1;
      bump(litVar(q));
      if (level_[v] >= decisionLevel())
        ++pathCount;
      else
        learnt.push_back(q);
    }
    while (!seen[static_cast<std::size_t>(litVar(trail_[--index]))]) {
    }
    p = trail_[index];
    confl = reason_[static_cast<std::size_t>(litVar(p))];
    seen[static_cast<std::size_t>(litVar(p))] = 0;
    --pathCount;
    if (pathCount > 0) {
      // The reason clause has p at position 0 after propagation.
      auto& rc = clauses_[static_cast<std::size_t>(confl)];
      if (rc[0] != p) std::swap(rc[0], rc[1]);
    }
  } while (pathCount > 0);
  learnt[0] = negLit(p);
  btLevel = 0;
  if (learnt.size() > 1) {
    std::size_t maxI = 1;
    for (std::size_t k = 2; k < learnt.size(); ++k)
      if (level_[static_cast<std::size_t>(litVar(learnt[k]))] >
          level_[static_cast<std::size_t>(litVar(learnt[maxI]))])
        maxI = k;
    std::swap(learnt[1], learnt[maxI]);
    btLevel = level_[static_cast<std::size_t>(litVar(learnt[1]))];
  }
  varInc_ /= 0.95;
}

void Solver::backtrack(int level) {
  if (decisionLevel() <= level) return;
  auto lim = static_cast<std::size_t>(trailLim_[static_cast<std::size_t>(level)]);
  for (std::size_t k = trail_.size(); k-- > lim;) {
    auto v = static_cast<std::size_t>(litVar(trail_[k]));
    phase_[v] = assigns_[v];
    assigns_[v] = kUndef;
    reason_[v] = -1;
    if (heapPos_[v] < 0) heapInsert(static_cast<int>(v));
  }
  trail_.resize(lim);
  trailLim_.resize(static_cast<std::size_t>(level));
  qhead_ = trail_.size();
}

std::optional<bool> Solver::solve(std::stop_token stop,
                                  std::chrono::steady_clock::time_point deadline) {
  if (unsat_) return false;
  if (propagate() >= 0) return false;
  int restarts = 0;
  std::uint64_t conflicts = 0;
  for (;;) {
    double budget = luby(restarts++) * 100;
    int local = 0;
    for (;;) {
      int confl = propagate();
      if (confl >= 0) {
        ++conflicts;
        ++local;
        if (decisionLevel() == 0) return false;
        std::vector<int> learnt;
        int bt = 0;
        analyze(confl, learnt, bt);
        backtrack(bt);
        if (learnt.size() == 1) {
          assign(learnt[0], -1);
        } else {
          clauses_.push_back(learnt);
          int ci = static_cast<int>(clauses_.size()) - 1;
          attach(ci);
          assign(learnt[0], ci);
        }
        if ((conflicts & 255) == 0 &&
            (stop.stop_requested() || std::chrono::steady_clock::now() > deadline))
          return std::nullopt;
        continue;
      }
      if (local >= budget) {
        backtrack(0);
        break;
      }
      int next = -1;
      while (!heap_.empty()) {
        int v = heapPop();
        if (assigns_[static_cast<std::size_t>(v)] == kUndef) {
          next = v;
          break;
        }
      }
      if (next < 0) {
        model_.assign(assigns_.size(), false);
        for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v] = assigns_[v] == 1;
        backtrack(0);
        return true;
      }
      trailLim_.push_back(static_cast<int>(trail_.size()));
      assign(mkLit(next, phase_[static_cast<std::size_t>(next)] == 0), -1);
    }
  }
}

void Solver::heapUp(int i) {
  int v = heap_[static_cast<std::size_t>(i)];
  while (i > 0) {
    int parent = (i - 1) / 2;
    int pv = heap_[static_cast<std::size_t>(parent)];
    if (activity_[static_cast<std::size_t>(pv)] >= activity_[static_cast<std::size_t>(v)]) break;
    heap_[static_cast<std::size_t>(i)] = pv;
    heapPos_[static_cast<std::size_t>(pv)] = i;
    i = parent;
  }
  heap_[static_cast<std::size_t>(i)] = v;
  heapPos_[static_cast<std::size_t>(v)] = i;
}

void Solver::heapDown(int i) {
  int n = static_cast<int>(heap_.size());
  int v = heap_[static_cast<std::size_t>(i)];
  for (;;) {
    int child = 2 * i + 1;
    if (child >= n) break;
    if (child + 1 < n &&
        activity_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(child + 1)])] >
            activity_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(child)])])
      ++child;
    int cv = heap_[static_cast<std::size_t>(child)];
    if (activity_[static_cast<std::size_t>(cv)] <= activity_[static_cast<std::size_t>(v)]) break;
    heap_[static_cast<std::size_t>(i)] = cv;
    heapPos_[static_cast<std::size_t>(cv)] = i;
    i = child;
  }
  heap_[static_cast<std::size_t>(i)] = v;
  heapPos_[static_cast<std::size_t>(v)] = i;
}

void Solver::heapInsert(int var) {
  heap_.push_back(var);
  heapPos_[static_cast<std::size_t>(var)] = static_cast<int>(heap_.size()) - 1;
  heapUp(static_cast<int>(heap_.size()) - 1);
}

int Solver::heapPop() {
  int top = heap_.front();
  heapPos_[static_cast<std::size_t>(top)] = -1;
  int last = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_[0] = last;
    heapPos_[static_cast<std::size_t>(last)] = 0;
    heapDown(0);
  }
  return top;
}

}  // namespace elfe::sat
