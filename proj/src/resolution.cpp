// Given-clause saturation over hash-consed terms.
//
// Binary resolution and factoring with negative literal selection, plus
// superposition, equality resolution and demodulation for "=" (ordered by
// a Knuth-Bendix ordering). Generated clauses are simplified by unit
// deletion and forward/backward subsumption. The negated conjecture and
// the local facts (formulas with constants) are preferred as given clauses.

#include <algorithm>
#include <climits>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "elfe/provers.hpp"

namespace elfe::provers {

namespace {

constexpr std::uint32_t kNone = UINT32_MAX;

class TermBank {
 public:
  struct Node {
    std::int32_t sym;  // >= 0 symbol id, < 0 variable -(index+1)
    std::uint32_t args;
    std::uint32_t arity;
    std::uint32_t size;
    bool ground;
  };

  std::uint32_t var(std::uint32_t i) {
    while (vars_.size() <= i) {
      std::int32_t s = -static_cast<std::int32_t>(vars_.size()) - 1;
      vars_.push_back(insert(s, nullptr, 0));
    }
    return vars_[i];
  }

  std::uint32_t app(std::int32_t sym, const std::uint32_t* args,
                    std::uint32_t n) {
    return insert(sym, args, n);
  }

  const Node& node(std::uint32_t t) const { return nodes_[t]; }
  bool isVar(std::uint32_t t) const { return nodes_[t].sym < 0; }
  std::uint32_t varIndex(std::uint32_t t) const {
    return static_cast<std::uint32_t>(-nodes_[t].sym - 1);
  }
  const std::uint32_t* args(std::uint32_t t) const {
    return pool_.data() + nodes_[t].args;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> pool_;
  std::vector<std::uint32_t> vars_;
  std::vector<std::uint32_t> slots_ = std::vector<std::uint32_t>(1024, kNone);
  std::size_t count_ = 0;

  static std::uint64_t hash(std::int32_t sym, const std::uint32_t* a,
                            std::uint32_t n) {
    std::uint64_t h = 1469598103934665603ull ^ static_cast<std::uint32_t>(sym);
    for (std::uint32_t i = 0; i < n; ++i) {
      h ^= a[i] + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 1099511628211ull;
    }
    return h;
  }

  bool same(std::uint32_t t, std::int32_t sym, const std::uint32_t* a,
            std::uint32_t n) const {
    const Node& nd = nodes_[t];
    if (nd.sym != sym || nd.arity != n) return false;
    for (std::uint32_t i = 0; i < n; ++i)
      if (pool_[nd.args + i] != a[i]) return false;
    return true;
  }

  void grow() {
    std::vector<std::uint32_t> old(slots_.size() * 2, kNone);
    old.swap(slots_);
    std::size_t mask = slots_.size() - 1;
    for (std::uint32_t t : old) {
      if (t == kNone) continue;
      const Node& nd = nodes_[t];
      std::size_t i = hash(nd.sym, pool_.data() + nd.args, nd.arity) & mask;
      while (slots_[i] != kNone) i = (i + 1) & mask;
      slots_[i] = t;
    }
  }

  std::uint32_t insert(std::int32_t sym, const std::uint32_t* a,
                       std::uint32_t n) {
    std::size_t mask = slots_.size() - 1;
    std::size_t i = hash(sym, a, n) & mask;
    while (slots_[i] != kNone) {
      if (same(slots_[i], sym, a, n)) return slots_[i];
      i = (i + 1) & mask;
    }
    Node nd{sym, static_cast<std::uint32_t>(pool_.size()), n, 1, sym >= 0};
    for (std::uint32_t k = 0; k < n; ++k) {
      pool_.push_back(a[k]);
      nd.size += nodes_[a[k]].size;
      nd.ground = nd.ground && nodes_[a[k]].ground;
    }
    auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(nd);
    slots_[i] = id;
    if (++count_ * 2 > slots_.size()) grow();
    return id;
  }
};

struct Lit {
  std::uint32_t atom;
  bool pos;
  friend bool operator==(const Lit&, const Lit&) = default;
};

struct PClause {
  std::vector<Lit> lits;
  std::uint32_t nvars = 0;
  std::uint32_t weight = 0;
  std::uint64_t sig = 0;
  // Literals that may take part in inferences: the selected negative
  // literal, or else the maximal ones.
  std::vector<std::uint32_t> eligible;
  bool support = false;
  bool deleted = false;
  bool active = false;
};

// A reference to a term under a variable offset: variable i of the term
// stands for binding slot i + off.
struct Ref {
  std::uint32_t t;
  std::uint32_t off;
};

class Unifier {
 public:
  explicit Unifier(const TermBank& b) : bank_(b) {}

  void reset(std::size_t slots) {
    if (bind_.size() < slots) bind_.resize(slots, Ref{kNone, 0});
    undo(0);
  }
  std::size_t mark() const { return trail_.size(); }
  void undo(std::size_t m) {
    while (trail_.size() > m) {
      bind_[trail_.back()].t = kNone;
      trail_.pop_back();
    }
  }

  Ref deref(Ref r) const {
    while (bank_.isVar(r.t)) {
      const Ref& b = bind_[bank_.varIndex(r.t) + r.off];
      if (b.t == kNone) break;
      r = b;
    }
    return r;
  }

  bool unify(Ref a, Ref b) {
    std::size_t m = mark();
    if (unifyRec(a, b)) return true;
    undo(m);
    return false;
  }

  // One-sided matching: binds only variables of the pattern side (offset
  // 0); target terms are compared by identity.
  bool match(std::uint32_t pat, std::uint32_t target) {
    std::size_t m = mark();
    if (matchRec(pat, target)) return true;
    undo(m);
    return false;
  }

  bool bound(std::uint32_t slot) const { return bind_[slot].t != kNone; }
  const Ref& binding(std::uint32_t slot) const { return bind_[slot]; }

 private:
  const TermBank& bank_;
  std::vector<Ref> bind_;
  std::vector<std::uint32_t> trail_;

  void set(std::uint32_t slot, Ref r) {
    bind_[slot] = r;
    trail_.push_back(slot);
  }

  bool occurs(std::uint32_t slot, Ref r) const {
    r = deref(r);
    if (bank_.isVar(r.t)) return bank_.varIndex(r.t) + r.off == slot;
    const auto& nd = bank_.node(r.t);
    if (nd.ground) return false;
    const std::uint32_t* a = bank_.args(r.t);
    for (std::uint32_t i = 0; i < nd.arity; ++i)
      if (occurs(slot, Ref{a[i], r.off})) return true;
    return false;
  }

  bool unifyRec(Ref a, Ref b) {
    a = deref(a);
    b = deref(b);
    bool av = bank_.isVar(a.t), bv = bank_.isVar(b.t);
    if (av && bv) {
      std::uint32_t sa = bank_.varIndex(a.t) + a.off;
      std::uint32_t sb = bank_.varIndex(b.t) + b.off;
      if (sa != sb) set(sa, b);
      return true;
    }
    if (av) {
      std::uint32_t sa = bank_.varIndex(a.t) + a.off;
      if (occurs(sa, b)) return false;
      set(sa, b);
      return true;
    }
    if (bv) {
      std::uint32_t sb = bank_.varIndex(b.t) + b.off;
      if (occurs(sb, a)) return false;
      set(sb, a);
      return true;
    }
    const auto& na = bank_.node(a.t);
    const auto& nb = bank_.node(b.t);
    if (na.ground && nb.ground) return a.t == b.t;
    if (na.sym != nb.sym || na.arity != nb.arity) return false;
    const std::uint32_t* xa = bank_.args(a.t);
    const std::uint32_t* xb = bank_.args(b.t);
    for (std::uint32_t i = 0; i < na.arity; ++i)
      if (!unifyRec(Ref{xa[i], a.off}, Ref{xb[i], b.off})) return false;
    return true;
  }

  bool matchRec(std::uint32_t p, std::uint32_t t) {
    if (bank_.isVar(p)) {
      std::uint32_t s = bank_.varIndex(p);
      if (bind_[s].t != kNone) return bind_[s].t == t;
      set(s, Ref{t, 0});
      return true;
    }
    const auto& np = bank_.node(p);
    if (np.ground) return p == t;
    if (bank_.isVar(t)) return false;
    const auto& nt = bank_.node(t);
    if (np.sym != nt.sym || np.arity != nt.arity) return false;
    const std::uint32_t* xp = bank_.args(p);
    const std::uint32_t* xt = bank_.args(t);
    for (std::uint32_t i = 0; i < np.arity; ++i)
      if (!matchRec(xp[i], xt[i])) return false;
    return true;
  }
};

enum class Cmp { Greater, Less, Equal, Incomparable };

// Knuth-Bendix ordering with unit weights; precedence by arity, then by
// symbol id.
class Kbo {
 public:
  explicit Kbo(const TermBank& b) : bank_(b) {}

  bool greater(std::uint32_t s, std::uint32_t t) const {
    if (s == t || bank_.isVar(s)) return false;
    if (bank_.isVar(t)) return contains(s, t);
    const auto& ns = bank_.node(s);
    const auto& nt = bank_.node(t);
    if (!nt.ground && !varsCovered(s, t)) return false;
    if (ns.size != nt.size) return ns.size > nt.size;
    if (ns.sym != nt.sym) {
      if (ns.arity != nt.arity) return ns.arity > nt.arity;
      return ns.sym > nt.sym;
    }
    const std::uint32_t* a = bank_.args(s);
    const std::uint32_t* b = bank_.args(t);
    for (std::uint32_t i = 0; i < ns.arity; ++i)
      if (a[i] != b[i]) return greater(a[i], b[i]);
    return false;
  }

  // kNone stands for the minimal constant "true" of predicate literals.
  Cmp compare(std::uint32_t s, std::uint32_t t) const {
    if (s == t) return Cmp::Equal;
    if (s == kNone) return Cmp::Less;
    if (t == kNone) return Cmp::Greater;
    if (greater(s, t)) return Cmp::Greater;
    if (greater(t, s)) return Cmp::Less;
    return Cmp::Incomparable;
  }

  bool contains(std::uint32_t s, std::uint32_t t) const {
    if (s == t) return true;
    const auto& n = bank_.node(s);
    if (n.ground && !bank_.node(t).ground) return false;
    const std::uint32_t* a = bank_.args(s);
    for (std::uint32_t i = 0; i < n.arity; ++i)
      if (contains(a[i], t)) return true;
    return false;
  }

 private:
  const TermBank& bank_;

  void vars(std::uint32_t t, std::vector<std::uint32_t>& out) const {
    if (bank_.isVar(t)) {
      out.push_back(t);
      return;
    }
    const auto& n = bank_.node(t);
    if (n.ground) return;
    const std::uint32_t* a = bank_.args(t);
    for (std::uint32_t i = 0; i < n.arity; ++i) vars(a[i], out);
  }

  // Every variable occurs in s at least as often as in t.
  bool varsCovered(std::uint32_t s, std::uint32_t t) const {
    std::vector<std::uint32_t> vs, vt;
    vars(s, vs);
    vars(t, vt);
    if (vt.size() > vs.size()) return false;
    std::sort(vs.begin(), vs.end());
    std::sort(vt.begin(), vt.end());
    std::size_t i = 0;
    for (std::uint32_t v : vt) {
      while (i < vs.size() && vs[i] < v) ++i;
      if (i == vs.size() || vs[i] != v) return false;
      ++i;
    }
    return true;
  }
};

struct IntoEntry {
  std::uint32_t clause;
  std::uint32_t lit;
  std::uint32_t subterm;
};

struct FromEntry {
  std::uint32_t clause;
  std::uint32_t lit;
  std::uint32_t lhs;
  std::uint32_t rhs;
};

struct Demodulator {
  std::uint32_t clause;
  std::uint32_t lhs;
  std::uint32_t rhs;
  bool checkOrder;  // unorientable equation: check each instance
};

// Which negative literal (if any) restricts the inferences of a clause.
// Selecting in every clause keeps saturation goal directed on equational
// problems; selecting only in all-negative clauses avoids enumerating
// guard instances (relation(R) ∧ relation(S) → ...) bottom up.
enum class Selection { Always, NegativeClauses };

class Prover {
 public:
  Prover(const ResolutionLimits& limits, std::stop_token stop, Selection selection)
      : limits_(limits),
        stop_(std::move(stop)),
        selection_(selection),
        unifier_(bank_),
        kbo_(bank_) {
    start_ = std::chrono::steady_clock::now();
    symbol("=", 2);
  }

  // Raises the selection weight of a symbol (it stays 1 for the ordering).
  void penalize(const std::string& name, int arity, std::uint32_t w) {
    auto s = static_cast<std::size_t>(symbol(name, arity));
    if (symWeight_.size() <= s) symWeight_.resize(s + 1, 1);
    symWeight_[s] = w;
  }

  void addClause(const Clause& c, bool support) {
    std::vector<Lit> lits;
    std::map<std::string, std::uint32_t> vars;
    for (const auto& l : c.literals)
      lits.push_back({convertAtom(l.atom, vars), l.positive});
    support_ = support;
    auto id = keep(std::move(lits), static_cast<std::uint32_t>(vars.size()));
    if (id != kNone) enqueue(id);
  }

  ProofResult run(ResolutionStats* stats) {
    ProofResult r = refuted_ ? ProofResult::Theorem : loop();
    if (stats) {
      stats->generated = generated_;
      stats->kept = clauses_.size();
      stats->given = given_;
      stats->elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start_);
    }
    return r;
  }

 private:
  using Parts = std::vector<std::pair<Lit, std::uint32_t>>;

  ResolutionLimits limits_;
  std::stop_token stop_;
  Selection selection_;
  std::chrono::steady_clock::time_point start_;
  TermBank bank_;
  Unifier unifier_;
  Kbo kbo_;
  std::map<std::pair<std::string, int>, std::int32_t> symbolIds_;
  std::vector<PClause> clauses_;
  bool refuted_ = false;
  bool support_ = true;  // support flag for clauses being created
  std::size_t generated_ = 0, given_ = 0;

  std::set<std::pair<std::uint32_t, std::uint32_t>> byWeight_;
  std::set<std::uint32_t> byAge_;

  // (pred << 1 | positive) keyed indexes.
  std::unordered_map<std::uint32_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>>
      activeLits_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> firstKey_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> allKeys_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> units_;
  // Keyed by the top symbol of the subterm / left-hand side.
  std::unordered_map<std::int32_t, std::vector<IntoEntry>> into_;
  std::unordered_map<std::int32_t, std::vector<FromEntry>> from_;
  std::unordered_map<std::int32_t, std::vector<Demodulator>> demods_;
  std::unordered_map<std::uint32_t, std::uint32_t> normalForms_;
  std::vector<std::uint32_t> symWeight_;
  std::vector<std::uint32_t> active_;
  bool newDemodulator_ = false;
  std::unordered_map<std::uint32_t, std::uint32_t> heuristic_;

  std::uint32_t heuristicWeight(std::uint32_t t) {
    if (bank_.isVar(t)) return 1;
    if (auto it = heuristic_.find(t); it != heuristic_.end()) return it->second;
    const auto& nd = bank_.node(t);
    auto s = static_cast<std::size_t>(nd.sym);
    std::uint32_t w = s < symWeight_.size() ? symWeight_[s] : 1;
    for (std::uint32_t i = 0; i < nd.arity; ++i) w += heuristicWeight(bank_.args(t)[i]);
    heuristic_.emplace(t, w);
    return w;
  }

  std::int32_t symbol(const std::string& name, int arity) {
    auto [it, inserted] = symbolIds_.try_emplace(
        {name, arity}, static_cast<std::int32_t>(symbolIds_.size()));
    return it->second;
  }

  std::uint32_t convertTerm(const fol::Term& t,
                            std::map<std::string, std::uint32_t>& vars) {
    if (t.isVariable()) {
      auto [it, ins] = vars.try_emplace(t.name(),
                                        static_cast<std::uint32_t>(vars.size()));
      return bank_.var(it->second);
    }
    std::vector<std::uint32_t> args;
    for (const auto& a : t.args()) args.push_back(convertTerm(a, vars));
    return bank_.app(symbol(t.name(), static_cast<int>(args.size())),
                     args.data(), static_cast<std::uint32_t>(args.size()));
  }

  std::uint32_t convertAtom(const fol::Formula& a,
                            std::map<std::string, std::uint32_t>& vars) {
    std::vector<std::uint32_t> args;
    for (const auto& t : a.terms()) args.push_back(convertTerm(t, vars));
    // Predicate symbols live in their own namespace.
    std::int32_t s = a.kind() == fol::Formula::Kind::Equals
                         ? 0
                         : symbol("$p:" + a.symbol(), static_cast<int>(args.size()));
    return bank_.app(s, args.data(), static_cast<std::uint32_t>(args.size()));
  }

  bool isEq(std::uint32_t atom) const { return bank_.node(atom).sym == 0; }
  std::uint32_t lhsOf(std::uint32_t atom) const { return bank_.args(atom)[0]; }
  std::uint32_t rhsOf(std::uint32_t atom) const { return bank_.args(atom)[1]; }

  std::uint32_t key(const Lit& l) const {
    return static_cast<std::uint32_t>(bank_.node(l.atom).sym) << 1 |
           (l.pos ? 1u : 0u);
  }
  std::uint32_t complementKey(const Lit& l) const { return key(l) ^ 1u; }

  bool timeUp() {
    if (stop_.stop_requested()) return true;
    return std::chrono::steady_clock::now() - start_ > limits_.maxTime;
  }

  // ------------------------------------------------------------- ordering

  std::vector<std::uint32_t> literalMultiset(const Lit& l) const {
    std::vector<std::uint32_t> m;
    if (isEq(l.atom))
      m = {lhsOf(l.atom), rhsOf(l.atom)};
    else
      m = {l.atom, kNone};
    if (!l.pos) m.insert(m.end(), m.begin(), m.end());
    return m;
  }

  bool literalGreater(const Lit& a, const Lit& b) const {
    auto m = literalMultiset(a);
    auto n = literalMultiset(b);
    // Cancel common elements.
    for (auto it = n.begin(); it != n.end();) {
      auto jt = std::find(m.begin(), m.end(), *it);
      if (jt != m.end()) {
        m.erase(jt);
        it = n.erase(it);
      } else {
        ++it;
      }
    }
    if (m.empty()) return false;
    for (auto x : n) {
      bool dominated = false;
      for (auto y : m)
        if (kbo_.compare(y, x) == Cmp::Greater) {
          dominated = true;
          break;
        }
      if (!dominated) return false;
    }
    return true;
  }

  // Heaviest non-equational negative literal; a negative equation only
  // when it has a non-variable side and nothing else is negative.
  std::int32_t select(const std::vector<Lit>& lits) const {
    if (selection_ == Selection::NegativeClauses &&
        std::any_of(lits.begin(), lits.end(), [](const Lit& l) { return l.pos; }))
      return -1;
    std::int32_t best = -1;
    std::uint32_t bestScore = 0;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      if (lits[i].pos) continue;
      const auto& nd = bank_.node(lits[i].atom);
      std::uint32_t score = nd.size + 1000u;
      if (nd.sym == 0) {
        if (bank_.isVar(lhsOf(lits[i].atom)) && bank_.isVar(rhsOf(lits[i].atom)))
          continue;
        score = nd.size;
      }
      if (best < 0 || score > bestScore) {
        best = static_cast<std::int32_t>(i);
        bestScore = score;
      }
    }
    return best;
  }

  std::vector<std::uint32_t> eligibleLiterals(const std::vector<Lit>& lits) const {
    std::int32_t sel = select(lits);
    if (sel >= 0) return {static_cast<std::uint32_t>(sel)};
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < lits.size(); ++i) {
      bool maximal = true;
      for (std::uint32_t j = 0; j < lits.size() && maximal; ++j)
        if (j != i && literalGreater(lits[j], lits[i])) maximal = false;
      if (maximal) out.push_back(i);
    }
    return out;
  }

  // ---------------------------------------------------------------- loop

  ProofResult loop() {
    std::uint64_t picks = 0;
    while (!byWeight_.empty()) {
      if (refuted_) return ProofResult::Theorem;
      if (timeUp() || clauses_.size() > limits_.maxClauses)
        return ProofResult::Unknown;
      std::uint32_t id;
      if (++picks % 5 == 0)
        id = *byAge_.begin();
      else
        id = byWeight_.begin()->second;
      byAge_.erase(id);
      byWeight_.erase({clauses_[id].weight, id});
      if (clauses_[id].deleted) continue;
      // Rewrite with the demodulators found since the clause was made.
      if (auto re = rewritten(id)) {
        clauses_[id].deleted = true;
        support_ = clauses_[id].support;
        ++generated_;
        auto nid = keep(std::move(*re), clauses_[id].nvars);
        if (refuted_) return ProofResult::Theorem;
        if (nid != kNone) enqueue(nid);
        continue;
      }
      ++given_;
      activate(id);
      support_ = true;
      if (generate(id)) return ProofResult::Theorem;
      if (newDemodulator_ && backwardRewrite()) return ProofResult::Theorem;
    }
    return refuted_ ? ProofResult::Theorem : ProofResult::Unknown;
  }

  // Active clauses rewritten by new unit equations are replaced by their
  // normal forms, which go back to the passive set.
  bool backwardRewrite() {
    newDemodulator_ = false;
    std::vector<std::uint32_t> still;
    std::vector<std::uint32_t> current;
    current.swap(active_);
    for (std::uint32_t id : current) {
      if (clauses_[id].deleted) continue;
      auto re = rewritten(id);
      if (!re) {
        still.push_back(id);
        continue;
      }
      clauses_[id].deleted = true;
      support_ = clauses_[id].support;
      ++generated_;
      auto nid = keep(std::move(*re), clauses_[id].nvars);
      if (refuted_) return true;
      if (nid != kNone) enqueue(nid);
    }
    still.insert(still.end(), active_.begin(), active_.end());
    active_.swap(still);
    return false;
  }

  void enqueue(std::uint32_t id) {
    // Clauses outside the set of support wait behind it.
    auto& c = clauses_[id];
    std::uint32_t w = c.weight + (c.support ? 0u : 20u);
    c.weight = w;
    byWeight_.insert({w, id});
    byAge_.insert(id);
  }

  void subterms(std::uint32_t t, std::vector<std::uint32_t>& out) const {
    if (bank_.isVar(t)) return;
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    const auto& n = bank_.node(t);
    for (std::uint32_t i = 0; i < n.arity; ++i) subterms(bank_.args(t)[i], out);
  }

  void activate(std::uint32_t id) {
    auto& c = clauses_[id];
    c.active = true;
    active_.push_back(id);
    for (std::uint32_t i : c.eligible) {
      const Lit& l = c.lits[i];
      if (!isEq(l.atom)) activeLits_[key(l)].push_back({id, i});
      std::vector<std::uint32_t> subs;
      const auto& n = bank_.node(l.atom);
      for (std::uint32_t k = 0; k < n.arity; ++k) subterms(bank_.args(l.atom)[k], subs);
      for (auto u : subs) into_[bank_.node(u).sym].push_back({id, i, u});
      if (l.pos && isEq(l.atom)) {
        std::uint32_t s = lhsOf(l.atom), t = rhsOf(l.atom);
        if (!bank_.isVar(s) && !kbo_.greater(t, s))
          from_[bank_.node(s).sym].push_back({id, i, s, t});
        if (!bank_.isVar(t) && !kbo_.greater(s, t))
          from_[bank_.node(t).sym].push_back({id, i, t, s});
      }
    }
  }

  // Returns true when the empty clause was derived.
  bool generate(std::uint32_t gid) {
    const std::vector<Lit> glits = clauses_[gid].lits;
    const std::vector<std::uint32_t> elig = clauses_[gid].eligible;
    const std::uint32_t gv = clauses_[gid].nvars;
    bool positive = std::all_of(glits.begin(), glits.end(),
                                [](const Lit& l) { return l.pos; });

    auto without = [](const std::vector<Lit>& lits, std::uint32_t skip,
                      std::uint32_t off, Parts& out) {
      for (std::uint32_t a = 0; a < lits.size(); ++a)
        if (a != skip) out.push_back({lits[a], off});
    };

    for (std::uint32_t i : elig) {
      const Lit& gl = glits[i];
      // Factoring.
      if (positive) {
        for (std::uint32_t j = 0; j < glits.size(); ++j) {
          if (j == i || bank_.node(glits[j].atom).sym != bank_.node(gl.atom).sym)
            continue;
          unifier_.reset(gv);
          if (!unifier_.unify({gl.atom, 0}, {glits[j].atom, 0})) continue;
          Parts parts;
          without(glits, j, 0, parts);
          if (emit(parts, gv)) return true;
        }
      }
      // Equality resolution.
      if (!gl.pos && isEq(gl.atom)) {
        unifier_.reset(gv);
        if (unifier_.unify({lhsOf(gl.atom), 0}, {rhsOf(gl.atom), 0})) {
          Parts parts;
          without(glits, i, 0, parts);
          if (emit(parts, gv)) return true;
        }
      }
      // Binary resolution.
      if (!isEq(gl.atom)) {
        auto ck = complementKey(gl);
        std::size_t n = activeLits_[ck].size();
        for (std::size_t k = 0; k < n; ++k) {
          if ((k & 63) == 0 && timeUp()) return false;
          auto [pid, j] = activeLits_[ck][k];
          if (clauses_[pid].deleted) continue;
          const auto plits = clauses_[pid].lits;
          std::uint32_t pv = clauses_[pid].nvars;
          unifier_.reset(gv + pv);
          if (!unifier_.unify({gl.atom, 0}, {plits[j].atom, gv})) continue;
          Parts parts;
          without(glits, i, 0, parts);
          without(plits, j, gv, parts);
          if (emit(parts, gv + pv)) return true;
        }
      }
      // Superposition from the given clause into active clauses.
      if (gl.pos && isEq(gl.atom)) {
        std::uint32_t s = lhsOf(gl.atom), t = rhsOf(gl.atom);
        for (int side = 0; side < 2; ++side) {
          std::uint32_t l = side ? t : s, r = side ? s : t;
          if (bank_.isVar(l) || kbo_.greater(r, l)) continue;
          auto it = into_.find(bank_.node(l).sym);
          if (it == into_.end()) continue;
          std::size_t n = it->second.size();
          for (std::size_t k = 0; k < n; ++k) {
            if ((k & 63) == 0 && timeUp()) return false;
            IntoEntry e = into_[bank_.node(l).sym][k];
            if (clauses_[e.clause].deleted) continue;
            if (superpose(gid, i, l, r, e)) return true;
          }
        }
      }
      // Superposition from active clauses into the given clause.
      {
        std::vector<std::uint32_t> subs;
        const auto& n = bank_.node(gl.atom);
        for (std::uint32_t k = 0; k < n.arity; ++k) subterms(bank_.args(gl.atom)[k], subs);
        for (auto u : subs) {
          auto it = from_.find(bank_.node(u).sym);
          if (it == from_.end()) continue;
          std::size_t cnt = it->second.size();
          for (std::size_t k = 0; k < cnt; ++k) {
            if ((k & 63) == 0 && timeUp()) return false;
            FromEntry f = from_[bank_.node(u).sym][k];
            if (clauses_[f.clause].deleted) continue;
            if (f.clause == gid) continue;  // covered by the direction above
            if (superpose(f.clause, f.lit, f.lhs, f.rhs, IntoEntry{gid, i, u}))
              return true;
          }
        }
      }
    }
    return false;
  }

  // Equation l = r (literal `lit` of clause `fromId`) rewrites the subterm
  // e.subterm of literal e.lit of clause e.clause.
  bool superpose(std::uint32_t fromId, std::uint32_t lit, std::uint32_t l,
                 std::uint32_t r, const IntoEntry& e) {
    const auto flits = clauses_[fromId].lits;
    const auto tlits = clauses_[e.clause].lits;
    std::uint32_t fv = clauses_[fromId].nvars;
    std::uint32_t tv = clauses_[e.clause].nvars;
    unifier_.reset(fv + tv);
    // From-clause variables at offset 0, into-clause at offset fv.
    if (!unifier_.unify({l, 0}, {e.subterm, fv})) return false;
    // The rewritten side must not become smaller than its partner.
    ++generated_;
    std::vector<std::uint32_t> rename(fv + tv, kNone);
    std::uint32_t next = 0;
    std::vector<Lit> lits;
    for (std::uint32_t a = 0; a < flits.size(); ++a)
      if (a != lit) lits.push_back({build(Ref{flits[a].atom, 0}, rename, next), flits[a].pos});
    for (std::uint32_t b = 0; b < tlits.size(); ++b) {
      if (b == e.lit)
        lits.push_back({buildReplacing(tlits[b].atom, fv, e.subterm, Ref{r, 0},
                                       rename, next),
                        tlits[b].pos});
      else
        lits.push_back({build(Ref{tlits[b].atom, fv}, rename, next), tlits[b].pos});
    }
    support_ = clauses_[fromId].support || clauses_[e.clause].support;
    auto id = keep(std::move(lits), next);
    if (refuted_) return true;
    if (id != kNone) enqueue(id);
    return false;
  }

  std::uint32_t build(Ref r, std::vector<std::uint32_t>& rename,
                      std::uint32_t& next) {
    r = unifier_.deref(r);
    if (bank_.isVar(r.t)) {
      std::uint32_t slot = bank_.varIndex(r.t) + r.off;
      if (rename[slot] == kNone) rename[slot] = next++;
      return bank_.var(rename[slot]);
    }
    const auto& nd = bank_.node(r.t);
    if (nd.ground) return r.t;
    std::uint32_t n = nd.arity;
    std::int32_t sym = nd.sym;
    std::vector<std::uint32_t> args(n);
    for (std::uint32_t i = 0; i < n; ++i)
      args[i] = build(Ref{bank_.args(r.t)[i], r.off}, rename, next);
    return bank_.app(sym, args.data(), n);
  }

  // Instantiates t (under offset off) replacing every syntactic occurrence
  // of u by the instance of repl.
  std::uint32_t buildReplacing(std::uint32_t t, std::uint32_t off,
                               std::uint32_t u, Ref repl,
                               std::vector<std::uint32_t>& rename,
                               std::uint32_t& next) {
    if (t == u) return build(repl, rename, next);
    if (bank_.isVar(t)) return build(Ref{t, off}, rename, next);
    const auto& nd = bank_.node(t);
    std::uint32_t n = nd.arity;
    std::int32_t sym = nd.sym;
    std::vector<std::uint32_t> args(n);
    for (std::uint32_t i = 0; i < n; ++i)
      args[i] = buildReplacing(bank_.args(t)[i], off, u, repl, rename, next);
    return bank_.app(sym, args.data(), n);
  }

  // Instantiates the literal parts under the current unifier and keeps the
  // clause unless it is redundant.
  bool emit(const Parts& parts, std::uint32_t slots) {
    ++generated_;
    std::vector<std::uint32_t> rename(slots, kNone);
    std::uint32_t next = 0;
    std::vector<Lit> lits;
    lits.reserve(parts.size());
    for (const auto& [l, off] : parts)
      lits.push_back({build(Ref{l.atom, off}, rename, next), l.pos});
    std::uint32_t id = keep(std::move(lits), next);
    if (refuted_) return true;
    if (id != kNone) enqueue(id);
    return false;
  }

  // ------------------------------------------------------- simplification

  // Applies a matched pattern: pattern variables become the bound target
  // terms verbatim.
  std::uint32_t applyMatch(std::uint32_t p) {
    if (bank_.isVar(p)) {
      std::uint32_t s = bank_.varIndex(p);
      return unifier_.bound(s) ? unifier_.binding(s).t : kNone;
    }
    const auto& nd = bank_.node(p);
    if (nd.ground) return p;
    std::uint32_t n = nd.arity;
    std::int32_t sym = nd.sym;
    std::vector<std::uint32_t> args(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      args[i] = applyMatch(bank_.args(p)[i]);
      if (args[i] == kNone) return kNone;
    }
    return bank_.app(sym, args.data(), n);
  }

  // Normal form under the unit equations except those of clause `self`
  // (a demodulator must not rewrite itself away). Only the unrestricted
  // normal forms are cached.
  std::uint32_t normalize(std::uint32_t t, std::uint32_t self = kNone) {
    if (bank_.isVar(t)) return t;
    bool cached = self == kNone;
    if (cached)
      if (auto it = normalForms_.find(t); it != normalForms_.end()) return it->second;
    const auto& nd = bank_.node(t);
    std::uint32_t n = nd.arity;
    std::int32_t sym = nd.sym;
    std::vector<std::uint32_t> args(n);
    bool changed = false;
    for (std::uint32_t i = 0; i < n; ++i) {
      args[i] = normalize(bank_.args(t)[i], self);
      changed = changed || args[i] != bank_.args(t)[i];
    }
    std::uint32_t cur = changed ? bank_.app(sym, args.data(), n) : t;
    std::uint32_t result = cur;
    if (auto it = demods_.find(sym); it != demods_.end()) {
      for (const auto& d : it->second) {
        if (clauses_[d.clause].deleted || d.clause == self) continue;
        unifier_.reset(clauses_[d.clause].nvars);
        if (!unifier_.match(d.lhs, cur)) continue;
        std::uint32_t inst = applyMatch(d.rhs);
        if (inst == kNone) continue;
        if (d.checkOrder && !kbo_.greater(cur, inst)) continue;
        result = normalize(inst, self);
        break;
      }
    }
    if (cached) normalForms_[t] = result;
    return result;
  }

  std::uint32_t normalizeAtom(std::uint32_t atom, std::uint32_t self = kNone) {
    const auto& nd = bank_.node(atom);
    std::uint32_t n = nd.arity;
    std::int32_t sym = nd.sym;
    std::vector<std::uint32_t> args(n);
    bool changed = false;
    for (std::uint32_t i = 0; i < n; ++i) {
      args[i] = normalize(bank_.args(atom)[i], self);
      changed = changed || args[i] != bank_.args(atom)[i];
    }
    return changed ? bank_.app(sym, args.data(), n) : atom;
  }

  std::optional<std::vector<Lit>> rewritten(std::uint32_t id) {
    if (demods_.empty()) return std::nullopt;
    std::vector<Lit> lits = clauses_[id].lits;
    bool changed = false;
    std::uint32_t self = lits.size() == 1 && lits[0].pos && isEq(lits[0].atom) ? id : kNone;
    for (auto& l : lits) {
      std::uint32_t a = normalizeAtom(l.atom, self);
      changed = changed || a != l.atom;
      l.atom = a;
    }
    if (!changed) return std::nullopt;
    return lits;
  }

  bool isTrivialEq(std::uint32_t atom) const {
    return isEq(atom) && lhsOf(atom) == rhsOf(atom);
  }

  // Simplifies and stores a clause; returns its id or kNone when dropped.
  std::uint32_t keep(std::vector<Lit> lits, std::uint32_t nvars) {
    if (!demods_.empty())
      for (auto& l : lits) l.atom = normalizeAtom(l.atom);
    std::vector<Lit> out;
    for (const auto& l : lits) {
      if (isTrivialEq(l.atom)) {
        if (l.pos) return kNone;
        continue;
      }
      if (std::find(out.begin(), out.end(), l) != out.end()) continue;
      if (std::find(out.begin(), out.end(), Lit{l.atom, !l.pos}) != out.end())
        return kNone;
      out.push_back(l);
    }
    unitDelete(out);
    if (out.empty()) {
      refuted_ = true;
      return kNone;
    }
    nvars = renumber(out, nvars);
    if (forwardSubsumed(out)) return kNone;
    PClause c;
    c.nvars = nvars;
    c.lits = std::move(out);
    c.support = support_;
    for (const auto& l : c.lits) {
      c.weight += heuristicWeight(l.atom);
      c.sig |= 1ull << (key(l) % 64);
    }
    c.eligible = eligibleLiterals(c.lits);
    auto id = static_cast<std::uint32_t>(clauses_.size());
    clauses_.push_back(std::move(c));
    backwardSubsume(id);
    index(id);
    return id;
  }

  // Variables numbered by first occurrence.
  std::uint32_t renumber(std::vector<Lit>& lits, std::uint32_t nvars) {
    std::vector<std::uint32_t> rename(nvars, kNone);
    std::uint32_t next = 0;
    unifier_.reset(nvars);
    for (auto& l : lits) l.atom = build(Ref{l.atom, 0}, rename, next);
    return next;
  }

  void index(std::uint32_t id) {
    const auto& c = clauses_[id];
    firstKey_[key(c.lits[0])].push_back(id);
    std::set<std::uint32_t> keys;
    for (const auto& l : c.lits) keys.insert(key(l));
    for (auto k : keys) allKeys_[k].push_back(id);
    if (c.lits.size() != 1) return;
    units_[key(c.lits[0])].push_back(id);
    const Lit& l = c.lits[0];
    if (l.pos && isEq(l.atom)) {
      std::uint32_t s = lhsOf(l.atom), t = rhsOf(l.atom);
      bool added = false;
      if (!bank_.isVar(s) && !kbo_.greater(t, s)) {
        demods_[bank_.node(s).sym].push_back({id, s, t, !kbo_.greater(s, t)});
        added = true;
      }
      if (!bank_.isVar(t) && !kbo_.greater(s, t)) {
        demods_[bank_.node(t).sym].push_back({id, t, s, !kbo_.greater(t, s)});
        added = true;
      }
      if (added) {
        normalForms_.clear();
        newDemodulator_ = true;
      }
    }
  }

  bool unitRefutes(std::uint32_t uid, std::uint32_t atom) {
    const auto& u = clauses_[uid];
    unifier_.reset(u.nvars);
    if (unifier_.match(u.lits[0].atom, atom)) return true;
    if (isEq(atom)) {
      // Equations are symmetric.
      std::uint32_t sw[2] = {rhsOf(atom), lhsOf(atom)};
      std::uint32_t swapped = bank_.app(0, sw, 2);
      unifier_.reset(u.nvars);
      if (unifier_.match(u.lits[0].atom, swapped)) return true;
    }
    return false;
  }

  // Removes literals refuted by a unit clause that matches their
  // complement.
  void unitDelete(std::vector<Lit>& lits) {
    for (std::size_t i = 0; i < lits.size();) {
      bool removed = false;
      auto it = units_.find(complementKey(lits[i]));
      if (it != units_.end()) {
        for (auto uid : it->second) {
          if (clauses_[uid].deleted) continue;
          if (unitRefutes(uid, lits[i].atom)) {
            removed = true;
            break;
          }
        }
      }
      if (removed)
        lits.erase(lits.begin() + static_cast<std::ptrdiff_t>(i));
      else
        ++i;
    }
  }

  std::uint64_t signature(const std::vector<Lit>& lits) const {
    std::uint64_t s = 0;
    for (const auto& l : lits) s |= 1ull << (key(l) % 64);
    return s;
  }

  // Does c θ-subsume d? (|c| <= |d| is checked by callers.)
  bool subsumes(const std::vector<Lit>& c, std::uint32_t cvars,
                const std::vector<Lit>& d) {
    unifier_.reset(cvars);
    return subsumesFrom(c, 0, d);
  }

  bool subsumesFrom(const std::vector<Lit>& c, std::size_t k,
                    const std::vector<Lit>& d) {
    if (k == c.size()) return true;
    for (const auto& l : d) {
      if (l.pos != c[k].pos) continue;
      std::size_t m = unifier_.mark();
      if (unifier_.match(c[k].atom, l.atom)) {
        if (subsumesFrom(c, k + 1, d)) return true;
        unifier_.undo(m);
      }
    }
    return false;
  }

  bool forwardSubsumed(const std::vector<Lit>& d) {
    std::uint64_t sig = signature(d);
    std::set<std::uint32_t> keys;
    for (const auto& l : d) keys.insert(key(l));
    for (auto k : keys) {
      auto it = firstKey_.find(k);
      if (it == firstKey_.end()) continue;
      for (auto cid : it->second) {
        const auto& c = clauses_[cid];
        if (c.deleted || c.lits.size() > d.size() || (c.sig & ~sig)) continue;
        if (subsumes(c.lits, c.nvars, d)) return true;
      }
    }
    return false;
  }

  void backwardSubsume(std::uint32_t id) {
    const auto& c = clauses_[id];
    if (c.lits.size() > 2) return;
    auto it = allKeys_.find(key(c.lits[0]));
    if (it == allKeys_.end()) return;
    std::vector<Lit> cl = c.lits;
    std::uint32_t nv = c.nvars;
    std::uint64_t sig = c.sig;
    for (auto did : it->second) {
      auto& d = clauses_[did];
      if (d.deleted || d.lits.size() < cl.size() || (sig & ~d.sig)) continue;
      if (subsumes(cl, nv, d.lits)) d.deleted = true;
    }
  }
};

bool hasConstants(const fol::Formula& f) { return !fol::constantsOf(f).empty(); }

// Function, constant and predicate symbols of f.
std::set<std::string> nonVariableSymbols(const fol::Formula& f) {
  std::set<std::string> out;
  std::function<void(const fol::Term&)> term = [&](const fol::Term& t) {
    if (t.isVariable()) return;
    out.insert(t.name());
    for (const auto& a : t.args()) term(a);
  };
  std::function<void(const fol::Formula&)> go = [&](const fol::Formula& g) {
    if (g.kind() == fol::Formula::Kind::Predicate) out.insert(g.symbol());
    for (const auto& t : g.terms()) term(t);
    for (const auto& c : g.children()) go(c);
  };
  go(f);
  return out;
}

// SInE-style relevance: an axiom is triggered by a symbol that is among
// its rarest ones. Axioms with constants (local facts) are always kept and
// seed the symbol set together with the conjecture. Returns the indices of
// the selected axioms.
std::vector<std::size_t> relevantAxioms(std::span<const fol::Formula> axioms,
                                        const fol::Formula& conjecture,
                                        int depth) {
  std::vector<std::set<std::string>> syms;
  std::map<std::string, int> occ;
  for (const auto& a : axioms) {
    syms.push_back(nonVariableSymbols(a));
    for (const auto& s : syms.back()) ++occ[s];
  }
  std::vector<bool> chosen(axioms.size(), false);
  std::set<std::string> frontier = nonVariableSymbols(conjecture);
  for (std::size_t i = 0; i < axioms.size(); ++i)
    if (hasConstants(axioms[i])) {
      chosen[i] = true;
      frontier.insert(syms[i].begin(), syms[i].end());
    }
  std::set<std::string> seen;
  for (int d = 0; d < depth && !frontier.empty(); ++d) {
    std::set<std::string> next;
    for (const auto& s : frontier) seen.insert(s);
    for (std::size_t i = 0; i < axioms.size(); ++i) {
      if (chosen[i] || syms[i].empty()) continue;
      int rarest = INT32_MAX;
      for (const auto& s : syms[i]) rarest = std::min(rarest, occ[s]);
      bool triggered = false;
      for (const auto& s : syms[i])
        if (frontier.contains(s) && occ[s] * 2 <= rarest * 3) triggered = true;
      if (!triggered) continue;
      chosen[i] = true;
      for (const auto& s : syms[i])
        if (!seen.contains(s)) next.insert(s);
    }
    frontier = std::move(next);
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < axioms.size(); ++i)
    if (chosen[i]) out.push_back(i);
  return out;
}

void penalizeSkolems(Prover& p, const fol::Term& t,
                     const std::set<std::string>& original) {
  if (t.isVariable()) return;
  if (!original.contains(t.name()))
    p.penalize(t.name(), static_cast<int>(t.args().size()), 4);
  for (const auto& a : t.args()) penalizeSkolems(p, a, original);
}

ProofResult saturate(std::span<const fol::Formula> axioms,
                     const fol::Formula& conjecture,
                     const ResolutionLimits& limits, Selection selection,
                     std::stop_token stop, ResolutionStats* stats) {
  std::vector<fol::Formula> all(axioms.begin(), axioms.end());
  all.push_back(fol::Formula::negate(conjecture));
  // Equality is built in (superposition), so no equality axioms.
  auto problem = clausifyEach(all, ClausifyOptions{.equalityAxioms = false});
  Prover p(limits, std::move(stop), selection);
  // Skolem functions introduced for the library weigh more when choosing
  // the next clause: they mostly lead into unfolded definitions.
  std::set<std::string> original;
  for (const auto& f : all) {
    auto s = nonVariableSymbols(f);
    original.insert(s.begin(), s.end());
  }
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    if (hasConstants(all[i])) continue;
    for (const auto& c : problem.perFormula[i])
      for (const auto& l : c.literals)
        for (const auto& t : l.atom.terms())
          penalizeSkolems(p, t, original);
  }
  // The negated conjecture first, then local facts, then the library.
  for (const auto& c : problem.perFormula.back()) p.addClause(c, true);
  for (std::size_t i = 0; i + 1 < all.size(); ++i)
    if (hasConstants(all[i]))
      for (const auto& c : problem.perFormula[i]) p.addClause(c, true);
  for (std::size_t i = 0; i + 1 < all.size(); ++i)
    if (!hasConstants(all[i]))
      for (const auto& c : problem.perFormula[i]) p.addClause(c, false);
  return p.run(stats);
}

}  // namespace

ProofResult resolutionProve(std::span<const fol::Formula> axioms,
                            const fol::Formula& conjecture,
                            const ResolutionLimits& limits,
                            std::stop_token stop, ResolutionStats* stats) {
  auto start = std::chrono::steady_clock::now();
  ResolutionStats total;
  auto finish = [&](ProofResult r) {
    if (stats) {
      *stats = total;
      stats->elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
    }
    return r;
  };
  auto attempt = [&](std::span<const fol::Formula> ax, std::chrono::milliseconds time,
                     Selection selection) {
    ResolutionLimits slice = limits;
    slice.maxTime = time;
    ResolutionStats st;
    auto r = saturate(ax, conjecture, slice, selection, stop, &st);
    total.generated += st.generated;
    total.kept = std::max(total.kept, st.kept);
    total.given += st.given;
    return r;
  };
  auto done = [&](ProofResult r) { return r == ProofResult::Theorem || stop.stop_requested(); };
  // A short round over the relevance-filtered axiom sets and the full set
  // with both selection strategies, then the full set with each strategy
  // splitting what is left.
  std::vector<std::vector<fol::Formula>> stages;
  std::size_t previous = SIZE_MAX;
  for (int depth : {1, 2, 3}) {
    auto idx = relevantAxioms(axioms, conjecture, depth);
    if (idx.size() == axioms.size()) break;
    if (idx.size() == previous) continue;
    previous = idx.size();
    std::vector<fol::Formula> subset;
    for (auto i : idx) subset.push_back(axioms[i]);
    stages.push_back(std::move(subset));
  }
  stages.emplace_back(axioms.begin(), axioms.end());
  const auto share = limits.maxTime / 20;
  for (const auto& ax : stages)
    for (auto sel : {Selection::Always, Selection::NegativeClauses})
      if (auto r = attempt(ax, share, sel); done(r)) return finish(r);
  auto left = [&] {
    return std::max(std::chrono::milliseconds(0),
                    std::chrono::duration_cast<std::chrono::milliseconds>(
                        limits.maxTime - (std::chrono::steady_clock::now() - start)));
  };
  if (auto r = attempt(axioms, left() / 2, Selection::Always); done(r)) return finish(r);
  return finish(attempt(axioms, left(), Selection::NegativeClauses));
}

}  // namespace elfe::provers
