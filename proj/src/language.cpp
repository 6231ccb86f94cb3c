#include "elfe/language.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace elfe::language {

using fol::Formula;
using fol::Term;

SourceSpan cover(const SourceSpan& a, const SourceSpan& b) {
  if (!a.valid()) return b;
  if (!b.valid()) return a;
  SourceSpan s = a;
  if (b.startOffset < s.startOffset) {
    s.startLine = b.startLine;
    s.startCol = b.startCol;
    s.startOffset = b.startOffset;
  }
  if (b.endOffset > s.endOffset) {
    s.endLine = b.endLine;
    s.endCol = b.endCol;
    s.endOffset = b.endOffset;
  }
  return s;
}

namespace {

std::string describe(const std::string& message, const SourceSpan& span,
                     const std::vector<std::string>& expected, const std::string& file) {
  std::ostringstream out;
  if (!file.empty()) out << file << ".elfe:";
  if (span.valid()) out << span.startLine << ':' << span.startCol << ": ";
  out << message;
  if (!expected.empty()) {
    out << " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) out << (i ? ", " : "") << expected[i];
    out << ')';
  }
  return out.str();
}

}  // namespace

ParseError::ParseError(const std::string& message, SourceSpan span,
                       std::vector<std::string> expected, std::string file)
    : std::runtime_error(describe(message, span, expected, file)),
      message_(message),
      span_(span),
      expected_(std::move(expected)),
      file_(std::move(file)) {}

// ------------------------------------------------------------ tokenizer

namespace {

bool isWordByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '\'';
}

bool isPunct(char c) {
  return c == '.' || c == ':' || c == ',' || c == '(' || c == ')' || c == '[' ||
         c == ']' || c == '{' || c == '}';
}

bool isOperatorByte(char c) {
  return std::string_view("=<>-+*/|&~!^\\@#$;?`").find(c) != std::string_view::npos;
}

bool isSuperscript(char32_t cp) {
  return cp == 0x00B9 || cp == 0x00B2 || cp == 0x00B3 || cp == 0x207B ||
         (cp >= 0x2070 && cp <= 0x2079);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;

  // Decodes one code point at i; returns its byte length.
  auto decode = [&](std::size_t at, char32_t& cp) -> std::size_t {
    auto c = static_cast<unsigned char>(text[at]);
    std::size_t len = 0;
    if (c < 0x80) {
      cp = c;
      return 1;
    }
    if ((c & 0xE0) == 0xC0) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      cp = c & 0x07;
      len = 4;
    } else {
      len = 0;
    }
    if (len == 0 || at + len > text.size()) {
      SourceSpan s{line, col, line, col + 1, at, at + 1};
      throw ParseError("invalid UTF-8", s);
    }
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(text[at + k]);
      if ((cc & 0xC0) != 0x80) {
        SourceSpan s{line, col, line, col + 1, at, at + 1};
        throw ParseError("invalid UTF-8", s);
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    return len;
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
      ++col;
      ++i;
      continue;
    }
    if (c == '%') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    Token tok;
    tok.span.startLine = line;
    tok.span.startCol = col;
    tok.span.startOffset = i;
    std::size_t start = i;
    auto u = static_cast<unsigned char>(c);
    if (isWordByte(u)) {
      tok.kind = TokenKind::Word;
      while (i < text.size() && isWordByte(static_cast<unsigned char>(text[i]))) ++i;
      col += static_cast<int>(i - start);
    } else if (isPunct(c)) {
      tok.kind = TokenKind::Punct;
      ++i;
      ++col;
    } else if (u < 0x80) {
      tok.kind = TokenKind::Symbol;
      if (isOperatorByte(c)) {
        while (i < text.size() && isOperatorByte(text[i])) ++i;
      } else {
        ++i;
      }
      col += static_cast<int>(i - start);
    } else {
      tok.kind = TokenKind::Symbol;
      char32_t cp = 0;
      i += decode(i, cp);
      ++col;
      if (isSuperscript(cp)) {
        while (i < text.size() && static_cast<unsigned char>(text[i]) >= 0x80) {
          char32_t next = 0;
          std::size_t len = decode(i, next);
          if (!isSuperscript(next)) break;
          i += len;
          ++col;
        }
      }
    }
    tok.text = std::string(text.substr(start, i - start));
    tok.span.endLine = line;
    tok.span.endCol = col;
    tok.span.endOffset = i;
    out.push_back(std::move(tok));
  }
  return out;
}

// ------------------------------------------------------------ notations

namespace {

bool isRelational(const std::string& lit) {
  static const std::set<std::string> kRelational = {
      ":", "→", "⊆", "⊂", "⊇", "⊃", "⊊", "∈", "∉", "∋", "≤", "≥", "<", ">", "≠", "~",
      "∼", "≡", "≈", "≅", "|", "∥", "⊥", "≺", "≼", "≻", "≽", "⊑", "->", "<=", ">=", "=",
      "⇒", "↦", "⊢", "⊨"};
  return kRelational.count(lit) > 0;
}

bool isPlaceholderToken(const Token& t) {
  if (t.kind != TokenKind::Word) return false;
  auto c = static_cast<unsigned char>(t.text[0]);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

}  // namespace

int NotationPattern::arity() const {
  return static_cast<int>(
      std::count_if(parts.begin(), parts.end(), [](const Part& p) { return p.placeholder; }));
}

std::string NotationPattern::skeleton() const {
  std::string s;
  for (const auto& p : parts) {
    if (!s.empty()) s += ' ';
    s += p.placeholder ? "_" : p.text;
  }
  return s;
}

NotationPattern makeNotation(const std::string& symbol, std::span<const Token> pattern) {
  NotationPattern p;
  p.symbol = symbol;
  bool relational = false, literal = false;
  std::set<std::string> seen;
  for (const auto& t : pattern) {
    NotationPattern::Part part;
    part.placeholder = isPlaceholderToken(t);
    part.text = t.text;
    if (part.placeholder) {
      if (!seen.insert(t.text).second)
        throw ParseError("placeholder '" + t.text + "' repeated in notation", t.span);
    } else {
      literal = true;
      relational = relational || isRelational(t.text);
    }
    p.parts.push_back(std::move(part));
  }
  if (!literal) {
    SourceSpan s = pattern.empty() ? SourceSpan{} : cover(pattern.front().span, pattern.back().span);
    throw ParseError("notation '" + symbol + "' has no symbol", s);
  }
  p.kind = relational ? NotationPattern::Kind::Predicate : NotationPattern::Kind::Term;
  return p;
}

void NotationRegistry::add(NotationPattern p, const SourceSpan& where) {
  for (const auto& q : patterns_) {
    if (q.skeleton() != p.skeleton()) continue;
    if (q.symbol == p.symbol && q.kind == p.kind) return;
    throw ParseError("ambiguous notation '" + p.skeleton() + "': both '" + q.symbol +
                         "' and '" + p.symbol + "'",
                     where);
  }
  patterns_.push_back(std::move(p));
}

// ------------------------------------------------------------ sentences

namespace {

const std::set<std::string>& reservedWords() {
  static const std::set<std::string> kWords = {"and", "or",     "not",    "implies", "iff",
                                               "is",  "for",    "all",    "forall",  "exists",
                                               "there", "by"};
  return kWords;
}

struct PTerm {
  Term term;
  bool plain;  // identifier or f(args): may stand alone as an atom
};

class SentenceParser {
 public:
  SentenceParser(std::span<const Token> tokens, const NotationRegistry& notations)
      : t_(tokens), n_(notations) {
    for (const auto& p : n_.patterns())
      for (const auto& part : p.parts)
        if (!part.placeholder) literals_.insert(part.text);
  }

  Formula formulaAll() {
    return run([&] { return formula(); });
  }

  Term termAll() {
    return run([&] { return term().term; });
  }

 private:
  struct Backtrack {};

  std::span<const Token> t_;
  const NotationRegistry& n_;
  std::set<std::string> literals_;
  std::size_t pos_ = 0;
  std::size_t furthest_ = 0;
  std::set<std::string> expected_;

  template <class F>
  auto run(F body) -> decltype(body()) {
    try {
      auto r = body();
      if (pos_ < t_.size()) fail({"end of sentence"});
      return r;
    } catch (const Backtrack&) {
      SourceSpan where;
      std::string msg;
      if (furthest_ < t_.size()) {
        where = t_[furthest_].span;
        msg = "unexpected '" + t_[furthest_].text + "'";
      } else {
        if (!t_.empty()) {
          where = t_.back().span;
          where.startLine = where.endLine;
          where.startCol = where.endCol;
          where.startOffset = where.endOffset;
        }
        msg = "unexpected end of sentence";
      }
      throw ParseError(msg, where, {expected_.begin(), expected_.end()});
    }
  }

  [[noreturn]] void fail(std::initializer_list<const char*> expected) {
    if (pos_ > furthest_) {
      furthest_ = pos_;
      expected_.clear();
    }
    if (pos_ == furthest_)
      for (const char* e : expected) expected_.insert(e);
    throw Backtrack{};
  }

  bool at(std::string_view s, std::size_t k = 0) const {
    return pos_ + k < t_.size() && t_[pos_ + k].text == s;
  }
  bool accept(std::string_view s) {
    if (!at(s)) return false;
    ++pos_;
    return true;
  }
  void expect(const char* s) {
    if (!accept(s)) fail({s});
  }

  std::string ident() {
    if (pos_ < t_.size() && t_[pos_].kind == TokenKind::Word &&
        !reservedWords().count(t_[pos_].text))
      return t_[pos_++].text;
    fail({"identifier"});
  }

  bool quantifierStart() const {
    return (at("for") && at("all", 1)) || at("forall") || at("∀") || at("exists") ||
           at("∃") || (at("there") && (at("exists", 1) || at("is", 1)));
  }

  // formula := quantifier | iff
  Formula formula() {
    if (quantifierStart()) return quantifier();
    Formula l = implication();
    if (accept("iff")) return Formula::iff(l, implication());
    return l;
  }

  Formula implication() {
    Formula l = disjunction();
    if (accept("implies")) return Formula::implies(l, implication());
    return l;
  }

  Formula disjunction() {
    Formula l = conjunction();
    while (accept("or")) l = Formula::disj(l, conjunction());
    return l;
  }

  Formula conjunction() {
    Formula l = unary();
    while (accept("and")) l = Formula::conj(l, unary());
    return l;
  }

  Formula unary() {
    if (accept("not")) return Formula::negate(unary());
    if (quantifierStart()) return quantifier();
    return atom();
  }

  Formula quantifier() {
    bool universal = true;
    if (accept("for")) {
      expect("all");
    } else if (accept("forall") || accept("∀")) {
    } else if (accept("there")) {
      universal = false;
      if (!accept("exists")) expect("is");
    } else {
      universal = false;
      if (!accept("exists")) expect("∃");
    }
    std::vector<std::pair<std::string, std::optional<Term>>> binders;
    std::size_t group = 0;
    for (;;) {
      binders.emplace_back(ident(), std::nullopt);
      if (accept("∈")) {
        Term domain = term().term;
        for (std::size_t k = group; k < binders.size(); ++k) binders[k].second = domain;
        group = binders.size();
      }
      if (accept(",")) continue;
      expect(".");
      break;
    }
    Formula body = formula();
    for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
      if (it->second) {
        Formula guard = Formula::predicate("in", {Term::variable(it->first), *it->second});
        body = universal ? Formula::implies(guard, body) : Formula::conj(guard, body);
      }
      body = universal ? Formula::forall(it->first, body) : Formula::exists(it->first, body);
    }
    return body;
  }

  // A parenthesised formula must not be followed by something that only
  // continues a term, otherwise "(R⁻¹)[x,y]" would be misread.
  bool termContinues() const {
    if (pos_ >= t_.size()) return false;
    static const std::set<std::string> kBuiltin = {"=", "≠", "∈", "∉", "is", "[",
                                                   "{", "ᶜ", "⁻¹"};
    const auto& s = t_[pos_].text;
    return kBuiltin.count(s) || literals_.count(s);
  }

  Formula atom() {
    std::size_t start = pos_;
    if (at("(")) {
      try {
        ++pos_;
        Formula f = formula();
        expect(")");
        if (!termContinues()) return f;
      } catch (const Backtrack&) {
      }
      pos_ = start;
    }
    std::optional<std::pair<std::size_t, Formula>> best;
    for (const auto& p : n_.patterns()) {
      if (p.kind != NotationPattern::Kind::Predicate) continue;
      pos_ = start;
      try {
        std::vector<Term> args = match(p, 0, false);
        if (!best || pos_ > best->first) best.emplace(pos_, Formula::predicate(p.symbol, args));
      } catch (const Backtrack&) {
      }
    }
    pos_ = start;
    try {
      Formula f = builtinAtom();
      if (!best || pos_ > best->first) best.emplace(pos_, f);
    } catch (const Backtrack&) {
    }
    if (!best) {
      pos_ = start;
      fail({"formula"});
    }
    pos_ = best->first;
    return best->second;
  }

  Formula builtinAtom() {
    PTerm lhs = term();
    if (accept("=")) return Formula::equals(lhs.term, term().term);
    if (accept("≠")) return Formula::negate(Formula::equals(lhs.term, term().term));
    if (accept("∈")) return Formula::predicate("in", {lhs.term, term().term});
    if (accept("∉")) return Formula::negate(Formula::predicate("in", {lhs.term, term().term}));
    if (accept("is")) {
      bool negated = accept("not");
      if (!accept("a")) accept("an");
      Formula f = Formula::predicate(ident(), {lhs.term});
      return negated ? Formula::negate(f) : f;
    }
    if (accept("[")) {
      std::vector<Term> args{lhs.term};
      for (Term& a : termList("]")) args.push_back(std::move(a));
      return Formula::predicate("relapp", std::move(args));
    }
    if (lhs.plain) {
      const Term& t = lhs.term;
      if (t.isVariable()) return Formula::predicate(t.name());
      return Formula::predicate(t.name(), {t.args().begin(), t.args().end()});
    }
    fail({"'='", "'∈'", "'is'", "'['"});
  }

  std::vector<Term> termList(const char* close) {
    std::vector<Term> out;
    do {
      out.push_back(term().term);
    } while (accept(","));
    expect(close);
    return out;
  }

  // Matches pattern parts from index `from`. Placeholders of term patterns
  // bind tightly (postfix terms), those of predicates take whole terms.
  std::vector<Term> match(const NotationPattern& p, std::size_t from, bool tight) {
    std::vector<Term> args;
    for (std::size_t k = from; k < p.parts.size(); ++k) {
      const auto& part = p.parts[k];
      if (part.placeholder) {
        args.push_back(tight ? postfix().term : term().term);
      } else if (!accept(part.text)) {
        fail({"notation"});
      }
    }
    return args;
  }

  // Longest match among term patterns applicable here; nullopt if none.
  std::optional<Term> termPattern(const std::optional<Term>& left) {
    std::size_t start = pos_;
    std::optional<std::pair<std::size_t, Term>> best;
    for (const auto& p : n_.patterns()) {
      if (p.kind != NotationPattern::Kind::Term || p.parts.size() < 2) continue;
      bool infix = p.parts[0].placeholder;
      if (infix != left.has_value()) continue;
      const auto& lead = infix ? p.parts[1] : p.parts[0];
      if (lead.placeholder || !at(lead.text)) continue;
      pos_ = start;
      try {
        std::vector<Term> args;
        if (infix) args.push_back(*left);
        for (Term& a : match(p, infix ? 1 : 0, true)) args.push_back(std::move(a));
        if (!best || pos_ > best->first) best.emplace(pos_, Term::apply(p.symbol, args));
      } catch (const Backtrack&) {
      }
    }
    if (!best) {
      pos_ = start;
      return std::nullopt;
    }
    pos_ = best->first;
    return best->second;
  }

  PTerm term() {
    PTerm left = postfix();
    while (auto next = termPattern(left.term)) left = {*next, false};
    return left;
  }

  PTerm postfix() {
    PTerm t = primary();
    for (;;) {
      if (accept("{")) {
        std::vector<Term> args{t.term};
        for (Term& a : termList("}")) args.push_back(std::move(a));
        t = {Term::apply("funApp", std::move(args)), false};
      } else if (accept("ᶜ")) {
        t = {Term::apply("complement", {t.term}), false};
      } else if (accept("⁻¹")) {
        t = {Term::apply("inverse", {t.term}), false};
      } else {
        return t;
      }
    }
  }

  PTerm primary() {
    if (accept("(")) {
      Term inner = term().term;
      expect(")");
      return {inner, false};
    }
    if (pos_ < t_.size() && t_[pos_].kind == TokenKind::Word &&
        !reservedWords().count(t_[pos_].text)) {
      std::string name = t_[pos_++].text;
      if (accept("(")) return {Term::apply(name, termList(")")), true};
      return {Term::variable(name), true};
    }
    if (auto t = termPattern(std::nullopt)) return {*t, false};
    fail({"term"});
  }
};

}  // namespace

Formula parseSentence(std::span<const Token> tokens, const NotationRegistry& notations) {
  return SentenceParser(tokens, notations).formulaAll();
}

Term parseTerm(std::span<const Token> tokens, const NotationRegistry& notations) {
  return SentenceParser(tokens, notations).termAll();
}

// ------------------------------------------------------------ documents

namespace {

bool isStepKeyword(const std::string& s) {
  return s == "Assume" || s == "Then" || s == "Hence" || s == "Case" || s == "Proof" ||
         s == "qed";
}

class DocumentParser {
 public:
  explicit DocumentParser(std::span<const Token> t) : t_(t) {}

  Document run() {
    Document doc;
    while (pos_ < t_.size()) doc.items.push_back(item());
    return doc;
  }

 private:
  std::span<const Token> t_;
  std::size_t pos_ = 0;

  [[noreturn]] void error(const std::string& msg, std::vector<std::string> expected) {
    SourceSpan where;
    if (pos_ < t_.size()) {
      where = t_[pos_].span;
    } else if (!t_.empty()) {
      where = t_.back().span;
      where.startLine = where.endLine;
      where.startCol = where.endCol;
      where.startOffset = where.endOffset;
    }
    throw ParseError(msg, where, std::move(expected));
  }
  [[noreturn]] void unexpected(std::vector<std::string> expected) {
    error(pos_ < t_.size() ? "unexpected '" + t_[pos_].text + "'" : "unexpected end of text",
          std::move(expected));
  }

  bool at(std::string_view s) const { return pos_ < t_.size() && t_[pos_].text == s; }
  const Token& expect(const char* s) {
    if (!at(s)) unexpected({std::string("'") + s + "'"});
    return t_[pos_++];
  }
  std::string word() {
    if (pos_ >= t_.size() || t_[pos_].kind != TokenKind::Word) unexpected({"name"});
    return t_[pos_++].text;
  }

  enum class End { Sentence, SentenceOrBy, Header };

  // Index of the token ending the formula that starts at pos_. Dots that
  // close a quantifier prefix do not end the sentence.
  std::size_t scan(End mode) const {
    std::vector<int> quantifiers;  // bracket depth of open quantifier prefixes
    int depth = 0;
    for (std::size_t i = pos_; i < t_.size(); ++i) {
      const std::string& s = t_[i].text;
      if (s == "(" || s == "[" || s == "{") {
        ++depth;
      } else if (s == ")" || s == "]" || s == "}") {
        --depth;
      } else if ((s == "for" && i + 1 < t_.size() && t_[i + 1].text == "all") ||
                 s == "forall" || s == "∀" || s == "exists" || s == "∃" ||
                 (s == "there" && i + 1 < t_.size() &&
                  (t_[i + 1].text == "exists" || t_[i + 1].text == "is"))) {
        quantifiers.push_back(depth);
      } else if (s == "." && !quantifiers.empty() && quantifiers.back() == depth) {
        quantifiers.pop_back();
      } else if (depth <= 0) {
        if (s == "." && mode != End::Header) return i;
        if (s == "by" && mode == End::SentenceOrBy) return i;
        if (s == ":" && mode == End::Header) {
          if (i + 1 == t_.size() || t_[i + 1].span.startLine > t_[i].span.endLine ||
              isStepKeyword(t_[i + 1].text))
            return i;
        }
        if (s == "." && mode == End::Header) return t_.size();
      }
    }
    return t_.size();
  }

  std::vector<Token> formulaUntil(End mode, std::vector<std::string> expected) {
    std::size_t end = scan(mode);
    if (end >= t_.size()) {
      pos_ = t_.size();
      unexpected(std::move(expected));
    }
    if (end == pos_) {
      unexpected({"formula"});
    }
    std::vector<Token> out(t_.begin() + static_cast<std::ptrdiff_t>(pos_),
                           t_.begin() + static_cast<std::ptrdiff_t>(end));
    pos_ = end;
    return out;
  }

  Item item() {
    const Token& head = t_[pos_];
    Item it;
    const std::string& kw = head.text;
    ++pos_;
    if (kw == "Include") {
      it.kind = Item::Kind::Include;
      do {
        it.includes.push_back(word());
      } while ((at(",") || at("and")) && ++pos_);
      it.span = cover(head.span, expect(".").span);
    } else if (kw == "Notation") {
      it.kind = Item::Kind::Notation;
      it.name = word();
      expect(":");
      while (pos_ < t_.size() && !at(".")) it.tokens.push_back(t_[pos_++]);
      if (it.tokens.empty()) unexpected({"pattern"});
      it.span = cover(head.span, expect(".").span);
    } else if (kw == "Let") {
      it.kind = Item::Kind::Let;
      it.tokens = formulaUntil(End::Sentence, {"'.'"});
      it.span = cover(head.span, expect(".").span);
    } else if (kw == "Definition" || kw == "Axiom" || kw == "Lemma" || kw == "Theorem") {
      it.kind = kw == "Definition" ? Item::Kind::Definition
                : kw == "Axiom"    ? Item::Kind::Axiom
                                   : Item::Kind::Lemma;
      if (!at(":")) it.name = word();
      expect(":");
      it.tokens = formulaUntil(End::Sentence, {"'.'"});
      it.span = cover(head.span, expect(".").span);
      if (it.kind == Item::Kind::Lemma && at("Proof") && pos_ + 1 < t_.size() &&
          t_[pos_ + 1].text == ":") {
        pos_ += 2;
        it.hasProof = true;
        it.proof = steps(it.proofEnd);
      }
    } else {
      --pos_;
      unexpected({"Include", "Notation", "Let", "Definition", "Axiom", "Lemma"});
    }
    it.tokens.shrink_to_fit();
    return it;
  }

  // Steps up to and including "qed."; the span of "qed." goes to `end`.
  std::vector<Step> steps(SourceSpan& end) {
    std::vector<Step> out;
    for (;;) {
      if (pos_ >= t_.size()) unexpected({"qed"});
      const Token& head = t_[pos_];
      const std::string& kw = head.text;
      if (kw == "qed") {
        ++pos_;
        end = cover(head.span, expect(".").span);
        return out;
      }
      Step s;
      ++pos_;
      if (kw == "Assume") {
        s.kind = Step::Kind::Assume;
        s.tokens = formulaUntil(End::Sentence, {"'.'"});
        s.span = cover(head.span, expect(".").span);
      } else if (kw == "Then" || kw == "Hence") {
        s.kind = kw == "Then" ? Step::Kind::Then : Step::Kind::Hence;
        s.tokens = formulaUntil(End::SentenceOrBy, {"'.'"});
        if (at("by")) {
          ++pos_;
          do {
            s.hints.push_back(word());
          } while ((at(",") || at("and")) && ++pos_);
        }
        s.span = cover(head.span, expect(".").span);
      } else if (kw == "Case" || kw == "Proof") {
        s.kind = kw == "Case" ? Step::Kind::Case : Step::Kind::Proof;
        s.tokens = formulaUntil(End::Header, {"':'"});
        s.span = cover(head.span, expect(":").span);
        s.body = steps(s.endSpan);
      } else {
        --pos_;
        unexpected({"Assume", "Then", "Hence", "Case", "Proof", "qed"});
      }
      out.push_back(std::move(s));
    }
  }
};

std::string readFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Document parse(std::span<const Token> tokens) { return DocumentParser(tokens).run(); }

std::optional<std::filesystem::path> findLibrary(
    const std::string& name, std::span<const std::filesystem::path> searchPath) {
  for (const auto& dir : searchPath) {
    std::error_code ec;
    auto p = dir / (name + ".elfe");
    if (std::filesystem::is_regular_file(p, ec)) return p;
  }
  return std::nullopt;
}

Document resolveIncludes(Document doc, std::span<const std::filesystem::path> searchPath) {
  Document out;
  std::set<std::string> done;
  std::vector<std::string> stack;

  std::function<void(Document&, const std::string&)> visit = [&](Document& d,
                                                                 const std::string& file) {
    for (const auto& item : d.items) {
      if (item.kind != Item::Kind::Include) continue;
      for (const auto& name : item.includes) {
        if (std::find(stack.begin(), stack.end(), name) != stack.end()) {
          std::string cycle;
          for (auto it = std::find(stack.begin(), stack.end(), name); it != stack.end(); ++it)
            cycle += *it + " -> ";
          throw ParseError("include cycle: " + cycle + name, item.span, {}, file);
        }
        if (done.count(name)) continue;
        auto path = findLibrary(name, searchPath);
        if (!path) throw ParseError("library not found: " + name, item.span, {}, file);
        Document lib;
        try {
          lib = parse(readFile(*path));
        } catch (const ParseError& e) {
          throw ParseError(e.message(), e.span(), e.expected(), name);
        }
        stack.push_back(name);
        visit(lib, name);
        stack.pop_back();
        done.insert(name);
      }
    }
    for (auto& item : d.items) {
      item.file = file;
      out.items.push_back(std::move(item));
    }
  };
  visit(doc, "");
  return out;
}

namespace {

void desugarSteps(std::vector<Step>& steps, const NotationRegistry& reg) {
  for (auto& s : steps) {
    s.formula = parseSentence(s.tokens, reg);
    desugarSteps(s.body, reg);
  }
}

void desugarLet(Item& item, const NotationRegistry& reg, std::set<std::string>& bound) {
  const auto& t = item.tokens;
  auto be = std::find_if(t.begin(), t.end(), [](const Token& k) { return k.text == "be"; });
  if (be != t.end()) {
    std::vector<std::string> vars;
    for (auto it = t.begin(); it != be; ++it) {
      bool expectName = (it - t.begin()) % 2 == 0;
      if (expectName ? it->kind != TokenKind::Word || reservedWords().count(it->text)
                     : it->text != ",")
        throw ParseError("unexpected '" + it->text + "'", it->span,
                         {expectName ? "identifier" : "','"});
      if (expectName) vars.push_back(it->text);
    }
    auto rest = be + 1;
    if (rest != t.end() && (rest->text == "a" || rest->text == "an")) ++rest;
    if (vars.empty() || rest == t.end() || rest->kind != TokenKind::Word || rest + 1 != t.end()) {
      SourceSpan where = rest != t.end() ? rest->span : be->span;
      throw ParseError("malformed Let", where, {"Let x, y be word."});
    }
    for (const auto& v : vars) {
      item.letGroups.push_back({{v}, Formula::predicate(rest->text, {Term::variable(v)})});
      bound.insert(v);
    }
    return;
  }
  Formula guard = parseSentence(t, reg);
  Item::LetGroup g{{}, guard};
  auto fv = fol::freeVarList(guard);
  for (const auto& v : fv)
    if (!bound.count(v)) g.vars.push_back(v);
  if (g.vars.empty()) g.vars = fv;
  if (g.vars.empty()) throw ParseError("Let binds no variable", item.span);
  for (const auto& v : g.vars) bound.insert(v);
  item.letGroups.push_back(std::move(g));
}

}  // namespace

void desugar(Document& doc) {
  NotationRegistry reg;
  std::map<std::string, std::set<std::string>> bound;  // per file
  for (auto& item : doc.items) {
    try {
      switch (item.kind) {
        case Item::Kind::Include:
          break;
        case Item::Kind::Notation: {
          auto p = makeNotation(item.name, item.tokens);
          reg.add(p, item.span);
          item.notation = std::move(p);
          break;
        }
        case Item::Kind::Let:
          desugarLet(item, reg, bound[item.file]);
          break;
        case Item::Kind::Definition:
        case Item::Kind::Axiom:
        case Item::Kind::Lemma:
          item.formula = parseSentence(item.tokens, reg);
          desugarSteps(item.proof, reg);
          break;
      }
    } catch (const ParseError& e) {
      if (item.file.empty() || !e.file().empty()) throw;
      throw ParseError(e.message(), e.span(), e.expected(), item.file);
    }
  }
}

void applyLetBindings(Document& doc) {
  std::map<std::string, std::vector<Item::LetGroup>> scopes;
  for (auto& item : doc.items) {
    auto& groups = scopes[item.file];
    if (item.kind == Item::Kind::Let) {
      for (const auto& g : item.letGroups) groups.push_back(g);
      continue;
    }
    if (!item.formula) continue;
    const Formula& phi = *item.formula;

    // The most recent group binding each variable.
    std::map<std::string, std::size_t> owner;
    for (std::size_t i = 0; i < groups.size(); ++i)
      for (const auto& v : groups[i].vars) owner[v] = i;

    std::set<std::size_t> needed;
    std::vector<std::string> pending = fol::freeVarList(phi);
    while (!pending.empty()) {
      std::string v = pending.back();
      pending.pop_back();
      auto it = owner.find(v);
      if (it == owner.end() || !needed.insert(it->second).second) continue;
      for (const auto& w : fol::freeVarList(groups[it->second].guard)) pending.push_back(w);
    }

    std::vector<std::string> letVars;
    std::vector<Formula> guards;
    for (std::size_t i : needed) {  // std::set iterates in declaration order
      for (const auto& v : groups[i].vars) letVars.push_back(v);
      guards.push_back(groups[i].guard);
    }
    Formula body = phi;
    auto free = fol::freeVarList(phi);
    for (auto it = free.rbegin(); it != free.rend(); ++it)
      if (std::find(letVars.begin(), letVars.end(), *it) == letVars.end())
        body = Formula::forall(*it, body);
    if (!guards.empty()) body = Formula::implies(Formula::conjunction(guards), body);
    for (auto it = letVars.rbegin(); it != letVars.rend(); ++it)
      body = Formula::forall(*it, body);
    item.statement = body;
    item.letGuarded = !guards.empty();
  }
}

Document load(std::string_view text, std::span<const std::filesystem::path> searchPath) {
  Document doc = resolveIncludes(parse(text), searchPath);
  desugar(doc);
  applyLetBindings(doc);
  return doc;
}

}  // namespace elfe::language
