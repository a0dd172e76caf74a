// Recursive-descent parser for the protocol DSL.

#include <cctype>
#include <limits>
#include <map>
#include <optional>

#include "ringverify/presburger.hpp"

namespace ringverify::pb {
namespace {

enum class Tok { Ident, Nat, LParen, RParen, Plus, Minus, Star, Dot, Cmp, Or, And, Not, Exists, Mod, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
  std::int64_t value = 0;
  CmpOp op = CmpOp::Eq;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t{Tok::End, {}, line, col};
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.text = std::string(src.substr(i, j - i));
      static const std::map<std::string, Tok> keywords = {
          {"or", Tok::Or}, {"and", Tok::And}, {"not", Tok::Not}, {"exists", Tok::Exists}, {"mod", Tok::Mod}};
      auto kw = keywords.find(t.text);
      t.kind = kw == keywords.end() ? Tok::Ident : kw->second;
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      std::int64_t v = 0;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
        int digit = src[j] - '0';
        if (v > (std::numeric_limits<std::int64_t>::max() - digit) / 10)
          throw ParseError("integer literal out of range", line, col);
        v = v * 10 + digit;
        ++j;
      }
      if (j < src.size() && (std::isalpha(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        throw ParseError("identifiers must start with a letter", line, col);
      t.kind = Tok::Nat;
      t.value = v;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else {
      auto two = src.substr(i, 2);
      std::size_t len = 1;
      if (two == "<=") {
        t.kind = Tok::Cmp, t.op = CmpOp::Le, len = 2;
      } else if (two == ">=") {
        t.kind = Tok::Cmp, t.op = CmpOp::Ge, len = 2;
      } else if (two == "!=") {
        t.kind = Tok::Cmp, t.op = CmpOp::Ne, len = 2;
      } else if (two == "==" || two == "=>" || two == "<>" || two == "=<" || two == ">>" || two == "<<" || two == "=!") {
        throw ParseError("unknown operator '" + std::string(two) + "'", line, col);
      } else {
        switch (c) {
          case '=': t.kind = Tok::Cmp, t.op = CmpOp::Eq; break;
          case '<': t.kind = Tok::Cmp, t.op = CmpOp::Lt; break;
          case '>': t.kind = Tok::Cmp, t.op = CmpOp::Gt; break;
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case '+': t.kind = Tok::Plus; break;
          case '-': t.kind = Tok::Minus; break;
          case '*': t.kind = Tok::Star; break;
          case '.': t.kind = Tok::Dot; break;
          default: throw ParseError("unknown operator '" + std::string(1, c) + "'", line, col);
        }
      }
      t.text = std::string(src.substr(i, len));
      advance(len);
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::End, "<end of input>", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Formula parse_all() {
    auto f = formula();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after formula");
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, peek().column); }
  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what + ", found '" + peek().text + "'");
    ++pos_;
  }

  Formula formula() {
    std::vector<Formula> parts{conjunction()};
    while (peek().kind == Tok::Or) {
      ++pos_;
      parts.push_back(conjunction());
    }
    return parts.size() == 1 ? parts[0] : disj(std::move(parts));
  }

  Formula conjunction() {
    std::vector<Formula> parts{unary()};
    while (peek().kind == Tok::And) {
      ++pos_;
      parts.push_back(unary());
    }
    return parts.size() == 1 ? parts[0] : conj(std::move(parts));
  }

  Formula unary() {
    const Token& t = peek();
    if (t.kind == Tok::Not) {
      ++pos_;
      int line = peek().line, col = peek().column;
      auto operand = unary();
      if (!is_quantifier_free(operand))
        throw ParseError("negation may only be applied to quantifier-free formulae", line, col);
      return negate(operand);
    }
    if (t.kind == Tok::Exists) {
      ++pos_;
      if (peek().kind != Tok::Ident) fail("expected variable name after 'exists'");
      std::string name = next().text;
      expect(Tok::Dot, "'.'");
      return exists(name, unary());
    }
    if (t.kind == Tok::LParen) {
      // "(" opens either a parenthesized term of an atom or a nested formula
      std::size_t save = pos_;
      std::optional<ParseError> atom_error;
      try {
        return atom();
      } catch (const ParseError& e) {
        atom_error = e;
      }
      std::size_t atom_reach = pos_;
      pos_ = save;
      ++pos_;
      try {
        auto f = formula();
        expect(Tok::RParen, "')'");
        return f;
      } catch (const ParseError&) {
        if (atom_reach > pos_) throw *atom_error;
        throw;
      }
    }
    return atom();
  }

  Formula atom() {
    auto lhs = term();
    if (peek().kind != Tok::Cmp) fail("expected comparison operator, found '" + peek().text + "'");
    CmpOp op = next().op;
    auto rhs = term();
    return cmp(std::move(lhs), op, std::move(rhs));
  }

  Term term() {
    auto t = mterm();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      bool plus = next().kind == Tok::Plus;
      auto r = mterm();
      t = plus ? add(std::move(t), std::move(r)) : sub(std::move(t), std::move(r));
    }
    return t;
  }

  Term mterm() {
    auto t = factor();
    if (peek().kind == Tok::Mod) {
      ++pos_;
      if (peek().kind != Tok::Nat) fail("expected natural modulus after 'mod'");
      const Token& m = next();
      if (m.value < 1) throw ParseError("modulus must be at least 1", m.line, m.column);
      t = mod(std::move(t), m.value);
    }
    return t;
  }

  Term factor() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Nat: {
        ++pos_;
        if (peek().kind == Tok::Star) {
          ++pos_;
          return scale(t.value, factor());
        }
        return constant(t.value);
      }
      case Tok::Ident: ++pos_; return var(t.text);
      case Tok::LParen: {
        ++pos_;
        auto inner = term();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default: fail("expected term, found '" + t.text + "'");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// Renames bound variables that clash with a free variable or with another
// binder. Names that are already unique are kept.
class Renamer {
 public:
  explicit Renamer(const Formula& f) {
    used_ = free_vars(f);
    collect_all(f);
  }

  Formula run(const Formula& f, const std::map<std::string, Term>& scope) {
    switch (f->kind) {
      case FormulaKind::Cmp: return cmp(substitute(f->lhs, scope), f->op, substitute(f->rhs, scope));
      case FormulaKind::And:
      case FormulaKind::Or: {
        std::vector<Formula> args;
        for (auto& a : f->args) args.push_back(run(a, scope));
        auto n = std::make_shared<FormulaNode>(*f);
        n->args = std::move(args);
        return n;
      }
      case FormulaKind::Not: return negate(run(f->args[0], scope));
      case FormulaKind::Exists: {
        std::string name = f->bound;
        if (claimed_.count(name) || used_.count(name)) name = fresh(name);
        claimed_.insert(name);
        auto inner = scope;
        inner[f->bound] = var(name);
        return exists(name, run(f->args[0], inner));
      }
    }
    return f;
  }

 private:
  void collect_all(const Formula& f) {
    if (f->kind == FormulaKind::Cmp) {
      for (auto& v : free_vars(f->lhs)) every_.insert(v);
      for (auto& v : free_vars(f->rhs)) every_.insert(v);
    }
    if (f->kind == FormulaKind::Exists) every_.insert(f->bound);
    for (auto& a : f->args) collect_all(a);
  }

  std::string fresh(const std::string& base) {
    for (int i = 1;; ++i) {
      std::string cand = base + "_" + std::to_string(i);
      if (!every_.count(cand) && !claimed_.count(cand) && !used_.count(cand)) {
        every_.insert(cand);
        return cand;
      }
    }
  }

  std::set<std::string> used_;
  std::set<std::string> claimed_;
  std::set<std::string> every_;
};

}  // namespace

Formula parse_formula(std::string_view text) {
  Parser p(tokenize(text));
  auto f = p.parse_all();
  Renamer r(f);
  return r.run(f, {});
}

}  // namespace ringverify::pb
