#include <doctest.h>

#include <random>

#include "ringverify/evaluator.hpp"
#include "ringverify/presburger.hpp"

using namespace ringverify;
using namespace ringverify::pb;

namespace {

// Plain recursive semantics with every quantifier enumerated; the reference
// the search-based evaluator is held to.
std::int64_t naive_value(const Term& t, const Valuation& v) {
  switch (t->kind) {
    case TermKind::Var: return v.at(t->name);
    case TermKind::Const: return t->value;
    case TermKind::Add: return naive_value(t->lhs, v) + naive_value(t->rhs, v);
    case TermKind::Sub: return naive_value(t->lhs, v) - naive_value(t->rhs, v);
    case TermKind::Scale: return t->value * naive_value(t->lhs, v);
    case TermKind::Mod: {
      auto r = naive_value(t->lhs, v) % t->value;
      return r < 0 ? r + t->value : r;
    }
  }
  return 0;
}

bool naive_eval(const Formula& f, Valuation v, std::int64_t bound) {
  switch (f->kind) {
    case FormulaKind::Cmp: {
      auto d = naive_value(f->lhs, v) - naive_value(f->rhs, v);
      switch (f->op) {
        case CmpOp::Eq: return d == 0;
        case CmpOp::Ne: return d != 0;
        case CmpOp::Le: return d <= 0;
        case CmpOp::Ge: return d >= 0;
        case CmpOp::Lt: return d < 0;
        case CmpOp::Gt: return d > 0;
      }
      return false;
    }
    case FormulaKind::And:
      for (auto& a : f->args)
        if (!naive_eval(a, v, bound)) return false;
      return true;
    case FormulaKind::Or:
      for (auto& a : f->args)
        if (naive_eval(a, v, bound)) return true;
      return false;
    case FormulaKind::Not: return !naive_eval(f->args[0], v, bound);
    case FormulaKind::Exists:
      for (std::int64_t x = 0; x <= bound; ++x) {
        v[f->bound] = x;
        if (naive_eval(f->args[0], v, bound)) return true;
      }
      return false;
  }
  return false;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::int64_t pick(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }

  Term term(const std::vector<std::string>& names, int depth) {
    if (depth == 0 || pick(0, 2) == 0) {
      if (pick(0, 2) == 0) return constant(pick(0, 6));
      return var(names[pick(0, static_cast<std::int64_t>(names.size()) - 1)]);
    }
    switch (pick(0, 3)) {
      case 0: return add(term(names, depth - 1), term(names, depth - 1));
      case 1: return sub(term(names, depth - 1), term(names, depth - 1));
      case 2: return scale(pick(0, 3), term(names, depth - 1));
      default: return mod(term(names, depth - 1), pick(1, 4));
    }
  }

  Formula atom(const std::vector<std::string>& names) {
    static const CmpOp ops[] = {CmpOp::Eq, CmpOp::Le, CmpOp::Ge, CmpOp::Lt, CmpOp::Gt, CmpOp::Ne};
    return cmp(term(names, 2), ops[pick(0, 5)], term(names, 2));
  }

  /// Exists never appears under Not.
  Formula formula(std::vector<std::string> names, int depth, bool allow_exists) {
    if (depth == 0) return atom(names);
    switch (pick(0, allow_exists ? 4 : 3)) {
      case 0: return atom(names);
      case 1: return conj({formula(names, depth - 1, allow_exists), formula(names, depth - 1, allow_exists)});
      case 2: return disj({formula(names, depth - 1, allow_exists), formula(names, depth - 1, allow_exists)});
      case 3: return negate(formula(names, depth - 1, false));
      default: {
        std::string q = "q" + std::to_string(counter_++);
        names.push_back(q);
        return exists(q, formula(names, depth - 1, allow_exists));
      }
    }
  }

 private:
  std::mt19937_64 rng_;
  int counter_ = 0;
};

const std::vector<std::string> kFree{"a", "b", "c"};

Valuation random_valuation(Gen& g) { return {{"a", g.pick(0, 5)}, {"b", g.pick(0, 5)}, {"c", g.pick(0, 5)}}; }

}  // namespace

TEST_SUITE("presburger") {
  TEST_CASE("parse collision formula") {
    auto f = parse_formula("x1 = x2 or x2 = x3 or x1 = x3");
    REQUIRE(f->kind == FormulaKind::Or);
    REQUIRE(f->args.size() == 3);
    for (auto& a : f->args) {
      CHECK(a->kind == FormulaKind::Cmp);
      CHECK(a->op == CmpOp::Eq);
    }
    CHECK(print(f->args[2]) == "x1 = x3");
  }

  TEST_CASE("parse ring bound") {
    auto f = parse_formula("y > 6");
    REQUIRE(f->kind == FormulaKind::Cmp);
    CHECK(f->op == CmpOp::Gt);
    CHECK(f->lhs->kind == TermKind::Var);
    CHECK(f->lhs->name == "y");
    CHECK(f->rhs->kind == TermKind::Const);
    CHECK(f->rhs->value == 6);
  }

  TEST_CASE("parse existential") {
    auto f = parse_formula("exists q . d1 = 2*q");
    REQUIRE(f->kind == FormulaKind::Exists);
    CHECK(f->bound == "q");
    auto body = f->args[0];
    REQUIRE(body->kind == FormulaKind::Cmp);
    CHECK(body->lhs->name == "d1");
    REQUIRE(body->rhs->kind == TermKind::Scale);
    CHECK(body->rhs->value == 2);
    CHECK(body->rhs->lhs->name == "q");
  }

  TEST_CASE("parse precedence and comments") {
    auto f = parse_formula("# leading comment\nx1 = 1 and x2 = 2 or not x3 < 4 # trailing\n");
    REQUIRE(f->kind == FormulaKind::Or);
    CHECK(f->args[0]->kind == FormulaKind::And);
    CHECK(f->args[1]->kind == FormulaKind::Not);
    CHECK(equal(parse_formula("(x1 + 1) mod 3 = 2"), parse_formula("(x1+1) mod 3=2")));
    auto m = parse_formula("x1 mod 2 + 1 = x2");
    CHECK(m->lhs->kind == TermKind::Add);
    CHECK(m->lhs->lhs->kind == TermKind::Mod);
    CHECK(parse_formula("((x1 = 1))")->kind == FormulaKind::Cmp);
    CHECK(parse_formula("(x1 + 1) = 2")->kind == FormulaKind::Cmp);
  }

  TEST_CASE("parse errors carry positions") {
    try {
      parse_formula("x1 = 1 and\n  x2 >");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() >= 5);
    }
    try {
      parse_formula("x1 == 2");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("unknown operator") != std::string::npos);
      CHECK(e.line() == 1);
      CHECK(e.column() == 4);
    }
    CHECK_THROWS_AS(parse_formula("x1 ? 2"), ParseError);
    CHECK_THROWS_AS(parse_formula("x1 = "), ParseError);
    CHECK_THROWS_AS(parse_formula("x1 = 1 x2 = 2"), ParseError);
    CHECK_THROWS_AS(parse_formula("1x = 2"), ParseError);
    CHECK_THROWS_AS(parse_formula("x mod y = 1"), ParseError);
  }

  TEST_CASE("negation over an existential is rejected") {
    CHECK_THROWS_AS(parse_formula("not exists q . x = q"), ParseError);
    CHECK_THROWS_AS(parse_formula("not (x = 1 and exists q . x = 2*q)"), ParseError);
    CHECK_NOTHROW(parse_formula("exists q . not x = q"));
  }

  TEST_CASE("a quantifier scopes over one unary") {
    auto f = parse_formula("exists r . x = r and r < 3");
    REQUIRE(f->kind == FormulaKind::And);
    CHECK(free_vars(f) == std::set<std::string>{"r", "x"});
  }

  TEST_CASE("bound names are renamed apart") {
    auto f = parse_formula("exists q . q = 1 and exists q . q = 2");
    auto bv = bound_vars(f);
    CHECK(bv.size() == 2);
    auto g = parse_formula("q = 3 and exists q . q = 1");
    CHECK(free_vars(g) == std::set<std::string>{"q"});
    CHECK(bound_vars(g).count("q") == 0);
    CHECK(eval(g, {{"q", 3}}, 5));
  }

  TEST_CASE("free variables") {
    CHECK(free_vars(parse_formula("x1 = x2")) == std::set<std::string>{"x1", "x2"});
    CHECK(free_vars(parse_formula("exists q . d1 = 2*q")) == std::set<std::string>{"d1"});
    CHECK(free_vars(parse_formula("y > 6")) == std::set<std::string>{"y"});
  }

  TEST_CASE("substitution examples") {
    CHECK(print(substitute(parse_formula("d1 > d2"), {{"d1", constant(3)}, {"d2", constant(1)}})) == "3 > 1");
    CHECK(print(substitute(parse_formula("x1 = x2"), {{"x1", var("p1")}, {"x2", var("p2")}})) == "p1 = p2");
    auto s = substitute(parse_formula("exists q. d1 = 2*q"), {{"d1", add(var("a"), var("b"))}});
    CHECK(print(s) == "exists q . a + b = 2*q");
    CHECK(free_vars(s) == std::set<std::string>{"a", "b"});
  }

  TEST_CASE("substitution is simultaneous") {
    auto s = substitute(parse_formula("x1 < x2"), {{"x1", var("x2")}, {"x2", var("x1")}});
    CHECK(print(s) == "x2 < x1");
  }

  TEST_CASE("substitution errors") {
    auto f = parse_formula("exists q . d1 = 2*q");
    CHECK_THROWS_AS(substitute(f, {{"q", constant(1)}}), Error);
    CHECK_THROWS_AS(substitute(f, {{"d1", var("q")}}), Error);
  }

  TEST_CASE("evaluation examples") {
    CHECK(eval(parse_formula("x1 = x2 or x2 = x3 or x1 = x3"), {{"x1", 1}, {"x2", 1}, {"x3", 4}}, 0));
    CHECK_FALSE(eval(parse_formula("d1 > d2"), {{"d1", 1}, {"d2", 4}}, 0));
    CHECK(eval(parse_formula("exists q. 6 = 2*q"), {}, 10));
    CHECK_FALSE(eval(parse_formula("exists q. 6 = 2*q"), {}, 2));
  }

  TEST_CASE("evaluation errors") {
    CHECK_THROWS_AS(eval(parse_formula("x = y"), {{"x", 1}}, 0), EvalError);
    CHECK_THROWS_AS(eval(parse_formula("x = 1"), {{"x", 1}}, -1), EvalError);
    auto big = std::numeric_limits<std::int64_t>::max();
    CHECK_THROWS_AS(eval(parse_formula("x + 1 > 0"), {{"x", big}}, 0), EvalError);
    CHECK_THROWS_AS(eval(parse_formula("3*x > 0"), {{"x", big / 2}}, 0), EvalError);
  }

  TEST_CASE("evaluation of mod and subtraction") {
    CHECK(eval(parse_formula("x - 5 mod 3 = 2"), {{"x", 4}}, 0));
    CHECK(eval(parse_formula("(x - 5) mod 3 = 2"), {{"x", 4}}, 0));
    CHECK(eval(parse_formula("x - 7 < 0"), {{"x", 4}}, 0));
    CHECK(eval(parse_formula("exists q . exists r . (x = 3*q + r and r < 3 and r = 1)"), {{"x", 10}}, 10));
    CHECK_FALSE(eval(parse_formula("exists q . exists r . (x = 3*q + r and r < 3 and r = 2)"), {{"x", 10}}, 10));
  }

  TEST_CASE("smtlib examples") {
    CHECK(to_smtlib(parse_formula("y > 6")) == "(> y 6)");
    CHECK(to_smtlib(parse_formula("exists q. d1 = 2*q")) == "(exists ((q Int)) (and (>= q 0) (= d1 (* 2 q))))");
    CHECK(to_smtlib(parse_formula("not (d1 > d2)")) == "(not (> d1 d2))");
    CHECK(to_smtlib(parse_formula("x mod 3 != 1")) == "(distinct (mod x 3) 1)");
    CHECK(to_smtlib(parse_formula("x - 1 >= 0"), {"x"}) == "(and (>= x 0) (>= (- x 1) 0))");
    CHECK(to_smtlib(truth()) == "true");
    CHECK(to_smtlib(falsity()) == "false");
  }

  TEST_CASE("nnf pushes negation to atoms") {
    auto f = nnf(parse_formula("not (x = 1 or (y < 2 and not z >= 3))"));
    CHECK(print(f) == "x != 1 and (y >= 2 or z >= 3)");
    CHECK_THROWS_AS(nnf(negate(parse_formula("exists q . q = x"))), Error);
  }

  TEST_CASE("builders normalize connectives") {
    CHECK(equal(conj({parse_formula("x = 1")}), parse_formula("x = 1")));
    auto nested = conj({conj({parse_formula("x = 1"), parse_formula("y = 1")}), parse_formula("z = 1")});
    CHECK(nested->args.size() == 3);
    CHECK_THROWS_AS(constant(-1), Error);
    CHECK_THROWS_AS(mod(var("x"), 0), Error);
  }

  TEST_CASE("property: print and parse round-trip") {
    Gen g(7);
    for (int i = 0; i < 500; ++i) {
      auto f = g.formula(kFree, 4, true);
      auto text = print(f);
      auto back = parse_formula(text);
      INFO(text);
      CHECK(equal(back, f));
      CHECK(print(back) == text);
    }
  }

  TEST_CASE("property: evaluator agrees with enumeration") {
    Gen g(11);
    for (int i = 0; i < 400; ++i) {
      auto f = g.formula(kFree, 3, true);
      auto v = random_valuation(g);
      for (std::int64_t bound : {0, 2, 5}) {
        INFO(print(f), " bound=", bound);
        CHECK(eval(f, v, bound) == naive_eval(f, v, bound));
      }
    }
  }

  TEST_CASE("property: cached evaluation agrees with enumeration") {
    Gen g(12);
    for (int i = 0; i < 150; ++i) {
      auto f = g.formula(kFree, 4, true);
      Evaluator ev(f);
      ev.set_memoize(true);
      // many valuations per formula so the cache is actually consulted
      for (int j = 0; j < 30; ++j) {
        auto v = random_valuation(g);
        for (std::int64_t bound : {2, 4}) {
          INFO(print(f), " bound=", bound);
          CHECK(ev(v, bound) == naive_eval(f, v, bound));
        }
      }
    }
  }

  TEST_CASE("property: substitution soundness") {
    Gen g(13);
    for (int i = 0; i < 400; ++i) {
      auto f = g.formula(kFree, 3, true);
      auto v = random_valuation(g);
      auto c = g.pick(0, 5);
      auto rest = v;
      rest.erase("a");
      auto full = rest;
      full["a"] = c;
      auto s = substitute(f, {{"a", constant(c)}});
      INFO(print(f));
      CHECK(eval(s, rest, 4) == eval(f, full, 4));
    }
  }

  TEST_CASE("property: bounded evaluation is monotone in the bound") {
    Gen g(17);
    for (int i = 0; i < 300; ++i) {
      auto f = g.formula(kFree, 3, true);
      auto v = random_valuation(g);
      bool before = false;
      for (std::int64_t bound = 0; bound <= 6; ++bound) {
        bool now = eval(f, v, bound);
        INFO(print(f), " bound=", bound);
        CHECK((!before || now));
        before = now;
      }
    }
  }

  TEST_CASE("property: quantifier-free evaluation ignores the bound") {
    Gen g(19);
    for (int i = 0; i < 300; ++i) {
      auto f = g.formula(kFree, 4, false);
      REQUIRE(is_quantifier_free(f));
      auto v = random_valuation(g);
      bool at0 = eval(f, v, 0);
      CHECK(eval(f, v, 3) == at0);
      CHECK(eval(f, v, 50) == at0);
    }
  }

  TEST_CASE("compiled evaluator is reusable") {
    Evaluator ev(parse_formula("exists q . a + b = 2*q"));
    CHECK(ev.free_variables() == std::vector<std::string>{"a", "b"});
    CHECK(ev.slot("b") == 1);
    CHECK(ev.slot("q") == -1);
    for (std::int64_t a = 0; a < 5; ++a)
      for (std::int64_t b = 0; b < 5; ++b) {
        std::vector<std::int64_t> vals{a, b};
        CHECK(ev(vals, 10) == ((a + b) % 2 == 0));
      }
  }
}
