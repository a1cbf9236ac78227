#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "lyapfix/expr.hpp"

using namespace lyapfix;

namespace {

const VarSet kTUV{Variable::t, Variable::u, Variable::v};

double eval_at(const std::string& src, VarSet vars, std::initializer_list<double> pt) {
  const Expression e = Expression::parse(src, vars);
  std::vector<double> p(pt);
  return e.evaluate(p);
}

// Random expression source over t, u, v; may contain domain errors.
std::string random_source(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 3 : 13);
  std::uniform_real_distribution<double> num(0.0, 5.0);
  switch (pick(rng)) {
    case 0: return "t";
    case 1: return "u";
    case 2: return "v";
    case 3: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", num(rng));
      return buf;
    }
    case 4: return "-" + random_source(rng, depth - 1);
    case 5: return "sin(" + random_source(rng, depth - 1) + ")";
    case 6: return "cos(" + random_source(rng, depth - 1) + ")";
    case 7: return "exp(" + random_source(rng, depth - 1) + ")";
    case 8: return "abs(" + random_source(rng, depth - 1) + ")";
    case 9: return random_source(rng, depth - 1) + " + " + random_source(rng, depth - 1);
    case 10: return random_source(rng, depth - 1) + " - " + random_source(rng, depth - 1);
    case 11: return random_source(rng, depth - 1) + "*" + random_source(rng, depth - 1);
    case 12: return "(" + random_source(rng, depth - 1) + ")/(" + random_source(rng, depth - 1) + ")";
    default: return "(" + random_source(rng, depth - 1) + ")^" + random_source(rng, 0);
  }
}

}  // namespace

TEST_CASE("parse and evaluate simple forms") {
  CHECK(eval_at("t*u", {Variable::t, Variable::u}, {0.5, 0.5}) == 0.25);
  const Expression zero = Expression::parse("0", kTUV);
  CHECK(zero.arity() == 0);
  CHECK(zero(0.3, 0.7, 0.1) == 0.0);
  CHECK(Expression::parse("t*u + t*v", kTUV)(1, 1, 1) == 2.0);
  CHECK(eval_at("cos(u)", {Variable::u}, {0.0}) == 1.0);
  CHECK(eval_at("exp(t)", {Variable::t}, {1.0}) == doctest::Approx(2.718281828459045).epsilon(1e-15));
  CHECK(eval_at("u*v", {Variable::u, Variable::v}, {0.3, 0.4}) == doctest::Approx(0.12).epsilon(1e-15));
}

TEST_CASE("precedence and associativity") {
  CHECK(eval_at("-2^2", {}, {}) == -4.0);
  CHECK(eval_at("2^3^2", {}, {}) == 64.0);
  CHECK(eval_at("1-2-3", {}, {}) == -4.0);
  CHECK(eval_at("8/4/2", {}, {}) == 1.0);
  CHECK(eval_at("2+3*4", {}, {}) == 14.0);
  CHECK(eval_at("2*3+4", {}, {}) == 10.0);
  CHECK(eval_at("-3*-2", {}, {}) == 6.0);
  CHECK(eval_at("2^-1", {}, {}) == 0.5);
  CHECK(eval_at("(1+2)*(3-1)", {}, {}) == 6.0);
  CHECK(eval_at("1.5e1 + .5 + 2E-1", {}, {}) == doctest::Approx(15.7));
  CHECK(eval_at("abs(-t)", {Variable::t}, {0.25}) == 0.25);
  CHECK(eval_at("log(exp(u))", {Variable::u}, {0.75}) == doctest::Approx(0.75));
}

TEST_CASE("variables are ordered canonically regardless of appearance") {
  const Expression e = Expression::parse("v - t", kTUV);
  REQUIRE(e.arity() == 2);
  CHECK(e.variables()[0] == Variable::t);
  CHECK(e.variables()[1] == Variable::v);
  const std::vector<double> p{0.25, 1.0};
  CHECK(e.evaluate(p) == 0.75);
  CHECK_THROWS_AS(e.evaluate(std::vector<double>{0.5}), std::invalid_argument);
}

TEST_CASE("syntax errors carry positions") {
  CHECK_THROWS_AS(Expression::parse("", kTUV), ParseError);
  CHECK_THROWS_AS(Expression::parse("   ", kTUV), ParseError);
  CHECK_THROWS_AS(Expression::parse("t*", kTUV), ParseError);
  CHECK_THROWS_AS(Expression::parse("(t+u", kTUV), ParseError);
  CHECK_THROWS_AS(Expression::parse("t+u)", kTUV), ParseError);
  CHECK_THROWS_AS(Expression::parse("2t", kTUV), ParseError);  // no implicit multiplication
  CHECK_THROWS_AS(Expression::parse("1e", kTUV), ParseError);
  CHECK_THROWS_AS(Expression::parse("1e999", kTUV), ParseError);
  try {
    Expression::parse("t + $", kTUV);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("unknown identifiers and disallowed variables are rejected") {
  CHECK_THROWS_AS(Expression::parse("sqrt(t)", kTUV), ParseError);
  CHECK_THROWS_AS(Expression::parse("w", kTUV), ParseError);
  CHECK_THROWS_AS(Expression::parse("tu", kTUV), ParseError);
  CHECK_THROWS_AS(Expression::parse("v", {Variable::t, Variable::u}), ParseError);
  CHECK_THROWS_AS(Expression::parse("t*u", {Variable::u, Variable::v}), ParseError);
  CHECK_THROWS_AS(Expression::parse("sin t", kTUV), ParseError);
}

TEST_CASE("disallowed variables are rejected for every subset") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string src = random_source(rng, 4);
    for (unsigned mask = 0; mask < 8; ++mask) {
      VarSet allowed;
      for (unsigned b = 0; b < 3; ++b)
        if (mask & (1u << b)) allowed.insert(static_cast<Variable>(b));
      bool uses_forbidden = false;
      for (char c : src)
        if ((c == 't' && !allowed.contains(Variable::t)) || (c == 'u' && !allowed.contains(Variable::u)) ||
            (c == 'v' && !allowed.contains(Variable::v)))
          uses_forbidden = true;
      if (uses_forbidden) {
        CHECK_THROWS_AS(Expression::parse(src, allowed), ParseError);
      }
    }
  }
}

TEST_CASE("domain errors name the offending sub-expression") {
  const Expression e = Expression::parse("1 + 1/(t - 0.5)", kTUV);
  try {
    (void)e(0.5, 0, 0);
    FAIL("expected DomainError");
  } catch (const DomainError& err) {
    CHECK(err.subexpression() == "(1/(t-0.5))");
  }
  CHECK_THROWS_AS(Expression::parse("0^-1", kTUV), DomainError);
  CHECK_THROWS_AS(Expression::parse("log(t)", kTUV)(0, 0, 0), DomainError);
  CHECK_THROWS_AS(Expression::parse("(t-1)^0.5", kTUV)(0, 0, 0), DomainError);
  CHECK_THROWS_AS(Expression::parse("exp(1000*t)", kTUV)(1, 0, 0), DomainError);
  CHECK(Expression::parse("(t-1)^2", kTUV)(0, 0, 0) == 1.0);
}

TEST_CASE("print then re-parse reproduces the evaluation tree exactly") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string src = random_source(rng, 5);
    Expression e;
    try {
      e = Expression::parse(src, kTUV);
    } catch (const DomainError&) {
      continue;  // constant sub-expression out of domain
    }
    const Expression again = Expression::parse(e.to_string(), kTUV);
    CHECK(again.to_string() == e.to_string());
    REQUIRE(again.nodes().size() == e.nodes().size());
    CHECK(again.variables() == e.variables());
    for (int k = 0; k < 100; ++k) {
      const double t = unit(rng), u = unit(rng), v = unit(rng);
      bool threw_a = false;
      bool threw_b = false;
      double a = 0.0;
      double b = 0.0;
      try {
        a = e(t, u, v);
      } catch (const DomainError&) {
        threw_a = true;
      }
      try {
        b = again(t, u, v);
      } catch (const DomainError&) {
        threw_b = true;
      }
      REQUIRE(threw_a == threw_b);
      if (!threw_a) CHECK(a == b);  // bitwise, not approximate
    }
  }
}

TEST_CASE("bound_estimate examples") {
  auto b = bound_estimate(Expression::parse("t*u", kTUV), 3);
  CHECK(b.first == 0.0);
  CHECK(b.second == 1.0);
  for (int g : {2, 5, 17}) {
    b = bound_estimate(Expression::parse("0.5", kTUV), g);
    CHECK(b.first == 0.5);
    CHECK(b.second == 0.5);
  }
  b = bound_estimate(Expression::parse("t*u + t*v", kTUV), 5);
  CHECK(b.first == 0.0);
  CHECK(b.second == 2.0);
  CHECK_THROWS_AS(bound_estimate(Expression::parse("t", kTUV), 1), std::invalid_argument);
}

TEST_CASE("bound_estimate widens under nested grid refinement") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Expression e;
    try {
      e = Expression::parse(random_source(rng, 4), kTUV);
      for (int g = 3; g <= 17; g = 2 * g - 1) {
        const auto coarse = bound_estimate(e, g);
        const auto fine = bound_estimate(e, 2 * g - 1);
        CHECK(fine.first <= coarse.first);
        CHECK(fine.second >= coarse.second);
        CHECK(fine.first <= fine.second);
      }
      ++checked;
    } catch (const DomainError&) {
    }
  }
  CHECK(checked > 50);
}
