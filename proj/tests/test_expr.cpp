#include "partlag/expr.hpp"

#include <doctest.h>

#include <random>

using namespace partlag;
using namespace partlag::expr;

namespace {

double eval(const std::string& src, const std::map<std::string, double>& b) {
  return Expr::parse(src).eval<double>(b);
}

// Random well-formed expression over x1, x2 with safe domains.
std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
  std::uniform_real_distribution<double> num(0.1, 5.0);
  switch (pick(rng)) {
    case 0: return "x1";
    case 1: return "x2";
    case 2: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", num(rng));
      return buf;
    }
    case 3: return "(" + random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1) + ")";
    case 4: return random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1);
    case 5: return random_expr(rng, depth - 1) + "*" + random_expr(rng, depth - 1);
    case 6: return random_expr(rng, depth - 1) + "/(2 + sin(" + random_expr(rng, depth - 1) + "))";
    case 7: return "-" + random_expr(rng, depth - 1);
    case 8: return "(" + random_expr(rng, depth - 1) + ")^" + std::to_string(rng() % 4);
    default: return "exp(cos(" + random_expr(rng, depth - 1) + "))";
  }
}

}  // namespace

TEST_CASE("arithmetic examples") {
  CHECK(eval("m*u1^2/2 - U", {{"m", 1}, {"u1", 2}, {"U", -1}}) == 3.0);
  CHECK(eval("M^2/(2*m*x1^2)", {{"M", 1}, {"m", 1}, {"x1", 1}}) == 0.5);
  CHECK(eval("-2*x3/(m*x1^3)", {{"x3", 1}, {"m", 1}, {"x1", 1}}) == -2.0);
  CHECK(eval("x1", {{"x1", 7}}) == 7.0);
  CHECK(eval("sin(x1)^2+cos(x1)^2", {{"x1", 0.3}}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("precedence and associativity") {
  CHECK(eval("2^3^2", {}) == 512.0);
  CHECK(eval("-2^2", {}) == -4.0);
  CHECK(eval("2*-3", {}) == -6.0);
  CHECK(eval("1 - 2 - 3", {}) == -4.0);
  CHECK(eval("8/4/2", {}) == 1.0);
  CHECK(eval("2^-1", {}) == 0.5);
}

TEST_CASE("dual evaluation") {
  std::map<std::string, D1> b{{"x1", D1::variable(2.0, 0, 1)}};
  auto v = Expr::parse("x1^3").eval<D1>(b);
  CHECK(v.value() == 8.0);
  CHECK(v.partial(0) == 12.0);
}

TEST_CASE("parse errors carry offsets") {
  auto offset_of = [](const std::string& s) -> std::size_t {
    try {
      Expr::parse(s);
    } catch (const ParseError& e) {
      return e.offset();
    }
    return std::string::npos;
  };
  CHECK(offset_of("") == 0);
  CHECK(offset_of("(x1 + 2") == 0);  // the unmatched parenthesis
  CHECK(offset_of("x1 + (2") == 5);
  CHECK(offset_of("x1 + * 2") == 5);
  CHECK(offset_of("2 x1") == 2);
  CHECK(offset_of("foo(x1)") != std::string::npos);
}

TEST_CASE("unknown names surface at bind time") {
  auto e = Expr::parse("x1 + y");
  CHECK_THROWS_AS(e.eval<double>({{"x1", 1.0}}), UnboundName);
  const std::vector<std::string> slots{"x1"};
  CHECK_THROWS_AS(Program::compile(e, slots, {}), UnboundName);
}

TEST_CASE("domain errors carry the expression") {
  try {
    eval("log(x1 - 1)", {{"x1", 1.0}});
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("log") != std::string::npos);
    CHECK(e.context().find("x1") != std::string::npos);
  }
  CHECK_THROWS_AS(eval("(-2)^0.5", {}), DomainError);
  CHECK(eval("(-2)^3", {}) == -8.0);
}

TEST_CASE("compiled programs agree with tree evaluation") {
  const std::vector<std::string> slots{"x1", "x2"};
  auto e = Expr::parse("a*x1^2*x2 - sqrt(x2)/x1 + exp(-x1)");
  auto prog = Program::compile(e, slots, {{"a", 1.5}});
  const double x[] = {0.7, 2.3};
  CHECK(prog(x) == doctest::Approx(e.eval<double>({{"x1", 0.7}, {"x2", 2.3}, {"a", 1.5}})));
}

TEST_CASE("property: print/parse round trip on a random corpus") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto e = Expr::parse(random_expr(rng, 4));
    const auto again = Expr::parse(e.str());
    CHECK(e.structurally_equal(again));
    CHECK(again.str() == e.str());
  }
}

TEST_CASE("property: dual evaluation matches finite differences on the corpus") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.2, 1.5);
  const std::vector<std::string> slots{"x1", "x2"};
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto prog = Program::compile(Expr::parse(random_expr(rng, 3)), slots, {});
    const double x[] = {U(rng), U(rng)};
    const double h = 1e-6;
    const std::vector<D1> xd{D1::variable(x[0], 0, 2), D1::variable(x[1], 1, 2)};
    const D1 v = prog.eval<D1>(xd);
    for (std::size_t k = 0; k < 2; ++k) {
      double xp[] = {x[0], x[1]}, xm[] = {x[0], x[1]};
      xp[k] += h;
      xm[k] -= h;
      const double fd = (prog(xp) - prog(xm)) / (2 * h);
      const double scale = std::max({1.0, std::fabs(v.value()), std::fabs(v.partial(k))});
      CHECK(std::fabs(v.partial(k) - fd) <= 1e-6 * scale);
    }
    ++checked;
  }
  CHECK(checked == 1000);
}
