#include <cmath>

#include "doctest.h"
#include "gen.hpp"
#include "hk/compiled.hpp"
#include "hk/error.hpp"
#include "hk/expr.hpp"

using namespace hk::sym;
using hk::testing::ExprGen;

namespace {

Expr X(int i) { return Expr(Var::x(i)); }
Expr P(int i) { return Expr(Var::p(i)); }
Expr Z() { return Expr(Var::z()); }

double central_difference(const Expr& e, Var v, Point p, double h) {
  const double x0 = p[v];
  p[v] = x0 + h;
  const double fp = evaluate(e, p);
  p[v] = x0 - h;
  const double fm = evaluate(e, p);
  return (fp - fm) / (2 * h);
}

}  // namespace

TEST_CASE("power rule on a monomial") {
  const Expr e = X(1) * X(1) * X(2);
  CHECK(differentiate(e, Var::x(1)) == Expr(2) * X(1) * X(2));
  CHECK(to_string(differentiate(e, Var::x(1))) == "(* 2 x1 x2)");
}

TEST_CASE("product rule with G = z^4") {
  const Expr g = pow(Z(), 4);
  const Expr e = Z() * differentiate(g, Var::z());
  CHECK(differentiate(e, Var::z()) == Expr(16) * pow(Z(), 3));
}

TEST_CASE("derivative of |p|^3/3 at (1,0) matches a finite-difference oracle") {
  const std::vector<Expr> p{P(1), P(2)};
  const Expr f = abs_pow(p, Rational(3)) * Expr(Rational(1, 3));
  const Expr d = differentiate(f, Var::p(1));
  const Point at{{Var::p(1), 1.0}, {Var::p(2), 0.0}};
  const double fd = central_difference(f, Var::p(1), at, 1e-5);
  CHECK(fd == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(evaluate(d, at) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("|p|^k derivative at p = 0 is singular for k < 2") {
  const std::vector<Expr> p{P(1), P(2)};
  const Expr f = abs_pow(p, Rational(3, 2));
  const Expr d = differentiate(f, Var::p(1));
  const Point zero{{Var::p(1), 0.0}, {Var::p(2), 0.0}};
  CHECK_THROWS_AS(evaluate(d, zero), hk::EvaluationSingularity);
  // k >= 2 is fine at the origin
  const Expr d3 = differentiate(abs_pow(p, Rational(3)), Var::p(1));
  CHECK(evaluate(d3, zero) == 0.0);
}

TEST_CASE("evaluation examples") {
  CHECK(evaluate(X(1) * X(1) + X(2) * X(2), {{Var::x(1), 3.0}, {Var::x(2), 4.0}}) == 25.0);
  CHECK(evaluate(sin(X(1)), {{Var::x(1), 0.0}}) == 0.0);
  // x1^(n-1)/(n-1)! with n = 3
  CHECK(evaluate(X(1) * X(1) * Expr(Rational(1, 2)), {{Var::x(1), 2.0}}) == 2.0);
}

TEST_CASE("polynomials evaluate exactly and round once") {
  // 0.1 + 0.2 - 0.3 is exactly representable after exact summation of the doubles
  const Expr e = X(1) + X(2) - X(3);
  const double v = evaluate(e, {{Var::x(1), 0.1}, {Var::x(2), 0.2}, {Var::x(3), 0.3}});
  const Rational exact = Rational(0.1) + Rational(0.2) - Rational(0.3);
  CHECK(v == exact.get_d());
  // cancellation that double arithmetic loses
  const Expr c = X(1) * X(1) - X(2) * X(2);
  CHECK(evaluate(c, {{Var::x(1), 1e8 + 1}, {Var::x(2), 1e8}}) == 2e8 + 1);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(evaluate(X(1) + X(2), {{Var::x(1), 1.0}}), hk::UnboundVariable);
  CHECK_THROWS_AS(evaluate(log(X(1)), {{Var::x(1), 0.0}}), hk::EvaluationSingularity);
  CHECK_THROWS_AS(evaluate(log(X(1)), {{Var::x(1), -2.0}}), hk::EvaluationSingularity);
  CHECK_THROWS_AS(evaluate(pow(X(1), Frac(1, 2)), {{Var::x(1), -1.0}}), hk::EvaluationSingularity);
  CHECK_THROWS_AS(evaluate(pow(X(1), Frac(-1)), {{Var::x(1), 0.0}}), hk::EvaluationSingularity);
  CHECK_THROWS_AS(parse("(+ x1"), hk::ParseError);
  CHECK_THROWS_AS(parse("(frob x1)"), hk::ParseError);
  CHECK_THROWS_AS(parse("(/ x1 0)"), hk::ParseError);
  CHECK_THROWS_AS(parse("x1 x2"), hk::ParseError);
}

TEST_CASE("zero tests") {
  CHECK(is_zero(X(1) * X(2) - X(2) * X(1)));
  const Expr e = sin(X(1)) * cos(X(2)) + Expr(3) * exp(X(1) * X(2));
  CHECK((e - e).is_canonical_zero());
  // non-canonical zero detected by sampling
  const Expr pyth = pow(sin(X(1)), 2) + pow(cos(X(1)), 2) - Expr(1);
  const ZeroTest zt = zero_test(pyth);
  CHECK(zt.zero);
  CHECK_FALSE(zt.symbolic);
  CHECK(zt.samples == 32);
  CHECK_FALSE(is_zero(sin(X(1)) - X(1)));
}

TEST_CASE("exact radicals and powers") {
  CHECK(pow(Expr(Rational(9, 4)), Frac(1, 2)) == Expr(Rational(3, 2)));
  CHECK(pow(Expr(Rational(8)), Frac(-2, 3)) == Expr(Rational(1, 4)));
  const Expr s = X(1) * X(1) + Expr(1);
  const Expr r = pow(s, Frac(1, 2));
  CHECK(r * r == s);
  CHECK(pow(r, 2) == s);
  CHECK(pow(pow(s, Frac(3, 2)), Frac(2, 3)) == s);
  CHECK(is_zero(pow(r, Frac(-2)) * s - Expr(1)));
  CHECK(parse("007") == Expr(7));
}

TEST_CASE("canonical order is graded lexicographic") {
  const Expr e = X(2) + X(1) * X(1) + Expr(1) + X(1) * X(2) + X(1);
  CHECK(to_string(e) == "(+ (^ x1 2) (* x1 x2) x1 x2 1)");
}

TEST_CASE("text round trip on fixed examples") {
  for (const char* text : {"(+ (* 2 (^ x1 2)) (sin x2))", "(* -3/4 z (^ (+ (^ p1 2) (^ p2 2)) 3/2))",
                           "(log (+ x1 2))", "(exp (* x1 x2))", "(^ x1 -1)", "0", "-7/3"}) {
    const Expr e = parse(text);
    CHECK(to_string(e) == text);
    CHECK(parse(to_string(e)) == e);
  }
  CHECK(parse("(abs 3 p1 p2)") == abs_pow(std::vector<Expr>{P(1), P(2)}, Rational(3)));
  CHECK(parse("(/ x1 2)") == X(1) * Expr(Rational(1, 2)));
  CHECK(parse("0.125") == Expr(Rational(1, 8)));
  CHECK(parse("2.5e-3") == Expr(Rational(1, 400)));
  CHECK(parse("(- x1)") == -X(1));
  CHECK(parse("theta") == Expr(Var::aux("theta")));
}

TEST_CASE("weighted degree") {
  const std::vector<int> w{1, 2};
  const auto d = weighted_degree(X(1) * X(1) * X(2) + X(2) * X(2), w);
  CHECK(d.homogeneous);
  CHECK(d.degree == 4);
  CHECK_FALSE(weighted_degree(X(1) + X(2), w).homogeneous);
  CHECK(weighted_degree(Expr(), w).zero);
  CHECK(weighted_degree(Expr(5), w).degree == 0);
}

TEST_CASE("property: ring axioms on random polynomials") {
  ExprGen g(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Expr a = g.polynomial();
    const Expr b = g.polynomial();
    const Expr c = g.polynomial();
    CHECK(a + b == b + a);
    CHECK(a * b == b * a);
    CHECK((a + b) + c == a + (b + c));
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK((a - a).is_canonical_zero());
  }
}

TEST_CASE("property: linearity and Leibniz rule of differentiate on polynomials") {
  ExprGen g(2);
  for (int trial = 0; trial < 200; ++trial) {
    const Expr a = g.polynomial(5, 4);
    const Expr b = g.polynomial(5, 4);
    const Rational s = g.rational();
    const Var v = g.var();
    CHECK(differentiate(a + Expr(s) * b, v) == differentiate(a, v) + Expr(s) * differentiate(b, v));
    CHECK(differentiate(a * b, v) == differentiate(a, v) * b + a * differentiate(b, v));
    CHECK(differentiate(a, v).is_polynomial());
  }
}

TEST_CASE("property: Leibniz rule holds for expressions with atoms") {
  ExprGen g(3);
  for (int trial = 0; trial < 60; ++trial) {
    const Expr a = g.expression();
    const Expr b = g.expression();
    const Var v = g.var();
    CHECK(is_zero(differentiate(a * b, v) - differentiate(a, v) * b - a * differentiate(b, v)));
  }
}

TEST_CASE("property: canonicalization is idempotent and text round-trips") {
  ExprGen g(4);
  for (int trial = 0; trial < 150; ++trial) {
    const Expr e = g.expression();
    CHECK(Expr::from_terms(e.terms()) == e);
    const std::string text = to_string(e);
    const Expr back = parse(text);
    CHECK(back == e);
    CHECK(to_string(back) == text);
  }
}

TEST_CASE("property: derivative agrees with central differences to order h^2") {
  ExprGen g(5);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Expr e = g.expression();
    const Var v = g.var();
    const Expr d = differentiate(e, v);
    const Point p = g.point(-0.8, 0.8);
    const double exact = evaluate(d, p);
    // Third derivative scale, bounded generously through the h=1e-2 error.
    const double e2 = std::fabs(central_difference(e, v, p, 1e-2) - exact);
    const double C = std::max(1.0, e2 / 1e-4) * 4;
    for (double h : {1e-2, 1e-3, 1e-4}) {
      const double err = std::fabs(central_difference(e, v, p, h) - exact);
      // rounding noise of the difference quotient: eps * |f| / h
      const double noise = 1e-15 * (1 + std::fabs(evaluate(e, p))) / h * 8;
      CHECK(err <= C * h * h + noise);
    }
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("property: substitution commutes with evaluation") {
  ExprGen g(6);
  for (int trial = 0; trial < 80; ++trial) {
    const Expr e = g.expression();
    const Expr s1 = g.polynomial(3, 2);
    const Expr s2 = g.polynomial(3, 2);
    const Expr sub = substitute(e, {{Var::x(1), s1}, {Var::x(2), s2}});
    const Point p = g.point(-0.7, 0.7);
    Point q = p;
    q[Var::x(1)] = evaluate(s1, p);
    q[Var::x(2)] = evaluate(s2, p);
    double expected = 0;
    try {
      expected = evaluate(e, q);
    } catch (const hk::EvaluationSingularity&) {
      continue;
    }
    CHECK(evaluate(sub, p) == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("compiled evaluator agrees with the interpreter") {
  ExprGen g(7);
  std::vector<Expr> outs;
  for (int k = 0; k < 12; ++k) outs.push_back(g.expression());
  const std::vector<Var> slots{Var::x(1), Var::x(2), Var::x(3)};
  const CompiledExpr c(outs, slots);
  for (int trial = 0; trial < 20; ++trial) {
    const Point p = g.point();
    std::vector<double> in{p.at(Var::x(1)), p.at(Var::x(2)), p.at(Var::x(3))};
    std::vector<double> out(outs.size());
    c.eval(in, out);
    for (std::size_t k = 0; k < outs.size(); ++k)
      CHECK(out[k] == doctest::Approx(evaluate(outs[k], p)).epsilon(1e-10).scale(1.0));
  }
  CHECK_THROWS_AS(CompiledExpr({Z()}, slots), hk::UnboundVariable);
}
