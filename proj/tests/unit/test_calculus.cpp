#include "doctest.h"
#include "gen.hpp"
#include "hk/calculus.hpp"
#include "hk/error.hpp"

using namespace hk::calculus;
using hk::fields::bony;
using hk::fields::euclidean;
using hk::fields::grushin;
using hk::sym::Var;
using hk::testing::ExprGen;

namespace {

Expr X(int i) { return Expr(Var::x(i)); }
Expr Z() { return Expr(Var::z()); }

Expr euclidean_laplacian(const Expr& u, int n) {
  Expr out;
  for (int i = 1; i <= n; ++i) out += hk::sym::differentiate(hk::sym::differentiate(u, Var::x(i)), Var::x(i));
  return out;
}

}  // namespace

TEST_CASE("x_gradient examples") {
  const auto e = euclidean(2).fields;
  CHECK(x_gradient(e, X(1) * X(2)) == std::vector<Expr>{X(2), X(1)});
  const auto g = grushin(1, 1, 1).fields;
  CHECK(x_gradient(g, X(2)) == std::vector<Expr>{Expr(), X(1)});
  const auto b = bony(3).fields;
  CHECK(x_gradient(b, X(3)) == std::vector<Expr>{Expr(), Expr(Rational(1, 2)) * X(1) * X(1)});
}

TEST_CASE("x_divergence carries a minus sign") {
  const auto e = euclidean(2).fields;
  CHECK(x_divergence(e, {X(1), X(2)}) == Expr(-2));
  CHECK(x_divergence(e, {Expr(), Expr()}) == Expr());
  const Expr u = X(1) * X(1) + Expr(3) * X(1) * X(2) - X(2) * X(2) * Expr(5);
  CHECK(x_divergence(e, x_gradient(e, u)) == -euclidean_laplacian(u, 2));
  CHECK(sub_laplacian(e, u) == -euclidean_laplacian(u, 2));
}

TEST_CASE("x_hessian") {
  const auto e = euclidean(2).fields;
  const auto h = x_hessian(e, X(1) * X(2));
  CHECK(h[0][1] == Expr(1));
  CHECK(h[1][0] == Expr(1));
  CHECK(h[0][0] == Expr());
  // Grushin (1,1,1), u = y t: X2(X1 u) = y but X1(X2 u) = 2y
  const auto g = grushin(1, 1, 1).fields;
  const auto hg = x_hessian(g, X(1) * X(2));
  CHECK(hg[0][1] == X(1));
  CHECK(hg[1][0] == Expr(2) * X(1));
  CHECK_FALSE(hg[0][1] == hg[1][0]);
}

TEST_CASE("trace of the X-Hessian is minus the sub-Laplacian") {
  ExprGen gen(21, 3);
  const auto b = bony(3).fields;
  for (int trial = 0; trial < 10; ++trial) {
    const Expr u = gen.polynomial(5, 4);
    const auto h = x_hessian(b, u);
    Expr trace;
    for (std::size_t i = 0; i < h.size(); ++i) trace += h[i][i];
    CHECK(-trace == sub_laplacian(b, u));
  }
}

TEST_CASE("horizontal k-Laplacian examples") {
  const auto e1 = euclidean(1).fields;
  CHECK(horizontal_k_laplacian(e1, X(1) * X(1), Rational(2)) == Expr(-2));
  const auto e2 = euclidean(2).fields;
  CHECK(horizontal_k_laplacian(e2, Expr(7), Rational(3)).is_canonical_zero());
  CHECK(horizontal_k_laplacian(e2, X(1), Rational(4)).is_canonical_zero());
  CHECK_THROWS_AS(horizontal_k_laplacian(e2, X(1), Rational(1)), hk::InvalidArgument);
  // k < 2 is singular where the gradient vanishes
  const Expr l = horizontal_k_laplacian(e2, X(1) * X(1) + X(2) * X(2), Rational(3, 2));
  CHECK_THROWS_AS(hk::sym::evaluate(l, {{Var::x(1), 0.0}, {Var::x(2), 0.0}}), hk::EvaluationSingularity);
  CHECK_NOTHROW(hk::sym::evaluate(l, {{Var::x(1), 0.5}, {Var::x(2), 0.0}}));
}

TEST_CASE("k = 2 degenerates to the sub-Laplacian exactly") {
  ExprGen gen(22, 2);
  const auto g = grushin(1, 1, 2).fields;
  for (int trial = 0; trial < 20; ++trial) {
    const Expr u = gen.polynomial(4, 4);
    Expr direct;
    for (const auto& f : g) direct -= hk::fields::apply_field(f, hk::fields::apply_field(f, u));
    CHECK(horizontal_k_laplacian(g, u, Rational(2)) == direct);
  }
}

TEST_CASE("Euler-Lagrange residuals, first order") {
  const auto e2 = euclidean(2).fields;
  std::vector<Expr> p{Expr(Var::p(1)), Expr(Var::p(2))};
  const Functional1 dir(hk::sym::abs_pow(p, Rational(2)) * Expr(Rational(1, 2)), 2, 2);
  CHECK(euler_lagrange_1(dir, e2, X(1) * X(1) - X(2) * X(2)).is_canonical_zero());
  const auto g = grushin(1, 1, 1).fields;
  CHECK(euler_lagrange_1(dir, g, X(1) * X(2)).is_canonical_zero());

  // preset: residual is Delta_{X,k} u - G'(u) with the div_X sign convention
  const Expr G = hk::sym::pow(Z(), 4);
  const Functional1 kl = dirichlet_k_laplacian(2, 2, Rational(3), G);
  const Expr u = X(1) * X(1) + X(1) * X(2) + Expr(1);
  const Expr expected = horizontal_k_laplacian(g, u, Rational(3)) - Expr(4) * hk::sym::pow(u, 3);
  CHECK(hk::sym::is_zero(euler_lagrange_1(kl, g, u) - expected));
  CHECK(kl.preset.has_value());
  CHECK_FALSE(kl.depends_on_x());
  CHECK_THROWS_AS(dirichlet_k_laplacian(2, 2, Rational(3), X(1)), hk::InvalidArgument);
  CHECK_THROWS_AS(Functional1(Expr(Var::p(3)), 2, 2), hk::InvalidArgument);
}

TEST_CASE("Euler-Lagrange residuals, second order") {
  const auto g = grushin(1, 1, 1).fields;
  const Expr G = hk::sym::pow(Z(), 4);
  const Functional2 bh = horizontal_biharmonic(2, 2, G);
  ExprGen gen(23, 2);
  for (int trial = 0; trial < 5; ++trial) {
    const Expr u = gen.polynomial(4, 4);
    const Expr expected = sub_laplacian(g, sub_laplacian(g, u)) - Expr(4) * hk::sym::pow(u, 3);
    CHECK(euler_lagrange_2(bh, g, u) == expected);
  }
  CHECK(euler_lagrange_2(bh, g, Expr()).is_canonical_zero());
  const auto e2 = euclidean(2).fields;
  const Functional2 pure = horizontal_biharmonic(2, 2, Expr());
  const Expr biharmonic = X(1) * X(1) * X(1) + X(1) * X(2) * X(2);
  CHECK(euler_lagrange_2(pure, e2, biharmonic).is_canonical_zero());
  CHECK_FALSE(euler_lagrange_2(pure, e2, X(1) * X(1) * X(1) * X(1)).is_canonical_zero());
  CHECK(bh.depends_on_r());
  // r-independent functionals reduce to first order
  std::vector<Expr> p{Expr(Var::p(1)), Expr(Var::p(2))};
  const Functional2 f2(hk::sym::abs_pow(p, Rational(2)) * Expr(Rational(1, 2)) - G, 2, 2);
  const Expr u = X(1) * X(2) + X(2);
  CHECK(euler_lagrange_2(f2, g, u) == euler_lagrange_1(f2.as_order1(), g, u));
}

TEST_CASE("t_action examples") {
  using hk::fields::DilationFamily;
  CHECK(t_action(DilationFamily({1, 2}), X(1) + X(2)) == X(1) + Expr(2) * X(2));
  const Expr u = X(1) * X(1) * X(2);
  CHECK(t_action(DilationFamily({1, 2}), u) == Expr(4) * u);
}

TEST_CASE("property: product rule and commutator consistency") {
  ExprGen gen(24, 3);
  const auto b = bony(3).fields;
  for (int trial = 0; trial < 30; ++trial) {
    const Expr u = gen.polynomial(4, 3);
    const Expr v = gen.polynomial(4, 3);
    for (const auto& f : b) {
      using hk::fields::apply_field;
      CHECK(apply_field(f, u * v) == u * apply_field(f, v) + v * apply_field(f, u));
    }
    const auto h = x_hessian(b, u);
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j)
        CHECK(h[i][j] - h[j][i] == hk::fields::apply_field(hk::fields::lie_bracket(b[j], b[i]), u));
  }
}
