#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gen.hpp"
#include "hk/error.hpp"
#include "hk/identities.hpp"

using namespace hk::identities;
using hk::fields::bony;
using hk::fields::euclidean;
using hk::fields::grushin;
using hk::geometry::Domain;
using hk::sym::parse;
using hk::sym::Var;

namespace {

Expr X(int i) { return Expr(Var::x(i)); }
Expr Z() { return Expr(Var::z()); }
Expr P(int i) { return Expr(Var::p(i)); }

Expr half_grad2(int m) {
  Expr s;
  for (int i = 1; i <= m; ++i) s += P(i) * P(i);
  return Expr(Rational(1, 2)) * s;
}

const Domain& unit_disk() {
  static const Domain d = Domain::disk(0, 0, 1);
  return d;
}

Expr bump2() { return hk::sym::pow(Expr(1) - X(1) * X(1) - X(2) * X(2), 2); }

}  // namespace

TEST_CASE("poho1: zero function gives zero terms") {
  const auto e = euclidean(2);
  const Functional1 F(half_grad2(2) - hk::sym::pow(Z(), 4), 2, 2);
  const auto r = verify_poho_order1(e.fields, e.dilation, F, Expr(), unit_disk());
  for (const auto& t : r.terms) CHECK(t.value == 0);
  CHECK(r.abs_residual == 0);
  CHECK(r.pass);
}

TEST_CASE("poho1 examples") {
  const auto e = euclidean(2);
  const Functional1 F(half_grad2(2) - hk::sym::pow(Z(), 4), 2, 2);
  const Expr u = Expr(1) - X(1) * X(1) - X(2) * X(2);
  const auto r = verify_poho_order1(e.fields, e.dilation, F, u, unit_disk());
  CHECK(r.rel_residual <= 1e-8);
  CHECK(r.terms.size() == 6);
  CHECK(r.find("EL-weighted bulk") != nullptr);
  CHECK(std::fabs(r.find("EL-weighted bulk")->value) > 0.1);  // u is not a solution

  const auto g = grushin(1, 1, 1);
  const Functional1 D(half_grad2(2), 2, 2);
  const auto rg = verify_poho_order1(g.fields, g.dilation, D, X(1) * X(1) + X(2), unit_disk());
  CHECK(rg.rel_residual <= 1e-8);
  CHECK(rg.pass);
}

TEST_CASE("poho1: residual recomputed from the terms matches bit for bit") {
  const auto g = grushin(1, 1, 1);
  const Functional1 F(half_grad2(2) - hk::sym::pow(Z(), 3), 2, 2);
  auto r = verify_poho_order1(g.fields, g.dilation, F, X(1) * X(2) + X(1) * X(1), Domain::ellipse(2, 1, 0.5, 0));
  const double stored = r.rel_residual;
  double lhs = 0;
  double rhs = 0;
  for (const auto& t : r.terms) (t.side == Side::Lhs ? lhs : rhs) += t.value;
  CHECK(lhs == r.lhs);
  CHECK(rhs == r.rhs);
  finalize(r);
  CHECK(r.rel_residual == stored);
}

TEST_CASE("poho1 holds for random data on all domain kinds") {
  const std::vector<std::pair<hk::fields::Family, Domain>> cases{
      {euclidean(2), Domain::box({{-1, 1}, {0, 2}})},
      {grushin(1, 1, 2), Domain::radial2d(parse("(+ 1 (* 1/5 (sin (* 2 theta))))"))},
      {bony(3), Domain::ball3(0, 0, 0, 1)},
      {grushin(2, 1, 1), Domain::box({{-1, 1}, {-1, 1}, {-1, 1}})}};
  for (const auto& [fam, dom] : cases) {
    const int n = fam.dilation.dim();
    const int m = static_cast<int>(fam.fields.size());
    hk::testing::ExprGen gen(41 + n, n);
    for (int trial = 0; trial < 3; ++trial) {
      Expr u = gen.polynomial(4, 3);
      // F with x-dependence to exercise the T(x -> F) term
      Expr Fe = half_grad2(m) + Expr(gen.rational()) * Z() * Z() * X(1) + Expr(gen.rational()) * P(1) * Z();
      const Functional1 F(Fe, n, m);
      const auto r = verify_poho_order1(fam.fields, fam.dilation, F, u, dom, {3, 1e-6});
      CHECK_MESSAGE(r.rel_residual <= 1e-9, fam.name << " on " << dom.description());
    }
  }
}

TEST_CASE("poho-pde: classical Dirichlet example") {
  const auto e = euclidean(2);
  const Functional1 F(half_grad2(2) + Expr(2) * Z(), 2, 2);
  const Expr u = Expr(Rational(1, 2)) * (X(1) * X(1) + X(2) * X(2) - Expr(1));
  CHECK(hk::calculus::euler_lagrange_1(F, e.fields, u).is_canonical_zero());
  const auto rep =
      verify_poho_pde(e.fields, e.dilation, F, u, unit_disk(), {Rational(0), Rational(1), Rational(-1, 2)}, true);
  CHECK(rep.el_symbolic_zero);
  CHECK(rep.pde.rel_residual <= 1e-8);
  REQUIRE(rep.claimed);
  CHECK(rep.claimed->rel_residual <= 1e-8);
  REQUIRE(rep.bvp.size() == 3);
  for (const auto& b : rep.bvp) CHECK(b.rel_residual <= 1e-8);
  REQUIRE(rep.boundary_reduction);
  CHECK(rep.boundary_reduction->max_defect <= 1e-10);
  CHECK(rep.pass());

  // a = 0 degeneration: same bulk side as the general identity
  CHECK(std::fabs(rep.bvp[0].lhs - rep.pde.lhs) <= 1e-12);
  CHECK(std::fabs(rep.bvp[0].rhs - rep.pde.rhs) <= 1e-12);

  // classical grouping: ((n-2)/2) int |grad u|^2 - n int G + 1/2 oint (du/dnu)^2 <x,nu> = 0 with G = -2z
  const auto cl = classical_pohozaev(2, Expr(-2) * Z(), u, unit_disk());
  CHECK(std::fabs(cl.sum) <= 1e-8);
  CHECK(std::fabs((rep.bvp[0].lhs - rep.bvp[0].rhs) - cl.sum) <= 1e-8);
}

TEST_CASE("poho-pde preconditions") {
  const auto e = euclidean(2);
  const Functional1 F(half_grad2(2) + Expr(2) * Z(), 2, 2);
  CHECK_THROWS_AS(verify_poho_pde(e.fields, e.dilation, F, X(1) * X(1) * X(1), unit_disk(), {}, false), hk::NotASolution);
  // a solution that does not vanish on the boundary
  const Expr u = Expr(Rational(1, 2)) * (X(1) * X(1) + X(2) * X(2));
  CHECK_NOTHROW(verify_poho_pde(e.fields, e.dilation, F, u, unit_disk(), {}, false));
  try {
    verify_poho_pde(e.fields, e.dilation, F, u, unit_disk(), {Rational(0)}, true);
    FAIL("expected NotDirichlet");
  } catch (const hk::NotDirichlet& ex) {
    CHECK(ex.node().size() == 2);
    CHECK(ex.value() == doctest::Approx(0.5));
  }
}

TEST_CASE("solution shortcut: poho1 minus the EL term equals the poho-pde side") {
  const auto g = grushin(1, 1, 1);
  const Functional1 D(half_grad2(2), 2, 2);
  // X1 u = 0 and X2 u = y: EL = -(X1^2 + X2^2)u = 0 for u = t
  const Expr u = X(2);
  const auto r1 = verify_poho_order1(g.fields, g.dilation, D, u, unit_disk());
  const auto rp = verify_poho_pde(g.fields, g.dilation, D, u, unit_disk(), {}, false);
  CHECK(std::fabs(r1.find("EL-weighted bulk")->value) <= 1e-12);
  CHECK(std::fabs((r1.lhs - r1.find("EL-weighted bulk")->value) - rp.pde.lhs) <= 1e-12);
}

TEST_CASE("property: Dirichlet boundary reduction holds nodewise") {
  hk::testing::ExprGen gen(42, 2);
  const auto g = grushin(1, 1, 2);
  const Expr vanish = Expr(1) - X(1) * X(1) - X(2) * X(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Expr u = vanish * gen.polynomial(3, 2);
    const Functional1 F(half_grad2(2) + Expr(gen.rational()) * P(2) * Z() - hk::sym::pow(Z(), 4), 2, 2);
    const auto r = check_boundary_reduction_order1(g.fields, g.dilation, F, u, unit_disk());
    CHECK(r.max_defect <= 1e-10);
    CHECK(r.pass);
  }
  const Functional1 F(half_grad2(2), 2, 2);
  CHECK_THROWS_AS(check_boundary_reduction_order1(g.fields, g.dilation, F, X(1) + Expr(3), unit_disk()),
                  hk::NotDirichlet);
}

TEST_CASE("poho2: zero function and biharmonic preset") {
  const auto e = euclidean(2);
  const auto bh = hk::calculus::horizontal_biharmonic(2, 2, Expr());
  const auto z = verify_poho_order2(e.fields, e.dilation, bh, Expr(), unit_disk());
  CHECK(z.general.abs_residual == 0);

  const auto r = verify_poho_order2(e.fields, e.dilation, bh, bump2(), unit_disk());
  CHECK(r.general.rel_residual <= 1e-7);
  REQUIRE(r.biharmonic);
  CHECK(r.biharmonic->rel_residual <= 1e-7);
  // q = 2: coefficient q/2 - 2 = -1
  const auto* t = r.biharmonic->find("(q/2−2)(Δ_Xu)² bulk");
  REQUIRE(t != nullptr);
  double coeff = 0;
  for (const auto& [k, v] : r.biharmonic->parameters)
    if (k == "coefficient q/2-2") coeff = v;
  CHECK(coeff == -1);

  const auto g = grushin(1, 1, 1);
  const auto bg = hk::calculus::horizontal_biharmonic(2, 2, hk::sym::pow(Z(), 4));
  const auto rg = verify_poho_order2(g.fields, g.dilation, bg, bump2(), unit_disk());
  CHECK(rg.general.rel_residual <= 1e-6);
  REQUIRE(rg.biharmonic);
  CHECK(rg.biharmonic->rel_residual <= 1e-6);
  // the specialized form agrees with the general grouping
  CHECK(rg.biharmonic->lhs - rg.biharmonic->rhs == doctest::Approx(rg.general.lhs - rg.general.rhs).epsilon(1e-6));
}

TEST_CASE("poho2 degenerates to poho1 for r-independent functionals") {
  hk::testing::ExprGen gen(43, 2);
  const auto g = grushin(1, 1, 1);
  for (int trial = 0; trial < 3; ++trial) {
    const Expr u = gen.polynomial(4, 3);
    const Expr Fe = half_grad2(2) - hk::sym::pow(Z(), 3) + Expr(gen.rational()) * X(2) * Z();
    const Functional2 F2(Fe, 2, 2);
    const auto r2 = verify_poho_order2(g.fields, g.dilation, F2, u, unit_disk());
    const auto r1 = verify_poho_order1(g.fields, g.dilation, F2.as_order1(), u, unit_disk());
    for (const auto& t : r1.terms) {
      const auto* t2 = r2.general.find(t.label);
      REQUIRE(t2 != nullptr);
      CHECK(std::fabs(t2->value - t.value) <= 1e-12);
    }
    CHECK(std::fabs(r2.general.find("−2Σ𝓕_{r_ij}X_j(X_iu) bulk")->value) <= 1e-12);
    CHECK(std::fabs(r2.general.find("bracket boundary terms")->value) <= 1e-12);
  }
}

TEST_CASE("property: poho2 holds for random second-order functionals") {
  hk::testing::ExprGen gen(44, 2);
  const auto g = grushin(1, 1, 1);
  for (int trial = 0; trial < 3; ++trial) {
    const Expr u = gen.polynomial(4, 3);
    const Expr r11(Var::r(1, 1));
    const Expr r12(Var::r(1, 2));
    const Expr r21(Var::r(2, 1));
    const Expr Fe = Expr(gen.rational()) * r11 * r11 + Expr(gen.rational()) * r12 * r21 * X(1) +
                    Expr(gen.rational()) * r21 * P(1) - Z() * Z();
    const Functional2 F(Fe, 2, 2);
    const auto r = verify_poho_order2(g.fields, g.dilation, F, u, Domain::box({{-1, 1}, {-0.5, 1}}));
    CHECK(r.general.rel_residual <= 1e-9);
  }
}

TEST_CASE("order-2 boundary identity") {
  const auto e = euclidean(2);
  const auto g = grushin(1, 1, 1);
  const auto bh = hk::calculus::horizontal_biharmonic(2, 2, Expr());
  for (const auto* fam : {&e, &g}) {
    const auto r = check_boundary_identity_order2(fam->fields, fam->dilation, bump2(), unit_disk(), &bh);
    CHECK(r.identity.max_defect <= 1e-10);
    REQUIRE(r.induced_f);
    CHECK(r.induced_f->max_defect <= 1e-10);
  }
  const auto z = check_boundary_identity_order2(g.fields, g.dilation, Expr(), unit_disk());
  CHECK(z.identity.max_defect == 0);
  CHECK_THROWS_AS(check_boundary_identity_order2(g.fields, g.dilation, Expr(1) - X(1) * X(1) - X(2) * X(2),
                                                 unit_disk()),
                  hk::PreconditionViolated);
  const auto b = bony(3);
  const Expr u3 = hk::sym::pow(Expr(1) - X(1) * X(1) - X(2) * X(2) - X(3) * X(3), 2) * (X(1) + X(3));
  const auto r3 = check_boundary_identity_order2(b.fields, b.dilation, u3, Domain::ball3(0, 0, 0, 1));
  CHECK(r3.identity.max_defect <= 1e-10);
}

TEST_CASE("growth audit closed form") {
  // G = z^s/s: passes iff s rho > 1 (s even)
  for (int s : {2, 4, 6, 8, 10}) {
    const Expr G = Expr(Rational(1, s)) * hk::sym::pow(Z(), s);
    const Rational rho(1, 6);
    const auto a = growth_audit(G, rho, "growth-hor", "ϱ_q");
    CHECK(a.exact);
    CHECK(a.pass == (s > 6));
  }
  CHECK_FALSE(growth_audit(hk::sym::pow(Z(), 7), Rational(1, 2), "growth", "ϱ").pass);
  CHECK_FALSE(growth_audit(Expr(), Rational(1, 2), "growth", "ϱ").pass);  // 0 < 0 fails
  CHECK_FALSE(growth_audit(Z() * Z() + Z(), Rational(1), "growth", "ϱ").pass);  // G'(0) != 0
  // non-monomial: sampled
  const auto mixed = growth_audit(hk::sym::pow(Z(), 8) + hk::sym::pow(Z(), 10), Rational(1, 2), "growth", "ϱ");
  CHECK_FALSE(mixed.exact);
  CHECK(mixed.pass);
  CHECK(growth_rho(Rational(2), 3) == Rational(1, 6));
}

TEST_CASE("order-1 audits for the k-Laplacian preset") {
  // Euclidean n = 2, k = 2, G = z^4/4: rho = 0, growth fails
  const auto e = euclidean(2);
  const Expr G = Expr(Rational(1, 4)) * hk::sym::pow(Z(), 4);
  const auto F = hk::calculus::dirichlet_k_laplacian(2, 2, Rational(2), G);
  const auto audits = audit_nonexistence_order1(F, e.dilation, unit_disk());
  auto find = [&](const std::vector<HypothesisAudit>& v, const std::string& id) {
    for (const auto& a : v)
      if (a.id == id) return a;
    FAIL("missing audit " << id);
    return HypothesisAudit{};
  };
  CHECK(find(audits, "i").pass);
  CHECK(find(audits, "i").max_value <= 0);
  CHECK_FALSE(find(audits, "growth").pass);
  CHECK_FALSE(find(audits, "ii").pass);

  // Grushin q = 3: rho_q = 1/6; z^4/4 fails, z^10/10 passes
  const auto g = grushin(1, 1, 1);
  const auto a4 = audit_nonexistence_order1(F, g.dilation, unit_disk());
  CHECK_FALSE(find(a4, "growth-hor").pass);
  const auto F10 = hk::calculus::dirichlet_k_laplacian(2, 2, Rational(2),
                                                       Expr(Rational(1, 10)) * hk::sym::pow(Z(), 10));
  const auto a10 = audit_nonexistence_order1(F10, g.dilation, unit_disk());
  CHECK(find(a10, "growth-hor").pass);
  const auto ii = find(a10, "ii");
  CHECK(ii.pass);
  CHECK(ii.exact);
  REQUIRE(ii.a0);
  CHECK(*ii.a0 == doctest::Approx(0.5));  // q/k - 1
  CHECK(find(a10, "iii").pass);
  CHECK(ii.min_value >= -1e-9);
}

TEST_CASE("order-1 audits for a general functional are sampled") {
  const auto e = euclidean(2);
  // F = |p|^2/2 + z^2: (i) passes, (ii) with a0 = 0: 2F - <F_p,p> = 2z^2 >= 0, zero iff z = 0
  const Functional1 F(half_grad2(2) + Z() * Z(), 2, 2);
  AuditSampler s;
  s.a0 = {Rational(0)};
  const auto audits = audit_nonexistence_order1(F, e.dilation, unit_disk(), s);
  REQUIRE(audits.size() == 3);
  CHECK(audits[0].pass);
  CHECK(audits[1].pass);
  CHECK_FALSE(audits[1].exact);
  CHECK(audits[2].pass);
  // F = z p1: (ii) fails with a witness at which the value is negative
  const Functional1 bad(Z() * P(1), 2, 2);
  const auto b = audit_nonexistence_order1(bad, e.dilation, unit_disk(), s);
  CHECK_FALSE(b[1].pass);
  REQUIRE(!b[1].witnesses.empty());
  CHECK(b[1].witnesses[0].value < 0);
  CHECK(b[1].min_value == b[1].witnesses[0].value);
}

TEST_CASE("order-2 audits") {
  const auto e = euclidean(2);
  const auto bh = hk::calculus::horizontal_biharmonic(2, 2, Expr());
  const auto a = audit_nonexistence_order2(bh, e.dilation, unit_disk());
  REQUIRE(a.size() == 3);
  CHECK(a[0].pass);  // -(sum r_ii)^2/2 <= 0
  CHECK(a[0].max_value == 0);
  // F = (tr r)^2/2 - z^2 with q = 2: (ii) = q F - 2 sum r F_r = -(tr r)^2 - 2 z^2 <= 0, fails at (1,0,0)
  const auto bz = hk::calculus::horizontal_biharmonic(2, 2, Z() * Z());
  const auto b = audit_nonexistence_order2(bz, e.dilation, unit_disk());
  CHECK_FALSE(b[1].pass);
  CHECK(b[1].min_value < 0);
  // hand evaluation at (z, p, r) = (1, 0, 0): q F = 2 (0 - 1) = -2, the other terms vanish
  CHECK(b[1].min_value <= -2);
}

TEST_CASE("property: residual decreases under refinement") {
  const auto g = grushin(1, 1, 1);
  const Domain star = Domain::radial2d(parse("(+ 1 (* 1/5 (sin (* 2 theta))))"));
  const Expr u = hk::sym::sin(X(1) + Expr(2) * X(2)) * hk::sym::exp(X(1));
  const Functional1 F(half_grad2(2) - hk::sym::pow(Z(), 4) + X(1) * Z() * P(2), 2, 2);
  const auto bh = hk::calculus::horizontal_biharmonic(2, 2, Z() * Z());
  double prev1 = 1e300;
  double prev2 = 1e300;
  for (int level = 1; level <= 4; ++level) {
    const double r1 = verify_poho_order1(g.fields, g.dilation, F, u, star, {level, 1e-6}).rel_residual;
    const double r2 = verify_poho_order2(g.fields, g.dilation, bh, u, star, {level, 1e-6}).general.rel_residual;
    CHECK(r1 <= prev1 + 1e-14);
    CHECK(r2 <= prev2 + 1e-14);
    if (level >= 3) {
      CHECK(r1 <= 1e-6);
      CHECK(r2 <= 1e-6);
    }
    prev1 = r1;
    prev2 = r2;
  }
}
