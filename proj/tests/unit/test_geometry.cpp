#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gen.hpp"
#include "hk/error.hpp"
#include "hk/geometry.hpp"

using namespace hk::geometry;
using hk::fields::DilationFamily;
using hk::sym::Rational;
using hk::sym::Var;

namespace {

constexpr double kPi = std::numbers::pi;

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

std::vector<Domain> sample_domains() {
  return {Domain::disk(0, 0, 1),
          Domain::ellipse(Rational(2), Rational(1), 0.25, -0.5),
          Domain::radial2d(hk::sym::parse("(+ 1 (* 1/5 (cos (* 3 theta))))")),
          Domain::box({{-1, 2}, {0, 1}}),
          Domain::box({{0, 1}, {-1, 1}, {0.5, 2}}),
          Domain::ball3(0.1, 0, -0.2, 1.5),
          Domain::radial3d(hk::sym::parse("(+ 1 (* 1/4 (^ (cos theta) 2)))"))};
}

// Random polynomial vector field V of degree <= 3 with div V computed exactly.
struct PolyField {
  std::vector<std::vector<double>> coeff;  // per component, coefficients of monomials
  std::vector<std::array<int, 3>> mono;
  int dim;

  PolyField(hk::testing::ExprGen& g, int n) : dim(n) {
    for (int a = 0; a <= 3; ++a)
      for (int b = 0; a + b <= 3; ++b)
        for (int c = 0; a + b + c <= 3; ++c)
          if (n == 3 || c == 0) mono.push_back({a, b, c});
    coeff.assign(static_cast<std::size_t>(n), std::vector<double>(mono.size()));
    for (auto& row : coeff)
      for (auto& c : row) c = g.real(-1, 1);
  }

  double component(int i, const Vec3& x) const {
    double s = 0;
    for (std::size_t k = 0; k < mono.size(); ++k)
      s += coeff[static_cast<std::size_t>(i)][k] * std::pow(x[0], mono[k][0]) * std::pow(x[1], mono[k][1]) *
           std::pow(x[2], mono[k][2]);
    return s;
  }

  double divergence(const Vec3& x) const {
    double s = 0;
    for (int i = 0; i < dim; ++i)
      for (std::size_t k = 0; k < mono.size(); ++k) {
        const int e = mono[k][static_cast<std::size_t>(i)];
        if (e == 0) continue;
        double t = coeff[static_cast<std::size_t>(i)][k] * e;
        for (int a = 0; a < 3; ++a) t *= std::pow(x[a], a == i ? e - 1 : mono[k][static_cast<std::size_t>(a)]);
        s += t;
      }
    return s;
  }
};

}  // namespace

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (int n : {1, 2, 3, 4, 7, 16, 64}) {
    const auto& [x, w] = gauss_legendre(n);
    REQUIRE(x.size() == static_cast<std::size_t>(n));
    for (int d = 0; d < 2 * n; ++d) {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], d);
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
    for (double wi : w) CHECK(wi > 0);
  }
}

TEST_CASE("outward normal examples") {
  const Domain disk = Domain::disk(0, 0, 1);
  const double t0[] = {0.0};
  const Vec3 n0 = disk.outward_normal(t0);
  CHECK(n0[0] == doctest::Approx(1).epsilon(1e-15));
  CHECK(std::fabs(n0[1]) < 1e-15);

  const Domain box = Domain::box({{0, 1}, {0, 1}});
  const double face[] = {1, 0.5, 0};
  CHECK(box.outward_normal(face) == Vec3{1, 0, 0});
  CHECK(box.boundary_point(face) == Vec3{1, 0.5, 0});

  const Domain e = Domain::ellipse(Rational(2), Rational(1));
  const double t1[] = {kPi / 2};
  const Vec3 n1 = e.outward_normal(t1);
  CHECK(std::fabs(n1[0]) < 1e-14);
  CHECK(n1[1] == doctest::Approx(1).epsilon(1e-14));
}

TEST_CASE("ellipse normals agree with the gradient of the implicit equation") {
  const Domain e = Domain::ellipse(Rational(2), Rational(1));
  hk::testing::ExprGen g(31);
  for (int trial = 0; trial < 200; ++trial) {
    const double t[] = {g.real(0, 2 * kPi)};
    const Vec3 x = e.boundary_point(t);
    CHECK(x[0] * x[0] / 4 + x[1] * x[1] == doctest::Approx(1).epsilon(1e-13));
    const Vec3 nu = e.outward_normal(t);
    CHECK(norm(nu) == doctest::Approx(1).epsilon(1e-14));
    const Vec3 grad{x[0] / 2, 2 * x[1], 0};
    const double gn = norm(grad);
    CHECK(nu[0] == doctest::Approx(grad[0] / gn).epsilon(1e-12));
    CHECK(nu[1] == doctest::Approx(grad[1] / gn).epsilon(1e-12));
  }
}

TEST_CASE("ball normals are radial and of unit length") {
  const Domain b = Domain::ball3(1, 2, 3, 2);
  hk::testing::ExprGen g(32);
  for (int trial = 0; trial < 100; ++trial) {
    const double p[] = {g.real(0.01, kPi - 0.01), g.real(0, 2 * kPi)};
    const Vec3 x = b.boundary_point(p);
    const Vec3 nu = b.outward_normal(p);
    CHECK(norm(nu) == doctest::Approx(1).epsilon(1e-14));
    for (int k = 0; k < 3; ++k) CHECK(nu[k] == doctest::Approx((x[k] - Vec3{1, 2, 3}[k]) / 2).epsilon(1e-12));
  }
}

TEST_CASE("volume integral examples") {
  const Domain disk = Domain::disk(0, 0, 1);
  const auto one = [](const Vec3&, double* out) { out[0] = 1; };
  CHECK(volume_integral(disk, 1, one, 3).values[0] == doctest::Approx(kPi).epsilon(1e-12));

  const Domain sq = Domain::box({{0, 1}, {0, 1}});
  const auto x2 = [](const Vec3& x, double* out) { out[0] = x[0] * x[0]; };
  const auto r = volume_integral(sq, 1, x2, 1);
  CHECK(std::fabs(r.values[0] - 1.0 / 3) < 1e-15);
  CHECK(r.errors[0] < 1e-15);
  CHECK(std::fabs(volume_sum(sq, 1, x2, 0)[0] - 1.0 / 3) < 1e-15);

  const auto bump = [](const Vec3& x, double* out) { out[0] = 1 - x[0] * x[0] - x[1] * x[1]; };
  CHECK(volume_integral(disk, 1, bump, 3).values[0] == doctest::Approx(kPi / 2).epsilon(1e-12));

  const Domain ball = Domain::ball3(0, 0, 0, 1);
  CHECK(volume_integral(ball, 1, one, 3).values[0] == doctest::Approx(4 * kPi / 3).epsilon(1e-12));
  const Domain el = Domain::ellipse(Rational(2), Rational(1), 5, 5);
  CHECK(volume_integral(el, 1, one, 4).values[0] == doctest::Approx(2 * kPi).epsilon(1e-10));
}

TEST_CASE("boundary integral examples") {
  const Domain disk = Domain::disk(0, 0, 1);
  const auto one = [](const Vec3&, const Vec3&, double* out) { out[0] = 1; };
  CHECK(boundary_integral(disk, 1, one, 2).values[0] == doctest::Approx(2 * kPi).epsilon(1e-13));
  const auto xn = [](const Vec3& x, const Vec3& n, double* out) { out[0] = x[0] * n[0] + x[1] * n[1]; };
  CHECK(boundary_integral(disk, 1, xn, 2).values[0] == doctest::Approx(2 * kPi).epsilon(1e-13));
  const auto tn = [](const Vec3& x, const Vec3& n, double* out) { out[0] = x[0] * n[0] + 2 * x[1] * n[1]; };
  CHECK(boundary_integral(disk, 1, tn, 2).values[0] == doctest::Approx(3 * kPi).epsilon(1e-13));
  const Domain ball = Domain::ball3(0, 0, 0, 2);
  CHECK(boundary_integral(ball, 1, one, 3).values[0] == doctest::Approx(16 * kPi).epsilon(1e-12));
  const Domain cube = Domain::box({{0, 1}, {0, 2}, {0, 3}});
  CHECK(boundary_integral(cube, 1, one, 1).values[0] == doctest::Approx(22).epsilon(1e-14));
}

TEST_CASE("multiple outputs are integrated together") {
  const Domain disk = Domain::disk(0, 0, 1);
  const auto f = [](const Vec3& x, double* out) {
    out[0] = 1;
    out[1] = x[0] * x[0];
  };
  const auto r = volume_integral(disk, 2, f, 3);
  REQUIRE(r.values.size() == 2);
  CHECK(r.values[1] == doctest::Approx(kPi / 4).epsilon(1e-12));
}

TEST_CASE("star-shape examples") {
  const Domain disk = Domain::disk(0, 0, 1);
  for (const auto& s : {std::vector<int>{1, 1}, {1, 2}, {1, 3}, {1, 5}}) {
    const auto r = check_star_shaped(disk, DilationFamily(s));
    CHECK(r.pass);
    CHECK(r.samples == 2048);
  }
  const auto off = check_star_shaped(Domain::disk(3, 0, 1), DilationFamily({1, 2}));
  CHECK_FALSE(off.pass);
  CHECK(off.min_value < 0);
  CHECK(off.argmin[0] == doctest::Approx(2).epsilon(1e-9));
  CHECK(off.argmin_normal[0] == doctest::Approx(-1).epsilon(1e-9));
  CHECK(check_star_shaped(Domain::box({{-1, 1}, {-1, 1}}), DilationFamily({1, 1})).pass);
  CHECK_FALSE(check_star_shaped(Domain::box({{1, 2}, {-1, 1}}), DilationFamily({1, 1})).pass);
  CHECK(check_star_shaped(Domain::ball3(0, 0, 0, 1), DilationFamily({1, 1, 2})).pass);
  CHECK(check_star_shaped(Domain::box({{-1, 1}, {-1, 1}, {-1, 1}}), DilationFamily({1, 2, 3})).pass);
  CHECK_THROWS_AS(check_star_shaped(disk, DilationFamily({1, 1, 1})), hk::InvalidArgument);
}

TEST_CASE("domain validation") {
  CHECK_THROWS_AS(Domain::disk(0, 0, -1), hk::InvalidArgument);
  CHECK_THROWS_AS(Domain::box({{1, 0}, {0, 1}}), hk::InvalidArgument);
  CHECK_THROWS_AS(Domain::box({{0, 1}}), hk::InvalidArgument);
  CHECK_THROWS_AS(Domain::radial2d(hk::sym::parse("(cos theta)")), hk::InvalidArgument);
  CHECK_THROWS_AS(Domain::radial2d(hk::sym::parse("(+ 2 theta)")), hk::InvalidArgument);
  CHECK_THROWS_AS(Domain::radial2d(hk::sym::parse("(+ 2 x1)")), hk::InvalidArgument);
  CHECK_THROWS_AS(Domain::radial2d(hk::sym::parse("(+ 2 (cos phi))")), hk::InvalidArgument);
  CHECK_THROWS_AS(Domain::disk(0, 0, 1).volume_nodes(-1), hk::InvalidArgument);
  const auto one = [](const Vec3&, double* out) { out[0] = 1; };
  CHECK_THROWS_AS(volume_integral(Domain::disk(0, 0, 1), 1, one, 0), hk::InvalidArgument);
}

TEST_CASE("parse_domain") {
  CHECK(parse_domain("disk(0,0,1)").kind() == DomainKind::RadialStar2D);
  CHECK(parse_domain("disk(2)").description() == "disk(2)");
  CHECK(parse_domain("box(-1,1,-1,1,0,2)").dim() == 3);
  CHECK(parse_domain("ellipse(2, 1)").kind() == DomainKind::RadialStar2D);
  CHECK(parse_domain("ball3(1)").kind() == DomainKind::ProductRadial3D);
  CHECK(parse_domain("radial2d((+ 1 (* 1/5 (cos theta))), 0, 0)").dim() == 2);
  CHECK(parse_domain("radial3d((+ 2 (cos theta)))").dim() == 3);
  CHECK_THROWS_AS(parse_domain("circle(1)"), hk::InvalidArgument);
  CHECK_THROWS_AS(parse_domain("disk(1,2)"), hk::InvalidArgument);
  CHECK_THROWS_AS(parse_domain("disk"), hk::InvalidArgument);
  CHECK_THROWS_AS(parse_domain("ellipse(1.5x, 1)"), hk::Error);
}

TEST_CASE("singular integrands report the node") {
  const Domain disk = Domain::disk(0, 0, 1);
  const auto bad = [](const Vec3& x, double* out) {
    if (x[0] > 0.9) throw hk::EvaluationSingularity("boom");
    out[0] = 1;
  };
  try {
    volume_sum(disk, 1, bad, 2);
    FAIL("expected EvaluationSingularity");
  } catch (const hk::EvaluationSingularity& e) {
    REQUIRE(e.node().size() == 2);
    CHECK(e.node()[0] > 0.9);
  }
  const auto nan = [](const Vec3&, double* out) { out[0] = std::nan(""); };
  CHECK_THROWS_AS(volume_sum(disk, 1, nan, 1), hk::EvaluationSingularity);
}

TEST_CASE("property: divergence theorem closes on every domain kind") {
  hk::testing::ExprGen g(33);
  for (const Domain& d : sample_domains()) {
    for (int trial = 0; trial < 5; ++trial) {
      const PolyField V(g, d.dim());
      const auto vol = volume_integral(d, 1, [&](const Vec3& x, double* out) { out[0] = V.divergence(x); }, 3);
      const auto bd = boundary_integral(
          d, 1,
          [&](const Vec3& x, const Vec3& nu, double* out) {
            double s = 0;
            for (int i = 0; i < d.dim(); ++i) s += V.component(i, x) * nu[i];
            out[0] = s;
          },
          3);
      const double gap = std::fabs(vol.values[0] - bd.values[0]);
      CHECK_MESSAGE(gap <= 10 * (vol.errors[0] + bd.errors[0]) + 1e-12 * (1 + std::fabs(vol.values[0])),
                    d.description());
    }
  }
}

TEST_CASE("property: flux of T equals q times the volume") {
  const std::vector<std::vector<int>> sig2{{1, 1}, {1, 2}, {1, 3}};
  const std::vector<std::vector<int>> sig3{{1, 1, 1}, {1, 1, 2}, {1, 2, 3}};
  for (const Domain& d : sample_domains()) {
    for (const auto& s : d.dim() == 2 ? sig2 : sig3) {
      int q = 0;
      for (int v : s) q += v;
      const auto vol = volume_integral(d, 1, [](const Vec3&, double* out) { out[0] = 1; }, 4);
      const auto flux = boundary_integral(
          d, 1,
          [&](const Vec3& x, const Vec3& nu, double* out) {
            double t = 0;
            for (std::size_t i = 0; i < s.size(); ++i) t += s[i] * x[i] * nu[i];
            out[0] = t;
          },
          4);
      CHECK_MESSAGE(flux.values[0] == doctest::Approx(q * vol.values[0]).epsilon(1e-10), d.description());
    }
  }
}

TEST_CASE("property: refinement shrinks the error estimate") {
  const auto f = [](const Vec3& x, double* out) { out[0] = std::exp(x[0]) * std::cos(x[1] + 0.3 * x[2]); };
  for (const Domain& d : sample_domains()) {
    double prev = 1e300;
    for (int level = 1; level <= 4; ++level) {
      const double err = volume_integral(d, 1, f, level).errors[0];
      if (prev > 1e-13) CHECK_MESSAGE(err <= 0.5 * prev + 1e-14, d.description() << " level " << level);
      prev = err;
    }
  }
}

TEST_CASE("property: results do not depend on the thread count") {
  const Domain d = Domain::ellipse(Rational(3, 2), Rational(1), 0.1, 0.2);
  const auto f = [](const Vec3& x, double* out) { out[0] = std::sin(3 * x[0]) + x[1] * x[1]; };
  setenv("HK_THREADS", "1", 1);
  const double a = volume_sum(d, 1, f, 5)[0];
  setenv("HK_THREADS", "4", 1);
  const double b = volume_sum(d, 1, f, 5)[0];
  unsetenv("HK_THREADS");
  CHECK(a == b);
}
