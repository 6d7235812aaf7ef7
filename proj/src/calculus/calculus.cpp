#include "hk/calculus.hpp"

#include "hk/error.hpp"

namespace hk::calculus {

using sym::Var;
using sym::VarKind;

namespace {

void require_family(const Fields& X) {
  if (X.empty()) throw InvalidArgument("empty vector-field family");
  for (const auto& f : X)
    if (f.dim() != X.front().dim()) throw InvalidArgument("vector fields of different dimensions");
}

// Checks that e only uses x_1..x_n, z, p_1..p_m and (if allowed) r_ij.
void check_variables(const Expr& e, int n, int m, bool allow_r) {
  for (Var v : e.free_variables()) {
    bool ok = false;
    switch (v.kind()) {
      case VarKind::Space: ok = v.index() <= n; break;
      case VarKind::Z: ok = true; break;
      case VarKind::P: ok = v.index() <= m; break;
      case VarKind::R: ok = allow_r && v.index() <= m && v.index2() <= m; break;
      case VarKind::Aux: ok = false; break;
    }
    if (!ok)
      throw InvalidArgument("functional uses variable " + v.name() + ", which is not one of x1..x" +
                            std::to_string(n) + ", z, p1..p" + std::to_string(m) + (allow_r ? ", r_ij" : ""));
  }
}

bool any_x(const std::vector<Expr>& fx) {
  for (const auto& e : fx)
    if (!e.is_canonical_zero()) return true;
  return false;
}

}  // namespace

std::vector<Expr> x_gradient(const Fields& X, const Expr& u) {
  require_family(X);
  std::vector<Expr> g;
  for (const auto& f : X) g.push_back(fields::apply_field(f, u));
  return g;
}

Expr x_divergence(const Fields& X, const std::vector<Expr>& F) {
  require_family(X);
  if (F.size() != X.size()) throw InvalidArgument("X-divergence: vector has the wrong length");
  Expr out;
  for (std::size_t i = 0; i < X.size(); ++i) out -= fields::apply_field(X[i], F[i]);
  return out;
}

Matrix x_hessian(const Fields& X, const Expr& u) {
  const auto g = x_gradient(X, u);
  Matrix h(X.size());
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = 0; j < X.size(); ++j) h[i].push_back(fields::apply_field(X[j], g[i]));
  return h;
}

Expr sub_laplacian(const Fields& X, const Expr& u) { return x_divergence(X, x_gradient(X, u)); }

Expr horizontal_k_laplacian(const Fields& X, const Expr& u, const Rational& k) {
  if (k <= 1) throw InvalidArgument("horizontal k-Laplacian needs k > 1");
  if (k == 2) return sub_laplacian(X, u);
  const auto g = x_gradient(X, u);
  Expr s;
  for (const auto& gi : g) s += gi * gi;
  const Expr w = sym::pow(s, sym::Frac::from_rational((k - 2) / 2));
  std::vector<Expr> F;
  for (const auto& gi : g) F.push_back(w * gi);
  return x_divergence(X, F);
}

Expr t_action(const DilationFamily& d, const Expr& u) {
  return fields::apply_field(fields::infinitesimal_generator(d), u);
}

Functional1::Functional1(Expr F, int n, int m) : F_(std::move(F)), n_(n), m_(m) {
  if (n < 1 || m < 1) throw InvalidArgument("functional needs n, m >= 1");
  check_variables(F_, n, m, false);
  Fz_ = sym::differentiate(F_, Var::z());
  for (int i = 1; i <= m; ++i) Fp_.push_back(sym::differentiate(F_, Var::p(i)));
  for (int i = 1; i <= n; ++i) Fx_.push_back(sym::differentiate(F_, Var::x(i)));
}

bool Functional1::depends_on_x() const { return any_x(Fx_); }

Functional2::Functional2(Expr F, int n, int m) : F_(std::move(F)), n_(n), m_(m) {
  if (n < 1 || m < 1) throw InvalidArgument("functional needs n, m >= 1");
  check_variables(F_, n, m, true);
  Fz_ = sym::differentiate(F_, Var::z());
  for (int i = 1; i <= m; ++i) Fp_.push_back(sym::differentiate(F_, Var::p(i)));
  for (int i = 1; i <= n; ++i) Fx_.push_back(sym::differentiate(F_, Var::x(i)));
  Fr_.resize(static_cast<std::size_t>(m));
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j) Fr_[static_cast<std::size_t>(i - 1)].push_back(sym::differentiate(F_, Var::r(i, j)));
}

bool Functional2::depends_on_x() const { return any_x(Fx_); }

bool Functional2::depends_on_r() const {
  for (const auto& row : Fr_)
    if (any_x(row)) return true;
  return false;
}

Functional1 Functional2::as_order1() const {
  if (depends_on_r()) throw InvalidArgument("functional depends on the X-Hessian slots r_ij");
  Functional1 f(F_, n_, m_);
  f.preset = preset;
  return f;
}

namespace {

void check_G(const Expr& G) {
  for (Var v : G.free_variables())
    if (v.kind() != VarKind::Z) throw InvalidArgument("G must be a function of z only, got " + to_string(G));
}

}  // namespace

Functional1 dirichlet_k_laplacian(int n, int m, const Rational& k, const Expr& G) {
  if (k <= 1) throw InvalidArgument("k-Laplacian preset needs k > 1");
  check_G(G);
  std::vector<Expr> p;
  for (int i = 1; i <= m; ++i) p.emplace_back(Var::p(i));
  Functional1 f(sym::abs_pow(p, k) * Expr(Rational(1) / k) - G, n, m);
  f.preset = PresetInfo{"dirichlet-k-laplacian", k, G};
  return f;
}

Functional2 horizontal_biharmonic(int n, int m, const Expr& G) {
  check_G(G);
  Expr trace;
  for (int i = 1; i <= m; ++i) trace += Expr(Var::r(i, i));
  Functional2 f(Expr(Rational(1, 2)) * trace * trace - G, n, m);
  f.preset = PresetInfo{"horizontal-biharmonic", Rational(2), G};
  return f;
}

Jet make_jet(const Fields& X, const Expr& u, bool with_hessian) {
  Jet j;
  j.u = u;
  j.grad = x_gradient(X, u);
  if (with_hessian) {
    j.hess.resize(X.size());
    for (std::size_t a = 0; a < X.size(); ++a)
      for (std::size_t b = 0; b < X.size(); ++b) j.hess[a].push_back(fields::apply_field(X[b], j.grad[a]));
  }
  return j;
}

Expr compose(const Expr& e, const Jet& jet) {
  std::map<Var, Expr> values;
  values.emplace(Var::z(), jet.u);
  for (std::size_t i = 0; i < jet.grad.size(); ++i) values.emplace(Var::p(static_cast<int>(i) + 1), jet.grad[i]);
  for (std::size_t i = 0; i < jet.hess.size(); ++i)
    for (std::size_t j = 0; j < jet.hess[i].size(); ++j)
      values.emplace(Var::r(static_cast<int>(i) + 1, static_cast<int>(j) + 1), jet.hess[i][j]);
  for (Var v : e.free_variables())
    if (v.kind() == VarKind::R && jet.hess.empty())
      throw InvalidArgument("composition needs the X-Hessian of u");
  return sym::substitute(e, values);
}

Expr euler_lagrange_1(const Functional1& F, const Fields& X, const Expr& u) {
  require_family(X);
  if (static_cast<int>(X.size()) != F.m()) throw InvalidArgument("functional arity m differs from the family size");
  const Jet jet = make_jet(X, u, false);
  std::vector<Expr> fp;
  for (const auto& e : F.F_p()) fp.push_back(compose(e, jet));
  return x_divergence(X, fp) + compose(F.F_z(), jet);
}

Expr euler_lagrange_2(const Functional2& F, const Fields& X, const Expr& u) {
  require_family(X);
  if (static_cast<int>(X.size()) != F.m()) throw InvalidArgument("functional arity m differs from the family size");
  const Jet jet = make_jet(X, u, true);
  Expr second;
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = 0; j < X.size(); ++j) {
      const Expr& fr = F.F_r(static_cast<int>(i), static_cast<int>(j));
      if (fr.is_canonical_zero()) continue;
      second += fields::apply_field(X[i], fields::apply_field(X[j], compose(fr, jet)));
    }
  std::vector<Expr> fp;
  for (const auto& e : F.F_p()) fp.push_back(compose(e, jet));
  return second + x_divergence(X, fp) + compose(F.F_z(), jet);
}

}  // namespace hk::calculus
