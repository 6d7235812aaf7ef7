#pragma once

// Intrinsic operators of a vector-field family X = {X_1..X_m}:
//
//   grad_X u  = (X_1 u, ..., X_m u)
//   div_X F   = -sum_i X_i F_i              (note the minus sign)
//   H_X u     : entry (i,j) is X_j(X_i u)  (not symmetric in general)
//   Delta_X u = -sum_i X_i^2 u
//   Delta_{X,k} u = div_X(|grad_X u|^(k-2) grad_X u)

#include <optional>
#include <string>
#include <vector>

#include "hk/expr.hpp"
#include "hk/fields.hpp"

namespace hk::calculus {

using fields::DilationFamily;
using fields::VectorField;
using sym::Expr;
using sym::Rational;
using Fields = std::vector<VectorField>;
using Matrix = std::vector<std::vector<Expr>>;

std::vector<Expr> x_gradient(const Fields& X, const Expr& u);
Expr x_divergence(const Fields& X, const std::vector<Expr>& F);
Matrix x_hessian(const Fields& X, const Expr& u);
Expr sub_laplacian(const Fields& X, const Expr& u);
Expr horizontal_k_laplacian(const Fields& X, const Expr& u, const Rational& k);
Expr t_action(const DilationFamily& d, const Expr& u);

// Known closed-form functionals; the audits use these to pick exact oracles.
struct PresetInfo {
  std::string name;  // "dirichlet-k-laplacian" or "horizontal-biharmonic"
  Rational k;        // exponent of |p| (2 for the biharmonic preset)
  Expr G;            // G(z)
};

// F(x, z, p) with x in R^n, p in R^m; derivatives cached at construction.
class Functional1 {
 public:
  Functional1() = default;
  Functional1(Expr F, int n, int m);

  int n() const { return n_; }
  int m() const { return m_; }
  const Expr& F() const { return F_; }
  const Expr& F_z() const { return Fz_; }
  const Expr& F_p(int i) const { return Fp_[static_cast<std::size_t>(i)]; }  // 0-based
  const std::vector<Expr>& F_p() const { return Fp_; }
  const Expr& F_x(int i) const { return Fx_[static_cast<std::size_t>(i)]; }  // 0-based
  bool depends_on_x() const;

  std::optional<PresetInfo> preset;

 private:
  Expr F_;
  int n_ = 0;
  int m_ = 0;
  Expr Fz_;
  std::vector<Expr> Fp_;
  std::vector<Expr> Fx_;
};

// F(x, z, p, r) with a full m x m block of Hessian slots r_ij (no symmetry).
class Functional2 {
 public:
  Functional2() = default;
  Functional2(Expr F, int n, int m);

  int n() const { return n_; }
  int m() const { return m_; }
  const Expr& F() const { return F_; }
  const Expr& F_z() const { return Fz_; }
  const Expr& F_p(int i) const { return Fp_[static_cast<std::size_t>(i)]; }
  const std::vector<Expr>& F_p() const { return Fp_; }
  const Expr& F_x(int i) const { return Fx_[static_cast<std::size_t>(i)]; }
  const Expr& F_r(int i, int j) const { return Fr_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  bool depends_on_x() const;
  bool depends_on_r() const;

  // The same F viewed as a first-order functional (requires !depends_on_r()).
  Functional1 as_order1() const;

  std::optional<PresetInfo> preset;

 private:
  Expr F_;
  int n_ = 0;
  int m_ = 0;
  Expr Fz_;
  std::vector<Expr> Fp_;
  std::vector<Expr> Fx_;
  Matrix Fr_;
};

// F = |p|^k / k - G(z)
Functional1 dirichlet_k_laplacian(int n, int m, const Rational& k, const Expr& G);
// F = (sum_i r_ii)^2 / 2 - G(z)
Functional2 horizontal_biharmonic(int n, int m, const Expr& G);

// u together with grad_X u and (optionally) H_X u.
struct Jet {
  Expr u;
  std::vector<Expr> grad;
  Matrix hess;
};

Jet make_jet(const Fields& X, const Expr& u, bool with_hessian);

// Substitutes (z, p, r) <- (u, grad_X u, H_X u).
Expr compose(const Expr& e, const Jet& jet);

// div_X(F_p(x,u,grad u)) + F_z(x,u,grad u)
Expr euler_lagrange_1(const Functional1& F, const Fields& X, const Expr& u);
// sum_ij X_i X_j(F_rij) + div_X(F_p) + F_z, all composed with u
Expr euler_lagrange_2(const Functional2& F, const Fields& X, const Expr& u);

}  // namespace hk::calculus
