#pragma once

// Polynomial vector fields, anisotropic dilations, Lie brackets and the
// Hörmander-type structural checks (degree-1 homogeneity, bracket rank).

#include <optional>
#include <string>
#include <vector>

#include "hk/expr.hpp"

namespace hk::fields {

using sym::Expr;
using sym::Rational;

// Y = sum_i a_i(x) d/dx_i with polynomial coefficients in x_1..x_n.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(std::vector<Expr> coeffs);

  static VectorField coordinate(int n, int i);  // d/dx_i, 1-based

  int dim() const { return static_cast<int>(a_.size()); }
  const std::vector<Expr>& coeffs() const { return a_; }
  const Expr& operator[](int i) const { return a_[static_cast<std::size_t>(i)]; }  // 0-based
  bool is_zero() const;

  // "[a1, a2, ...]" in prefix expression syntax
  std::string str() const;

  friend bool operator==(const VectorField& a, const VectorField& b) { return a.a_ == b.a_; }

 private:
  std::vector<Expr> a_;
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(const Rational& c, const VectorField& a);

// Yu = sum_i a_i du/dx_i
Expr apply_field(const VectorField& Y, const Expr& u);

// [Y,Z] = Y o Z - Z o Y, coefficientwise [Y,Z]_k = Y(Z_k) - Z(Y_k)
VectorField lie_bracket(const VectorField& Y, const VectorField& Z);

// Euclidean divergence sum_i d a_i / dx_i.
Expr euclidean_divergence(const VectorField& Y);

// Is Y = c Z for some rational c? (c returned through `factor`)
bool is_rational_multiple(const VectorField& Y, const VectorField& Z, Rational* factor = nullptr);

// delta_lambda(x) = (lambda^s1 x1, ..., lambda^sn xn), 1 = s1 <= ... <= sn.
class DilationFamily {
 public:
  DilationFamily() = default;
  explicit DilationFamily(std::vector<int> sigma);

  int dim() const { return static_cast<int>(sigma_.size()); }
  const std::vector<int>& sigma() const { return sigma_; }

 private:
  std::vector<int> sigma_;
};

int homogeneous_dimension(const DilationFamily& d);  // q = sum sigma_i

// T = sum sigma_i x_i d/dx_i
VectorField infinitesimal_generator(const DilationFamily& d);

struct Homogeneity {
  bool homogeneous = false;
  bool zero_field = false;  // the zero field is homogeneous of every degree
  Rational alpha;
};

// alpha with [Y,T] = alpha Y, cross-checked against the coefficient test.
Homogeneity homogeneity_degree(const VectorField& Y, const DilationFamily& d);

// Coefficient test alone: every a_i is delta-homogeneous of degree sigma_i - alpha.
Homogeneity homogeneity_by_coefficients(const VectorField& Y, const DilationFamily& d);

// a_k does not depend on x_k, ..., x_n for every k.
bool has_pyramid_shape(const VectorField& Y);

struct H1Report {
  bool pass = false;
  std::vector<Homogeneity> degrees;
  std::vector<int> offending;  // 0-based indices of fields failing the degree test
  bool independent = false;
  int rank = 0;  // rank of stacked coefficient vectors at the sample points
  std::vector<std::string> notes;
};

// Degree-1 homogeneity of every member plus linear independence over R,
// probed by exact rank at 8 seeded random rational points.
H1Report check_H1(const std::vector<VectorField>& family, const DilationFamily& d);

struct LieElement {
  VectorField field;
  std::string word;  // e.g. "[X1,[X1,X2]]"
  int length = 1;
  Homogeneity degree;
};

struct LieBasisReport {
  std::vector<LieElement> elements;
  int max_step = 0;
  bool default_cutoff = true;  // max_step = sigma_n
  std::vector<std::vector<Rational>> matrix_at_origin;  // rows = elements
  int rank_at_origin = 0;
};

constexpr int kMaxBracketStep = 12;

// Right-nested brackets [X_i, W] up to length max_step (default sigma_n),
// with zero fields and rational multiples of earlier fields dropped.
LieBasisReport generate_lie_basis(const std::vector<VectorField>& family, const DilationFamily& d,
                                  std::optional<int> max_step = std::nullopt);

// A point where the rank condition is probed. Exact coordinates are used
// when every coordinate was given as a rational literal.
struct SamplePoint {
  std::vector<double> values;
  std::optional<std::vector<Rational>> exact;

  static SamplePoint origin(int n);
  static SamplePoint rational(std::vector<Rational> coords);
  static SamplePoint real(std::vector<double> coords);
};

struct RankAtPoint {
  std::vector<double> point;
  bool exact = true;
  int rank = 0;
  bool pass = false;
};

struct H2Report {
  bool pass = false;  // rank n at the primary point
  int n = 0;
  RankAtPoint primary;
  std::vector<RankAtPoint> extra;
  bool extra_pass = true;
  int max_step = 0;
  bool default_cutoff = true;
  std::vector<std::string> words;
};

H2Report check_H2(const LieBasisReport& basis, int n, const SamplePoint& point,
                  const std::vector<SamplePoint>& extra = {});
H2Report check_H2(const std::vector<VectorField>& family, const DilationFamily& d,
                  const std::optional<SamplePoint>& point = std::nullopt,
                  const std::vector<SamplePoint>& extra = {});

// Exact rank by fraction-free elimination.
int exact_rank(const std::vector<std::vector<Rational>>& rows);
// Rank by SVD with threshold 1e-10 * ||M||_2.
int float_rank(const std::vector<std::vector<double>>& rows);

struct Family {
  std::string name;  // preset name or "explicit"
  std::vector<VectorField> fields;
  DilationFamily dilation;
};

Family euclidean(int n);
Family grushin(int n1, int n2, int k);  // Y_i = d/dy_i, T_ij = y_i^k d/dt_j
Family bony(int n);                     // X1 = d/dx1, X2 = sum_j x1^(j-1)/(j-1)! d/dx_j

}  // namespace hk::fields
