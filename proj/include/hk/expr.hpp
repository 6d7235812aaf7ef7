#pragma once

// Exact scalar expressions: generalized polynomials with arbitrary-precision
// rational coefficients whose "variables" are either declared symbols or
// atoms (sin, cos, exp, log of an expression, or a rational power of an
// expression). Every Expr is held in canonical form:
//
//   * a sum of terms sorted in graded-lexicographic monomial order,
//   * no zero coefficients, no repeated monomials,
//   * variable exponents are positive integers,
//   * a rational-power atom never carries a non-negative integer exponent
//     (those are expanded into the polynomial part).
//
// Expressions are immutable and share structure; copies are cheap.

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hk::sym {

using Rational = mpq_class;

std::string to_string(const Rational& q);

// Exact reading of "7", "-3/4", "0.125" or "2.5e-3".
Rational parse_rational(std::string_view text);

// Exact small fraction; used for exponents.
class Frac {
 public:
  constexpr Frac() = default;
  Frac(std::int64_t num, std::int64_t den = 1);  // NOLINT(google-explicit-constructor)

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  bool is_nonneg_integer() const { return den_ == 1 && num_ >= 0; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  Rational to_rational() const;
  std::string str() const;

  static Frac from_rational(const Rational& q);

  friend Frac operator+(Frac a, Frac b);
  friend Frac operator-(Frac a, Frac b);
  friend Frac operator*(Frac a, Frac b);
  friend Frac operator-(Frac a) { return Frac(-a.num_, a.den_); }
  friend bool operator==(Frac a, Frac b) = default;
  friend std::strong_ordering operator<=>(Frac a, Frac b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

enum class VarKind : std::uint8_t { Space = 0, Z = 1, P = 2, R = 3, Aux = 4 };

// A declared symbol: spatial x_i, the value slot z, gradient slots p_i,
// Hessian slots r_ij, or a named auxiliary symbol (e.g. theta).
class Var {
 public:
  static Var x(int i);
  static Var z();
  static Var p(int i);
  static Var r(int i, int j);
  static Var aux(std::string_view name);
  // Inverse of name(); throws ParseError-free InvalidArgument on bad input.
  static Var from_name(std::string_view name);

  VarKind kind() const { return static_cast<VarKind>(code_ >> 24); }
  int index() const { return static_cast<int>((code_ >> 12) & 0xFFF); }
  int index2() const { return static_cast<int>(code_ & 0xFFF); }
  std::uint32_t code() const { return code_; }
  std::string name() const;

  friend bool operator==(Var a, Var b) = default;
  friend auto operator<=>(Var a, Var b) = default;

 private:
  explicit Var(std::uint32_t code) : code_(code) {}
  std::uint32_t code_;
};

class Expr;
struct Atom;

enum class AtomKind : std::uint8_t { Sin, Cos, Exp, Log, Radical };

// A base of a power inside a monomial.
struct Factor {
  Var var = Var::x(1);
  std::shared_ptr<const Atom> atom;  // null for a plain variable

  bool is_var() const { return !atom; }
};

struct Power {
  Factor base;
  Frac exponent;
};

using Monomial = std::vector<Power>;  // sorted by base

struct Term {
  Rational coeff;
  Monomial mono;
};

namespace detail {
struct ExprData;
}

class Expr {
 public:
  Expr();  // zero
  Expr(int c);                // NOLINT(google-explicit-constructor)
  Expr(const Rational& c);    // NOLINT(google-explicit-constructor)
  Expr(Var v);                // NOLINT(google-explicit-constructor)

  static Expr from_terms(std::vector<Term> terms);

  const std::vector<Term>& terms() const;
  std::size_t size() const { return terms().size(); }
  bool is_canonical_zero() const { return terms().empty(); }
  bool is_constant() const;
  Rational constant_value() const;  // throws InvalidArgument if not constant
  bool is_polynomial() const;
  const std::vector<Var>& free_variables() const;
  bool depends_on(Var v) const;
  std::uint64_t hash() const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend int compare(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const detail::ExprData> d) : d_(std::move(d)) {}
  std::shared_ptr<const detail::ExprData> d_;
};

struct Atom {
  AtomKind kind;
  Expr arg;  // argument, or the base for Radical
  std::uint64_t hash;
};

int compare(const Factor& a, const Factor& b);
int compare(const Monomial& a, const Monomial& b);  // graded lex, higher degree first

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator-=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);

Expr pow(const Expr& base, int n);
Expr pow(const Expr& base, Frac exponent);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr exp(const Expr& e);
Expr log(const Expr& e);
// |v|^k, represented as (sum v_i^2)^(k/2).
Expr abs_pow(std::span<const Expr> v, const Rational& k);

// Exact partial derivative.
Expr differentiate(const Expr& e, Var v);

// Simultaneous substitution of variables by expressions.
Expr substitute(const Expr& e, const std::map<Var, Expr>& values);

using Point = std::map<Var, double>;

// Polynomials are evaluated in exact rational arithmetic and rounded once to
// the nearest double; anything else is evaluated in double precision.
double evaluate(const Expr& e, const Point& point);
Rational evaluate_exact(const Expr& e, const std::map<Var, Rational>& point);

struct ZeroTest {
  bool zero = false;
  bool symbolic = true;     // decided from the canonical form alone
  int samples = 0;          // randomized points used otherwise
};

// True iff the canonical form is zero. Expressions containing atoms that are
// not canonically zero are probed at 32 pseudo-random points; a "true" from
// that path is evidence, not proof (see ZeroTest::symbolic).
ZeroTest zero_test(const Expr& e);
bool is_zero(const Expr& e);

// Prefix text form, e.g. (+ (* 2 (^ x1 2)) (sin x2)).
std::string to_string(const Expr& e);
Expr parse(std::string_view text);

// Weighted degree sum_i w_i * e_i shared by every monomial of a polynomial in
// the spatial variables. `homogeneous` is false if degrees are mixed or the
// expression has atoms or non-spatial variables; the zero polynomial is
// homogeneous of every degree (`zero` set, `degree` meaningless).
struct WeightedDegree {
  bool homogeneous = false;
  bool zero = false;
  Rational degree;
};
WeightedDegree weighted_degree(const Expr& e, std::span<const int> space_weights);

}  // namespace hk::sym
