#pragma once

#include <memory>
#include <vector>

#include "hk/expr.hpp"

namespace hk::sym::detail {

struct ExprData {
  std::vector<Term> terms;
  std::uint64_t hash = 0;
  bool polynomial = true;
  std::vector<Var> free;  // sorted, unique
};

std::shared_ptr<const ExprData> make_data(std::vector<Term> terms);
const std::shared_ptr<const ExprData>& zero_data();

std::shared_ptr<const Atom> make_atom(AtomKind kind, Expr arg);

// f^e as a canonical expression.
Expr power_of(const Factor& f, Frac e);

// Sum of many expressions with a single canonicalization.
Expr sum(const std::vector<Expr>& parts);

double integer_power(double base, std::int64_t n);
double checked_pow(double base, Frac e);
double apply_function(AtomKind kind, double v);
double round_to_double(const Rational& q);

}  // namespace hk::sym::detail
