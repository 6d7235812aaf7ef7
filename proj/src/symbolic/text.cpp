// Prefix text form of expressions.
//
//   expr   := number | name | '(' op expr* ')'
//   op     := + - * / ^ sin cos exp log abs
//   number := [-]digits['/'digits] | [-]digits'.'digits[e[-]digits]
//
// (^ e q) takes a rational literal q; (abs k e1 ... en) is |(e1..en)|^k.

#include <cctype>

#include "hk/error.hpp"
#include "hk/expr.hpp"

namespace hk::sym {

namespace {

std::string factor_text(const Factor& f) {
  if (f.is_var()) return f.var.name();
  const Atom& a = *f.atom;
  switch (a.kind) {
    case AtomKind::Sin: return "(sin " + to_string(a.arg) + ")";
    case AtomKind::Cos: return "(cos " + to_string(a.arg) + ")";
    case AtomKind::Exp: return "(exp " + to_string(a.arg) + ")";
    case AtomKind::Log: return "(log " + to_string(a.arg) + ")";
    case AtomKind::Radical: return to_string(a.arg);
  }
  return "?";
}

std::string power_text(const Power& p) {
  const bool radical = !p.base.is_var() && p.base.atom->kind == AtomKind::Radical;
  if (p.exponent == Frac(1) && !radical) return factor_text(p.base);
  return "(^ " + factor_text(p.base) + " " + p.exponent.str() + ")";
}

std::string term_text(const Term& t) {
  if (t.mono.empty()) return to_string(t.coeff);
  if (t.coeff == 1 && t.mono.size() == 1) return power_text(t.mono[0]);
  std::string out = "(*";
  if (t.coeff != 1) out += " " + to_string(t.coeff);
  for (const auto& p : t.mono) out += " " + power_text(p);
  return out + ")";
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Expr parse_all() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError("trailing input", pos_);
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string_view token() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != '(' && s_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    if (start == pos_) throw ParseError("expected a token", start);
    return s_.substr(start, pos_ - start);
  }

  static bool looks_numeric(std::string_view t) {
    std::size_t k = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    return k < t.size() && (std::isdigit(static_cast<unsigned char>(t[k])) || t[k] == '.');
  }

  Rational number(std::string_view t, std::size_t at) {
    try {
      return parse_rational(t);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), at);
    }
  }

  Expr leaf() {
    const std::size_t at = pos_;
    const std::string_view t = token();
    if (looks_numeric(t)) return Expr(number(t, at));
    try {
      return Expr(Var::from_name(t));
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), at);
    }
  }

  Expr expr() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    if (s_[pos_] == ')') throw ParseError("unexpected ')'", pos_);
    if (s_[pos_] != '(') return leaf();
    const std::size_t open = pos_++;
    const std::size_t op_at = pos_;
    const std::string op(token());
    Expr out;
    if (op == "^") {
      Expr base = expr();
      skip();
      const std::size_t at = pos_;
      out = pow(base, Frac::from_rational(number(token(), at)));
    } else if (op == "abs") {
      skip();
      const std::size_t at = pos_;
      const Rational k = number(token(), at);
      std::vector<Expr> args = rest();
      if (args.empty()) throw ParseError("abs needs at least one component", open);
      out = abs_pow(args, k);
    } else {
      std::vector<Expr> args = rest();
      if (op == "+") {
        for (const auto& a : args) out += a;
      } else if (op == "*") {
        out = Expr(1);
        for (const auto& a : args) out *= a;
      } else if (op == "-") {
        if (args.empty()) throw ParseError("'-' needs an argument", open);
        out = args.size() == 1 ? -args[0] : args[0];
        for (std::size_t k = 1; k < args.size(); ++k) out -= args[k];
      } else if (op == "/") {
        if (args.size() != 2) throw ParseError("'/' takes two arguments", open);
        if (args[1].is_canonical_zero()) throw ParseError("division by zero", open);
        out = args[0] * pow(args[1], Frac(-1));
      } else if (op == "sin" || op == "cos" || op == "exp" || op == "log") {
        if (args.size() != 1) throw ParseError("'" + op + "' takes one argument", open);
        out = op == "sin" ? sin(args[0]) : op == "cos" ? cos(args[0]) : op == "exp" ? exp(args[0]) : log(args[0]);
      } else {
        throw ParseError("unknown operator '" + op + "'", op_at);
      }
    }
    skip();
    if (pos_ >= s_.size() || s_[pos_] != ')') throw ParseError("expected ')'", pos_);
    ++pos_;
    return out;
  }

  std::vector<Expr> rest() {
    std::vector<Expr> args;
    for (;;) {
      skip();
      if (pos_ >= s_.size()) throw ParseError("unbalanced '('", pos_);
      if (s_[pos_] == ')') return args;
      args.push_back(expr());
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_string(const Expr& e) {
  const auto& terms = e.terms();
  if (terms.empty()) return "0";
  if (terms.size() == 1) return term_text(terms[0]);
  std::string out = "(+";
  for (const auto& t : terms) out += " " + term_text(t);
  return out + ")";
}

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

Rational parse_rational(std::string_view t) {
  auto bad = [&t]() { return InvalidArgument("malformed number '" + std::string(t) + "'"); };
  if (t.empty()) throw bad();
  std::size_t k = 0;
  bool negative = false;
  if (t[0] == '-' || t[0] == '+') {
    negative = t[0] == '-';
    k = 1;
  }
  auto digits = [&](std::size_t from) {
    std::size_t e = from;
    while (e < t.size() && std::isdigit(static_cast<unsigned char>(t[e]))) ++e;
    return e;
  };
  Rational out;
  const std::size_t int_end = digits(k);
  const std::string int_part(t.substr(k, int_end - k));
  if (int_end < t.size() && t[int_end] == '/') {
    const std::size_t den_end = digits(int_end + 1);
    if (int_part.empty() || den_end == int_end + 1 || den_end != t.size()) throw bad();
    const mpz_class den(std::string(t.substr(int_end + 1)), 10);
    if (den == 0) throw InvalidArgument("zero denominator in '" + std::string(t) + "'");
    out = Rational(mpz_class(int_part, 10), den);
    out.canonicalize();
  } else {
    std::size_t pos = int_end;
    std::string frac_part;
    if (pos < t.size() && t[pos] == '.') {
      const std::size_t fe = digits(pos + 1);
      frac_part = std::string(t.substr(pos + 1, fe - pos - 1));
      pos = fe;
    }
    if (int_part.empty() && frac_part.empty()) throw bad();
    long exponent = 0;
    if (pos < t.size() && (t[pos] == 'e' || t[pos] == 'E')) {
      std::size_t es = pos + 1;
      bool eneg = false;
      if (es < t.size() && (t[es] == '-' || t[es] == '+')) {
        eneg = t[es] == '-';
        ++es;
      }
      const std::size_t ee = digits(es);
      if (ee == es || ee - es > 4) throw bad();
      exponent = std::stol(std::string(t.substr(es, ee - es)));
      if (eneg) exponent = -exponent;
      pos = ee;
    }
    if (pos != t.size()) throw bad();
    const mpz_class mant((int_part.empty() ? "0" : int_part) + frac_part, 10);
    exponent -= static_cast<long>(frac_part.size());
    mpz_class ten;
    mpz_ui_pow_ui(ten.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    out = exponent < 0 ? Rational(mant, ten) : Rational(mant * ten);
    out.canonicalize();
  }
  return negative ? Rational(-out) : out;
}

}  // namespace hk::sym
