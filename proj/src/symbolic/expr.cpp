#include "hk/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <unordered_map>

#include "hk/error.hpp"
#include "symbolic/internal.hpp"

namespace hk::sym {

std::string to_string(const Rational& q) { return q.get_str(); }

// ---------------------------------------------------------------------------
// Frac

Frac::Frac(std::int64_t num, std::int64_t den) {
  if (den == 0) throw InvalidArgument("zero denominator in exponent");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  num_ = g ? num / g : 0;
  den_ = g ? den / g : 1;
}

Rational Frac::to_rational() const {
  return Rational(mpz_class(static_cast<long>(num_)), mpz_class(static_cast<long>(den_)));
}

std::string Frac::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Frac Frac::from_rational(const Rational& q) {
  if (!mpz_fits_slong_p(q.get_num_mpz_t()) || !mpz_fits_slong_p(q.get_den_mpz_t()))
    throw InvalidArgument("exponent " + q.get_str() + " is too large");
  return Frac(q.get_num().get_si(), q.get_den().get_si());
}

Frac operator+(Frac a, Frac b) { return Frac(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_); }
Frac operator-(Frac a, Frac b) { return Frac(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_); }
Frac operator*(Frac a, Frac b) { return Frac(a.num_ * b.num_, a.den_ * b.den_); }

std::strong_ordering operator<=>(Frac a, Frac b) {
  const __int128 l = static_cast<__int128>(a.num_) * b.den_;
  const __int128 r = static_cast<__int128>(b.num_) * a.den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// Var

namespace {

struct AuxRegistry {
  std::mutex mutex;
  std::vector<std::string> names;
};

AuxRegistry& aux_registry() {
  static AuxRegistry registry;
  return registry;
}

std::uint32_t make_code(VarKind kind, int i, int j) {
  if (i < 0 || i > 0xFFF || j < 0 || j > 0xFFF) throw InvalidArgument("variable index out of range");
  return (static_cast<std::uint32_t>(kind) << 24) | (static_cast<std::uint32_t>(i) << 12) |
         static_cast<std::uint32_t>(j);
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_index(std::string_view s) {
  if (s.size() > 4) throw InvalidArgument("variable index too large: " + std::string(s));
  return std::stoi(std::string(s));
}

bool is_reserved(std::string_view s) {
  return s == "sin" || s == "cos" || s == "exp" || s == "log" || s == "abs";
}

}  // namespace

Var Var::x(int i) {
  if (i < 1) throw InvalidArgument("spatial variables are numbered from 1");
  return Var(make_code(VarKind::Space, i, 0));
}
Var Var::z() { return Var(make_code(VarKind::Z, 0, 0)); }
Var Var::p(int i) {
  if (i < 1) throw InvalidArgument("gradient slots are numbered from 1");
  return Var(make_code(VarKind::P, i, 0));
}
Var Var::r(int i, int j) {
  if (i < 1 || j < 1) throw InvalidArgument("Hessian slots are numbered from 1");
  return Var(make_code(VarKind::R, i, j));
}

Var Var::aux(std::string_view name) {
  auto& reg = aux_registry();
  std::lock_guard lock(reg.mutex);
  auto it = std::find(reg.names.begin(), reg.names.end(), name);
  if (it == reg.names.end()) {
    reg.names.emplace_back(name);
    it = reg.names.end() - 1;
  }
  return Var(make_code(VarKind::Aux, static_cast<int>(it - reg.names.begin()) + 1, 0));
}

Var Var::from_name(std::string_view s) {
  if (s.empty()) throw InvalidArgument("empty variable name");
  if (s == "z") return z();
  if (s.size() > 1 && s[0] == 'x' && all_digits(s.substr(1))) return x(to_index(s.substr(1)));
  if (s.size() > 1 && s[0] == 'p' && all_digits(s.substr(1))) return p(to_index(s.substr(1)));
  if (s.size() > 1 && s[0] == 'r') {
    const auto us = s.find('_');
    if (us != std::string_view::npos && all_digits(s.substr(1, us - 1)) && all_digits(s.substr(us + 1)))
      return r(to_index(s.substr(1, us - 1)), to_index(s.substr(us + 1)));
  }
  const bool ident_start = std::isalpha(static_cast<unsigned char>(s[0])) != 0;
  const bool ident_rest = std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
  });
  if (!ident_start || !ident_rest || is_reserved(s))
    throw InvalidArgument("invalid variable name '" + std::string(s) + "'");
  return aux(s);
}

std::string Var::name() const {
  switch (kind()) {
    case VarKind::Space: return "x" + std::to_string(index());
    case VarKind::Z: return "z";
    case VarKind::P: return "p" + std::to_string(index());
    case VarKind::R: return "r" + std::to_string(index()) + "_" + std::to_string(index2());
    case VarKind::Aux: {
      auto& reg = aux_registry();
      std::lock_guard lock(reg.mutex);
      return reg.names.at(static_cast<std::size_t>(index() - 1));
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// hashing and ordering

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  v += 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  v ^= v >> 30;
  v *= 0xbf58476d1ce4e5b9ULL;
  v ^= v >> 27;
  v *= 0x94d049bb133111ebULL;
  v ^= v >> 31;
  return h ^ v;
}

std::uint64_t hash_mpz(const mpz_class& z) {
  const mpz_srcptr p = z.get_mpz_t();
  std::uint64_t h = static_cast<std::uint64_t>(static_cast<std::int64_t>(p->_mp_size));
  const int n = std::abs(p->_mp_size);
  for (int k = 0; k < n && k < 4; ++k) h = mix(h, mpz_getlimbn(p, k));
  return h;
}

std::uint64_t hash_rational(const Rational& q) { return mix(hash_mpz(q.get_num()), hash_mpz(q.get_den())); }

std::uint64_t hash_factor(const Factor& f) { return f.is_var() ? mix(17, f.var.code()) : f.atom->hash; }

std::uint64_t hash_term(const Term& t) {
  std::uint64_t h = hash_rational(t.coeff);
  for (const auto& p : t.mono) {
    h = mix(h, hash_factor(p.base));
    h = mix(h, static_cast<std::uint64_t>(p.exponent.num()));
    h = mix(h, static_cast<std::uint64_t>(p.exponent.den()));
  }
  return h;
}

Frac variable_degree(const Monomial& m) {
  Frac d;
  for (const auto& p : m)
    if (p.base.is_var()) d = d + p.exponent;
  return d;
}

}  // namespace

int compare(const Factor& a, const Factor& b) {
  if (a.is_var() && b.is_var()) return a.var.code() < b.var.code() ? -1 : (a.var.code() > b.var.code() ? 1 : 0);
  if (a.is_var()) return -1;
  if (b.is_var()) return 1;
  if (a.atom == b.atom) return 0;
  if (a.atom->kind != b.atom->kind) return a.atom->kind < b.atom->kind ? -1 : 1;
  if (a.atom->hash != b.atom->hash) return a.atom->hash < b.atom->hash ? -1 : 1;
  return compare(a.atom->arg, b.atom->arg);
}

int compare(const Monomial& a, const Monomial& b) {
  const Frac da = variable_degree(a);
  const Frac db = variable_degree(b);
  if (da != db) return da > db ? -1 : 1;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) {
    const int c = compare(a[k].base, b[k].base);
    if (c != 0) return c;
    if (a[k].exponent != b[k].exponent) return a[k].exponent > b[k].exponent ? -1 : 1;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

// ---------------------------------------------------------------------------
// Expr construction

namespace detail {

std::shared_ptr<const ExprData> make_data(std::vector<Term> terms) {
  auto d = std::make_shared<ExprData>();
  d->terms = std::move(terms);
  std::uint64_t h = 0x5a17;
  std::vector<Var> free;
  for (const auto& t : d->terms) {
    h = mix(h, hash_term(t));
    for (const auto& p : t.mono) {
      if (p.base.is_var()) {
        free.push_back(p.base.var);
      } else {
        d->polynomial = false;
        const auto& inner = p.base.atom->arg.free_variables();
        free.insert(free.end(), inner.begin(), inner.end());
      }
    }
  }
  std::sort(free.begin(), free.end());
  free.erase(std::unique(free.begin(), free.end()), free.end());
  d->free = std::move(free);
  d->hash = h;
  return d;
}

const std::shared_ptr<const ExprData>& zero_data() {
  static const std::shared_ptr<const ExprData> zero = make_data({});
  return zero;
}

}  // namespace detail

Expr::Expr() : d_(detail::zero_data()) {}

Expr::Expr(int c) : Expr(Rational(c)) {}

Expr::Expr(const Rational& c) : d_(detail::zero_data()) {
  Rational v = c;
  v.canonicalize();
  if (v != 0) d_ = detail::make_data({Term{std::move(v), {}}});
}

Expr::Expr(Var v) : d_(detail::make_data({Term{Rational(1), {Power{Factor{v, nullptr}, Frac(1)}}}})) {}

Expr Expr::from_terms(std::vector<Term> terms) {
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return compare(a.mono, b.mono) < 0; });
  std::vector<Term> out;
  out.reserve(terms.size());
  for (auto& t : terms) {
    t.coeff.canonicalize();
    if (!out.empty() && compare(out.back().mono, t.mono) == 0) {
      out.back().coeff += t.coeff;
    } else {
      if (!out.empty() && out.back().coeff == 0) out.pop_back();
      out.push_back(std::move(t));
    }
  }
  if (!out.empty() && out.back().coeff == 0) out.pop_back();
  if (out.empty()) return Expr();
  return Expr(detail::make_data(std::move(out)));
}

const std::vector<Term>& Expr::terms() const { return d_->terms; }

bool Expr::is_constant() const { return d_->terms.empty() || (d_->terms.size() == 1 && d_->terms[0].mono.empty()); }

Rational Expr::constant_value() const {
  if (!is_constant()) throw InvalidArgument("expression " + to_string(*this) + " is not constant");
  return d_->terms.empty() ? Rational(0) : d_->terms[0].coeff;
}

bool Expr::is_polynomial() const { return d_->polynomial; }

const std::vector<Var>& Expr::free_variables() const { return d_->free; }

bool Expr::depends_on(Var v) const { return std::binary_search(d_->free.begin(), d_->free.end(), v); }

std::uint64_t Expr::hash() const { return d_->hash; }

int compare(const Expr& a, const Expr& b) {
  if (a.d_ == b.d_) return 0;
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  if (ta.size() != tb.size()) return ta.size() < tb.size() ? -1 : 1;
  if (a.hash() != b.hash()) return a.hash() < b.hash() ? -1 : 1;
  for (std::size_t k = 0; k < ta.size(); ++k) {
    const int c = compare(ta[k].mono, tb[k].mono);
    if (c != 0) return c;
    const int cc = cmp(ta[k].coeff, tb[k].coeff);
    if (cc != 0) return cc < 0 ? -1 : 1;
  }
  return 0;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.d_ == b.d_) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

namespace detail {

std::shared_ptr<const Atom> make_atom(AtomKind kind, Expr arg) {
  const std::uint64_t h = mix(mix(0xa70, static_cast<std::uint64_t>(kind)), arg.hash());
  return std::make_shared<const Atom>(Atom{kind, std::move(arg), h});
}

Expr power_of(const Factor& f, Frac e) {
  if (e.is_zero()) return Expr(1);
  if (!f.is_var() && f.atom->kind == AtomKind::Radical && e.is_nonneg_integer())
    return pow(f.atom->arg, static_cast<int>(e.num()));
  return Expr::from_terms({Term{Rational(1), {Power{f, e}}}});
}

Expr sum(const std::vector<Expr>& parts) {
  std::size_t n = 0;
  for (const auto& p : parts) n += p.size();
  std::vector<Term> all;
  all.reserve(n);
  for (const auto& p : parts) all.insert(all.end(), p.terms().begin(), p.terms().end());
  return Expr::from_terms(std::move(all));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// arithmetic

namespace {

Expr scale(const Expr& e, const Rational& c) {
  if (c == 0 || e.is_canonical_zero()) return Expr();
  if (c == 1) return e;
  std::vector<Term> out = e.terms();
  for (auto& t : out) t.coeff *= c;
  return Expr::from_terms(std::move(out));
}

struct MonoProduct {
  Monomial mono;
  std::vector<std::pair<Expr, int>> expand;
};

MonoProduct multiply(const Monomial& a, const Monomial& b) {
  MonoProduct out;
  out.mono.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  auto push = [&out](const Factor& f, Frac e) {
    if (e.is_zero()) return;
    if (!f.is_var() && f.atom->kind == AtomKind::Radical && e.is_nonneg_integer()) {
      out.expand.emplace_back(f.atom->arg, static_cast<int>(e.num()));
      return;
    }
    out.mono.push_back(Power{f, e});
  };
  while (i < a.size() || j < b.size()) {
    if (j == b.size()) {
      out.mono.push_back(a[i++]);
    } else if (i == a.size()) {
      out.mono.push_back(b[j++]);
    } else {
      const int c = compare(a[i].base, b[j].base);
      if (c < 0) {
        out.mono.push_back(a[i++]);
      } else if (c > 0) {
        out.mono.push_back(b[j++]);
      } else {
        push(a[i].base, a[i].exponent + b[j].exponent);
        ++i;
        ++j;
      }
    }
  }
  return out;
}

// Exact k-th root of a positive rational, if it exists.
bool exact_root(const Rational& q, long k, Rational& out) {
  mpz_class rn;
  mpz_class rd;
  if (mpz_root(rn.get_mpz_t(), q.get_num_mpz_t(), static_cast<unsigned long>(k)) == 0) return false;
  if (mpz_root(rd.get_mpz_t(), q.get_den_mpz_t(), static_cast<unsigned long>(k)) == 0) return false;
  out = Rational(rn, rd);
  out.canonicalize();
  return true;
}

Expr radical(const Expr& base, Frac e) {
  return detail::power_of(Factor{Var::x(1), detail::make_atom(AtomKind::Radical, base)}, e);
}

Expr function_atom(AtomKind kind, const Expr& arg) {
  return detail::power_of(Factor{Var::x(1), detail::make_atom(kind, arg)}, Frac(1));
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_canonical_zero()) return b;
  if (b.is_canonical_zero()) return a;
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  std::vector<Term> out;
  out.reserve(ta.size() + tb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ta.size() || j < tb.size()) {
    if (j == tb.size()) {
      out.push_back(ta[i++]);
    } else if (i == ta.size()) {
      out.push_back(tb[j++]);
    } else {
      const int c = compare(ta[i].mono, tb[j].mono);
      if (c < 0) {
        out.push_back(ta[i++]);
      } else if (c > 0) {
        out.push_back(tb[j++]);
      } else {
        Rational s = ta[i].coeff + tb[j].coeff;
        if (s != 0) out.push_back(Term{std::move(s), ta[i].mono});
        ++i;
        ++j;
      }
    }
  }
  if (out.empty()) return Expr();
  return Expr::from_terms(std::move(out));
}

Expr operator-(const Expr& a) { return scale(a, Rational(-1)); }

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_canonical_zero() || b.is_canonical_zero()) return Expr();
  if (a.is_constant()) return scale(b, a.constant_value());
  if (b.is_constant()) return scale(a, b.constant_value());
  std::vector<Term> acc;
  acc.reserve(a.size() * b.size());
  std::vector<Expr> extra;
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      MonoProduct mp = multiply(ta.mono, tb.mono);
      Rational c = ta.coeff * tb.coeff;
      if (mp.expand.empty()) {
        acc.push_back(Term{std::move(c), std::move(mp.mono)});
      } else {
        Expr t = Expr::from_terms({Term{std::move(c), std::move(mp.mono)}});
        for (const auto& [base, n] : mp.expand) t = t * pow(base, n);
        extra.push_back(std::move(t));
      }
    }
  }
  Expr out = Expr::from_terms(std::move(acc));
  if (extra.empty()) return out;
  extra.push_back(out);
  return detail::sum(extra);
}

Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

Expr pow(const Expr& base, int n) {
  if (n < 0) return pow(base, Frac(n));
  Expr result(1);
  Expr b = base;
  while (n > 0) {
    if (n & 1) result = result * b;
    n >>= 1;
    if (n > 0) b = b * b;
  }
  return result;
}

Expr pow(const Expr& base, Frac e) {
  if (e.is_nonneg_integer()) return pow(base, static_cast<int>(e.num()));
  if (base.is_constant()) {
    const Rational c = base.constant_value();
    if (c == 0) return e > Frac(0) ? Expr() : radical(base, e);
    if (e.is_integer()) {
      Rational inv = 1 / c;
      return pow(Expr(inv), static_cast<int>(-e.num()));
    }
    Rational root;
    if (c > 0 && exact_root(c, e.den(), root)) return pow(Expr(root), Frac(e.num()));
    return radical(base, e);
  }
  // (b^a)^e = b^(a e) for a rational-power atom with unit coefficient.
  if (base.size() == 1) {
    const Term& t = base.terms()[0];
    if (t.coeff == 1 && t.mono.size() == 1 && !t.mono[0].base.is_var() &&
        t.mono[0].base.atom->kind == AtomKind::Radical)
      return detail::power_of(t.mono[0].base, t.mono[0].exponent * e);
  }
  return radical(base, e);
}

Expr sin(const Expr& e) {
  if (e.is_canonical_zero()) return Expr();
  return function_atom(AtomKind::Sin, e);
}

Expr cos(const Expr& e) {
  if (e.is_canonical_zero()) return Expr(1);
  return function_atom(AtomKind::Cos, e);
}

Expr exp(const Expr& e) {
  if (e.is_canonical_zero()) return Expr(1);
  return function_atom(AtomKind::Exp, e);
}

Expr log(const Expr& e) {
  if (e.is_constant() && e.constant_value() == 1) return Expr();
  return function_atom(AtomKind::Log, e);
}

Expr abs_pow(std::span<const Expr> v, const Rational& k) {
  std::vector<Expr> squares;
  squares.reserve(v.size());
  for (const auto& c : v) squares.push_back(c * c);
  return pow(detail::sum(squares), Frac::from_rational(k / 2));
}

// ---------------------------------------------------------------------------
// differentiation and substitution

namespace {

bool factor_depends(const Factor& f, Var v) { return f.is_var() ? f.var == v : f.atom->arg.depends_on(v); }

class Differentiator {
 public:
  explicit Differentiator(Var v) : v_(v) {}

  Expr d(const Expr& e) {
    if (!e.depends_on(v_)) return Expr();
    std::vector<Expr> parts;
    for (const auto& t : e.terms()) {
      for (std::size_t k = 0; k < t.mono.size(); ++k) {
        if (!factor_depends(t.mono[k].base, v_)) continue;
        Expr df = d_power(t.mono[k]);
        if (df.is_canonical_zero()) continue;
        Monomial rest;
        rest.reserve(t.mono.size() - 1);
        for (std::size_t q = 0; q < t.mono.size(); ++q)
          if (q != k) rest.push_back(t.mono[q]);
        parts.push_back(Expr::from_terms({Term{t.coeff, std::move(rest)}}) * df);
      }
    }
    return detail::sum(parts);
  }

 private:
  Expr d_power(const Power& p) {
    const Frac a = p.exponent;
    const Expr coeff(a.to_rational());
    if (p.base.is_var()) return coeff * detail::power_of(p.base, a - Frac(1));
    const Atom& atom = *p.base.atom;
    const Expr inner = d_arg(p.base.atom);
    if (inner.is_canonical_zero()) return Expr();
    const Expr lower = detail::power_of(p.base, a - Frac(1));
    switch (atom.kind) {
      case AtomKind::Radical: return coeff * lower * inner;
      case AtomKind::Sin: return coeff * lower * cos(atom.arg) * inner;
      case AtomKind::Cos: return -(coeff * lower * sin(atom.arg) * inner);
      case AtomKind::Exp: return coeff * detail::power_of(p.base, a) * inner;
      case AtomKind::Log: return coeff * lower * pow(atom.arg, Frac(-1)) * inner;
    }
    return Expr();
  }

  Expr d_arg(const std::shared_ptr<const Atom>& atom) {
    auto it = memo_.find(atom.get());
    if (it != memo_.end()) return it->second;
    Expr r = d(atom->arg);
    memo_.emplace(atom.get(), r);
    return r;
  }

  Var v_;
  std::unordered_map<const Atom*, Expr> memo_;
};

class Substituter {
 public:
  explicit Substituter(const std::map<Var, Expr>& values) : values_(values) {}

  Expr s(const Expr& e) {
    const auto& fv = e.free_variables();
    if (std::none_of(fv.begin(), fv.end(), [this](Var v) { return values_.count(v) > 0; })) return e;
    std::vector<Expr> parts;
    parts.reserve(e.size());
    for (const auto& t : e.terms()) {
      Expr acc(t.coeff);
      for (const auto& p : t.mono) acc = acc * s_power(p);
      parts.push_back(std::move(acc));
    }
    return detail::sum(parts);
  }

 private:
  Expr s_power(const Power& p) {
    if (p.base.is_var()) {
      auto it = values_.find(p.base.var);
      if (it == values_.end()) return detail::power_of(p.base, p.exponent);
      return pow(it->second, p.exponent);
    }
    const Atom& atom = *p.base.atom;
    const Expr arg = s_arg(p.base.atom);
    switch (atom.kind) {
      case AtomKind::Radical: return pow(arg, p.exponent);
      case AtomKind::Sin: return pow(sin(arg), p.exponent);
      case AtomKind::Cos: return pow(cos(arg), p.exponent);
      case AtomKind::Exp: return pow(exp(arg), p.exponent);
      case AtomKind::Log: return pow(log(arg), p.exponent);
    }
    return Expr();
  }

  Expr s_arg(const std::shared_ptr<const Atom>& atom) {
    auto it = memo_.find(atom.get());
    if (it != memo_.end()) return it->second;
    Expr r = s(atom->arg);
    memo_.emplace(atom.get(), r);
    return r;
  }

  const std::map<Var, Expr>& values_;
  std::unordered_map<const Atom*, Expr> memo_;
};

}  // namespace

Expr differentiate(const Expr& e, Var v) { return Differentiator(v).d(e); }

Expr substitute(const Expr& e, const std::map<Var, Expr>& values) { return Substituter(values).s(e); }

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

double checked_pow(double base, Frac e) {
  if (e.is_integer()) {
    if (base == 0.0 && e.num() < 0) throw EvaluationSingularity("negative power of zero");
    return integer_power(base, e.num());
  }
  if (base < 0.0) throw EvaluationSingularity("fractional power " + e.str() + " of negative base");
  if (base == 0.0 && e.num() < 0) throw EvaluationSingularity("negative power " + e.str() + " of zero");
  return std::pow(base, e.to_double());
}

double integer_power(double base, std::int64_t n) {
  const bool neg = n < 0;
  std::uint64_t k = static_cast<std::uint64_t>(neg ? -n : n);
  double r = 1.0;
  double b = base;
  while (k) {
    if (k & 1) r *= b;
    k >>= 1;
    if (k) b *= b;
  }
  return neg ? 1.0 / r : r;
}

double apply_function(AtomKind kind, double v) {
  switch (kind) {
    case AtomKind::Sin: return std::sin(v);
    case AtomKind::Cos: return std::cos(v);
    case AtomKind::Exp: return std::exp(v);
    case AtomKind::Log:
      if (v <= 0.0) throw EvaluationSingularity("log of non-positive value " + std::to_string(v));
      return std::log(v);
    case AtomKind::Radical: return v;
  }
  return v;
}

double round_to_double(const Rational& q) {
  const double d = q.get_d();  // truncates toward zero
  if (!std::isfinite(d)) return d;
  const double away = std::nextafter(d, q > 0 ? std::numeric_limits<double>::infinity()
                                               : -std::numeric_limits<double>::infinity());
  if (!std::isfinite(away)) return d;
  const Rational lo(d);
  const Rational hi(away);
  const Rational e_lo = abs(q - lo);
  const Rational e_hi = abs(q - hi);
  return e_hi < e_lo ? away : d;
}

}  // namespace detail

namespace {

class DoubleEvaluator {
 public:
  explicit DoubleEvaluator(const Point& point) : point_(point) {}

  // Returns the value and accumulates sum |term| into *magnitude if given.
  double eval(const Expr& e, double* magnitude = nullptr) {
    double acc = 0.0;
    for (const auto& t : e.terms()) {
      double v = t.coeff.get_d();
      for (const auto& p : t.mono) v *= power(p);
      acc += v;
      if (magnitude) *magnitude += std::fabs(v);
    }
    return acc;
  }

 private:
  double power(const Power& p) {
    if (p.base.is_var()) return detail::integer_power(lookup(p.base.var), p.exponent.num());
    const double base = atom_value(p.base.atom);
    return detail::checked_pow(base, p.exponent);
  }

  double lookup(Var v) {
    auto it = point_.find(v);
    if (it == point_.end()) throw UnboundVariable(v.name());
    return it->second;
  }

  double atom_value(const std::shared_ptr<const Atom>& atom) {
    auto it = memo_.find(atom.get());
    if (it != memo_.end()) return it->second;
    const double v = detail::apply_function(atom->kind, eval(atom->arg));
    memo_.emplace(atom.get(), v);
    return v;
  }

  const Point& point_;
  std::unordered_map<const Atom*, double> memo_;
};

}  // namespace

Rational evaluate_exact(const Expr& e, const std::map<Var, Rational>& point) {
  if (!e.is_polynomial()) throw InvalidArgument("exact evaluation needs a polynomial, got " + to_string(e));
  Rational acc = 0;
  for (const auto& t : e.terms()) {
    Rational v = t.coeff;
    for (const auto& p : t.mono) {
      auto it = point.find(p.base.var);
      if (it == point.end()) throw UnboundVariable(p.base.var.name());
      Rational pw;
      mpz_pow_ui(pw.get_num_mpz_t(), it->second.get_num_mpz_t(), static_cast<unsigned long>(p.exponent.num()));
      mpz_pow_ui(pw.get_den_mpz_t(), it->second.get_den_mpz_t(), static_cast<unsigned long>(p.exponent.num()));
      pw.canonicalize();
      v *= pw;
    }
    acc += v;
  }
  return acc;
}

double evaluate(const Expr& e, const Point& point) {
  if (e.is_polynomial()) {
    std::map<Var, Rational> exact;
    for (Var v : e.free_variables()) {
      auto it = point.find(v);
      if (it == point.end()) throw UnboundVariable(v.name());
      if (!std::isfinite(it->second)) throw InvalidArgument("non-finite value for " + v.name());
      exact.emplace(v, Rational(it->second));
    }
    return detail::round_to_double(evaluate_exact(e, exact));
  }
  return DoubleEvaluator(point).eval(e);
}

ZeroTest zero_test(const Expr& e) {
  if (e.is_canonical_zero()) return {true, true, 0};
  if (e.is_polynomial()) return {false, true, 0};
  std::mt19937_64 rng(0x1d2e3f4a5b6cULL ^ e.hash());
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  constexpr int kWanted = 32;
  int ok = 0;
  for (int attempt = 0; attempt < kWanted * 8 && ok < kWanted; ++attempt) {
    Point pt;
    for (Var v : e.free_variables()) pt[v] = dist(rng);
    double magnitude = 0.0;
    double value = 0.0;
    try {
      value = DoubleEvaluator(pt).eval(e, &magnitude);
    } catch (const EvaluationSingularity&) {
      continue;
    }
    if (!std::isfinite(value)) continue;
    if (std::fabs(value) > 1e-9 * (1.0 + magnitude)) return {false, false, ok + 1};
    ++ok;
  }
  return {ok > 0, false, ok};
}

bool is_zero(const Expr& e) { return zero_test(e).zero; }

WeightedDegree weighted_degree(const Expr& e, std::span<const int> weights) {
  WeightedDegree out;
  if (e.is_canonical_zero()) {
    out.homogeneous = true;
    out.zero = true;
    return out;
  }
  bool first = true;
  for (const auto& t : e.terms()) {
    Rational deg = 0;
    for (const auto& p : t.mono) {
      if (!p.base.is_var() || p.base.var.kind() != VarKind::Space) return out;
      const int i = p.base.var.index();
      if (i > static_cast<int>(weights.size())) return out;
      deg += Rational(weights[static_cast<std::size_t>(i - 1)]) * p.exponent.to_rational();
    }
    if (first) {
      out.degree = deg;
      first = false;
    } else if (deg != out.degree) {
      return out;
    }
  }
  out.homogeneous = true;
  return out;
}

}  // namespace hk::sym
