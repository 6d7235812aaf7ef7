#include "hk/fields.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <stdexcept>

#include "hk/error.hpp"

namespace hk::fields {

using sym::Var;

VectorField::VectorField(std::vector<Expr> coeffs) : a_(std::move(coeffs)) {
  const int n = dim();
  if (n == 0) throw InvalidArgument("a vector field needs at least one coefficient");
  for (const auto& c : a_) {
    if (!c.is_polynomial()) throw InvalidArgument("vector-field coefficient is not a polynomial: " + to_string(c));
    for (Var v : c.free_variables()) {
      if (v.kind() != sym::VarKind::Space || v.index() > n)
        throw InvalidArgument("vector-field coefficient " + to_string(c) + " uses " + v.name() +
                              ", not one of x1..x" + std::to_string(n));
    }
  }
}

VectorField VectorField::coordinate(int n, int i) {
  std::vector<Expr> a(static_cast<std::size_t>(n));
  a.at(static_cast<std::size_t>(i - 1)) = Expr(1);
  return VectorField(std::move(a));
}

bool VectorField::is_zero() const {
  return std::all_of(a_.begin(), a_.end(), [](const Expr& e) { return e.is_canonical_zero(); });
}

std::string VectorField::str() const {
  std::string out = "[";
  for (std::size_t i = 0; i < a_.size(); ++i) out += (i ? ", " : "") + to_string(a_[i]);
  return out + "]";
}

namespace {

void require_same_dim(const VectorField& a, const VectorField& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("vector fields of different dimensions");
}

}  // namespace

VectorField operator+(const VectorField& a, const VectorField& b) {
  require_same_dim(a, b);
  std::vector<Expr> c;
  for (int i = 0; i < a.dim(); ++i) c.push_back(a[i] + b[i]);
  return VectorField(std::move(c));
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  require_same_dim(a, b);
  std::vector<Expr> c;
  for (int i = 0; i < a.dim(); ++i) c.push_back(a[i] - b[i]);
  return VectorField(std::move(c));
}

VectorField operator*(const Rational& s, const VectorField& a) {
  std::vector<Expr> c;
  for (int i = 0; i < a.dim(); ++i) c.push_back(Expr(s) * a[i]);
  return VectorField(std::move(c));
}

Expr apply_field(const VectorField& Y, const Expr& u) {
  Expr out;
  for (int i = 0; i < Y.dim(); ++i) {
    if (Y[i].is_canonical_zero()) continue;
    const Var v = Var::x(i + 1);
    if (!u.depends_on(v)) continue;
    out += Y[i] * sym::differentiate(u, v);
  }
  return out;
}

VectorField lie_bracket(const VectorField& Y, const VectorField& Z) {
  require_same_dim(Y, Z);
  std::vector<Expr> c;
  for (int k = 0; k < Y.dim(); ++k) c.push_back(apply_field(Y, Z[k]) - apply_field(Z, Y[k]));
  return VectorField(std::move(c));
}

Expr euclidean_divergence(const VectorField& Y) {
  Expr out;
  for (int i = 0; i < Y.dim(); ++i) out += sym::differentiate(Y[i], Var::x(i + 1));
  return out;
}

bool is_rational_multiple(const VectorField& Y, const VectorField& Z, Rational* factor) {
  require_same_dim(Y, Z);
  int k = 0;
  while (k < Y.dim() && Y[k].is_canonical_zero() && Z[k].is_canonical_zero()) ++k;
  if (k == Y.dim()) {
    if (factor) *factor = 1;
    return true;
  }
  if (Y[k].is_canonical_zero() || Z[k].is_canonical_zero()) return false;
  const auto& ty = Y[k].terms().front();
  const auto& tz = Z[k].terms().front();
  if (sym::compare(ty.mono, tz.mono) != 0) return false;
  const Rational c = ty.coeff / tz.coeff;
  if (!(Y == c * Z)) return false;
  if (factor) *factor = c;
  return true;
}

DilationFamily::DilationFamily(std::vector<int> sigma) : sigma_(std::move(sigma)) {
  if (sigma_.empty()) throw InvalidArgument("dilation exponents must be non-empty");
  if (sigma_.front() != 1) throw InvalidArgument("the first dilation exponent must be 1");
  for (std::size_t i = 1; i < sigma_.size(); ++i)
    if (sigma_[i] < sigma_[i - 1]) throw InvalidArgument("dilation exponents must be non-decreasing");
}

int homogeneous_dimension(const DilationFamily& d) {
  int q = 0;
  for (int s : d.sigma()) q += s;
  return q;
}

VectorField infinitesimal_generator(const DilationFamily& d) {
  std::vector<Expr> c;
  for (int i = 0; i < d.dim(); ++i) c.push_back(Expr(d.sigma()[static_cast<std::size_t>(i)]) * Expr(Var::x(i + 1)));
  return VectorField(std::move(c));
}

Homogeneity homogeneity_by_coefficients(const VectorField& Y, const DilationFamily& d) {
  if (Y.dim() != d.dim()) throw InvalidArgument("field and dilation dimensions differ");
  Homogeneity h;
  if (Y.is_zero()) {
    h.homogeneous = true;
    h.zero_field = true;
    return h;
  }
  bool have_alpha = false;
  for (int i = 0; i < Y.dim(); ++i) {
    const auto w = sym::weighted_degree(Y[i], d.sigma());
    if (!w.homogeneous) return h;
    if (w.zero) continue;
    const Rational alpha = Rational(d.sigma()[static_cast<std::size_t>(i)]) - w.degree;
    if (!have_alpha) {
      h.alpha = alpha;
      have_alpha = true;
    } else if (alpha != h.alpha) {
      return h;
    }
  }
  h.homogeneous = true;
  return h;
}

Homogeneity homogeneity_degree(const VectorField& Y, const DilationFamily& d) {
  if (Y.dim() != d.dim()) throw InvalidArgument("field and dilation dimensions differ");
  Homogeneity h;
  if (Y.is_zero()) {
    h.homogeneous = true;
    h.zero_field = true;
    return h;
  }
  const VectorField T = infinitesimal_generator(d);
  const VectorField YT = lie_bracket(Y, T);
  // Candidate alpha from the leading term of the first non-zero coefficient:
  // for a monomial of weight w in a_k, [Y,T]_k carries (sigma_k - w) times it.
  int k = 0;
  while (Y[k].is_canonical_zero()) ++k;
  const auto& lead = Y[k].terms().front();
  Rational w = 0;
  bool weighted = true;
  for (const auto& p : lead.mono) {
    if (!p.base.is_var() || p.base.var.kind() != sym::VarKind::Space) weighted = false;
    else w += Rational(d.sigma()[static_cast<std::size_t>(p.base.var.index() - 1)]) * p.exponent.to_rational();
  }
  if (weighted) {
    const Rational alpha = Rational(d.sigma()[static_cast<std::size_t>(k)]) - w;
    if ((YT - alpha * Y).is_zero()) {
      h.homogeneous = true;
      h.alpha = alpha;
    }
  }
  const Homogeneity c = homogeneity_by_coefficients(Y, d);
  if (c.homogeneous != h.homogeneous || (h.homogeneous && c.alpha != h.alpha))
    throw std::logic_error("bracket and coefficient homogeneity tests disagree on " + Y.str());
  return h;
}

bool has_pyramid_shape(const VectorField& Y) {
  for (int k = 0; k < Y.dim(); ++k)
    for (int j = k; j < Y.dim(); ++j)
      if (Y[k].depends_on(Var::x(j + 1))) return false;
  return true;
}

int exact_rank(const std::vector<std::vector<Rational>>& rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  // Clear denominators row by row, then Bareiss elimination over Z.
  std::vector<std::vector<mpz_class>> m;
  for (const auto& r : rows) {
    mpz_class l = 1;
    for (const auto& q : r) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    std::vector<mpz_class> row;
    for (const auto& q : r) row.push_back(q.get_num() * (l / q.get_den()));
    m.push_back(std::move(row));
  }
  const std::size_t nr = m.size();
  int rank = 0;
  mpz_class prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < nr; ++c) {
    std::size_t piv = r;
    while (piv < nr && m[piv][c] == 0) ++piv;
    if (piv == nr) continue;
    std::swap(m[piv], m[r]);
    for (std::size_t i = r + 1; i < nr; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]);
        mpz_divexact(m[i][j].get_mpz_t(), m[i][j].get_mpz_t(), prev.get_mpz_t());
      }
      m[i][c] = 0;
    }
    prev = m[r][c];
    ++r;
    ++rank;
  }
  return rank;
}

int float_rank(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double threshold = 1e-10 * s(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > threshold) ++rank;
  return rank;
}

namespace {

std::map<Var, Rational> rational_point(const std::vector<Rational>& coords) {
  std::map<Var, Rational> p;
  for (std::size_t i = 0; i < coords.size(); ++i) p.emplace(Var::x(static_cast<int>(i) + 1), coords[i]);
  return p;
}

std::vector<Rational> exact_values(const VectorField& Y, const std::map<Var, Rational>& p) {
  std::vector<Rational> out;
  for (int i = 0; i < Y.dim(); ++i) out.push_back(sym::evaluate_exact(Y[i], p));
  return out;
}

}  // namespace

H1Report check_H1(const std::vector<VectorField>& family, const DilationFamily& d) {
  H1Report r;
  if (family.empty()) throw InvalidArgument("empty vector-field family");
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (family[i].dim() != d.dim()) throw InvalidArgument("field dimension does not match the dilation");
    const Homogeneity h = homogeneity_degree(family[i], d);
    r.degrees.push_back(h);
    const bool ok = h.homogeneous && !h.zero_field && h.alpha == 1;
    if (!ok) {
      r.offending.push_back(static_cast<int>(i));
      std::string why = h.zero_field ? "is the zero field"
                        : !h.homogeneous ? "is not homogeneous"
                                         : "has degree " + sym::to_string(h.alpha) + ", not 1";
      r.notes.push_back("X" + std::to_string(i + 1) + " " + why);
    }
  }
  // Linear independence over R: the family is dependent iff sum c_i X_i = 0
  // identically, which is detected by stacking values at several points.
  std::mt19937_64 rng(0x48315eedULL);
  std::uniform_int_distribution<int> num(-7, 7);
  std::uniform_int_distribution<int> den(1, 5);
  std::vector<std::vector<Rational>> rows(family.size());
  for (int s = 0; s < 8; ++s) {
    std::vector<Rational> coords;
    for (int i = 0; i < d.dim(); ++i) {
      Rational q(num(rng), den(rng));
      q.canonicalize();
      coords.push_back(q);
    }
    const auto p = rational_point(coords);
    for (std::size_t i = 0; i < family.size(); ++i) {
      auto v = exact_values(family[i], p);
      rows[i].insert(rows[i].end(), v.begin(), v.end());
    }
  }
  r.rank = exact_rank(rows);
  r.independent = r.rank == static_cast<int>(family.size());
  if (!r.independent)
    r.notes.push_back("family is linearly dependent (rank " + std::to_string(r.rank) + " of " +
                      std::to_string(family.size()) + " at 8 sample points)");
  r.pass = r.offending.empty() && r.independent;
  return r;
}

LieBasisReport generate_lie_basis(const std::vector<VectorField>& family, const DilationFamily& d,
                                  std::optional<int> max_step) {
  if (family.empty()) throw InvalidArgument("empty vector-field family");
  LieBasisReport rep;
  rep.default_cutoff = !max_step.has_value();
  rep.max_step = max_step.value_or(d.sigma().back());
  if (rep.max_step > kMaxBracketStep) throw StepCapExceeded(rep.max_step);
  if (rep.max_step < 1) throw InvalidArgument("max_step must be at least 1");

  auto is_new = [&rep](const VectorField& f) {
    if (f.is_zero()) return false;
    return std::none_of(rep.elements.begin(), rep.elements.end(),
                        [&f](const LieElement& e) { return is_rational_multiple(f, e.field); });
  };

  std::vector<std::size_t> level;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (!is_new(family[i])) continue;
    rep.elements.push_back({family[i], "X" + std::to_string(i + 1), 1, homogeneity_degree(family[i], d)});
    level.push_back(rep.elements.size() - 1);
  }
  for (int len = 2; len <= rep.max_step && !level.empty(); ++len) {
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < family.size(); ++i) {
      for (std::size_t w : level) {
        VectorField b = lie_bracket(family[i], rep.elements[w].field);
        if (!is_new(b)) continue;
        const std::string word = "[X" + std::to_string(i + 1) + "," + rep.elements[w].word + "]";
        const Homogeneity h = homogeneity_degree(b, d);
        rep.elements.push_back({std::move(b), word, len, h});
        next.push_back(rep.elements.size() - 1);
      }
    }
    level = std::move(next);
  }
  const auto origin = rational_point(std::vector<Rational>(static_cast<std::size_t>(d.dim()), Rational(0)));
  for (const auto& e : rep.elements) rep.matrix_at_origin.push_back(exact_values(e.field, origin));
  rep.rank_at_origin = exact_rank(rep.matrix_at_origin);
  return rep;
}

SamplePoint SamplePoint::origin(int n) { return rational(std::vector<Rational>(static_cast<std::size_t>(n), Rational(0))); }

SamplePoint SamplePoint::rational(std::vector<Rational> coords) {
  SamplePoint p;
  for (const auto& q : coords) p.values.push_back(q.get_d());
  p.exact = std::move(coords);
  return p;
}

SamplePoint SamplePoint::real(std::vector<double> coords) {
  SamplePoint p;
  p.values = std::move(coords);
  return p;
}

namespace {

RankAtPoint rank_at(const LieBasisReport& basis, int n, const SamplePoint& pt) {
  if (static_cast<int>(pt.values.size()) != n) throw InvalidArgument("sample point has the wrong dimension");
  RankAtPoint r;
  r.point = pt.values;
  if (pt.exact) {
    const auto p = rational_point(*pt.exact);
    std::vector<std::vector<Rational>> m;
    for (const auto& e : basis.elements) m.push_back(exact_values(e.field, p));
    r.rank = exact_rank(m);
    r.exact = true;
  } else {
    sym::Point p;
    for (int i = 0; i < n; ++i) p[Var::x(i + 1)] = pt.values[static_cast<std::size_t>(i)];
    std::vector<std::vector<double>> m;
    for (const auto& e : basis.elements) {
      std::vector<double> row;
      for (int i = 0; i < n; ++i) row.push_back(sym::evaluate(e.field[i], p));
      m.push_back(std::move(row));
    }
    r.rank = float_rank(m);
    r.exact = false;
  }
  r.pass = r.rank == n;
  return r;
}

}  // namespace

H2Report check_H2(const LieBasisReport& basis, int n, const SamplePoint& point, const std::vector<SamplePoint>& extra) {
  H2Report r;
  r.n = n;
  r.max_step = basis.max_step;
  r.default_cutoff = basis.default_cutoff;
  for (const auto& e : basis.elements) r.words.push_back(e.word);
  r.primary = rank_at(basis, n, point);
  for (const auto& p : extra) {
    r.extra.push_back(rank_at(basis, n, p));
    r.extra_pass = r.extra_pass && r.extra.back().pass;
  }
  r.pass = r.primary.pass;
  return r;
}

H2Report check_H2(const std::vector<VectorField>& family, const DilationFamily& d,
                  const std::optional<SamplePoint>& point, const std::vector<SamplePoint>& extra) {
  const LieBasisReport basis = generate_lie_basis(family, d);
  return check_H2(basis, d.dim(), point.value_or(SamplePoint::origin(d.dim())), extra);
}

Family euclidean(int n) {
  if (n < 1) throw InvalidArgument("euclidean(n) needs n >= 1");
  Family f;
  f.name = "euclidean(" + std::to_string(n) + ")";
  for (int i = 1; i <= n; ++i) f.fields.push_back(VectorField::coordinate(n, i));
  f.dilation = DilationFamily(std::vector<int>(static_cast<std::size_t>(n), 1));
  return f;
}

Family grushin(int n1, int n2, int k) {
  if (n1 < 1 || n2 < 1 || k < 1) throw InvalidArgument("grushin(n1,n2,k) needs n1, n2, k >= 1");
  const int n = n1 + n2;
  Family f;
  f.name = "grushin(" + std::to_string(n1) + "," + std::to_string(n2) + "," + std::to_string(k) + ")";
  for (int i = 1; i <= n1; ++i) f.fields.push_back(VectorField::coordinate(n, i));
  for (int i = 1; i <= n1; ++i) {
    for (int j = 1; j <= n2; ++j) {
      std::vector<Expr> a(static_cast<std::size_t>(n));
      a[static_cast<std::size_t>(n1 + j - 1)] = sym::pow(Expr(Var::x(i)), k);
      f.fields.emplace_back(std::move(a));
    }
  }
  std::vector<int> sigma(static_cast<std::size_t>(n1), 1);
  sigma.insert(sigma.end(), static_cast<std::size_t>(n2), k + 1);
  f.dilation = DilationFamily(std::move(sigma));
  return f;
}

Family bony(int n) {
  if (n < 2) throw InvalidArgument("bony(n) needs n >= 2");
  Family f;
  f.name = "bony(" + std::to_string(n) + ")";
  f.fields.push_back(VectorField::coordinate(n, 1));
  std::vector<Expr> a(static_cast<std::size_t>(n));
  Rational fact = 1;
  for (int j = 2; j <= n; ++j) {
    fact *= (j - 1);
    a[static_cast<std::size_t>(j - 1)] = Expr(Rational(1) / fact) * sym::pow(Expr(Var::x(1)), j - 1);
  }
  f.fields.emplace_back(std::move(a));
  std::vector<int> sigma;
  for (int i = 1; i <= n; ++i) sigma.push_back(i);
  f.dilation = DilationFamily(std::move(sigma));
  return f;
}

}  // namespace hk::fields
