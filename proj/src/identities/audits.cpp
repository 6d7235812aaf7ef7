#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "hk/compiled.hpp"
#include "hk/error.hpp"
#include "hk/identities.hpp"

namespace hk::identities {

using geometry::Vec3;
using sym::CompiledExpr;
using sym::Var;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// One axis of the (z, p, r) sampling box.
struct Axis {
  std::string name;
  double max;
};

// Enumerates x-samples times a tensor grid over the axes. The per-axis
// count is the largest odd number <= requested keeping the total under
// max_points (never below 3).
struct Grid {
  std::vector<Vec3> xs;
  std::vector<Axis> axes;
  int per_axis = 0;
  std::size_t total = 0;
  std::string description;
};

Grid make_grid(std::vector<Vec3> xs, std::vector<Axis> axes, const AuditSampler& s) {
  Grid g;
  g.xs = std::move(xs);
  g.axes = std::move(axes);
  int per = std::max(3, s.grid | 1);
  auto count = [&](int k) {
    double c = static_cast<double>(g.xs.size());
    for (std::size_t a = 0; a < g.axes.size(); ++a) c *= k;
    return c;
  };
  while (per > 3 && count(per) > static_cast<double>(s.max_points)) per -= 2;
  g.per_axis = per;
  g.total = static_cast<std::size_t>(count(per));
  std::ostringstream os;
  os << g.xs.size() << " x-sample(s)";
  for (const auto& a : g.axes) os << " × " << a.name << "∈[−" << fmt(a.max) << "," << fmt(a.max) << "]";
  os << ", " << per << " points per axis";
  if (per != (std::max(3, s.grid | 1))) os << " (reduced from " << s.grid << " to stay under " << s.max_points << ")";
  g.description = os.str();
  return g;
}

// Calls f(x, values) for every grid point; values are the axis coordinates.
void for_each(const Grid& g, const std::function<void(const Vec3&, const std::vector<double>&)>& f) {
  const std::size_t D = g.axes.size();
  std::vector<int> idx(D, 0);
  std::vector<double> vals(D);
  const int k = g.per_axis;
  for (const auto& x : g.xs) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      for (std::size_t a = 0; a < D; ++a) vals[a] = g.axes[a].max * (2.0 * idx[a] / (k - 1) - 1.0);
      f(x, vals);
      std::size_t a = 0;
      while (a < D && ++idx[a] == k) idx[a++] = 0;
      if (a == D) break;
    }
  }
}

std::vector<Vec3> interior_samples(const Domain& dom, bool depends_on_x) {
  std::vector<Vec3> xs;
  for (const auto& node : dom.volume_nodes(0)) xs.push_back(node.x);
  if (!depends_on_x) xs.resize(1);
  return xs;
}

std::vector<Vec3> boundary_samples(const Domain& dom, bool depends_on_x, int count) {
  std::vector<Vec3> xs;
  for (const auto& b : dom.sample_boundary(std::max(1, count))) xs.push_back(b.x);
  if (!depends_on_x) xs.resize(1);
  return xs;
}

Witness make_witness(int n, const Vec3& x, const std::vector<Axis>& axes, const std::vector<double>& vals,
                     double value) {
  Witness w;
  for (int i = 0; i < n; ++i) w.point.emplace_back("x" + std::to_string(i + 1), x[i]);
  for (std::size_t a = 0; a < axes.size(); ++a) w.point.emplace_back(axes[a].name, vals[a]);
  w.value = value;
  return w;
}

// Tracks min/max of an audited quantity with witnesses.
struct Extremes {
  double min = INFINITY;
  double max = -INFINITY;
  Witness at_min;
  Witness at_max;
  std::size_t count = 0;

  void add(double v, const std::function<Witness()>& w) {
    ++count;
    if (v < min) {
      min = v;
      at_min = w();
    }
    if (v > max) {
      max = v;
      at_max = w();
    }
  }
};

// Exact description of G as c z^s (s >= 0), if it has that form.
struct Monomial {
  Rational c;
  int s = 0;
};

std::optional<Monomial> as_monomial(const Expr& G) {
  for (Var v : G.free_variables())
    if (v != Var::z()) return std::nullopt;
  const auto& terms = G.terms();
  if (terms.empty()) return Monomial{Rational(0), 0};
  if (terms.size() != 1) return std::nullopt;
  const auto& t = terms.front();
  if (t.mono.empty()) return Monomial{t.coeff, 0};
  if (t.mono.size() != 1 || !t.mono[0].base.is_var() || !t.mono[0].exponent.is_nonneg_integer()) return std::nullopt;
  return Monomial{t.coeff, static_cast<int>(t.mono[0].exponent.num())};
}

int sgn(const Rational& r) { return mpq_sgn(r.get_mpq_t()); }

std::string rstr(const Rational& r) { return sym::to_string(r); }

// Slots x1..xn, z, p1..pm, r11..rmm.
std::vector<Var> all_slots(int n, int m, bool with_r) {
  std::vector<Var> v;
  for (int i = 1; i <= n; ++i) v.push_back(Var::x(i));
  v.push_back(Var::z());
  for (int i = 1; i <= m; ++i) v.push_back(Var::p(i));
  if (with_r)
    for (int i = 1; i <= m; ++i)
      for (int j = 1; j <= m; ++j) v.push_back(Var::r(i, j));
  return v;
}

// Evaluates compiled outputs at (x, axis values mapped into the slot layout).
struct SlotMap {
  int n;
  std::vector<int> axis_slot;  // slot index per axis
  std::size_t nslots;
};

bool eval_sample(const CompiledExpr& c, const SlotMap& map, const Vec3& x, const std::vector<double>& vals,
                 std::vector<double>& in, std::vector<double>& out, std::vector<double>& mag) {
  std::fill(in.begin(), in.end(), 0.0);
  for (int i = 0; i < map.n; ++i) in[static_cast<std::size_t>(i)] = x[i];
  for (std::size_t a = 0; a < vals.size(); ++a) in[static_cast<std::size_t>(map.axis_slot[a])] = vals[a];
  try {
    c.eval(in, out, mag);
  } catch (const EvaluationSingularity&) {
    return false;
  }
  for (double v : out)
    if (!std::isfinite(v)) return false;
  return true;
}

double sample_tol(const std::vector<double>& mag) {
  double s = 0;
  for (double m : mag) s += m;
  return 1e-10 * (1 + s);
}

std::string a0_origin(const Rational& a, const std::vector<std::pair<Rational, std::string>>& named) {
  for (const auto& [v, name] : named)
    if (v == a) return name;
  return "user";
}

}  // namespace

Rational growth_rho(const Rational& k, int dim) {
  if (k <= 0 || dim <= 0) throw InvalidArgument("growth exponent needs k > 0 and a positive dimension");
  Rational r = Rational(1) / k - Rational(1, dim);
  r.canonicalize();
  return r;
}

HypothesisAudit growth_audit(const Expr& G, const Rational& rho, const std::string& id, const std::string& label,
                             double z_max, int grid) {
  for (Var v : G.free_variables())
    if (v != Var::z()) throw InvalidArgument("G must be a function of z only");
  HypothesisAudit a;
  a.id = id;
  a.statement = "G'(0) = 0 and G(z) < " + label + "·z·G'(z) for every z ≠ 0, " + label + " = " + rstr(rho);
  const Expr dG = sym::differentiate(G, Var::z());
  const Expr P = G - Expr(rho) * Expr(Var::z()) * dG;  // must be < 0 for z != 0

  // G'(0) = 0
  bool g0 = false;
  if (dG.is_polynomial()) {
    g0 = sym::evaluate_exact(dG, {{Var::z(), Rational(0)}}) == 0;
  } else {
    g0 = std::fabs(sym::evaluate(dG, {{Var::z(), 0.0}})) <= 1e-12;
  }

  // sampled check on a symmetric grid without 0
  const int half = std::max(1, 2 * grid);
  a.grid = "z = ±" + fmt(z_max) + "·j/" + std::to_string(half) + ", j = 1.." + std::to_string(half);
  a.min_value = INFINITY;
  a.max_value = -INFINITY;
  Witness worst;
  for (int j = -half; j <= half; ++j) {
    if (j == 0) continue;
    const double z = z_max * j / half;
    double v = 0;
    try {
      v = sym::evaluate(P, {{Var::z(), z}});
    } catch (const EvaluationSingularity&) {
      ++a.skipped;
      continue;
    }
    ++a.samples;
    a.min_value = std::min(a.min_value, v);
    if (v > a.max_value) {
      a.max_value = v;
      worst = Witness{{{"z", z}}, v};
    }
  }
  a.witnesses.push_back(worst);
  bool sampled = a.max_value < 0;

  const auto mono = as_monomial(G);
  if (mono) {
    // G - rho z G' = c (1 - rho s) z^s
    a.exact = true;
    const Rational coeff = mono->c * (Rational(1) - rho * mono->s);
    bool b = false;
    if (mono->s == 0) b = sgn(coeff) < 0;
    else if (mono->s % 2 == 0) b = sgn(coeff) < 0;
    else b = false;  // an odd power changes sign across z = 0
    a.pass = g0 && b;
    a.notes.push_back("closed form: G(z) − " + label + "·z·G'(z) = " + rstr(coeff) + "·z^" +
                      std::to_string(mono->s));
    if (mono->s % 2 == 1 && mono->s > 0)
      a.notes.push_back("odd power: the sign of z^s changes across 0, so the strict inequality cannot hold for all z");
    if (sampled != b) a.notes.push_back("sampled verdict differs from the closed form (tolerance/grid effect)");
  } else {
    a.pass = g0 && sampled;
    a.notes.push_back("sampled on a finite z-grid: a pass is evidence on the grid, a fail with witness is conclusive");
  }
  if (!g0) a.notes.push_back("G'(0) ≠ 0");
  return a;
}

std::vector<HypothesisAudit> audit_nonexistence_order1(const Functional1& F, const DilationFamily& d,
                                                       const Domain& dom, const AuditSampler& s) {
  const int n = F.n();
  const int m = F.m();
  if (d.dim() != n || dom.dim() != n) throw InvalidArgument("audit: dimensions of F, dilation and domain differ");
  const int q = fields::homogeneous_dimension(d);
  const bool xdep = F.depends_on_x();

  // compiled quantities: F, <F_p, p>, T(x->F), z F_z
  Expr pair;
  for (int i = 0; i < m; ++i) pair += F.F_p(i) * Expr(Var::p(i + 1));
  Expr tx;
  for (int k = 0; k < n; ++k)
    if (!F.F_x(k).is_canonical_zero()) tx += Expr(d.sigma()[static_cast<std::size_t>(k)]) * Expr(Var::x(k + 1)) * F.F_x(k);
  const CompiledExpr c({F.F(), pair, tx, Expr(Var::z()) * F.F_z()}, all_slots(n, m, false));
  std::vector<double> in(c.num_slots());
  std::vector<double> out(4);
  std::vector<double> mag(4);

  std::vector<HypothesisAudit> audits;

  // candidate a0 values
  std::vector<std::pair<Rational, std::string>> named;
  std::optional<calculus::PresetInfo> preset;
  if (F.preset && F.preset->name == "dirichlet-k-laplacian") preset = F.preset;
  if (preset) {
    const Rational k = preset->k;
    named.emplace_back(growth_rho(k, n), "ϱ = 1/k − 1/n");
    named.emplace_back(growth_rho(k, q), "ϱ_q = 1/k − 1/q");
    named.emplace_back(Rational(n) * growth_rho(k, n), "n·ϱ = n/k − 1");
    named.emplace_back(Rational(q) * growth_rho(k, q), "q·ϱ_q = q/k − 1");
  }
  std::vector<Rational> cands = s.a0;
  for (const auto& [v, name] : named) cands.push_back(v);
  if (cands.empty()) cands.push_back(Rational(0));
  std::vector<Rational> uniq;
  for (const auto& v : cands)
    if (std::find(uniq.begin(), uniq.end(), v) == uniq.end()) uniq.push_back(v);

  // (i)
  {
    HypothesisAudit a;
    a.id = "i";
    a.statement = "𝓕(x,0,p) − ⟨𝓕_p(x,0,p),p⟩ ≤ 0 for x ∈ ∂Ω, p ∈ ℝ^m";
    std::vector<Axis> axes;
    for (int i = 1; i <= m; ++i) axes.push_back({"p" + std::to_string(i), s.p_max});
    const Grid g = make_grid(boundary_samples(dom, xdep, s.boundary_samples), axes, s);
    SlotMap map{n, {}, in.size()};
    for (int i = 0; i < m; ++i) map.axis_slot.push_back(n + 1 + i);
    a.grid = g.description;
    Extremes ex;
    bool ok = true;
    for_each(g, [&](const Vec3& x, const std::vector<double>& vals) {
      if (!eval_sample(c, map, x, vals, in, out, mag)) {
        ++a.skipped;
        return;
      }
      const double v = out[0] - out[1];
      if (v > sample_tol(mag)) ok = false;
      ex.add(v, [&] { return make_witness(n, x, axes, vals, v); });
    });
    a.samples = ex.count;
    a.min_value = ex.min;
    a.max_value = ex.max;
    a.witnesses.push_back(ex.at_max);
    a.pass = ok;
    if (preset) {
      const auto mono = as_monomial(preset->G);
      if (mono) {
        const Rational G0 = mono->s == 0 ? mono->c : Rational(0);
        const bool exact = sgn(G0) >= 0;
        a.exact = true;
        a.notes.push_back("closed form: |p|^k(1/k − 1) − G(0) with k = " + rstr(preset->k) + ", G(0) = " + rstr(G0));
        if (exact != ok) a.notes.push_back("sampled verdict differs from the closed form");
        a.pass = exact;
      }
    }
    if (!a.exact) a.notes.push_back("sampled: a pass is evidence on the sampled box; a fail with witness is conclusive");
    audits.push_back(std::move(a));
  }

  // (ii) and (iii) share one sweep over Ω × z × p
  std::vector<Axis> axes{{"z", s.z_max}};
  for (int i = 1; i <= m; ++i) axes.push_back({"p" + std::to_string(i), s.p_max});
  const Grid g = make_grid(interior_samples(dom, xdep), axes, s);
  SlotMap map{n, {}, in.size()};
  for (int i = 0; i <= m; ++i) map.axis_slot.push_back(n + i);

  struct Cand {
    Rational a0;
    Extremes ex;
    bool ok = true;
  };
  std::vector<Cand> cs;
  for (const auto& v : uniq) cs.push_back({v, {}, true});
  std::size_t skipped = 0;
  // stored samples for (iii): only the ones with small |Q| for some candidate are needed, so keep all values
  struct Sample {
    Vec3 x;
    std::vector<double> vals;
    double F, P, T, Z, tol;
  };
  std::vector<Sample> samples;
  samples.reserve(g.total);
  for_each(g, [&](const Vec3& x, const std::vector<double>& vals) {
    if (!eval_sample(c, map, x, vals, in, out, mag)) {
      ++skipped;
      return;
    }
    const double tol = sample_tol(mag);
    samples.push_back({x, vals, out[0], out[1], out[2], out[3], tol * (1 + q)});
    for (auto& cd : cs) {
      const double a0 = cd.a0.get_d();
      const double Q = q * out[0] - (a0 + 1) * out[1] + out[2] - a0 * out[3];
      if (Q < -tol * (1 + q + std::fabs(a0))) cd.ok = false;
      cd.ex.add(Q, [&] { return make_witness(n, x, axes, vals, Q); });
    }
  });

  // closed-form reduction for the power-law preset
  std::optional<Monomial> mono;
  if (preset && !xdep) mono = as_monomial(preset->G);
  auto exact_ii = [&](const Rational& a0, Rational* A, Rational* Bc) {
    // Q = A |p|^k + B z^s with A = q/k - a0 - 1, B = c (a0 s - q)
    *A = Rational(q) / preset->k - a0 - 1;
    *Bc = mono->c * (a0 * mono->s - q);
    if (sgn(*A) < 0) return false;
    if (mono->s == 0) return sgn(*Bc) >= 0;
    if (mono->s % 2 == 0) return sgn(*Bc) >= 0;
    return sgn(*Bc) == 0;
  };

  std::size_t chosen = 0;
  bool any = false;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    bool ok = cs[i].ok;
    if (mono) {
      Rational A;
      Rational B;
      ok = exact_ii(cs[i].a0, &A, &B);
    }
    if (ok && !any) {
      chosen = i;
      any = true;
    }
  }
  if (!any)
    for (std::size_t i = 1; i < cs.size(); ++i)
      if (cs[i].ex.min > cs[chosen].ex.min) chosen = i;
  {
    HypothesisAudit a;
    a.id = "ii";
    a.statement = "∃a₀: q𝓕 − (a₀+1)⟨𝓕_p,p⟩ + T(x↦𝓕) − a₀z∂_z𝓕 ≥ 0 on Ω × ℝ × ℝ^m";
    a.grid = g.description;
    a.samples = samples.size();
    a.skipped = skipped;
    const auto& cd = cs[chosen];
    a.a0 = cd.a0.get_d();
    a.min_value = cd.ex.min;
    a.max_value = cd.ex.max;
    a.witnesses.push_back(cd.ex.at_min);
    a.pass = any;
    for (const auto& other : cs) {
      std::string line = "a₀ = " + rstr(other.a0) + " (" + a0_origin(other.a0, named) + "): sampled min " +
                         fmt(other.ex.min) + (other.ok ? " → pass" : " → fail");
      if (mono) {
        Rational A;
        Rational B;
        const bool ok = exact_ii(other.a0, &A, &B);
        line += "; closed form " + rstr(A) + "·|p|^k + " + rstr(B) + "·z^" + std::to_string(mono->s) +
                (ok ? " → pass" : " → fail");
      }
      a.notes.push_back(line);
    }
    if (mono) a.exact = true;
    else a.notes.push_back("sampled: a pass is evidence on the sampled box; a fail with witness is conclusive");
    audits.push_back(std::move(a));
  }

  // (iii), literal reading: where the (ii) expression vanishes, z = 0 or p = 0
  {
    HypothesisAudit a;
    a.id = "iii";
    a.statement = "where the (ii) expression vanishes (a₀ = " + rstr(cs[chosen].a0) + "), z = 0 or p = 0";
    a.grid = g.description;
    a.samples = samples.size();
    a.skipped = skipped;
    a.a0 = cs[chosen].a0.get_d();
    const double a0 = cs[chosen].a0.get_d();
    std::size_t zeros = 0;
    std::size_t flagged = 0;
    a.min_value = INFINITY;
    a.max_value = -INFINITY;
    for (const auto& sm : samples) {
      const double Q = q * sm.F - (a0 + 1) * sm.P + sm.T - a0 * sm.Z;
      a.min_value = std::min(a.min_value, std::fabs(Q));
      a.max_value = std::max(a.max_value, std::fabs(Q));
      if (std::fabs(Q) > sm.tol * (1 + std::fabs(a0))) continue;
      ++zeros;
      const bool z0 = sm.vals[0] == 0;
      bool p0 = true;
      for (std::size_t i = 1; i < sm.vals.size(); ++i) p0 = p0 && sm.vals[i] == 0;
      if (!z0 && !p0) {
        if (flagged == 0) a.witnesses.push_back(make_witness(n, sm.x, axes, sm.vals, Q));
        ++flagged;
      }
    }
    a.pass = flagged == 0;
    a.notes.push_back("literal reading: equality in (ii) must force z = 0 or p = 0; " + std::to_string(zeros) +
                      " sampled zero(s), " + std::to_string(flagged) + " with z ≠ 0 and p ≠ 0");
    if (mono) {
      Rational A;
      Rational B;
      exact_ii(cs[chosen].a0, &A, &B);
      const int sA = sgn(A);
      const int sB = sgn(B);
      bool ok = false;
      if (mono->s == 0) {
        // Q = A|p|^k + B: zero set {|p|^k = -B/A} for every z
        ok = sA == 0 ? sB != 0 : !(sB * sA < 0);
        if (sA != 0 && sB == 0) ok = true;
      } else if (mono->s % 2 == 0) {
        ok = !(sA == 0 && sB == 0) && !(sA * sB < 0);
      } else {
        ok = !(sA == 0 && sB == 0) && (sA == 0 || sB == 0);
      }
      a.exact = true;
      if (ok != a.pass) a.notes.push_back("sampled verdict differs from the closed form");
      a.pass = ok;
      a.notes.push_back("closed form: zero set of " + rstr(A) + "·|p|^k + " + rstr(B) + "·z^" +
                        std::to_string(mono->s));
    }
    audits.push_back(std::move(a));
  }

  if (preset) {
    // the Euclidean exponent only governs the Euclidean case q = n
    if (q == n)
      audits.push_back(growth_audit(preset->G, growth_rho(preset->k, n), "growth", "ϱ", s.z_max, s.grid));
    else
      audits.push_back(growth_audit(preset->G, growth_rho(preset->k, q), "growth-hor", "ϱ_q", s.z_max, s.grid));
  }
  return audits;
}

std::vector<HypothesisAudit> audit_nonexistence_order2(const Functional2& F, const DilationFamily& d,
                                                       const Domain& dom, const AuditSampler& s) {
  const int n = F.n();
  const int m = F.m();
  if (d.dim() != n || dom.dim() != n) throw InvalidArgument("audit: dimensions of F, dilation and domain differ");
  const int q = fields::homogeneous_dimension(d);
  const bool xdep = F.depends_on_x();

  Expr pair;
  for (int i = 0; i < m; ++i) pair += F.F_p(i) * Expr(Var::p(i + 1));
  Expr rr;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (!F.F_r(i, j).is_canonical_zero()) rr += Expr(Var::r(i + 1, j + 1)) * F.F_r(i, j);
  Expr tx;
  for (int k = 0; k < n; ++k)
    if (!F.F_x(k).is_canonical_zero()) tx += Expr(d.sigma()[static_cast<std::size_t>(k)]) * Expr(Var::x(k + 1)) * F.F_x(k);
  const CompiledExpr c({F.F(), pair, tx, rr}, all_slots(n, m, true));
  std::vector<double> in(c.num_slots());
  std::vector<double> out(4);
  std::vector<double> mag(4);

  std::vector<Axis> raxes;
  std::vector<int> rslots;
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j) {
      raxes.push_back({"r" + std::to_string(i) + std::to_string(j), s.r_max});
      rslots.push_back(n + 1 + m + (i - 1) * m + (j - 1));
    }

  std::vector<HypothesisAudit> audits;
  {
    HypothesisAudit a;
    a.id = "i";
    a.statement = "𝓕(x,0,0,r) − Σr_ij𝓕_{r_ij}(x,0,0,r) ≤ 0 for x ∈ ∂Ω, r ∈ ℝ^{m²}";
    const Grid g = make_grid(boundary_samples(dom, xdep, s.boundary_samples), raxes, s);
    SlotMap map{n, rslots, in.size()};
    a.grid = g.description;
    Extremes ex;
    bool ok = true;
    for_each(g, [&](const Vec3& x, const std::vector<double>& vals) {
      if (!eval_sample(c, map, x, vals, in, out, mag)) {
        ++a.skipped;
        return;
      }
      const double v = out[0] - out[3];
      if (v > sample_tol(mag)) ok = false;
      ex.add(v, [&] { return make_witness(n, x, raxes, vals, v); });
    });
    a.samples = ex.count;
    a.min_value = ex.min;
    a.max_value = ex.max;
    a.witnesses.push_back(ex.at_max);
    a.pass = ok;
    a.notes.push_back("sampled: a pass is evidence on the sampled box; a fail with witness is conclusive");
    audits.push_back(std::move(a));
  }

  std::vector<Axis> axes{{"z", s.z_max}};
  std::vector<int> slots{n};
  for (int i = 1; i <= m; ++i) {
    axes.push_back({"p" + std::to_string(i), s.p_max});
    slots.push_back(n + i);
  }
  for (std::size_t k = 0; k < raxes.size(); ++k) {
    axes.push_back(raxes[k]);
    slots.push_back(rslots[k]);
  }
  const Grid g = make_grid(interior_samples(dom, xdep), axes, s);
  SlotMap map{n, slots, in.size()};
  HypothesisAudit ii;
  ii.id = "ii";
  ii.statement = "q𝓕 − ⟨p,𝓕_p⟩ + T(x↦𝓕) − 2Σr_ij𝓕_{r_ij} ≥ 0 on Ω × ℝ × ℝ^m × ℝ^{m²}";
  ii.grid = g.description;
  HypothesisAudit iii;
  iii.id = "iii";
  iii.statement = "where the (ii) expression vanishes, z = 0 or p = 0 or r = 0";
  iii.grid = g.description;
  Extremes ex;
  bool ok = true;
  std::size_t zeros = 0;
  std::size_t flagged = 0;
  double absmin = INFINITY;
  double absmax = -INFINITY;
  const std::size_t p_first = 1;
  const std::size_t r_first = 1 + static_cast<std::size_t>(m);
  for_each(g, [&](const Vec3& x, const std::vector<double>& vals) {
    if (!eval_sample(c, map, x, vals, in, out, mag)) {
      ++ii.skipped;
      return;
    }
    const double tol = sample_tol(mag) * (2 + q);
    const double Q = q * out[0] - out[1] + out[2] - 2 * out[3];
    if (Q < -tol) ok = false;
    ex.add(Q, [&] { return make_witness(n, x, axes, vals, Q); });
    absmin = std::min(absmin, std::fabs(Q));
    absmax = std::max(absmax, std::fabs(Q));
    if (std::fabs(Q) <= tol) {
      ++zeros;
      const bool z0 = vals[0] == 0;
      bool p0 = true;
      for (std::size_t i = p_first; i < r_first; ++i) p0 = p0 && vals[i] == 0;
      bool r0 = true;
      for (std::size_t i = r_first; i < vals.size(); ++i) r0 = r0 && vals[i] == 0;
      if (!z0 && !p0 && !r0) {
        if (flagged == 0) iii.witnesses.push_back(make_witness(n, x, axes, vals, Q));
        ++flagged;
      }
    }
  });
  ii.samples = ex.count;
  ii.min_value = ex.min;
  ii.max_value = ex.max;
  ii.witnesses.push_back(ex.at_min);
  ii.pass = ok;
  ii.notes.push_back("sampled: a pass is evidence on the sampled box; a fail with witness is conclusive");
  iii.samples = ex.count;
  iii.skipped = ii.skipped;
  iii.min_value = absmin;
  iii.max_value = absmax;
  iii.pass = flagged == 0;
  iii.notes.push_back("literal reading: equality in (ii) must force z = 0, p = 0 or r = 0; " + std::to_string(zeros) +
                      " sampled zero(s), " + std::to_string(flagged) + " violating");
  audits.push_back(std::move(ii));
  audits.push_back(std::move(iii));
  return audits;
}

}  // namespace hk::identities
