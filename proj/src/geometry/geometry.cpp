#include "hk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "hk/error.hpp"

namespace hk::geometry {

using sym::Var;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegenerate = 1e-12;

Var theta_var() { return Var::aux("theta"); }
Var phi_var() { return Var::aux("phi"); }

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<double> node_vector(const Vec3& x, int dim) { return std::vector<double>(x.begin(), x.begin() + dim); }

}  // namespace

struct Domain::Radius {
  Expr r;
  sym::CompiledExpr c;  // r, r_theta, r_phi at (theta, phi)

  explicit Radius(Expr e, bool three_d) : r(std::move(e)) {
    for (Var v : r.free_variables()) {
      const bool ok = v == theta_var() || (three_d && v == phi_var());
      if (!ok)
        throw InvalidArgument("radius expression may only use theta" + std::string(three_d ? " and phi" : "") +
                              ", found " + v.name());
    }
    c = sym::CompiledExpr({r, sym::differentiate(r, theta_var()), sym::differentiate(r, phi_var())},
                          {theta_var(), phi_var()});
  }

  std::array<double, 3> eval(double theta, double phi) const {
    std::array<double, 3> out{};
    const double in[2] = {theta, phi};
    c.eval(in, out);
    return out;
  }
};

Domain Domain::box(std::vector<std::pair<double, double>> bounds) {
  if (bounds.size() != 2 && bounds.size() != 3) throw InvalidArgument("box domains must be 2- or 3-dimensional");
  for (const auto& [lo, hi] : bounds)
    if (!(lo < hi)) throw InvalidArgument("box bounds need lo < hi");
  Domain d;
  d.kind_ = DomainKind::Box;
  d.dim_ = static_cast<int>(bounds.size());
  d.bounds_ = std::move(bounds);
  d.description_ = "box(";
  for (std::size_t i = 0; i < d.bounds_.size(); ++i)
    d.description_ += (i ? "," : "") + fmt(d.bounds_[i].first) + "," + fmt(d.bounds_[i].second);
  d.description_ += ")";
  return d;
}

Domain Domain::radial2d(const Expr& radius, std::array<double, 2> center) {
  Domain d;
  d.kind_ = DomainKind::RadialStar2D;
  d.dim_ = 2;
  d.center_ = {center[0], center[1], 0};
  d.radius_ = std::make_shared<const Radius>(radius, false);
  // positivity and 2pi-periodicity on 256 samples
  for (int k = 0; k < 256; ++k) {
    const double t = 2 * kPi * k / 256;
    const double r0 = d.radius_->eval(t, 0)[0];
    const double r1 = d.radius_->eval(t + 2 * kPi, 0)[0];
    if (!(r0 > 0)) throw InvalidArgument("radius must be positive; r(" + fmt(t) + ") = " + fmt(r0));
    if (std::fabs(r0 - r1) > 1e-10 * (1 + std::fabs(r0)))
      throw InvalidArgument("radius is not 2pi-periodic at theta = " + fmt(t));
  }
  d.description_ = "radial2d(" + to_string(radius) + "," + fmt(center[0]) + "," + fmt(center[1]) + ")";
  return d;
}

Domain Domain::radial3d(const Expr& radius, Vec3 center) {
  Domain d;
  d.kind_ = DomainKind::ProductRadial3D;
  d.dim_ = 3;
  d.center_ = center;
  d.radius_ = std::make_shared<const Radius>(radius, true);
  for (int i = 0; i <= 16; ++i) {
    for (int j = 0; j < 32; ++j) {
      const double t = kPi * i / 16;
      const double p = 2 * kPi * j / 32;
      const double r0 = d.radius_->eval(t, p)[0];
      const double r1 = d.radius_->eval(t, p + 2 * kPi)[0];
      if (!(r0 > 0)) throw InvalidArgument("radius must be positive; rho(" + fmt(t) + "," + fmt(p) + ") = " + fmt(r0));
      if (std::fabs(r0 - r1) > 1e-10 * (1 + std::fabs(r0)))
        throw InvalidArgument("radius is not 2pi-periodic in phi at (" + fmt(t) + "," + fmt(p) + ")");
    }
  }
  d.description_ = "radial3d(" + to_string(radius) + "," + fmt(center[0]) + "," + fmt(center[1]) + "," +
                   fmt(center[2]) + ")";
  return d;
}

Domain Domain::disk(double cx, double cy, double R) {
  if (!(R > 0)) throw InvalidArgument("disk radius must be positive");
  Domain d = radial2d(Expr(sym::Rational(R)), {cx, cy});
  d.description_ = "disk(" + fmt(cx) + "," + fmt(cy) + "," + fmt(R) + ")";
  return d;
}

Domain Domain::ellipse(const sym::Rational& a, const sym::Rational& b, double cx, double cy) {
  if (a <= 0 || b <= 0) throw InvalidArgument("ellipse semi-axes must be positive");
  // r(theta) = a b (b^2 cos^2 + a^2 sin^2)^(-1/2)
  const Expr t(theta_var());
  const Expr q = Expr(b * b) * sym::pow(sym::cos(t), 2) + Expr(a * a) * sym::pow(sym::sin(t), 2);
  Domain d = radial2d(Expr(a * b) * sym::pow(q, sym::Frac(-1, 2)), {cx, cy});
  d.description_ = "ellipse(" + sym::to_string(a) + "," + sym::to_string(b) + "," + fmt(cx) + "," + fmt(cy) + ")";
  return d;
}

Domain Domain::ball3(double cx, double cy, double cz, double R) {
  if (!(R > 0)) throw InvalidArgument("ball radius must be positive");
  Domain d = radial3d(Expr(sym::Rational(R)), {cx, cy, cz});
  d.description_ = "ball3(" + fmt(cx) + "," + fmt(cy) + "," + fmt(cz) + "," + fmt(R) + ")";
  return d;
}

Vec3 Domain::radial_point(double theta, double phi, double s, double* jac) const {
  const auto r = radius_->eval(theta, phi);
  Vec3 x = center_;
  if (dim_ == 2) {
    x[0] += s * r[0] * std::cos(theta);
    x[1] += s * r[0] * std::sin(theta);
    if (jac) *jac = s * r[0] * r[0];
  } else {
    const double st = std::sin(theta);
    x[0] += s * r[0] * st * std::cos(phi);
    x[1] += s * r[0] * st * std::sin(phi);
    x[2] += s * r[0] * std::cos(theta);
    if (jac) *jac = s * s * r[0] * r[0] * r[0] * st;
  }
  return x;
}

BoundaryNode Domain::radial_boundary(double theta, double phi, bool check) const {
  const auto r = radius_->eval(theta, phi);
  BoundaryNode b{};
  b.x = radial_point(theta, phi, 1.0, nullptr);
  if (dim_ == 2) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Vec3 tangent{r[1] * c - r[0] * s, r[1] * s + r[0] * c, 0};
    const double j = std::hypot(tangent[0], tangent[1]);
    if (check && j < kDegenerate) throw DegenerateTangent("boundary tangent vanishes at theta = " + fmt(theta));
    b.nu = {tangent[1] / j, -tangent[0] / j, 0};
    b.w = j;
  } else {
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    const double sp = std::sin(phi);
    const double cp = std::cos(phi);
    const Vec3 w{st * cp, st * sp, ct};
    const Vec3 wt{ct * cp, ct * sp, -st};
    const Vec3 wp{-st * sp, st * cp, 0};
    Vec3 xt;
    Vec3 xp;
    for (int k = 0; k < 3; ++k) {
      xt[k] = r[1] * w[k] + r[0] * wt[k];
      xp[k] = r[2] * w[k] + r[0] * wp[k];
    }
    const Vec3 n = cross(xt, xp);
    const double j = std::sqrt(dot(n, n));
    if (check && j < kDegenerate)
      throw DegenerateTangent("surface Jacobian vanishes at (theta, phi) = (" + fmt(theta) + ", " + fmt(phi) + ")");
    b.nu = {n[0] / j, n[1] / j, n[2] / j};
    b.w = j;
  }
  return b;
}

Vec3 Domain::boundary_point(std::span<const double> params) const {
  if (kind_ == DomainKind::Box) {
    if (params.size() != 3) throw InvalidArgument("box boundary parameters are (face, u, v)");
    const int face = static_cast<int>(params[0]);
    if (face < 0 || face >= 2 * dim_ || params[0] != face) throw InvalidArgument("box face index out of range");
    const int axis = face / 2;
    Vec3 x{0, 0, 0};
    int slot = 1;
    for (int a = 0; a < dim_; ++a) {
      const auto [lo, hi] = bounds_[static_cast<std::size_t>(a)];
      if (a == axis) x[a] = face % 2 ? hi : lo;
      else x[a] = lo + (hi - lo) * params[static_cast<std::size_t>(slot++)];
    }
    return x;
  }
  if (static_cast<int>(params.size()) != dim_ - 1)
    throw InvalidArgument(dim_ == 2 ? "boundary parameter is theta" : "boundary parameters are (theta, phi)");
  return radial_point(params[0], dim_ == 3 ? params[1] : 0.0, 1.0, nullptr);
}

Vec3 Domain::outward_normal(std::span<const double> params) const {
  if (kind_ == DomainKind::Box) {
    boundary_point(params);  // validates
    const int face = static_cast<int>(params[0]);
    Vec3 n{0, 0, 0};
    n[face / 2] = face % 2 ? 1.0 : -1.0;
    return n;
  }
  if (static_cast<int>(params.size()) != dim_ - 1)
    throw InvalidArgument(dim_ == 2 ? "boundary parameter is theta" : "boundary parameters are (theta, phi)");
  return radial_boundary(params[0], dim_ == 3 ? params[1] : 0.0, true).nu;
}

namespace {

struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
};

Rule1D gauss_on(double a, double b, int order) {
  const auto& [t, w] = gauss_legendre(order);
  Rule1D r;
  for (std::size_t i = 0; i < t.size(); ++i) {
    r.x.push_back(a + (b - a) * (t[i] + 1) / 2);
    r.w.push_back(w[i] * (b - a) / 2);
  }
  return r;
}

Rule1D trapezoid_periodic(int n) {
  Rule1D r;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(2 * kPi * i / n);
    r.w.push_back(2 * kPi / n);
  }
  return r;
}

void check_level(int level) {
  if (level < 0 || level > 10) throw InvalidArgument("quadrature level must be in [0, 10]");
}

}  // namespace

std::vector<VolumeNode> Domain::volume_nodes(int level) const {
  check_level(level);
  const int g = 1 << (level + 1);
  std::vector<VolumeNode> out;
  if (kind_ == DomainKind::Box) {
    std::vector<Rule1D> rules;
    for (const auto& [lo, hi] : bounds_) rules.push_back(gauss_on(lo, hi, g));
    if (dim_ == 2) {
      for (std::size_t i = 0; i < rules[0].x.size(); ++i)
        for (std::size_t j = 0; j < rules[1].x.size(); ++j)
          out.push_back({{rules[0].x[i], rules[1].x[j], 0}, rules[0].w[i] * rules[1].w[j]});
    } else {
      for (std::size_t i = 0; i < rules[0].x.size(); ++i)
        for (std::size_t j = 0; j < rules[1].x.size(); ++j)
          for (std::size_t k = 0; k < rules[2].x.size(); ++k)
            out.push_back({{rules[0].x[i], rules[1].x[j], rules[2].x[k]},
                           rules[0].w[i] * rules[1].w[j] * rules[2].w[k]});
    }
    return out;
  }
  const Rule1D s = gauss_on(0, 1, g);
  if (dim_ == 2) {
    const Rule1D t = trapezoid_periodic(1 << (level + 3));
    for (std::size_t a = 0; a < t.x.size(); ++a)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        double jac = 0;
        const Vec3 x = radial_point(t.x[a], 0, s.x[i], &jac);
        out.push_back({x, t.w[a] * s.w[i] * jac});
      }
    return out;
  }
  const Rule1D th = gauss_on(0, kPi, g);
  const Rule1D ph = trapezoid_periodic(1 << (level + 2));
  for (std::size_t a = 0; a < th.x.size(); ++a)
    for (std::size_t b = 0; b < ph.x.size(); ++b)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        double jac = 0;
        const Vec3 x = radial_point(th.x[a], ph.x[b], s.x[i], &jac);
        out.push_back({x, th.w[a] * ph.w[b] * s.w[i] * jac});
      }
  return out;
}

std::vector<BoundaryNode> Domain::boundary_nodes(int level) const {
  check_level(level);
  const int g = 1 << (level + 1);
  std::vector<BoundaryNode> out;
  if (kind_ == DomainKind::Box) {
    for (int face = 0; face < 2 * dim_; ++face) {
      const int axis = face / 2;
      Vec3 nu{0, 0, 0};
      nu[axis] = face % 2 ? 1.0 : -1.0;
      std::vector<int> others;
      for (int a = 0; a < dim_; ++a)
        if (a != axis) others.push_back(a);
      const double fixed = face % 2 ? bounds_[static_cast<std::size_t>(axis)].second
                                    : bounds_[static_cast<std::size_t>(axis)].first;
      const auto& b0 = bounds_[static_cast<std::size_t>(others[0])];
      const Rule1D r0 = gauss_on(b0.first, b0.second, g);
      if (dim_ == 2) {
        for (std::size_t i = 0; i < r0.x.size(); ++i) {
          Vec3 x{0, 0, 0};
          x[axis] = fixed;
          x[others[0]] = r0.x[i];
          out.push_back({x, nu, r0.w[i]});
        }
      } else {
        const auto& b1 = bounds_[static_cast<std::size_t>(others[1])];
        const Rule1D r1 = gauss_on(b1.first, b1.second, g);
        for (std::size_t i = 0; i < r0.x.size(); ++i)
          for (std::size_t j = 0; j < r1.x.size(); ++j) {
            Vec3 x{0, 0, 0};
            x[axis] = fixed;
            x[others[0]] = r0.x[i];
            x[others[1]] = r1.x[j];
            out.push_back({x, nu, r0.w[i] * r1.w[j]});
          }
      }
    }
    return out;
  }
  if (dim_ == 2) {
    const Rule1D t = trapezoid_periodic(1 << (level + 3));
    for (std::size_t a = 0; a < t.x.size(); ++a) {
      BoundaryNode b = radial_boundary(t.x[a], 0, true);
      b.w *= t.w[a];
      out.push_back(b);
    }
    return out;
  }
  const Rule1D th = gauss_on(0, kPi, g);
  const Rule1D ph = trapezoid_periodic(1 << (level + 2));
  for (std::size_t a = 0; a < th.x.size(); ++a)
    for (std::size_t b = 0; b < ph.x.size(); ++b) {
      BoundaryNode bn = radial_boundary(th.x[a], ph.x[b], true);
      bn.w *= th.w[a] * ph.w[b];
      out.push_back(bn);
    }
  return out;
}

std::vector<BoundaryNode> Domain::sample_boundary(int samples) const {
  if (samples < 1) throw InvalidArgument("need at least one boundary sample");
  std::vector<BoundaryNode> out;
  if (kind_ == DomainKind::Box) {
    const int faces = 2 * dim_;
    const int per = std::max(1, dim_ == 2 ? (samples + faces - 1) / faces
                                           : static_cast<int>(std::ceil(std::sqrt(double(samples) / faces))));
    for (int face = 0; face < faces; ++face) {
      Vec3 nu{0, 0, 0};
      nu[face / 2] = face % 2 ? 1.0 : -1.0;
      for (int i = 0; i < per; ++i) {
        const int jmax = dim_ == 2 ? 1 : per;
        for (int j = 0; j < jmax; ++j) {
          const double params[3] = {double(face), (i + 0.5) / per, (j + 0.5) / jmax};
          out.push_back({boundary_point(params), nu, 0});
        }
      }
    }
    return out;
  }
  if (dim_ == 2) {
    for (int k = 0; k < samples; ++k) {
      BoundaryNode b = radial_boundary(2 * kPi * k / samples, 0, true);
      b.w = 0;
      out.push_back(b);
    }
    return out;
  }
  const int nt = std::max(1, static_cast<int>(std::lround(std::sqrt(samples / 2.0))));
  const int np = 2 * nt;
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < np; ++j) {
      BoundaryNode b = radial_boundary(kPi * (i + 0.5) / nt, 2 * kPi * (j + 0.5) / np, true);
      b.w = 0;
      out.push_back(b);
    }
  return out;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

std::vector<std::string> split_args(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& a : out) {
    const auto b = a.find_first_not_of(" \t");
    const auto e = a.find_last_not_of(" \t");
    a = b == std::string::npos ? "" : a.substr(b, e - b + 1);
  }
  return out;
}

double number(const std::string& a) {
  const Expr e = sym::parse(a);
  if (!e.free_variables().empty()) throw InvalidArgument("expected a number, got '" + a + "'");
  return sym::evaluate(e, {});
}

sym::Rational rational(const std::string& a) {
  const Expr e = sym::parse(a);
  if (!e.is_constant()) throw InvalidArgument("expected a rational number, got '" + a + "'");
  return e.constant_value();
}

}  // namespace

Domain parse_domain(const std::string& spec) {
  const auto open = spec.find('(');
  if (open == std::string::npos || spec.back() != ')')
    throw InvalidArgument("domain must look like name(args), got '" + spec + "'");
  std::string name = spec.substr(0, open);
  name.erase(std::remove_if(name.begin(), name.end(), ::isspace), name.end());
  const auto args = split_args(spec.substr(open + 1, spec.size() - open - 2));
  const std::size_t n = args.size();
  auto arity_error = [&]() { return InvalidArgument("wrong number of arguments for " + name + "(...)"); };
  Domain d;
  if (name == "disk") {
    if (n == 1) d = Domain::disk(0, 0, number(args[0]));
    else if (n == 3) d = Domain::disk(number(args[0]), number(args[1]), number(args[2]));
    else throw arity_error();
  } else if (name == "box") {
    if (n != 4 && n != 6) throw arity_error();
    std::vector<std::pair<double, double>> b;
    for (std::size_t i = 0; i < n; i += 2) b.emplace_back(number(args[i]), number(args[i + 1]));
    d = Domain::box(std::move(b));
  } else if (name == "ellipse") {
    if (n == 2) d = Domain::ellipse(rational(args[0]), rational(args[1]));
    else if (n == 4) d = Domain::ellipse(rational(args[0]), rational(args[1]), number(args[2]), number(args[3]));
    else throw arity_error();
  } else if (name == "ball3") {
    if (n == 1) d = Domain::ball3(0, 0, 0, number(args[0]));
    else if (n == 4) d = Domain::ball3(number(args[0]), number(args[1]), number(args[2]), number(args[3]));
    else throw arity_error();
  } else if (name == "radial2d") {
    if (n == 1) d = Domain::radial2d(sym::parse(args[0]));
    else if (n == 3) d = Domain::radial2d(sym::parse(args[0]), {number(args[1]), number(args[2])});
    else throw arity_error();
  } else if (name == "radial3d") {
    if (n == 1) d = Domain::radial3d(sym::parse(args[0]));
    else if (n == 4) d = Domain::radial3d(sym::parse(args[0]), {number(args[1]), number(args[2]), number(args[3])});
    else throw arity_error();
  } else {
    throw InvalidArgument("unknown domain '" + name + "'");
  }
  d.set_description(spec);
  return d;
}

// ---------------------------------------------------------------------------
// integration

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order) {
  if (order < 1 || order > 4096) throw InvalidArgument("Gauss-Legendre order out of range");
  static std::mutex mutex;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  const int n = order;
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    // recompute the derivative at the converged node
    double p0 = 1;
    double p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1);
    const double wi = 2 / ((1 - z * z) * dp * dp);
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = wi;
    w[static_cast<std::size_t>(n - 1 - i)] = wi;
  }
  if (n % 2 == 1) x[static_cast<std::size_t>(n / 2)] = 0.0;
  return cache.emplace(order, std::make_pair(std::move(x), std::move(w))).first->second;
}

unsigned worker_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HK_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return hw;
}

namespace {

double pairwise(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise(v, h) + pairwise(v + h, n - h);
}

// Evaluates `eval(i, out)` for every node into a (nodes x nout) table, then
// returns the weighted pairwise sums per output.
template <class Eval, class Weight, class Coords>
std::vector<double> weighted_sums(std::size_t count, std::size_t nout, int dim, const Eval& eval, const Weight& weight,
                                  const Coords& coords) {
  std::vector<double> table(count * nout);
  const unsigned threads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(std::max<std::size_t>(1, count / 256)));
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::size_t> error_at(threads, count);
  auto work = [&](unsigned t) {
    const std::size_t lo = count * t / threads;
    const std::size_t hi = count * (t + 1) / threads;
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        double* out = &table[i * nout];
        eval(i, out);
        for (std::size_t o = 0; o < nout; ++o)
          if (!std::isfinite(out[o]))
            throw EvaluationSingularity("non-finite integrand value", node_vector(coords(i), dim));
      } catch (const EvaluationSingularity& e) {
        errors[t] = e.node().empty()
                        ? std::make_exception_ptr(EvaluationSingularity(std::string(e.what()) + " at quadrature node",
                                                                        node_vector(coords(i), dim)))
                        : std::current_exception();
        error_at[t] = i;
        return;
      } catch (...) {
        errors[t] = std::current_exception();
        error_at[t] = i;
        return;
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (unsigned t = 0; t < threads; ++t)
    if (errors[t]) std::rethrow_exception(errors[t]);
  std::vector<double> out(nout);
  std::vector<double> col(count);
  for (std::size_t o = 0; o < nout; ++o) {
    for (std::size_t i = 0; i < count; ++i) col[i] = weight(i) * table[i * nout + o];
    out[o] = pairwise(col.data(), count);
  }
  return out;
}

}  // namespace

std::vector<double> volume_sum(const Domain& d, std::size_t nout, const VolumeIntegrand& f, int level) {
  const auto nodes = d.volume_nodes(level);
  return weighted_sums(
      nodes.size(), nout, d.dim(), [&](std::size_t i, double* out) { f(nodes[i].x, out); },
      [&](std::size_t i) { return nodes[i].w; }, [&](std::size_t i) { return nodes[i].x; });
}

std::vector<double> boundary_sum(const Domain& d, std::size_t nout, const BoundaryIntegrand& g, int level) {
  const auto nodes = d.boundary_nodes(level);
  return weighted_sums(
      nodes.size(), nout, d.dim(), [&](std::size_t i, double* out) { g(nodes[i].x, nodes[i].nu, out); },
      [&](std::size_t i) { return nodes[i].w; }, [&](std::size_t i) { return nodes[i].x; });
}

namespace {

QuadResult with_estimate(std::vector<double> fine, std::vector<double> coarse, int level, std::size_t nodes) {
  QuadResult r;
  r.level = level;
  r.nodes = nodes;
  for (std::size_t o = 0; o < fine.size(); ++o) r.errors.push_back(std::fabs(fine[o] - coarse[o]));
  r.values = std::move(fine);
  return r;
}

}  // namespace

QuadResult volume_integral(const Domain& d, std::size_t nout, const VolumeIntegrand& f, int level) {
  if (level < 1) throw InvalidArgument("refinement level must be at least 1");
  auto fine = volume_sum(d, nout, f, level);
  auto coarse = volume_sum(d, nout, f, level - 1);
  return with_estimate(std::move(fine), std::move(coarse), level, d.volume_nodes(level).size());
}

QuadResult boundary_integral(const Domain& d, std::size_t nout, const BoundaryIntegrand& g, int level) {
  if (level < 1) throw InvalidArgument("refinement level must be at least 1");
  auto fine = boundary_sum(d, nout, g, level);
  auto coarse = boundary_sum(d, nout, g, level - 1);
  return with_estimate(std::move(fine), std::move(coarse), level, d.boundary_nodes(level).size());
}

StarShapeReport check_star_shaped(const Domain& d, const fields::DilationFamily& dil, int samples, double tol) {
  if (dil.dim() != d.dim()) throw InvalidArgument("dilation and domain dimensions differ");
  StarShapeReport r;
  r.tolerance = tol;
  const auto nodes = d.sample_boundary(samples);
  r.samples = static_cast<int>(nodes.size());
  bool first = true;
  for (const auto& b : nodes) {
    double v = 0;
    for (int i = 0; i < d.dim(); ++i) v += dil.sigma()[static_cast<std::size_t>(i)] * b.x[i] * b.nu[i];
    if (first || v < r.min_value) {
      r.min_value = v;
      r.argmin = b.x;
      r.argmin_normal = b.nu;
      first = false;
    }
  }
  r.pass = r.min_value >= -tol;
  return r;
}

}  // namespace hk::geometry
