#pragma once

// Bounded domains in R^2 and R^3 with parametrized boundaries, outward
// normals, tensor-product quadrature and the delta_lambda star-shape test.
//
// Boundary parameters:
//   Box            (face, u, v): face = 2*axis + side, side 0 = lower bound;
//                  u, v in [0,1] run over the remaining axes in order.
//   RadialStar2D   (theta):      x = c + r(theta) (cos theta, sin theta)
//   ProductRadial3D (theta, phi): x = c + rho(theta,phi) (sin t cos p, sin t sin p, cos t)
//
// Radius expressions use the auxiliary symbols `theta` and `phi`.

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hk/compiled.hpp"
#include "hk/expr.hpp"
#include "hk/fields.hpp"

namespace hk::geometry {

using sym::Expr;

enum class DomainKind { Box, RadialStar2D, ProductRadial3D };

using Vec3 = std::array<double, 3>;  // unused trailing components are 0 in 2D

struct VolumeNode {
  Vec3 x;
  double w;
};

struct BoundaryNode {
  Vec3 x;
  Vec3 nu;  // outward unit normal
  double w;  // quadrature weight times surface Jacobian
};

class Domain {
 public:
  static Domain box(std::vector<std::pair<double, double>> bounds);
  static Domain radial2d(const Expr& radius, std::array<double, 2> center = {0, 0});
  static Domain radial3d(const Expr& radius, Vec3 center = {0, 0, 0});

  static Domain disk(double cx, double cy, double R);
  static Domain ellipse(const sym::Rational& a, const sym::Rational& b, double cx = 0, double cy = 0);
  static Domain ball3(double cx, double cy, double cz, double R);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::string& description() const { return description_; }
  void set_description(std::string d) { description_ = std::move(d); }

  Vec3 boundary_point(std::span<const double> params) const;
  // Unit outward normal; DegenerateTangent if the tangent Jacobian is below 1e-12.
  Vec3 outward_normal(std::span<const double> params) const;

  // Quadrature at refinement level L >= 0: Gauss-Legendre of order 2^(L+1)
  // per radial / box axis, 2^(L+3) trapezoid nodes in a 2D angle,
  // 2^(L+1) Gauss nodes in theta and 2^(L+2) trapezoid nodes in phi.
  std::vector<VolumeNode> volume_nodes(int level) const;
  std::vector<BoundaryNode> boundary_nodes(int level) const;

  // Boundary sample nodes for the star-shape test (weights unused).
  std::vector<BoundaryNode> sample_boundary(int samples) const;

 private:
  struct Radius;
  Vec3 radial_point(double theta, double phi, double s, double* jac) const;
  BoundaryNode radial_boundary(double theta, double phi, bool check) const;

  DomainKind kind_ = DomainKind::Box;
  int dim_ = 2;
  std::vector<std::pair<double, double>> bounds_;
  Vec3 center_{0, 0, 0};
  std::shared_ptr<const Radius> radius_;
  std::string description_;
};

// Parses "disk(cx,cy,R)", "disk(R)", "box(lo1,hi1,lo2,hi2[,lo3,hi3])",
// "ellipse(a,b[,cx,cy])", "ball3(R)", "ball3(cx,cy,cz,R)",
// "radial2d(expr[,cx,cy])", "radial3d(expr[,cx,cy,cz])".
Domain parse_domain(const std::string& spec);

using VolumeIntegrand = std::function<void(const Vec3& x, double* out)>;
using BoundaryIntegrand = std::function<void(const Vec3& x, const Vec3& nu, double* out)>;

struct QuadResult {
  std::vector<double> values;
  std::vector<double> errors;  // |value(L) - value(L-1)|
  int level = 0;
  std::size_t nodes = 0;
};

// Weighted sums at a single level (pairwise summation, deterministic for any
// thread count). EvaluationSingularity thrown by the integrand is re-raised
// with the offending node attached.
std::vector<double> volume_sum(const Domain& d, std::size_t nout, const VolumeIntegrand& f, int level);
std::vector<double> boundary_sum(const Domain& d, std::size_t nout, const BoundaryIntegrand& g, int level);

QuadResult volume_integral(const Domain& d, std::size_t nout, const VolumeIntegrand& f, int level);
QuadResult boundary_integral(const Domain& d, std::size_t nout, const BoundaryIntegrand& g, int level);

struct StarShapeReport {
  bool pass = false;
  double min_value = 0;  // min of <T(x), nu> over samples
  Vec3 argmin{0, 0, 0};
  Vec3 argmin_normal{0, 0, 0};
  int samples = 0;
  double tolerance = 1e-12;
};

StarShapeReport check_star_shaped(const Domain& d, const fields::DilationFamily& dil, int samples = 2048,
                                  double tol = 1e-12);

// Gauss-Legendre nodes and weights on [-1, 1].
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order);

// Threads used for node evaluation: hardware concurrency capped by HK_THREADS.
unsigned worker_threads();

}  // namespace hk::geometry
