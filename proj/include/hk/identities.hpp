#pragma once

// Pohozaev-type integral identities assembled term by term, nodewise
// boundary identities, and audits of the non-existence hypotheses.
//
// Every term value carries its sign, so lhs and rhs are the plain sums of
// the terms on each side in the order listed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hk/calculus.hpp"
#include "hk/geometry.hpp"

namespace hk::identities {

using calculus::Fields;
using calculus::Functional1;
using calculus::Functional2;
using fields::DilationFamily;
using geometry::Domain;
using sym::Expr;
using sym::Rational;

enum class Side { Lhs, Rhs };

struct Term {
  std::string label;
  Side side = Side::Lhs;
  double value = 0;
  double error = 0;  // |value(L) - value(L-1)|
};

struct IdentityReport {
  std::string identity;  // "poho1", "poho-pde", "poho-bvp0", "claimed-a", "poho2", "poho2-biharmonic"
  std::vector<Term> terms;
  double lhs = 0;
  double rhs = 0;
  double abs_residual = 0;
  double rel_residual = 0;  // |lhs - rhs| / (1 + sum |term|)
  double tolerance = 1e-6;
  bool pass = false;
  int level = 0;
  std::size_t volume_nodes = 0;
  std::size_t boundary_nodes = 0;
  std::vector<std::pair<std::string, double>> parameters;  // e.g. ("a", 0.5), ("q", 3)
  std::vector<std::string> notes;

  const Term* find(const std::string& label) const;
};

// Recomputes lhs/rhs/residuals/verdict from the terms.
void finalize(IdentityReport& r);

struct QuadratureOptions {
  int level = 3;
  double tolerance = 1e-6;
};

// Pohozaev identity for first-order functionals, valid for every C^2 u.
IdentityReport verify_poho_order1(const Fields& X, const DilationFamily& d, const Functional1& F, const Expr& u,
                                  const Domain& dom, const QuadratureOptions& q = {});

// Max over the nodes of |value| with its witness.
struct NodewiseReport {
  std::string name;
  double max_defect = 0;
  std::vector<double> witness;
  double tolerance = 1e-10;
  bool pass = false;
  std::size_t nodes = 0;
};

struct PdeReport {
  IdentityReport pde;
  bool el_symbolic_zero = false;
  double max_el_residual = 0;  // over volume nodes
  bool dirichlet = false;
  double max_boundary_u = 0;
  std::optional<NodewiseReport> boundary_reduction;
  std::optional<IdentityReport> claimed;  // int <F_p, grad_X u> + u F_z = 0
  std::vector<IdentityReport> bvp;        // one per a
  bool pass() const;
};

// Solution-only identities. Throws NotASolution if the Euler-Lagrange
// residual is not zero (symbolically, or numerically within
// 1e-9 (1 + max |terms|) on the volume nodes), NotDirichlet if `dirichlet`
// and max |u| on the boundary nodes exceeds 1e-12.
PdeReport verify_poho_pde(const Fields& X, const DilationFamily& d, const Functional1& F, const Expr& u,
                          const Domain& dom, const std::vector<Rational>& a_values, bool dirichlet,
                          const QuadratureOptions& q = {});

// Nodewise |Tu <F_p, nu_X> - <T, nu> <F_p, grad_X u>| on the boundary nodes.
// Throws NotDirichlet if u does not vanish there.
NodewiseReport check_boundary_reduction_order1(const Fields& X, const DilationFamily& d, const Functional1& F,
                                               const Expr& u, const Domain& dom, int level = 3);

struct Order2Report {
  IdentityReport general;
  std::optional<IdentityReport> biharmonic;  // specialized display for the biharmonic preset
};

// Pohozaev identity for functionals depending on the X-Hessian, every C^4 u.
Order2Report verify_poho_order2(const Fields& X, const DilationFamily& d, const Functional2& F, const Expr& u,
                                const Domain& dom, const QuadratureOptions& q = {});

struct BoundaryOrder2Report {
  NodewiseReport identity;  // X_i(Tu) <X_j, nu> = <T, nu> X_j(X_i u), max over (i, j) and nodes
  std::optional<NodewiseReport> induced_f;  // sum_ij (X_i(F_rji) Tu - F_rij X_i(Tu)) <X_j,nu> = <T,nu> f
  double max_boundary_u = 0;
  double max_boundary_grad = 0;
};

// Requires u = 0 and grad u = 0 on the boundary nodes (1e-12), else
// PreconditionViolated with the worst node.
BoundaryOrder2Report check_boundary_identity_order2(const Fields& X, const DilationFamily& d, const Expr& u,
                                                    const Domain& dom, const Functional2* F = nullptr,
                                                    int level = 3);

// ---------------------------------------------------------------------------
// hypothesis audits

struct Witness {
  std::vector<std::pair<std::string, double>> point;
  double value = 0;
};

struct HypothesisAudit {
  std::string id;  // "i", "ii", "iii", "growth", "growth-hor"
  std::string statement;
  std::string grid;
  std::size_t samples = 0;
  std::size_t skipped = 0;  // samples where evaluation was singular
  double min_value = 0;
  double max_value = 0;
  std::vector<Witness> witnesses;
  bool pass = false;
  bool exact = false;  // verdict from a closed-form reduction, not sampling
  std::optional<double> a0;
  std::vector<std::string> notes;
};

struct AuditSampler {
  double z_max = 4;
  double p_max = 4;
  double r_max = 4;
  int grid = 17;  // points per axis (odd, so 0 is included)
  std::vector<Rational> a0;  // candidate values for condition (ii), order 1
  int boundary_samples = 16;
  std::size_t max_points = 200000;
};

std::vector<HypothesisAudit> audit_nonexistence_order1(const Functional1& F, const DilationFamily& d,
                                                       const Domain& dom, const AuditSampler& s = {});
std::vector<HypothesisAudit> audit_nonexistence_order2(const Functional2& F, const DilationFamily& d,
                                                       const Domain& dom, const AuditSampler& s = {});

// G(z) < rho z G'(z) for every z != 0, together with G'(0) = 0. Exact for
// monomial G = c z^s; sampled on [-z_max, z_max] otherwise. `label` names rho.
HypothesisAudit growth_audit(const Expr& G, const Rational& rho, const std::string& id, const std::string& label,
                             double z_max = 4, int grid = 17);

// Closed-form exponents: rho = 1/k - 1/n, rho_q = 1/k - 1/q.
Rational growth_rho(const Rational& k, int dim);

// Classical Pohozaev grouping for Euclidean fields and F = |p|^2/2 - G(z):
// ((n-2)/2) int |grad u|^2 - n int G(u) + 1/2 oint |du/dnu|^2 <x, nu>.
struct ClassicalPohozaev {
  double gradient_term = 0;
  double potential_term = 0;
  double boundary_term = 0;
  double sum = 0;
};

ClassicalPohozaev classical_pohozaev(int n, const Expr& G, const Expr& u, const Domain& dom, int level = 3);

}  // namespace hk::identities
