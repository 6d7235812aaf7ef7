#pragma once

// Config-driven batch runs: parse a sectioned key/value file describing the
// family, dilation, functional, u, domain and checks, run the checks in
// order and produce one JSON report per check plus a text summary.
//
//   [family]      preset = grushin(1,1,1)    or   X1 = 1, 0   X2 = 0, x1
//   [dilation]    sigma = 1, 2
//   [functional]  preset = dirichlet-k-laplacian  k = 2  G = (^ z 4)
//                 or  F = <expr>   [order = 1|2]
//   [u]           expr = <expr>
//   [domain]      spec = disk(0,0,1)
//   [quadrature]  level = 3   tolerance = 1e-6
//   [checks]      run = h1, h2, star-shaped, poho1, poho-pde, poho2, boundary-id2, audit1, audit2
//   [poho-pde]    a = 0, 1, -1/2   dirichlet = true
//   [star]        samples = 2048   tolerance = 1e-12
//   [h2]          point = 0, 0     extra = 1, 1; 2, -1     max_step = 3
//   [audit]       z_max p_max r_max grid a0 boundary_samples max_points
//
// Expressions use the prefix grammar of hk::sym::parse.

#include <optional>
#include <string>
#include <vector>

#include "hk/fields.hpp"
#include "hk/identities.hpp"

namespace hk::runner {

struct CheckSpec {
  std::string name;
  int line = 0;
};

struct RunConfig {
  std::string source;  // path or "<string>"
  fields::Family family;
  std::string family_text;
  std::optional<calculus::Functional1> functional1;
  std::optional<calculus::Functional2> functional2;
  std::string functional_text;
  std::optional<sym::Expr> u;
  std::optional<geometry::Domain> domain;
  identities::QuadratureOptions quadrature;
  std::vector<CheckSpec> checks;
  std::vector<sym::Rational> pde_a;
  bool pde_dirichlet = false;
  int star_samples = 2048;
  double star_tolerance = 1e-12;
  std::optional<fields::SamplePoint> h2_point;
  std::vector<fields::SamplePoint> h2_extra;
  std::optional<int> h2_max_step;
  identities::AuditSampler audit;
};

// Throws ConfigError with the offending line and key. Every check's inputs
// are validated here, before any computation.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

struct CheckOutcome {
  std::string name;
  bool pass = false;
  std::string summary;  // "poho1: PASS (rel residual 3.2e-09)"
  std::string report;   // JSON, deterministic
};

enum ExitCode : int { kAllPass = 0, kCheckFailed = 1, kConfigError = 2, kNumericError = 3 };

struct RunResult {
  std::vector<CheckOutcome> outcomes;
  int exit_code = kAllPass;
  std::string error;  // set with exit code 3
  std::string summary() const;
};

// Runs the checks sequentially. Precondition violations (NotASolution,
// NotDirichlet, PreconditionViolated) fail the check; numeric errors stop
// the run with exit code 3.
RunResult run_checks(const RunConfig& cfg);

// Writes <stem>.<check>.json and <stem>.summary.txt into `dir`.
void write_reports(const RunResult& r, const std::string& dir, const std::string& stem);

std::string list_presets();
// Throws InvalidArgument for an unknown check name.
std::string explain(const std::string& check);
const std::vector<std::string>& check_names();

}  // namespace hk::runner
