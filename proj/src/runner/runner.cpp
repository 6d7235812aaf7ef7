#include "hk/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hk/error.hpp"
#include "json.hpp"

namespace hk::runner {

namespace {

using json = nlohmann::ordered_json;
using sym::Expr;
using sym::Rational;
using sym::Var;
using sym::VarKind;

const std::vector<std::string> kChecks{"h1",    "h2",           "star-shaped", "poho1", "poho-pde",
                                       "poho2", "boundary-id2", "audit1",      "audit2"};

const std::map<std::string, std::set<std::string>> kSections{
    {"family", {"preset"}},  // plus X1, X2, ...
    {"dilation", {"sigma"}},
    {"functional", {"preset", "k", "G", "F", "order"}},
    {"u", {"expr"}},
    {"domain", {"spec"}},
    {"quadrature", {"level", "tolerance"}},
    {"checks", {"run"}},
    {"poho-pde", {"a", "dirichlet"}},
    {"star", {"samples", "tolerance"}},
    {"h2", {"point", "extra", "max_step"}},
    {"audit", {"z_max", "p_max", "r_max", "grid", "a0", "boundary_samples", "max_points"}},
};

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

bool is_field_key(const std::string& k) {
  return k.size() > 1 && k[0] == 'X' && std::all_of(k.begin() + 1, k.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

class Parser {
 public:
  explicit Parser(std::map<std::string, Section> s) : s_(std::move(s)) {}

  const Entry* get(const std::string& sec, const std::string& key) const {
    const auto it = s_.find(sec);
    if (it == s_.end()) return nullptr;
    const auto jt = it->second.find(key);
    return jt == it->second.end() ? nullptr : &jt->second;
  }
  bool has_section(const std::string& sec) const { return s_.count(sec) != 0; }
  const Section* section(const std::string& sec) const {
    const auto it = s_.find(sec);
    return it == s_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::string, Section> s_;
};

[[noreturn]] void fail(const Entry& e, const std::string& key, const std::string& what) {
  throw ConfigError(what, e.line, key);
}

long parse_int(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  std::size_t pos = 0;
  long out = 0;
  try {
    out = std::stol(v, &pos);
  } catch (const std::exception&) {
    fail(e, key, "expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) fail(e, key, "expected an integer, got '" + v + "'");
  return out;
}

double parse_double(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  std::size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    fail(e, key, "expected a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(out)) fail(e, key, "expected a finite number, got '" + v + "'");
  return out;
}

Rational parse_q(const std::string& text, const Entry& e, const std::string& key) {
  try {
    return sym::parse_rational(trim(text));
  } catch (const Error&) {
    fail(e, key, "expected a rational number, got '" + trim(text) + "'");
  }
}

bool parse_bool(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  fail(e, key, "expected true or false, got '" + v + "'");
}

Expr parse_expr(const std::string& text, const Entry& e, const std::string& key) {
  try {
    return sym::parse(text);
  } catch (const Error& ex) {
    fail(e, key, std::string("cannot parse expression: ") + ex.what());
  }
}

// Rejects variables outside x1..xn, and z/p/r unless allowed.
void check_vars(const Expr& ex, int n, int m, bool zp, bool r, const Entry& e, const std::string& key) {
  for (Var v : ex.free_variables()) {
    bool ok = false;
    switch (v.kind()) {
      case VarKind::Space: ok = v.index() >= 1 && v.index() <= n; break;
      case VarKind::Z: ok = zp; break;
      case VarKind::P: ok = zp && v.index() <= m; break;
      case VarKind::R: ok = r && v.index() <= m && v.index2() <= m; break;
      case VarKind::Aux: ok = false; break;
    }
    if (!ok) fail(e, key, "variable '" + v.name() + "' is not allowed here");
  }
}

std::vector<int> preset_args(const std::string& text, const std::string& name, const Entry& e) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string::npos || close != text.size() - 1)
    fail(e, "preset", "expected " + name + "(...), got '" + text + "'");
  std::vector<int> out;
  Entry sub{text.substr(open + 1, close - open - 1), e.line};
  for (const auto& a : split(sub.value, ',')) out.push_back(static_cast<int>(parse_int(Entry{a, e.line}, "preset")));
  return out;
}

fields::Family parse_family(const Parser& P, std::string& text) {
  const Section* sec = P.section("family");
  if (!sec) throw ConfigError("missing [family] section");
  const Entry* preset = P.get("family", "preset");
  std::vector<std::pair<int, const Entry*>> fkeys;
  for (const auto& [k, e] : *sec)
    if (is_field_key(k)) fkeys.emplace_back(std::stoi(k.substr(1)), &e);
  if (preset && !fkeys.empty()) fail(*preset, "preset", "give either a preset or explicit fields, not both");
  if (preset) {
    const std::string v = trim(preset->value);
    text = v;
    const std::string name = v.substr(0, v.find('('));
    try {
      if (name == "euclidean") {
        const auto a = preset_args(v, name, *preset);
        if (a.size() != 1) fail(*preset, "preset", "euclidean(n) takes one argument");
        return fields::euclidean(a[0]);
      }
      if (name == "grushin") {
        const auto a = preset_args(v, name, *preset);
        if (a.size() != 3) fail(*preset, "preset", "grushin(n1,n2,k) takes three arguments");
        return fields::grushin(a[0], a[1], a[2]);
      }
      if (name == "bony") {
        const auto a = preset_args(v, name, *preset);
        if (a.size() != 1) fail(*preset, "preset", "bony(n) takes one argument");
        return fields::bony(a[0]);
      }
    } catch (const InvalidArgument& ex) {
      fail(*preset, "preset", ex.what());
    }
    fail(*preset, "preset", "unknown family preset '" + name + "' (see list-presets)");
  }
  if (fkeys.empty()) throw ConfigError("[family] needs a preset or fields X1, X2, ...");
  std::sort(fkeys.begin(), fkeys.end());
  fields::Family fam;
  fam.name = "explicit";
  int n = -1;
  for (std::size_t i = 0; i < fkeys.size(); ++i) {
    const auto& [idx, e] = fkeys[i];
    const std::string key = "X" + std::to_string(idx);
    if (idx != static_cast<int>(i) + 1) fail(*e, key, "fields must be numbered X1, X2, ... without gaps");
    std::vector<Expr> coeffs;
    for (const auto& c : split(e->value, ',')) coeffs.push_back(parse_expr(c, *e, key));
    if (coeffs.empty()) fail(*e, key, "empty coefficient list");
    if (n < 0) n = static_cast<int>(coeffs.size());
    if (static_cast<int>(coeffs.size()) != n) fail(*e, key, "all fields need the same number of coefficients");
    for (const auto& c : coeffs) {
      check_vars(c, n, 0, false, false, *e, key);
      if (!c.is_polynomial()) fail(*e, key, "coefficients must be polynomials in x1..xn");
    }
    fam.fields.emplace_back(std::move(coeffs));
    text += (i ? "; " : "") + key + " = " + fam.fields.back().str();
  }
  return fam;
}

void parse_sigma(const Parser& P, fields::Family& fam) {
  const Entry* e = P.get("dilation", "sigma");
  if (!e) {
    if (fam.name == "explicit") throw ConfigError("explicit fields need [dilation] sigma");
    return;
  }
  std::vector<int> sigma;
  for (const auto& s : split(e->value, ',')) sigma.push_back(static_cast<int>(parse_int(Entry{s, e->line}, "sigma")));
  const int n = fam.fields.empty() ? 0 : fam.fields.front().dim();
  if (static_cast<int>(sigma.size()) != n)
    fail(*e, "sigma", "sigma has " + std::to_string(sigma.size()) + " entries but the fields live in R^" +
                          std::to_string(n));
  if (sigma.empty() || sigma[0] != 1) fail(*e, "sigma", "sigma must start with 1 (1 = s1 <= ... <= sn)");
  for (std::size_t i = 1; i < sigma.size(); ++i)
    if (sigma[i] < sigma[i - 1]) fail(*e, "sigma", "sigma must be non-decreasing (1 = s1 <= ... <= sn)");
  try {
    fam.dilation = fields::DilationFamily(sigma);
  } catch (const InvalidArgument& ex) {
    fail(*e, "sigma", ex.what());
  }
}

void parse_functional(const Parser& P, RunConfig& cfg, int n, int m) {
  if (!P.has_section("functional")) return;
  const Entry* preset = P.get("functional", "preset");
  const Entry* Fe = P.get("functional", "F");
  const Entry* Ge = P.get("functional", "G");
  const Entry* ke = P.get("functional", "k");
  const Entry* oe = P.get("functional", "order");
  if (preset && Fe) fail(*Fe, "F", "give either a preset or F, not both");
  Expr G;
  if (Ge) {
    if (!preset) fail(*Ge, "G", "G is only used with a preset");
    G = parse_expr(Ge->value, *Ge, "G");
    for (Var v : G.free_variables())
      if (v.kind() != VarKind::Z) fail(*Ge, "G", "G may only depend on z");
  }
  if (preset) {
    const std::string name = trim(preset->value);
    cfg.functional_text = name;
    if (name == "dirichlet-k-laplacian") {
      Rational k(2);
      if (ke) k = parse_q(ke->value, *ke, "k");
      if (k <= 1) fail(*ke, "k", "k must be greater than 1");
      cfg.functional1 = calculus::dirichlet_k_laplacian(n, m, k, G);
      cfg.functional2 = calculus::Functional2(cfg.functional1->F(), n, m);
      cfg.functional_text += " (k = " + sym::to_string(k) + ", G = " + sym::to_string(G) + ")";
    } else if (name == "horizontal-biharmonic") {
      if (ke) fail(*ke, "k", "k is not a parameter of horizontal-biharmonic");
      cfg.functional2 = calculus::horizontal_biharmonic(n, m, G);
      cfg.functional_text += " (G = " + sym::to_string(G) + ")";
    } else {
      fail(*preset, "preset", "unknown functional preset '" + name + "' (see list-presets)");
    }
    if (oe) fail(*oe, "order", "order is implied by the preset");
    return;
  }
  if (!Fe) throw ConfigError("[functional] needs a preset or F");
  if (ke) fail(*ke, "k", "k is only used with a preset");
  const Expr F = parse_expr(Fe->value, *Fe, "F");
  int order = 0;
  if (oe) {
    order = static_cast<int>(parse_int(*oe, "order"));
    if (order != 1 && order != 2) fail(*oe, "order", "order must be 1 or 2");
  }
  check_vars(F, n, m, true, order != 1, *Fe, "F");
  cfg.functional2 = calculus::Functional2(F, n, m);
  if (!cfg.functional2->depends_on_r()) cfg.functional1 = calculus::Functional1(F, n, m);
  cfg.functional_text = sym::to_string(F);
}

void require(bool ok, const CheckSpec& c, const std::string& what) {
  if (!ok) throw ConfigError("check '" + c.name + "' needs " + what, c.line, "run");
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", line);
      current = trim(s.substr(1, s.size() - 2));
      if (!kSections.count(current)) throw ConfigError("unknown section [" + current + "]", line, current);
      if (sections.count(current)) throw ConfigError("duplicate section [" + current + "]", line, current);
      sections[current];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    if (current.empty()) throw ConfigError("key outside of a section", line, trim(s.substr(0, eq)));
    const std::string key = trim(s.substr(0, eq));
    const bool known = kSections.at(current).count(key) != 0 || (current == "family" && is_field_key(key));
    if (!known) throw ConfigError("unknown key in [" + current + "]", line, key);
    auto& sec = sections[current];
    if (sec.count(key)) throw ConfigError("duplicate key", line, key);
    sec[key] = Entry{trim(s.substr(eq + 1)), line};
  }
  const Parser P(std::move(sections));

  RunConfig cfg;
  cfg.source = source;
  cfg.family = parse_family(P, cfg.family_text);
  if (cfg.family.fields.empty()) throw ConfigError("the family has no fields");
  parse_sigma(P, cfg.family);
  const int n = cfg.family.dilation.dim();
  const int m = static_cast<int>(cfg.family.fields.size());
  parse_functional(P, cfg, n, m);

  if (const Entry* e = P.get("u", "expr")) {
    cfg.u = parse_expr(e->value, *e, "expr");
    check_vars(*cfg.u, n, m, false, false, *e, "expr");
  } else if (P.has_section("u")) {
    throw ConfigError("[u] needs expr");
  }
  if (const Entry* e = P.get("domain", "spec")) {
    try {
      cfg.domain = geometry::parse_domain(e->value);
    } catch (const Error& ex) {
      fail(*e, "spec", ex.what());
    }
    if (cfg.domain->dim() != n)
      fail(*e, "spec", "domain lives in R^" + std::to_string(cfg.domain->dim()) + " but the fields in R^" +
                           std::to_string(n));
  } else if (P.has_section("domain")) {
    throw ConfigError("[domain] needs spec");
  }

  if (const Entry* e = P.get("quadrature", "level")) {
    const long L = parse_int(*e, "level");
    if (L < 1 || L > 8) fail(*e, "level", "level must be in 1..8");
    cfg.quadrature.level = static_cast<int>(L);
  }
  if (const Entry* e = P.get("quadrature", "tolerance")) {
    cfg.quadrature.tolerance = parse_double(*e, "tolerance");
    if (cfg.quadrature.tolerance <= 0) fail(*e, "tolerance", "tolerance must be positive");
  }
  if (const Entry* e = P.get("poho-pde", "a"))
    for (const auto& a : split(e->value, ',')) cfg.pde_a.push_back(parse_q(a, *e, "a"));
  if (const Entry* e = P.get("poho-pde", "dirichlet")) cfg.pde_dirichlet = parse_bool(*e, "dirichlet");
  if (const Entry* e = P.get("star", "samples")) {
    const long v = parse_int(*e, "samples");
    if (v < 4 || v > 1000000) fail(*e, "samples", "samples must be in 4..1000000");
    cfg.star_samples = static_cast<int>(v);
  }
  if (const Entry* e = P.get("star", "tolerance")) {
    cfg.star_tolerance = parse_double(*e, "tolerance");
    if (cfg.star_tolerance < 0) fail(*e, "tolerance", "tolerance must be non-negative");
  }

  auto parse_point = [&](const std::string& text, const Entry& e, const std::string& key) {
    std::vector<Rational> c;
    for (const auto& s : split(text, ',')) c.push_back(parse_q(s, e, key));
    if (static_cast<int>(c.size()) != n) fail(e, key, "point needs " + std::to_string(n) + " coordinates");
    return fields::SamplePoint::rational(std::move(c));
  };
  if (const Entry* e = P.get("h2", "point")) cfg.h2_point = parse_point(e->value, *e, "point");
  if (const Entry* e = P.get("h2", "extra"))
    for (const auto& pt : split(e->value, ';')) cfg.h2_extra.push_back(parse_point(pt, *e, "extra"));
  if (const Entry* e = P.get("h2", "max_step")) {
    const long v = parse_int(*e, "max_step");
    if (v < 1 || v > fields::kMaxBracketStep) fail(*e, "max_step", "max_step must be in 1..12");
    cfg.h2_max_step = static_cast<int>(v);
  }

  auto positive = [&](const char* key, double& dst) {
    if (const Entry* e = P.get("audit", key)) {
      dst = parse_double(*e, key);
      if (dst <= 0) fail(*e, key, "must be positive");
    }
  };
  positive("z_max", cfg.audit.z_max);
  positive("p_max", cfg.audit.p_max);
  positive("r_max", cfg.audit.r_max);
  if (const Entry* e = P.get("audit", "grid")) {
    const long g = parse_int(*e, "grid");
    if (g < 3 || g > 101 || g % 2 == 0) fail(*e, "grid", "grid must be odd and in 3..101");
    cfg.audit.grid = static_cast<int>(g);
  }
  if (const Entry* e = P.get("audit", "a0"))
    for (const auto& a : split(e->value, ',')) cfg.audit.a0.push_back(parse_q(a, *e, "a0"));
  if (const Entry* e = P.get("audit", "boundary_samples")) {
    const long v = parse_int(*e, "boundary_samples");
    if (v < 1 || v > 100000) fail(*e, "boundary_samples", "boundary_samples must be in 1..100000");
    cfg.audit.boundary_samples = static_cast<int>(v);
  }
  if (const Entry* e = P.get("audit", "max_points")) {
    const long v = parse_int(*e, "max_points");
    if (v < 1) fail(*e, "max_points", "max_points must be positive");
    cfg.audit.max_points = static_cast<std::size_t>(v);
  }

  if (const Entry* e = P.get("checks", "run")) {
    std::set<std::string> seen;
    for (const auto& name : split(e->value, ',')) {
      if (std::find(kChecks.begin(), kChecks.end(), name) == kChecks.end())
        fail(*e, "run", "unknown check '" + name + "'");
      if (!seen.insert(name).second) fail(*e, "run", "check '" + name + "' listed twice");
      cfg.checks.push_back({name, e->line});
    }
  }

  // every check's inputs are present and consistent before anything runs
  for (const auto& c : cfg.checks) {
    if (c.name == "star-shaped") require(cfg.domain.has_value(), c, "[domain]");
    if (c.name == "poho1" || c.name == "poho-pde" || c.name == "poho2") {
      require(cfg.u.has_value(), c, "[u]");
      require(cfg.domain.has_value(), c, "[domain]");
    }
    if (c.name == "poho1" || c.name == "poho-pde" || c.name == "audit1")
      require(cfg.functional1.has_value(), c, "a first-order [functional] (no r variables)");
    if (c.name == "poho2" || c.name == "audit2") require(cfg.functional2.has_value(), c, "a [functional]");
    if (c.name == "audit1" || c.name == "audit2") require(cfg.domain.has_value(), c, "[domain]");
    if (c.name == "boundary-id2") {
      require(cfg.u.has_value(), c, "[u]");
      require(cfg.domain.has_value(), c, "[domain]");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

// ---------------------------------------------------------------------------
// reports

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json vec3(const geometry::Vec3& v, int dim) { return vec(std::vector<double>(v.begin(), v.begin() + dim)); }

json to_json(const identities::IdentityReport& r) {
  json j;
  j["identity"] = r.identity;
  j["pass"] = r.pass;
  j["level"] = r.level;
  j["volume_nodes"] = r.volume_nodes;
  j["boundary_nodes"] = r.boundary_nodes;
  json terms = json::array();
  for (const auto& t : r.terms)
    terms.push_back({{"label", t.label},
                     {"side", t.side == identities::Side::Lhs ? "lhs" : "rhs"},
                     {"value", num(t.value)},
                     {"error", num(t.error)}});
  j["terms"] = terms;
  j["lhs"] = num(r.lhs);
  j["rhs"] = num(r.rhs);
  j["abs_residual"] = num(r.abs_residual);
  j["rel_residual"] = num(r.rel_residual);
  j["tolerance"] = r.tolerance;
  json params = json::object();
  for (const auto& [k, v] : r.parameters) params[k] = num(v);
  j["parameters"] = params;
  j["notes"] = r.notes;
  return j;
}

json to_json(const identities::NodewiseReport& r) {
  return {{"name", r.name},       {"pass", r.pass},   {"max_defect", num(r.max_defect)},
          {"witness", vec(r.witness)}, {"tolerance", r.tolerance}, {"nodes", r.nodes}};
}

json to_json(const identities::HypothesisAudit& a) {
  json j;
  j["id"] = a.id;
  j["statement"] = a.statement;
  j["pass"] = a.pass;
  j["exact"] = a.exact;
  j["grid"] = a.grid;
  j["samples"] = a.samples;
  j["skipped"] = a.skipped;
  j["min_value"] = num(a.min_value);
  j["max_value"] = num(a.max_value);
  j["a0"] = a.a0 ? num(*a.a0) : json(nullptr);
  json w = json::array();
  for (const auto& x : a.witnesses) {
    json pt = json::object();
    for (const auto& [k, v] : x.point) pt[k] = num(v);
    w.push_back({{"point", pt}, {"value", num(x.value)}});
  }
  j["witnesses"] = w;
  j["notes"] = a.notes;
  return j;
}

json homogeneity(const fields::Homogeneity& h) {
  return {{"homogeneous", h.homogeneous}, {"zero_field", h.zero_field}, {"alpha", sym::to_string(h.alpha)}};
}

json header(const RunConfig& cfg, const std::string& check) {
  json j;
  j["check"] = check;
  j["family"] = cfg.family_text;
  j["sigma"] = cfg.family.dilation.sigma();
  j["q"] = fields::homogeneous_dimension(cfg.family.dilation);
  if (!cfg.functional_text.empty()) j["functional"] = cfg.functional_text;
  if (cfg.u) j["u"] = sym::to_string(*cfg.u);
  if (cfg.domain) j["domain"] = cfg.domain->description();
  return j;
}

std::string verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

std::string audit_summary(const std::vector<identities::HypothesisAudit>& audits) {
  std::string s;
  for (const auto& a : audits) s += (s.empty() ? "" : ", ") + a.id + " " + (a.pass ? "pass" : "fail");
  return s;
}

CheckOutcome run_one(const RunConfig& cfg, const std::string& name) {
  namespace id = identities;
  CheckOutcome out;
  out.name = name;
  json j = header(cfg, name);
  const auto& X = cfg.family.fields;
  const auto& d = cfg.family.dilation;
  const int n = d.dim();
  std::string detail;
  try {
    if (name == "h1") {
      const auto r = fields::check_H1(X, d);
      json deg = json::array();
      for (const auto& h : r.degrees) deg.push_back(homogeneity(h));
      j["degrees"] = deg;
      j["offending"] = r.offending;
      j["independent"] = r.independent;
      j["rank"] = r.rank;
      j["notes"] = r.notes;
      out.pass = r.pass;
      if (!r.offending.empty()) {
        detail = "not homogeneous of degree 1:";
        for (int i : r.offending) detail += " X" + std::to_string(i + 1);
      } else if (!r.independent) {
        detail = "fields not linearly independent";
      } else {
        detail = std::to_string(X.size()) + " fields of degree 1";
      }
    } else if (name == "h2") {
      const auto basis = fields::generate_lie_basis(X, d, cfg.h2_max_step);
      const auto r = fields::check_H2(basis, n, cfg.h2_point ? *cfg.h2_point : fields::SamplePoint::origin(n),
                                      cfg.h2_extra);
      j["words"] = r.words;
      j["max_step"] = r.max_step;
      j["default_cutoff"] = r.default_cutoff;
      j["primary"] = {{"point", vec(r.primary.point)},
                      {"exact", r.primary.exact},
                      {"rank", r.primary.rank},
                      {"pass", r.primary.pass}};
      json extra = json::array();
      for (const auto& p : r.extra)
        extra.push_back({{"point", vec(p.point)}, {"exact", p.exact}, {"rank", p.rank}, {"pass", p.pass}});
      j["extra"] = extra;
      j["extra_pass"] = r.extra_pass;
      out.pass = r.pass && r.extra_pass;
      detail = "rank " + std::to_string(r.primary.rank) + " of " + std::to_string(n) + ", step " +
               std::to_string(r.max_step);
    } else if (name == "star-shaped") {
      const auto r = geometry::check_star_shaped(*cfg.domain, d, cfg.star_samples, cfg.star_tolerance);
      j["min_value"] = num(r.min_value);
      j["argmin"] = vec3(r.argmin, n);
      j["argmin_normal"] = vec3(r.argmin_normal, n);
      j["samples"] = r.samples;
      j["tolerance"] = r.tolerance;
      out.pass = r.pass;
      detail = "min <T,nu> = " + sci(r.min_value);
    } else if (name == "poho1") {
      const auto r = id::verify_poho_order1(X, d, *cfg.functional1, *cfg.u, *cfg.domain, cfg.quadrature);
      j["report"] = to_json(r);
      out.pass = r.pass;
      detail = "rel residual " + sci(r.rel_residual);
    } else if (name == "poho-pde") {
      const auto r =
          id::verify_poho_pde(X, d, *cfg.functional1, *cfg.u, *cfg.domain, cfg.pde_a, cfg.pde_dirichlet, cfg.quadrature);
      j["el_symbolic_zero"] = r.el_symbolic_zero;
      j["max_el_residual"] = num(r.max_el_residual);
      j["dirichlet"] = r.dirichlet;
      j["max_boundary_u"] = num(r.max_boundary_u);
      j["pde"] = to_json(r.pde);
      if (r.boundary_reduction) j["boundary_reduction"] = to_json(*r.boundary_reduction);
      if (r.claimed) j["claimed"] = to_json(*r.claimed);
      json bvp = json::array();
      double worst = r.pde.rel_residual;
      for (const auto& b : r.bvp) {
        bvp.push_back(to_json(b));
        worst = std::max(worst, b.rel_residual);
      }
      j["bvp"] = bvp;
      out.pass = r.pass();
      detail = "max rel residual " + sci(worst);
    } else if (name == "poho2") {
      const auto r = id::verify_poho_order2(X, d, *cfg.functional2, *cfg.u, *cfg.domain, cfg.quadrature);
      j["general"] = to_json(r.general);
      if (r.biharmonic) j["biharmonic"] = to_json(*r.biharmonic);
      out.pass = r.general.pass && (!r.biharmonic || r.biharmonic->pass);
      detail = "rel residual " + sci(r.general.rel_residual);
    } else if (name == "boundary-id2") {
      const calculus::Functional2* F = cfg.functional2 ? &*cfg.functional2 : nullptr;
      const auto r = id::check_boundary_identity_order2(X, d, *cfg.u, *cfg.domain, F, cfg.quadrature.level);
      j["identity"] = to_json(r.identity);
      if (r.induced_f) j["induced_f"] = to_json(*r.induced_f);
      j["max_boundary_u"] = num(r.max_boundary_u);
      j["max_boundary_grad"] = num(r.max_boundary_grad);
      out.pass = r.identity.pass && (!r.induced_f || r.induced_f->pass);
      detail = "max defect " + sci(r.identity.max_defect);
    } else if (name == "audit1" || name == "audit2") {
      const auto audits = name == "audit1" ? id::audit_nonexistence_order1(*cfg.functional1, d, *cfg.domain, cfg.audit)
                                           : id::audit_nonexistence_order2(*cfg.functional2, d, *cfg.domain, cfg.audit);
      json arr = json::array();
      out.pass = true;
      for (const auto& a : audits) {
        arr.push_back(to_json(a));
        out.pass = out.pass && a.pass;
      }
      j["audits"] = arr;
      j["note"] = "a sampled pass is evidence on the sampled box; a fail with a witness is conclusive";
      detail = audit_summary(audits);
    }
  } catch (const WitnessError& ex) {
    out.pass = false;
    j["error"] = {{"code", error_code_name(ex.code())},
                  {"message", ex.what()},
                  {"node", vec(ex.node())},
                  {"value", num(ex.value())}};
    detail = std::string(error_code_name(ex.code())) + ": " + ex.what();
  }
  j["pass"] = out.pass;
  out.summary = name + ": " + verdict(out.pass) + (detail.empty() ? "" : " (" + detail + ")");
  out.report = j.dump(2) + "\n";
  return out;
}

}  // namespace

std::string RunResult::summary() const {
  std::string s;
  for (const auto& o : outcomes) s += o.summary + "\n";
  if (!error.empty()) s += "error: " + error + "\n";
  return s;
}

RunResult run_checks(const RunConfig& cfg) {
  RunResult r;
  for (const auto& c : cfg.checks) {
    try {
      r.outcomes.push_back(run_one(cfg, c.name));
    } catch (const Error& ex) {
      r.exit_code = kNumericError;
      r.error = c.name + ": " + error_code_name(ex.code()) + ": " + ex.what();
      if (const auto* s = dynamic_cast<const EvaluationSingularity*>(&ex); s && !s->node().empty()) {
        r.error += " at (";
        for (std::size_t i = 0; i < s->node().size(); ++i) r.error += (i ? ", " : "") + sci(s->node()[i]);
        r.error += ")";
      }
      return r;
    } catch (const std::exception& ex) {
      r.exit_code = kNumericError;
      r.error = c.name + ": internal error: " + ex.what();
      return r;
    }
    if (!r.outcomes.back().pass) r.exit_code = kCheckFailed;
  }
  return r;
}

void write_reports(const RunResult& r, const std::string& dir, const std::string& stem) {
  if (r.outcomes.empty() && r.error.empty()) return;
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());
  auto put = [&](const std::string& file, const std::string& content) {
    const fs::path p = fs::path(dir) / file;
    std::ofstream f(p, std::ios::binary);
    f << content;
    if (!f) throw Error(ErrorCode::Io, "cannot write '" + p.string() + "'");
  };
  for (const auto& o : r.outcomes) put(stem + "." + o.name + ".json", o.report);
  put(stem + ".summary.txt", r.summary());
}

const std::vector<std::string>& check_names() { return kChecks; }

std::string list_presets() {
  return "families:\n"
         "  euclidean(n)         d/dx1, ..., d/dxn; sigma = (1,...,1); q = n\n"
         "  grushin(n1,n2,k)     d/dy_i, y_i^k d/dt_j; sigma = (1^n1, (k+1)^n2); q = n1 + (k+1) n2\n"
         "  bony(n)              d/dx1, sum_j x1^(j-1)/(j-1)! d/dxj; sigma = (1,...,n); q = n(n+1)/2\n"
         "functionals:\n"
         "  dirichlet-k-laplacian  F = |p|^k / k - G(z)        keys: k (default 2), G (default 0)\n"
         "  horizontal-biharmonic  F = (sum_i r_ii)^2 / 2 - G(z)  keys: G (default 0)\n"
         "domains:\n"
         "  disk(R) | disk(cx,cy,R)\n"
         "  ellipse(a,b[,cx,cy])\n"
         "  box(lo1,hi1,lo2,hi2[,lo3,hi3])\n"
         "  ball3(R) | ball3(cx,cy,cz,R)\n"
         "  radial2d(expr in theta[,cx,cy])\n"
         "  radial3d(expr in theta, phi[,cx,cy,cz])\n";
}

std::string explain(const std::string& check) {
  static const std::map<std::string, std::string> text{
      {"h1",
       "h1: every field X_i is delta_lambda-homogeneous of degree 1 ([X_i,T] = X_i, cross-checked\n"
       "coefficientwise) and the fields are linearly independent (exact rank at 8 seeded rational points).\n"},
      {"h2",
       "h2: right-nested Lie brackets up to length sigma_n (or [h2] max_step) span R^n at the origin\n"
       "(or [h2] point), by exact rank; [h2] extra adds further points.\n"},
      {"star-shaped",
       "star-shaped: <T(x), nu(x)> >= -tolerance at [star] samples boundary points, T = sum sigma_i x_i d/dx_i;\n"
       "the report stores the minimum and where it is attained.\n"},
      {"poho1",
       "poho1: the first-order Pohozaev identity for any u:\n"
       "  int q F - <F_p, grad_X u> + T(x -> F) + Tu EL = oint F <T,nu> - Tu <F_p, nu_X>,\n"
       "EL = div_X(F_p) + F_z. Pass iff |lhs - rhs| / (1 + sum |terms|) <= tolerance.\n"},
      {"poho-pde",
       "poho-pde: for a solution u of EL = 0 (checked symbolically, else numerically): the identity\n"
       "without the EL term; with dirichlet = true also u = 0 on the boundary, the nodewise boundary\n"
       "reduction, int <F_p, grad_X u> + u F_z = 0, and for each a in [poho-pde] a:\n"
       "  int q F - (a+1) <F_p, grad_X u> + T(x -> F) - a u F_z = oint (F - <F_p, grad_X u>) <T,nu>.\n"},
      {"poho2",
       "poho2: the second-order identity for F(x, u, grad_X u, H_X u) and any u; adds\n"
       "-2 sum F_rij X_j(X_i u) in the bulk and the bracket boundary terms. The biharmonic preset is also\n"
       "reported in its specialized grouping.\n"},
      {"boundary-id2",
       "boundary-id2: where u = 0 and grad u = 0 on the boundary, X_i(Tu) <X_j,nu> = <T,nu> X_j(X_i u)\n"
       "nodewise for all i, j; with a functional also the induced boundary term identity.\n"},
      {"audit1",
       "audit1: hypotheses of the first-order non-existence theorem: (i) on the boundary, (ii) for some\n"
       "a0 from [audit] a0 and the preset exponents, (iii) zero set of (ii), and for the k-Laplacian\n"
       "preset the growth conditions on G. Power laws are decided exactly; otherwise the compact box\n"
       "|z| <= z_max, |p_i| <= p_max is sampled and a pass is evidence only.\n"},
      {"audit2", "audit2: hypotheses (i)-(iii) of the second-order non-existence theorem, sampled as in audit1.\n"},
  };
  const auto it = text.find(check);
  if (it == text.end()) throw InvalidArgument("unknown check '" + check + "'");
  return it->second;
}

}  // namespace hk::runner
