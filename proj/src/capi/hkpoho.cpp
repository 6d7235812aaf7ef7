#include "hkpoho.h"

#include <map>
#include <string>

#include "hk/error.hpp"
#include "hk/expr.hpp"
#include "hk/fields.hpp"
#include "hk/runner.hpp"

struct hk_expr {
  hk::sym::Expr e;
  std::string text;
};

struct hk_config {
  hk::runner::RunConfig cfg;
};

struct hk_result {
  hk::runner::RunResult r;
  std::string summary;
};

namespace {

thread_local std::string g_error;
thread_local int g_error_line = 0;

template <class F>
int guarded(F&& f) {
  g_error.clear();
  g_error_line = 0;
  try {
    f();
    return HK_OK;
  } catch (const hk::ConfigError& ex) {
    g_error = ex.what();
    g_error_line = ex.line();
    return HK_E_CONFIG;
  } catch (const hk::Error& ex) {
    g_error = ex.what();
    return static_cast<int>(ex.code());
  } catch (const std::exception& ex) {
    g_error = ex.what();
    return HK_E_INTERNAL;
  } catch (...) {
    g_error = "unknown exception";
    return HK_E_INTERNAL;
  }
}

int null_arg(const char* what) {
  g_error = std::string("null argument: ") + what;
  g_error_line = 0;
  return HK_E_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* hk_version(void) { return "1.0.0"; }

const char* hk_status_name(int status) {
  if (status == HK_OK) return "Ok";
  if (status < HK_E_INVALID_ARGUMENT || status > HK_E_INTERNAL) return "Unknown";
  return hk::error_code_name(static_cast<hk::ErrorCode>(status));
}

const char* hk_last_error(void) { return g_error.c_str(); }
int hk_last_error_line(void) { return g_error_line; }

int hk_expr_parse(const char* text, hk_expr** out) {
  if (!text || !out) return null_arg("text/out");
  return guarded([&] {
    auto e = hk::sym::parse(text);
    *out = new hk_expr{e, hk::sym::to_string(e)};
  });
}

void hk_expr_free(hk_expr* e) { delete e; }

const char* hk_expr_str(const hk_expr* e) { return e ? e->text.c_str() : nullptr; }

int hk_expr_diff(const hk_expr* e, const char* var, hk_expr** out) {
  if (!e || !var || !out) return null_arg("e/var/out");
  return guarded([&] {
    auto d = hk::sym::differentiate(e->e, hk::sym::Var::from_name(var));
    *out = new hk_expr{d, hk::sym::to_string(d)};
  });
}

int hk_expr_eval(const hk_expr* e, const char* const* names, const double* values, size_t count, double* out) {
  if (!e || !out || (count && (!names || !values))) return null_arg("e/names/values/out");
  return guarded([&] {
    hk::sym::Point p;
    for (size_t i = 0; i < count; ++i) p[hk::sym::Var::from_name(names[i])] = values[i];
    *out = hk::sym::evaluate(e->e, p);
  });
}

int hk_expr_equal(const hk_expr* a, const hk_expr* b, int* out) {
  if (!a || !b || !out) return null_arg("a/b/out");
  return guarded([&] { *out = hk::sym::is_zero(a->e - b->e) ? 1 : 0; });
}

int hk_family_q(const char* preset, int* out) {
  if (!preset || !out) return null_arg("preset/out");
  return guarded([&] {
    auto c = hk::runner::parse_config(std::string("[family]\npreset = ") + preset + "\n");
    *out = hk::fields::homogeneous_dimension(c.family.dilation);
  });
}

int hk_config_load(const char* path, hk_config** out) {
  if (!path || !out) return null_arg("path/out");
  return guarded([&] { *out = new hk_config{hk::runner::load_config(path)}; });
}

int hk_config_parse(const char* text, hk_config** out) {
  if (!text || !out) return null_arg("text/out");
  return guarded([&] { *out = new hk_config{hk::runner::parse_config(text)}; });
}

void hk_config_free(hk_config* c) { delete c; }

size_t hk_config_check_count(const hk_config* c) { return c ? c->cfg.checks.size() : 0; }

int hk_run(const hk_config* c, hk_result** out) {
  if (!c || !out) return null_arg("config/out");
  return guarded([&] {
    auto r = hk::runner::run_checks(c->cfg);
    auto s = r.summary();
    *out = new hk_result{std::move(r), std::move(s)};
  });
}

void hk_result_free(hk_result* r) { delete r; }

int hk_result_exit_code(const hk_result* r) { return r ? r->r.exit_code : HK_E_INVALID_ARGUMENT; }

size_t hk_result_count(const hk_result* r) { return r ? r->r.outcomes.size() : 0; }

const char* hk_result_name(const hk_result* r, size_t i) {
  return r && i < r->r.outcomes.size() ? r->r.outcomes[i].name.c_str() : nullptr;
}

int hk_result_pass(const hk_result* r, size_t i) {
  return r && i < r->r.outcomes.size() ? (r->r.outcomes[i].pass ? 1 : 0) : 0;
}

const char* hk_result_report(const hk_result* r, size_t i) {
  return r && i < r->r.outcomes.size() ? r->r.outcomes[i].report.c_str() : nullptr;
}

const char* hk_result_summary(const hk_result* r) { return r ? r->summary.c_str() : nullptr; }

int hk_result_write(const hk_result* r, const char* dir, const char* stem) {
  if (!r || !dir || !stem) return null_arg("result/dir/stem");
  return guarded([&] { hk::runner::write_reports(r->r, dir, stem); });
}

const char* hk_list_presets(void) {
  static const std::string text = hk::runner::list_presets();
  return text.c_str();
}

const char* hk_explain(const char* check) {
  static const std::map<std::string, std::string> cache = [] {
    std::map<std::string, std::string> m;
    for (const auto& n : hk::runner::check_names()) m[n] = hk::runner::explain(n);
    return m;
  }();
  if (!check) {
    null_arg("check");
    return nullptr;
  }
  const auto it = cache.find(check);
  if (it == cache.end()) {
    g_error = std::string("unknown check '") + check + "'";
    g_error_line = 0;
    return nullptr;
  }
  return it->second.c_str();
}

}  // extern "C"
