// hk: run Pohozaev-identity checks described by a config file.
//
//   hk run <config> [--out DIR] [--quiet]
//   hk list-presets
//   hk explain <check>
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 config or usage error,
// 3 numeric error. HK_THREADS caps the worker threads.

#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "hkpoho.h"

namespace {

constexpr int kUsage = 2;

int report_error(int status) {
  std::fprintf(stderr, "hk: %s: %s\n", hk_status_name(status), hk_last_error());
  return status == HK_E_CONFIG || status == HK_E_IO || status == HK_E_INVALID_ARGUMENT || status == HK_E_PARSE
             ? kUsage
             : 3;
}

int run(const std::string& path, const std::string& out_dir, bool quiet) {
  hk_config* cfg = nullptr;
  if (int st = hk_config_load(path.c_str(), &cfg); st != HK_OK) return report_error(st);
  hk_result* res = nullptr;
  const int st = hk_run(cfg, &res);
  hk_config_free(cfg);
  if (st != HK_OK) return report_error(st);

  const std::filesystem::path p(path);
  const std::string dir = out_dir.empty() ? (p.has_parent_path() ? p.parent_path().string() : ".") : out_dir;
  const std::string stem = p.stem().string();
  if (int w = hk_result_write(res, dir.c_str(), stem.c_str()); w != HK_OK) {
    hk_result_free(res);
    return report_error(w);
  }
  if (!quiet) std::fputs(hk_result_summary(res), stdout);
  const int code = hk_result_exit_code(res);
  hk_result_free(res);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verify Pohozaev-type identities for homogeneous Hörmander vector fields"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "run the checks of a config file");
  run_cmd->add_option("config", config, "config file")->required();
  run_cmd->add_option("--out", out_dir, "directory for the reports (default: beside the config)");
  run_cmd->add_flag("-q,--quiet", quiet, "do not print the summary");

  app.add_subcommand("list-presets", "list family, functional and domain presets");

  std::string check;
  auto* explain_cmd = app.add_subcommand("explain", "describe a check");
  explain_cmd->add_option("check", check, "check name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  if (*run_cmd) return run(config, out_dir, quiet);
  if (*explain_cmd) {
    const char* text = hk_explain(check.c_str());
    if (!text) {
      std::fprintf(stderr, "hk: %s\n", hk_last_error());
      return kUsage;
    }
    std::fputs(text, stdout);
    return 0;
  }
  std::fputs(hk_list_presets(), stdout);
  return 0;
}
