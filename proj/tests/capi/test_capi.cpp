// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <string>

#include "doctest.h"
#include "hkpoho.h"

TEST_CASE("expressions") {
  hk_expr* e = nullptr;
  REQUIRE(hk_expr_parse("(+ (* x1 x1 x2) (* 3 z))", &e) == HK_OK);
  hk_expr* d = nullptr;
  REQUIRE(hk_expr_diff(e, "x1", &d) == HK_OK);
  CHECK(std::string(hk_expr_str(d)) == "(* 2 x1 x2)");
  const char* names[] = {"x1", "x2", "z"};
  const double vals[] = {2.0, 3.0, 1.0};
  double v = 0;
  REQUIRE(hk_expr_eval(e, names, vals, 3, &v) == HK_OK);
  CHECK(v == 15.0);
  CHECK(hk_expr_eval(e, names, vals, 2, &v) == HK_E_UNBOUND_VARIABLE);
  CHECK(std::strstr(hk_last_error(), "z") != nullptr);
  hk_expr* same = nullptr;
  REQUIRE(hk_expr_parse("(* 2 x2 x1)", &same) == HK_OK);
  int eq = 0;
  REQUIRE(hk_expr_equal(d, same, &eq) == HK_OK);
  CHECK(eq == 1);
  hk_expr_free(same);
  hk_expr_free(d);
  hk_expr_free(e);

  hk_expr* bad = nullptr;
  CHECK(hk_expr_parse("(+ x1", &bad) == HK_E_PARSE);
  CHECK(bad == nullptr);
  CHECK(hk_expr_parse(nullptr, &bad) == HK_E_INVALID_ARGUMENT);
  CHECK(std::string(hk_status_name(HK_E_NOT_DIRICHLET)) == "NotDirichlet");
}

TEST_CASE("homogeneous dimension of presets") {
  int q = 0;
  REQUIRE(hk_family_q("grushin(1,1,2)", &q) == HK_OK);
  CHECK(q == 4);
  REQUIRE(hk_family_q("bony(4)", &q) == HK_OK);
  CHECK(q == 10);
  CHECK(hk_family_q("nope(1)", &q) == HK_E_CONFIG);
}

TEST_CASE("config run") {
  const char* text =
      "[family]\npreset = grushin(1,1,1)\n"
      "[functional]\nF = (* 1/2 (+ (^ p1 2) (^ p2 2)))\n"
      "[u]\nexpr = (+ (^ x2 2) x1)\n"
      "[domain]\nspec = disk(0,0,1)\n"
      "[checks]\nrun = h1, poho1\n";
  hk_config* c = nullptr;
  REQUIRE(hk_config_parse(text, &c) == HK_OK);
  CHECK(hk_config_check_count(c) == 2);
  hk_result* r = nullptr;
  REQUIRE(hk_run(c, &r) == HK_OK);
  CHECK(hk_result_exit_code(r) == 0);
  REQUIRE(hk_result_count(r) == 2);
  CHECK(std::string(hk_result_name(r, 1)) == "poho1");
  CHECK(hk_result_pass(r, 1) == 1);
  CHECK(std::strstr(hk_result_report(r, 1), "\"rel_residual\"") != nullptr);
  CHECK(std::strstr(hk_result_summary(r), "poho1: PASS") != nullptr);
  CHECK(hk_result_name(r, 2) == nullptr);
  hk_result_free(r);
  hk_config_free(c);

  CHECK(hk_config_parse("[family]\nX1 = 1, 0\n[dilation]\nsigma = 2, 1\n", &c) == HK_E_CONFIG);
  CHECK(hk_last_error_line() == 4);
  CHECK(hk_config_load("/nonexistent.cfg", &c) == HK_E_IO);
}

TEST_CASE("presets and explanations") {
  CHECK(std::strstr(hk_list_presets(), "horizontal-biharmonic") != nullptr);
  CHECK(hk_explain("poho1") != nullptr);
  CHECK(hk_explain("bogus") == nullptr);
  CHECK(std::strstr(hk_last_error(), "bogus") != nullptr);
}
