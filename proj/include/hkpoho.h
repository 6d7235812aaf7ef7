#ifndef HKPOHO_H
#define HKPOHO_H

/* C interface to the Pohozaev-identity verifier.
 *
 * All functions return an hk_status; 0 is success. On failure the message of
 * the last error on the calling thread is available from hk_last_error().
 * Handles are opaque and must be released with the matching *_free. Strings
 * returned by accessors stay valid until the owning handle is freed. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(HKPOHO_BUILDING)
#define HKPOHO_API __attribute__((visibility("default")))
#else
#define HKPOHO_API
#endif

typedef enum hk_status {
  HK_OK = 0,
  HK_E_INVALID_ARGUMENT = 1,
  HK_E_PARSE = 2,
  HK_E_UNBOUND_VARIABLE = 3,
  HK_E_EVALUATION_SINGULARITY = 4,
  HK_E_STEP_CAP_EXCEEDED = 5,
  HK_E_DEGENERATE_TANGENT = 6,
  HK_E_NOT_A_SOLUTION = 7,
  HK_E_NOT_DIRICHLET = 8,
  HK_E_PRECONDITION_VIOLATED = 9,
  HK_E_CONFIG = 10,
  HK_E_IO = 11,
  HK_E_INTERNAL = 12
} hk_status;

typedef struct hk_expr hk_expr;
typedef struct hk_config hk_config;
typedef struct hk_result hk_result;

HKPOHO_API const char* hk_version(void);
HKPOHO_API const char* hk_status_name(int status);
HKPOHO_API const char* hk_last_error(void);
/* Config line of the last HK_E_CONFIG error on this thread, 0 if unknown. */
HKPOHO_API int hk_last_error_line(void);

/* Expressions in the prefix grammar, e.g. "(+ (^ x1 2) (* 3 x2))". */
HKPOHO_API int hk_expr_parse(const char* text, hk_expr** out);
HKPOHO_API void hk_expr_free(hk_expr* e);
HKPOHO_API const char* hk_expr_str(const hk_expr* e);
/* Partial derivative with respect to a variable name (x1, z, p2, r1_2, ...). */
HKPOHO_API int hk_expr_diff(const hk_expr* e, const char* var, hk_expr** out);
/* Evaluate at named values: names[i] = values[i]. */
HKPOHO_API int hk_expr_eval(const hk_expr* e, const char* const* names, const double* values, size_t count,
                            double* out);
HKPOHO_API int hk_expr_equal(const hk_expr* a, const hk_expr* b, int* out);

/* Homogeneous dimension q of a family preset such as "grushin(1,1,2)". */
HKPOHO_API int hk_family_q(const char* preset, int* out);

HKPOHO_API int hk_config_load(const char* path, hk_config** out);
HKPOHO_API int hk_config_parse(const char* text, hk_config** out);
HKPOHO_API void hk_config_free(hk_config* c);
HKPOHO_API size_t hk_config_check_count(const hk_config* c);

/* Runs every check. A failing check is not an error: inspect the result. */
HKPOHO_API int hk_run(const hk_config* c, hk_result** out);
HKPOHO_API void hk_result_free(hk_result* r);
/* 0 all pass, 1 a check failed, 3 a numeric error stopped the run. */
HKPOHO_API int hk_result_exit_code(const hk_result* r);
HKPOHO_API size_t hk_result_count(const hk_result* r);
HKPOHO_API const char* hk_result_name(const hk_result* r, size_t i);
HKPOHO_API int hk_result_pass(const hk_result* r, size_t i);
HKPOHO_API const char* hk_result_report(const hk_result* r, size_t i);
HKPOHO_API const char* hk_result_summary(const hk_result* r);
/* Writes <stem>.<check>.json and <stem>.summary.txt into dir. */
HKPOHO_API int hk_result_write(const hk_result* r, const char* dir, const char* stem);

HKPOHO_API const char* hk_list_presets(void);
/* Description of a check; NULL (with HK_E_INVALID_ARGUMENT recorded) if unknown. */
HKPOHO_API const char* hk_explain(const char* check);

#ifdef __cplusplus
}
#endif

#endif
