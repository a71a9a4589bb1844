#ifndef FLOQUET_GAUGE_H
#define FLOQUET_GAUGE_H

#include <stddef.h>

#if defined(FG_BUILDING_LIBRARY)
#define FG_API __attribute__((visibility("default")))
#else
#define FG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure fg_last_error() holds a
 * message for the calling thread until its next failing call. */
typedef enum fg_status {
  FG_OK = 0,
  FG_ERR_PARSE = 1,
  FG_ERR_UNBOUND_SYMBOL = 2,
  FG_ERR_DOMAIN = 3,
  FG_ERR_DIMENSION = 4,
  FG_ERR_NEAR_SINGULAR = 5,
  FG_ERR_NO_REAL_LOGARITHM = 6,
  FG_ERR_INTEGRATION = 7,
  FG_ERR_OUT_OF_RANGE = 8,
  FG_ERR_APERIODIC = 9,
  FG_ERR_CONFIG = 10,
  FG_ERR_INVALID_ARGUMENT = 11,
  FG_ERR_NOT_FOUND = 12,
  FG_ERR_CONVERGENCE = 13,
  FG_ERR_INTERNAL = 99
} fg_status;

typedef struct fg_expr fg_expr;
typedef struct fg_tmatrix fg_tmatrix;
typedef struct fg_floquet fg_floquet;
typedef struct fg_riccati fg_riccati;
typedef struct fg_report fg_report;

FG_API const char* fg_version(void);
FG_API const char* fg_last_error(void);
FG_API const char* fg_status_name(fg_status status);

/* Expressions in t, x1..xn and named parameters. */
FG_API fg_status fg_expr_parse(const char* source, fg_expr** out);
/* `state` binds x1..xn; parameters are given as parallel name/value arrays. */
FG_API fg_status fg_expr_eval(const fg_expr* e, double t, const double* state, size_t state_len,
                              const char* const* param_names, const double* param_values, size_t param_count,
                              double* out);
FG_API fg_status fg_expr_differentiate(const fg_expr* e, const char* symbol, fg_expr** out);
/* Canonical text; owned by the expression. */
FG_API const char* fg_expr_text(const fg_expr* e);
FG_API void fg_expr_free(fg_expr* e);

/* n x n matrix of expressions in t, row-major, parameters bound at parse time. */
FG_API fg_status fg_tmatrix_parse(size_t n, const char* const* entries, const char* const* param_names,
                                  const double* param_values, size_t param_count, fg_tmatrix** out);
FG_API size_t fg_tmatrix_size(const fg_tmatrix* m);
/* Writes n*n row-major values. */
FG_API fg_status fg_tmatrix_value(const fg_tmatrix* m, double t, double* out);
FG_API fg_status fg_tmatrix_derivative(const fg_tmatrix* m, double t, double* out);
FG_API void fg_tmatrix_free(fg_tmatrix* m);

/* Phi(t) = P(t) exp(B t) with P periodic of the effective period. */
FG_API fg_status fg_floquet_decompose(const fg_tmatrix* a, double period, fg_floquet** out);
FG_API size_t fg_floquet_size(const fg_floquet* d);
FG_API int fg_floquet_doubled(const fg_floquet* d);
FG_API double fg_floquet_effective_period(const fg_floquet* d);
FG_API fg_status fg_floquet_B(const fg_floquet* d, double* out);
FG_API fg_status fg_floquet_P(const fg_floquet* d, double t, double* out);
FG_API fg_status fg_floquet_monodromy(const fg_floquet* d, double* out);
/* Writes n real and n imaginary parts, sorted by (real, imag). */
FG_API fg_status fg_floquet_multipliers(const fg_floquet* d, double* re, double* im);
FG_API fg_status fg_floquet_verify(const fg_floquet* d, const fg_tmatrix* a, double tol, fg_report** out);
FG_API void fg_floquet_free(fg_floquet* d);

/* y' = f + g y + h y^2 on [t0, t1] through the projective linearization. */
FG_API fg_status fg_riccati_solve(const char* f, const char* g, const char* h, double y0, double t0, double t1,
                                  int continue_through_poles, fg_riccati** out);
FG_API fg_status fg_riccati_value(const fg_riccati* s, double t, double* out);
FG_API int fg_riccati_stopped_at_pole(const fg_riccati* s);
/* Stores up to `capacity` poles; `count` receives the total. */
FG_API fg_status fg_riccati_poles(const fg_riccati* s, double* out, size_t capacity, size_t* count);
FG_API void fg_riccati_free(fg_riccati* s);

/* Gallery of worked examples at default parameters. */
FG_API size_t fg_example_count(void);
FG_API const char* fg_example_name(size_t index);
FG_API fg_status fg_example_verify(const char* name, double tol, fg_report** out);

FG_API int fg_report_passed(const fg_report* r);
/* Report as indented JSON; owned by the report. */
FG_API const char* fg_report_json(const fg_report* r);
FG_API void fg_report_free(fg_report* r);

/* CLI commands: floquet, gauge, simulate, riccati, examples. */
typedef struct fg_run_options {
  const char* config;
  const char* out;
  /* <= 0 keeps the command default. */
  double tol;
  /* 0 keeps the command default. */
  size_t dense;
  int continue_through_poles;
  /* "name=value" overrides. */
  const char* const* params;
  size_t param_count;
  /* examples: a single example name, or NULL for all. */
  const char* example;
  /* examples: worker cap, 0 for FLOQUET_GAUGE_THREADS or the core count. */
  unsigned threads;
} fg_run_options;

FG_API void fg_run_options_init(fg_run_options* opts);
/* Returns the process exit code: 0 pass, 1 verification failed, 2 bad input,
 * 3 numerical failure. The one-line summary or error is copied into
 * `message` (truncated, NUL-terminated) when it is non-NULL. */
FG_API int fg_run(const char* command, const fg_run_options* opts, char* message, size_t message_size);

#ifdef __cplusplus
}
#endif

#endif
