/* C interface to the nonlocal boundary-value problem library. */
#ifndef NLBVP_NLBVP_H
#define NLBVP_NLBVP_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(NLBVP_BUILDING_LIBRARY)
#    define NLBVP_API __declspec(dllexport)
#  else
#    define NLBVP_API __declspec(dllimport)
#  endif
#else
#  define NLBVP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nlbvp_status {
    NLBVP_OK = 0,
    NLBVP_INVALID_ARGUMENT,
    NLBVP_PARSE_ERROR,
    NLBVP_IO_ERROR,
    NLBVP_DIMENSION_MISMATCH,
    NLBVP_NON_COMMENSURATE_GRID,
    NLBVP_ISOLATED_VERTEX,
    NLBVP_NON_POSITIVE_CONDUCTANCE,
    NLBVP_ASYMMETRIC_DENSITY,
    NLBVP_ASYMMETRIC_KERNEL,
    NLBVP_NODE_NOT_IN_OMEGA,
    NLBVP_NODE_NOT_IN_GAMMA,
    NLBVP_EIGENSOLVER_FAILURE,
    NLBVP_NON_POSITIVE_C,
    NLBVP_EMPTY_GAMMA,
    NLBVP_FRIEDRICHS_VIOLATED,
    NLBVP_POINCARE_VIOLATED,
    NLBVP_INCOMPATIBLE_DATA,
    NLBVP_NO_CONVERGENCE,
    NLBVP_SINGULAR_AFTER_REGULARIZATION,
    NLBVP_BAD_STEP,
    NLBVP_HYPOTHESIS_VIOLATED,
    NLBVP_INTERNAL_ERROR
} nlbvp_status;

typedef enum nlbvp_kind {
    NLBVP_DIRICHLET = 0,
    NLBVP_NEUMANN = 1,
    NLBVP_REGULARIZED = 2
} nlbvp_kind;

typedef enum nlbvp_format {
    NLBVP_FORMAT_TABLE = 0,
    NLBVP_FORMAT_STRUCTURED = 1
} nlbvp_format;

typedef enum nlbvp_exact {
    NLBVP_EXACT_SINE = 0,
    NLBVP_EXACT_QUADRATIC = 1
} nlbvp_exact;

typedef struct nlbvp_problem nlbvp_problem;
typedef struct nlbvp_solution nlbvp_solution;
typedef struct nlbvp_report nlbvp_report;
typedef struct nlbvp_bench nlbvp_bench;

/* Message of the last failure on the calling thread; empty after success. */
NLBVP_API const char* nlbvp_last_error(void);
NLBVP_API const char* nlbvp_status_name(int status);

/* Text returned through char** out-parameters is released with this. */
NLBVP_API void nlbvp_string_free(char* text);

/* Problems */
NLBVP_API int nlbvp_problem_load_file(const char* path, nlbvp_problem** out);
/* base_dir resolves table paths; may be NULL. */
NLBVP_API int nlbvp_problem_load_string(const char* json, const char* base_dir, nlbvp_problem** out);
NLBVP_API void nlbvp_problem_free(nlbvp_problem* problem);
NLBVP_API int nlbvp_problem_sizes(const nlbvp_problem* problem, size_t* omega_size, size_t* gamma_size);
NLBVP_API int nlbvp_problem_kind(const nlbvp_problem* problem, int* kind);
/* Document-level tolerance, or 0 if the document did not set one. */
NLBVP_API int nlbvp_problem_tolerance(const nlbvp_problem* problem, double* tol);
/* Output path and format named by the document; NULL / -1 when absent. */
NLBVP_API const char* nlbvp_problem_output_path(const nlbvp_problem* problem);
NLBVP_API int nlbvp_problem_output_format(const nlbvp_problem* problem);

/* Solves with the document's problem kind. tol <= 0 uses the document value. */
NLBVP_API int nlbvp_solve(const nlbvp_problem* problem, double tol, nlbvp_solution** out);
NLBVP_API void nlbvp_solution_free(nlbvp_solution* solution);
/* Copies min(capacity, n) values in Omega-then-Gamma order; *count receives n. */
NLBVP_API int nlbvp_solution_values(const nlbvp_solution* solution, double* buffer, size_t capacity,
                                    size_t* count);
NLBVP_API int nlbvp_solution_summary(const nlbvp_solution* solution, double* residual, size_t* iterations,
                                     int* projected);
/* Largest nodewise residual of the strong equations (Omega, Gamma). */
NLBVP_API int nlbvp_solution_strong_residual(const nlbvp_solution* solution, double* omega, double* gamma);
NLBVP_API int nlbvp_solution_format(const nlbvp_solution* solution, int format, char** text);

/* Diagnostics */
NLBVP_API int nlbvp_diagnose(const nlbvp_problem* problem, nlbvp_report** out);
NLBVP_API void nlbvp_report_free(nlbvp_report* report);
/* Scalar fields by name, e.g. "nullspace_dim", "friedrichs_constant". */
NLBVP_API int nlbvp_report_get(const nlbvp_report* report, const char* key, double* value);
NLBVP_API int nlbvp_report_format(const nlbvp_report* report, int format, char** text);

/* Benchmark: convergence study plus identity suite on the finest grid. */
NLBVP_API int nlbvp_bench_run(int dimension, const size_t* inverse_steps, size_t count, int exact, int threads,
                              nlbvp_bench** out);
NLBVP_API void nlbvp_bench_free(nlbvp_bench* bench);
NLBVP_API size_t nlbvp_bench_row_count(const nlbvp_bench* bench);
/* h, m, l, max_error, order, friedrichs_C, poincare_C, runtime_ms, strong_residual */
NLBVP_API int nlbvp_bench_row(const nlbvp_bench* bench, size_t index, double values[9]);
NLBVP_API int nlbvp_bench_checks_passed(const nlbvp_bench* bench, int* passed);
NLBVP_API int nlbvp_bench_format(const nlbvp_bench* bench, int format, char** text);
/* Writes one plot-data file per row into the directory. */
NLBVP_API int nlbvp_bench_write_plots(const nlbvp_bench* bench, const char* directory);

/* Parses "1/8" or "0.125" into 8; NLBVP_BAD_STEP otherwise. */
NLBVP_API int nlbvp_parse_step(const char* text, size_t* inverse_step);

#ifdef __cplusplus
}
#endif

#endif
