/* C interface to the perpetual Bermudan basket-put pricer.
 *
 * All objects are opaque handles released with the matching *_free call.
 * Every fallible call returns a bm_status; on failure a description of the
 * last error on the calling thread is available from bm_last_error(). */
#ifndef BERMUDAN_BERMUDAN_H_
#define BERMUDAN_BERMUDAN_H_

#include <stddef.h>

#if defined(_WIN32)
#  if defined(BERMUDAN_BUILDING_LIBRARY)
#    define BM_API __declspec(dllexport)
#  else
#    define BM_API __declspec(dllimport)
#  endif
#else
#  define BM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bm_status {
  BM_OK = 0,
  BM_ERR_INVALID_ARGUMENT = 1,
  BM_ERR_NOT_POSITIVE_DEFINITE = 2,
  BM_ERR_OVERFLOW = 3,
  BM_ERR_NON_FINITE = 4,
  BM_ERR_INVARIANT = 5,
  BM_ERR_GRID_MISMATCH = 6,
  BM_ERR_DEPTH = 7,
  BM_ERR_CONFIG = 8,
  BM_ERR_IO = 9,
  BM_ERR_INTERNAL = 10,
  /* Completed, results written, but the run did not meet its target. */
  BM_NOT_CONVERGED = 20,
  BM_CHECK_FAILED = 21
} bm_status;

typedef struct bm_config bm_config;
typedef struct bm_rule bm_rule;

typedef struct bm_run_options {
  const char* out_dir; /* NULL: use output.dir from the config */
  unsigned threads;    /* 0 or 1: single-threaded */
  int verbose;         /* nonzero: progress lines on stderr */
} bm_run_options;

typedef struct bm_price_summary {
  double price;
  double residual;
  double tail_bound;
  double discount;
  double max_condition3_residual;
  size_t n_stop;
  int converged;
} bm_price_summary;

typedef struct bm_diagnose_summary {
  int all_pass;
  int monotone;
  int bounded_by_k;
  int contraction;
  int nesting;
  int q_membership;
  int smallest_ordering;
  double padding_sensitivity;
} bm_diagnose_summary;

typedef struct bm_oracle_summary {
  double max_discrepancy;
  double budget;
  int within_budget;
} bm_oracle_summary;

BM_API const char* bm_last_error(void);
BM_API const char* bm_status_name(bm_status status);

/* Configs */
BM_API bm_status bm_config_load(const char* path, bm_config** out);
BM_API bm_status bm_config_parse(const char* json_text, bm_config** out);
BM_API void bm_config_free(bm_config* config);
BM_API size_t bm_config_dim(const bm_config* config);
BM_API double bm_config_discount(const bm_config* config);

/* Runs. Each writes its report files, then returns BM_OK,
 * BM_NOT_CONVERGED (price) or BM_CHECK_FAILED (diagnose, oracle-check). */
BM_API bm_status bm_price(const bm_config* config, const bm_run_options* options,
                          bm_price_summary* out);
BM_API bm_status bm_diagnose(const bm_config* config, const bm_run_options* options,
                             bm_diagnose_summary* out);
BM_API bm_status bm_oracle_check(const bm_config* config, size_t steps, size_t samples,
                                 const bm_run_options* options, bm_oracle_summary* out);

/* Cubature rules. `points` is row-major, size x dim. */
BM_API bm_status bm_rule_create(size_t dim, size_t size, const double* weights,
                                const double* points, bm_rule** out);
/* correlation: row-major dim x dim, or NULL for independent assets. */
BM_API bm_status bm_rule_gauss_hermite(size_t dim, size_t points_per_axis, const double* sigma,
                                       double t, const double* correlation, bm_rule** out);
BM_API bm_status bm_rule_from_json(const char* json_text, bm_rule** out);
/* Writes at most `capacity` bytes including the terminator; `required`
 * receives the full length plus one. */
BM_API bm_status bm_rule_to_json(const bm_rule* rule, char* buffer, size_t capacity,
                                 size_t* required);
BM_API void bm_rule_free(bm_rule* rule);
BM_API size_t bm_rule_dim(const bm_rule* rule);
BM_API size_t bm_rule_size(const bm_rule* rule);
BM_API bm_status bm_rule_weights(const bm_rule* rule, double* out, size_t capacity);
BM_API bm_status bm_rule_points(const bm_rule* rule, double* out, size_t capacity);
/* shift: dim entries, may be NULL. */
BM_API bm_status bm_rule_drift_adjust(const bm_rule* rule, bm_rule** out, double* shift);
/* residuals: dim entries, may be NULL. */
BM_API bm_status bm_rule_condition3(const bm_rule* rule, double tol, double* residuals,
                                    int* pass);

/* Pointwise evaluation */
BM_API bm_status bm_payoff(double strike, const double* basket_weights, size_t dim,
                           const double* x, double* payoff, double* payoff_plus);
BM_API bm_status bm_tree_price(const bm_rule* rule, double strike, const double* basket_weights,
                               double rate, double interval, const double* x0, size_t depth,
                               double* out);
BM_API int bm_stopping_rule(double discount, double eps, double delta);

#ifdef __cplusplus
}
#endif

#endif /* BERMUDAN_BERMUDAN_H_ */
