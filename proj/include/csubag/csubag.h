#ifndef CSUBAG_H
#define CSUBAG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(CSUBAG_BUILDING)
#define CSUBAG_API __attribute__((visibility("default")))
#else
#define CSUBAG_API
#endif

typedef enum csubag_status {
    CSUBAG_OK = 0,
    CSUBAG_E_INVALID_ARGUMENT = 1,
    CSUBAG_E_DIMENSION_MISMATCH = 2,
    CSUBAG_E_ZERO_VARIANCE_COLUMN = 3,
    CSUBAG_E_NOT_CONVERGED = 4,
    CSUBAG_E_INVALID_SIZE = 5,
    CSUBAG_E_INFEASIBLE = 6,
    CSUBAG_E_INSUFFICIENT_SAMPLES = 7,
    CSUBAG_E_INDEX_OUT_OF_RANGE = 8,
    CSUBAG_E_BAD_GROUPING = 9,
    CSUBAG_E_SINGULAR_GRAM = 10,
    CSUBAG_E_NON_SYMMETRIC = 11,
    CSUBAG_E_IO = 12,
    CSUBAG_E_PARSE = 13,
    CSUBAG_E_INTERNAL = 99
} csubag_status;

typedef struct csubag_dataset csubag_dataset;
typedef struct csubag_config csubag_config;
typedef struct csubag_selection csubag_selection;

typedef struct csubag_scenario {
    size_t n;
    size_t p;
    double rho;
    double signal;
    size_t s;
    double sigma;
    size_t replications;
    uint64_t seed;
} csubag_scenario;

typedef void (*csubag_progress_fn)(const char* message, void* user);

/* Message of the last failure on the calling thread ("" if none). */
CSUBAG_API const char* csubag_last_error(void);
/* Stable identifier such as "InvalidArgument". */
CSUBAG_API const char* csubag_status_name(csubag_status status);
CSUBAG_API const char* csubag_version(void);
/* Frees strings returned through char** out-parameters. */
CSUBAG_API void csubag_string_free(char* text);

/* ---- scenarios and datasets ---- */

CSUBAG_API csubag_status csubag_scenario_default(csubag_scenario* out);
/* Presets "1a", "1b", "1c", "1d", "2", "3". */
CSUBAG_API csubag_status csubag_scenario_preset(const char* name, csubag_scenario* out);
/* key = value file; fields not present keep the values already in *out. */
CSUBAG_API csubag_status csubag_scenario_load(const char* path, csubag_scenario* inout);

/* x is row-major n x p. Columns are normalized to unit l2 norm. */
CSUBAG_API csubag_status csubag_dataset_from_arrays(const double* y, const double* x, size_t n,
                                                    size_t p, csubag_dataset** out);
/* truth_json may be NULL. */
CSUBAG_API csubag_status csubag_dataset_read_csv(const char* path, const char* truth_json,
                                                 csubag_dataset** out);
CSUBAG_API csubag_status csubag_dataset_simulate(const csubag_scenario* scenario,
                                                 size_t replication, csubag_dataset** out);
CSUBAG_API csubag_status csubag_dataset_write_csv(const csubag_dataset* data, const char* path);
/* Fails with INVALID_ARGUMENT when the dataset carries no truth. */
CSUBAG_API csubag_status csubag_dataset_write_truth(const csubag_dataset* data, const char* path);
CSUBAG_API size_t csubag_dataset_n(const csubag_dataset* data);
CSUBAG_API size_t csubag_dataset_p(const csubag_dataset* data);
/* Copies the normalized design (row-major, n*p doubles) and response. */
CSUBAG_API csubag_status csubag_dataset_copy(const csubag_dataset* data, double* y, double* x);
CSUBAG_API void csubag_dataset_free(csubag_dataset* data);

/* ---- run configuration ---- */

CSUBAG_API csubag_status csubag_config_new(csubag_config** out);
/* Merges a key = value file into cfg. */
CSUBAG_API csubag_status csubag_config_load(csubag_config* cfg, const char* path);
/* Same keys as the file (subsample_size, b, m, K, B, tau, lambda_mode, ...). */
CSUBAG_API csubag_status csubag_config_set(csubag_config* cfg, const char* key, const char* value);
/* JSON rendering of every field. */
CSUBAG_API csubag_status csubag_config_to_json(const csubag_config* cfg, char** out);
CSUBAG_API void csubag_config_free(csubag_config* cfg);

/* ---- weighted maximum-contrast subagging ---- */

CSUBAG_API csubag_status csubag_select(const csubag_dataset* data, const csubag_config* cfg,
                                       csubag_selection** out);
CSUBAG_API size_t csubag_selection_p(const csubag_selection* sel);
CSUBAG_API size_t csubag_selection_count(const csubag_selection* sel);
CSUBAG_API double csubag_selection_lambda(const csubag_selection* sel);
CSUBAG_API double csubag_selection_tau(const csubag_selection* sel);
/* Buffers hold p doubles (pi, beta) or csubag_selection_count entries (0-based indices). */
CSUBAG_API csubag_status csubag_selection_pi(const csubag_selection* sel, double* out);
CSUBAG_API csubag_status csubag_selection_beta(const csubag_selection* sel, double* out);
CSUBAG_API csubag_status csubag_selection_indices(const csubag_selection* sel, size_t* out);
CSUBAG_API csubag_status csubag_selection_to_json(const csubag_selection* sel, char** out);
/* Either path may be NULL. */
CSUBAG_API csubag_status csubag_selection_write(const csubag_selection* sel, const char* json_path,
                                                const char* csv_path);
CSUBAG_API void csubag_selection_free(csubag_selection* sel);

/* ---- baselines, weights, diagnostics ---- */

/* sqrt(log p) / n with p floored at 2. */
CSUBAG_API double csubag_reference_lambda(double n, size_t p);
/* Full-data Lasso; lambda <= 0 selects csubag_reference_lambda(n, p). */
CSUBAG_API csubag_status csubag_lasso_json(const csubag_dataset* data, double lambda, char** out);
CSUBAG_API csubag_status csubag_subagging_json(const csubag_dataset* data, size_t subsample_size,
                                               size_t d, double lambda1, uint64_t seed,
                                               size_t threads, char** out);
/* Rows [row_begin, row_end) 0-based; mode "multinomial" or "optimal";
   nominal_n <= 0 uses the row count of the dataset. */
CSUBAG_API csubag_status csubag_weights_json(const csubag_dataset* data, size_t row_begin,
                                             size_t row_end, const char* mode, size_t count,
                                             uint64_t seed, double nominal_n, char** out);
/* support holds 0-based indices; trials random cone directions for the RE proxy. */
CSUBAG_API csubag_status csubag_diag_json(const csubag_dataset* data, const size_t* support,
                                          size_t support_size, size_t trials, uint64_t seed,
                                          char** out);

/* ---- benchmarks ---- */

/* reps = 0 keeps the protocol default; seed NULL keeps the protocol seed.
   Writes metrics.csv, selection_freq.csv, summary.csv and pi.csv to out_dir. */
CSUBAG_API csubag_status csubag_bench(const char* example, size_t reps, const uint64_t* seed,
                                      size_t threads, const char* out_dir,
                                      csubag_progress_fn progress, void* user);
CSUBAG_API csubag_status csubag_subsample_size_from_alpha(double n, double alpha, size_t* out);

#ifdef __cplusplus
}
#endif

#endif
