/*
 * Copyright (c) 2026 proxyrestore developers
 * SPDX-License-Identifier: Apache-2.0
 *
 * C API for the proxyrestore library: synthetic generators for the
 * unobserved-confounder causal graph, analytical and CEVAE-style effect
 * estimators, and the experiment harness that audits their consistency.
 *
 * Conventions:
 *  - Every function returns a pr_status; PR_OK (0) means success.
 *  - On failure, pr_last_error() returns a thread-local message describing
 *    what went wrong; output parameters are left untouched.
 *  - Objects returned through pr_*_new/pr_*_run handles are owned by the
 *    caller and released with the matching pr_*_free.
 *  - Strings returned through char** are malloc'd; free with pr_string_free.
 */
#ifndef PROXYRESTORE_H
#define PROXYRESTORE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined _WIN32
#define PR_API __declspec(dllexport)
#else
#define PR_API __attribute__((visibility("default")))
#endif

typedef int32_t pr_status;

enum {
    PR_OK = 0,
    PR_ERR_INVALID_PARAMETER = 1,
    PR_ERR_INSUFFICIENT_DATA = 2,
    PR_ERR_SINGULAR_MATRIX = 3,
    PR_ERR_NON_IDENTIFIABLE = 4,
    PR_ERR_DEGENERATE_VARIANCE = 5,
    PR_ERR_PROXY_DEGENERACY = 6,
    PR_ERR_COLLINEARITY = 7,
    PR_ERR_DEGENERATE_TREATMENT = 8,
    PR_ERR_SHAPE_MISMATCH = 9,
    PR_ERR_SCHEMA_MISMATCH = 10,
    PR_ERR_NON_FINITE = 11,
    PR_ERR_CONTRACT_VIOLATION = 12,
    PR_ERR_IO = 13,
    PR_ERR_UNKNOWN_NAME = 14,
    PR_ERR_INTERNAL = 100
};

/* Opaque handles. */
typedef struct pr_process pr_process;   /* a fully-specified generative process */
typedef struct pr_dataset pr_dataset;   /* sampled observations */
typedef struct pr_results pr_results;   /* a table of experiment result rows */

/* Thread-local message for the most recent failure in this thread. */
PR_API const char* pr_last_error(void);
PR_API const char* pr_status_name(pr_status status);
PR_API void pr_string_free(char* text);

/* ------------------------------------------------------------------ */
/* Generative processes                                                */
/* ------------------------------------------------------------------ */

/* Looks up a named process (lingauss_main, binary_main, rotated_noise,
 * repeated_proxy, repeated_proxy_exact, lingauss_p1..p4, binary_p1..p4). */
PR_API pr_status pr_process_named(const char* name, pr_process** out);

/* Parses a flat JSON parameter document (see pr_process_to_json). */
PR_API pr_status pr_process_from_json(const char* json_text, pr_process** out);

/* Draws a random process of the given kind ("lingauss" or "binary") using
 * the published parameter samplers. */
PR_API pr_status pr_process_sample(const char* kind, uint64_t sample_seed, pr_process** out);

PR_API pr_status pr_process_to_json(const pr_process* process, char** out_json);
PR_API void pr_process_free(pr_process* process);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */
/* ------------------------------------------------------------------ */

PR_API pr_status pr_dataset_generate(const pr_process* process, uint64_t n, uint64_t seed,
                                     uint64_t substream, pr_dataset** out);
PR_API pr_status pr_dataset_load_csv(const char* path, pr_dataset** out);
PR_API pr_status pr_dataset_save_csv(const pr_dataset* dataset, const char* path,
                                     int include_hidden);
PR_API pr_status pr_dataset_rows(const pr_dataset* dataset, uint64_t* out_rows);
PR_API pr_status pr_dataset_proxy_dim(const pr_dataset* dataset, uint64_t* out_dim);
PR_API void pr_dataset_free(pr_dataset* dataset);

/* ------------------------------------------------------------------ */
/* Single fits                                                         */
/* ------------------------------------------------------------------ */

/* Fits one estimator to a dataset and reports metrics against the process
 * ground truth as a JSON object (aid, ate_error, c_yt_hat, do_mean_t0,
 * do_mean_t1, active_dims, final_elbo). estimator_json follows the sweep
 * config schema, e.g. {"id":"analytic","kind":"analytic"} or
 * {"id":"m","kind":"cevae","cevae":{"variant":"linear","latent_dim":1}}.
 * options_json may be NULL or contain {"save_model": path,
 * "train_report": path, "seed": integer}. */
PR_API pr_status pr_fit(const pr_process* process, const pr_dataset* dataset,
                        const char* estimator_json, const char* options_json,
                        char** out_metrics_json);

/* ------------------------------------------------------------------ */
/* Experiment sweeps                                                   */
/* ------------------------------------------------------------------ */

/* Runs a full sweep described by an ExperimentConfig JSON document.
 * workers <= 0 reads PROXYRESTORE_WORKERS, falling back to the hardware
 * thread count. Results are deterministic for any worker count. */
PR_API pr_status pr_sweep_run(const char* config_json, int workers, pr_results** out);

/* Resolves a built-in preset (fig2a, fig2d, fig3b, fig3de, lambda_sweep,
 * kl_anneal_10d, binary_latent, custom_init_2d, replication_lingauss,
 * replication_binary) to its full config document. */
PR_API pr_status pr_preset_config(const char* name, char** out_config_json);

/* Returns the config document's default results path ("" when unset). */
PR_API pr_status pr_config_output_path(const char* config_json, char** out_path);

PR_API pr_status pr_results_row_count(const pr_results* results, uint64_t* out_rows);
/* format: "csv" or "json". */
PR_API pr_status pr_results_save(const pr_results* results, const char* path,
                                 const char* format);
PR_API void pr_results_free(pr_results* results);

/* ------------------------------------------------------------------ */
/* Analytic path evaluation                                            */
/* ------------------------------------------------------------------ */

/* Evaluates the restricted ELBO path for proxy-copy counts 1 or 2 at the
 * given s positions (each in (0,1)); out must hold count doubles. */
PR_API pr_status pr_prop2_path_eval(double gamma1, const double* s_values, size_t count,
                                    int copy_count, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PROXYRESTORE_H */
