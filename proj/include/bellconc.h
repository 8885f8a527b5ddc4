/* bellconc — C interface to the Bell-correlation bounds library.
 *
 * Conventions:
 *  - Every fallible call returns a bc_status; BC_OK is 0.
 *  - On failure, bc_last_error() returns a thread-local message that stays
 *    valid until the next failing call on the same thread.
 *  - Strings returned through char** are heap-allocated; release them with
 *    bc_string_free().  Handles are released with their matching _free().
 *  - Config text is either flat key=value lines ('#' comments) or a JSON
 *    object of scalars.  `overrides` uses the key=value form and wins over
 *    the base config; pass NULL for none.
 */
#ifndef BELLCONC_H
#define BELLCONC_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define BC_API __declspec(dllexport)
#else
#define BC_API __attribute__((visibility("default")))
#endif

typedef enum bc_status {
    BC_OK = 0,
    BC_ERR_INVALID_ARGUMENT = 1,
    BC_ERR_PARSE = 2,
    BC_ERR_DOMAIN = 3,
    BC_ERR_TOO_LARGE = 4,
    BC_ERR_NO_CONVERGENCE = 5,
    BC_ERR_INTERNAL = 6
} bc_status;

BC_API const char* bc_version(void);
BC_API int bc_artifact_version(void);
BC_API const char* bc_last_error(void);
BC_API void bc_string_free(char* s);

/* ---- Bell functionals ---------------------------------------------- */

typedef struct bc_functional bc_functional;

BC_API bc_status bc_functional_from_json(const char* json_text,
                                         bc_functional** out);
BC_API bc_status bc_functional_from_catalog(const char* name,
                                            bc_functional** out);
BC_API void bc_functional_free(bc_functional* f);

BC_API bc_status bc_functional_to_json(const bc_functional* f, char** out_json);

/* Enumerates deterministic strategies on first use; caches the result. */
BC_API bc_status bc_functional_classical_bounds(bc_functional* f,
                                                double* lower, double* upper);

BC_API bc_status bc_functional_normalized(const bc_functional* f,
                                          bc_functional** out);
BC_API bc_status bc_functional_positivized(const bc_functional* f,
                                           bc_functional** out);

/* JSON array of catalog entry names. */
BC_API bc_status bc_catalog_names(char** out_json);

/* ---- Experiment runs ------------------------------------------------ */

/* Merged key/value view of a config, as canonical JSON (sorted keys). */
BC_API bc_status bc_config_echo(const char* config_text, const char* overrides,
                                char** out_json);

/* Tail-probability bound evaluation.
 * Keys: N, m, v, d, b, c, delta, variant (theorem|appendix|derived).
 * Output: one JSON record {params, variant, log_value, terms}. */
BC_API bc_status bc_bound_eval(const char* config_text, const char* overrides,
                               char** out_json);

/* Random-state violation tail experiment.
 * Keys: N, m, v, d, functionals (comma-separated catalog names), c,
 *       samples, restarts, seesaw_iters, seed, workers, sampler
 *       (gram|projective), lp_refine, lp_cap.
 * Output: JSON-lines, one record per sample followed by a summary line. */
BC_API bc_status bc_tail_run(const char* config_text, const char* overrides,
                             char** out_jsonl);

/* Concentration experiment around the trace mean.
 * Keys: functional (catalog name; chsh embeds into any N via parties=N),
 *       parties, d, samples, seed, workers.
 * Outputs: summary JSON record and an eps,empirical,levy_log CSV curve. */
BC_API bc_status bc_concentration_run(const char* config_text,
                                      const char* overrides,
                                      char** out_record_json,
                                      char** out_curve_csv);

/* Grid-net demonstration.  Keys: n, epsilon, probes, seed, tol
 * (slack for the covering check, default 1e-12).
 * Output: JSON summary {n, epsilon, l, size, log_size_bound,
 * probe_count, max_covering_distance, covering_ok}. */
BC_API bc_status bc_net_demo(const char* config_text, const char* overrides,
                             char** out_json);

/* Self-checks: catalog verification, invariant smoke tests, and a
 * measurement-norm spot check on random functionals.  `corrupt` != 0
 * injects a deliberately broken catalog entry, so a working checker then
 * reports failure.  *ok is 1 when every check passed. */
BC_API bc_status bc_verify(unsigned long long seed, int corrupt, int* ok,
                           char** out_report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BELLCONC_H */
