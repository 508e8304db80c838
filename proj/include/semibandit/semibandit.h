/*
 * semibandit -- contextual bandit policies for semiparametric reward models,
 * with a synthetic simulation environment and an offline replay evaluator.
 *
 * C interface to the shared library. All functions return sb_status; on any
 * failure sb_last_error() carries a human-readable message for the calling
 * thread. Handles are opaque and single-threaded; distinct handles are
 * independent.
 *
 * Arm indices cross this boundary 1-based, matching the log-file format.
 * Context matrices are row-major [n_arms x dim], one row per arm.
 */
#ifndef SEMIBANDIT_H
#define SEMIBANDIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef SB_API
#if defined(_WIN32)
#define SB_API
#else
#define SB_API __attribute__((visibility("default")))
#endif
#endif

typedef enum sb_status {
  SB_OK = 0,
  SB_ERROR_INVALID_ARGUMENT = 1,
  SB_ERROR_PARSE = 2,
  SB_ERROR_IO = 3,
  SB_ERROR_NUMERIC = 4,
  SB_ERROR_UNSUPPORTED = 5,
  SB_ERROR_INTERNAL = 6
} sb_status;

SB_API const char* sb_version(void);
SB_API const char* sb_status_name(sb_status status);

/* Message for the most recent failure on this thread; empty when the last
 * call succeeded. The pointer stays valid until the next library call from
 * the same thread. */
SB_API const char* sb_last_error(void);

/* ------------------------------------------------------------------ */
/* Policy handles                                                      */
/* ------------------------------------------------------------------ */

typedef struct sb_policy sb_policy;

/* config_json: one policy object, e.g.
 *   {"kind": "semits", "v": 0.1}
 * Kinds: uniform | lints | semits | acts | bose. Optional keys: v, R, delta,
 * mc_samples, p_min, p_max, weighted_updates, omega, gamma, horizon. */
SB_API sb_status sb_policy_create(const char* config_json, int n_arms, int dim,
                                  uint64_t seed, sb_policy** out_policy);

SB_API void sb_policy_destroy(sb_policy* policy);

/* Selects an arm for one round. contexts: row-major n_arms x dim.
 * out_arm receives the 1-based choice; out_probs (optional, length n_arms)
 * receives the arm-selection distribution given the history. The round stays
 * pending until sb_policy_observe or sb_policy_discard (a new select also
 * replaces it). */
SB_API sb_status sb_policy_select(sb_policy* policy, const double* contexts,
                                  int* out_arm, double* out_probs);

/* Completes the pending round with the observed reward and updates the
 * policy state. */
SB_API sb_status sb_policy_observe(sb_policy* policy, double reward);

/* Drops the pending round without updating (replay discards non-matching
 * events this way). Safe to call when nothing is pending. */
SB_API sb_status sb_policy_discard(sb_policy* policy);

/* Copies the current regression estimate (length dim) into out_estimate. */
SB_API sb_status sb_policy_estimate(const sb_policy* policy,
                                    double* out_estimate);

/* ------------------------------------------------------------------ */
/* Experiment drivers (these back the CLI subcommands)                 */
/* ------------------------------------------------------------------ */

/* Runs the multi-replication simulation described by an experiment config
 * (JSON, schema in the README) and writes <output>_quantiles.csv and
 * <output>_summary.csv, plus the audit side file when configured. When
 * summary_out is non-null, up to summary_cap - 1 bytes of the summary CSV
 * (policy,median_RT) are copied there, NUL-terminated. */
SB_API sb_status sb_simulate(const char* config_json, char* summary_out,
                             size_t summary_cap);

/* Grid search over one exploration parameter ("v" or "omega") of a
 * single-policy experiment config. grid_csv: comma-separated values.
 * Writes value,median_RT rows to out_csv when non-null; stores the best
 * value (ties -> smaller) in *out_best. */
SB_API sb_status sb_tune(const char* config_json, const char* parameter,
                         const char* grid_csv, const char* out_csv,
                         double* out_best);

/* Replays a logged stream (plain or gzip) `runs` times against fresh policy
 * instances seeded per run, writing run_id,matched,G_hat,consumed rows to
 * out_csv when non-null. summary_out (optional) receives a one-line
 * mean/quartile summary of G_hat. */
SB_API sb_status sb_replay(const char* log_path, const char* policy_json,
                           long long horizon, int runs, uint64_t seed,
                           const char* out_csv, char* summary_out,
                           size_t summary_cap);

/* Writes a synthetic uniform-logging dataset of `length` events to out_path.
 * config_json: {"environment": {...}, "bernoulli_rewards": false}. */
SB_API sb_status sb_gen_log(const char* config_json, long long length,
                            uint64_t seed, const char* out_path);

/* Runs the recorded-run checks (determinant-trace, elliptical potential,
 * confidence coverage) over an audit side file. report_out (optional)
 * receives one line per check. Returns SB_OK only if every asserted check
 * passed. */
SB_API sb_status sb_audit(const char* audit_csv_path, char* report_out,
                          size_t report_cap);

#ifdef __cplusplus
}
#endif

#endif /* SEMIBANDIT_H */
