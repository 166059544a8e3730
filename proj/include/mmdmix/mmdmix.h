/* C interface to the mmdmix multi-agent RL laboratory.
 *
 * All functions return mmdmix_status; on any non-OK status a human-readable
 * message is available from mmdmix_last_error() (thread-local). Handles are
 * opaque and must be released with their matching _free function.
 */
#ifndef MMDMIX_H
#define MMDMIX_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mmdmix_status {
    MMDMIX_OK = 0,
    /* 1 is reserved for command-line usage errors */
    MMDMIX_ERR_CONFIG = 2,   /* bad config key/value/invariant, bad inputs */
    MMDMIX_ERR_CONTRACT = 3, /* runtime contract violation */
    MMDMIX_ERR_SELFTEST = 4, /* a selftest property failed */
    MMDMIX_ERR_IO = 5        /* file system / serialization failure */
} mmdmix_status;

typedef struct mmdmix_config mmdmix_config;

/* Fresh config holding the documented defaults. Never returns NULL. */
mmdmix_config* mmdmix_config_create(void);
void mmdmix_config_free(mmdmix_config* cfg);

/* Merges a file of "key = value" lines ('#' comments allowed). */
mmdmix_status mmdmix_config_load_file(mmdmix_config* cfg, const char* path);

/* Applies one dotted-key assignment, e.g. ("mixer.n_particles", "4"). */
mmdmix_status mmdmix_config_set(mmdmix_config* cfg, const char* key, const char* value);

/* Reads back the current value of a key into buf (NUL-terminated). */
mmdmix_status mmdmix_config_get(const mmdmix_config* cfg, const char* key,
                                char* buf, size_t buf_len);

/* Runs the full training loop; writes manifest.json, metrics.csv and
 * checkpoints under out_dir. Deterministic given (config, seed). */
mmdmix_status mmdmix_train(const mmdmix_config* cfg, unsigned long long seed,
                           const char* out_dir);

typedef struct mmdmix_eval_summary {
    double return_mean;
    double return_median;
    double success_rate;
    int episodes;
} mmdmix_eval_summary;

/* Greedy evaluation of a checkpoint. env_name may be NULL to use the
 * environment recorded in the checkpoint; episodes must be >= 1. */
mmdmix_status mmdmix_eval(const char* checkpoint_path, const char* env_name,
                          int episodes, unsigned long long seed,
                          mmdmix_eval_summary* out);

/* Property suites (kernel identities, REM properties, gradient checks,
 * monotonicity probes, IGM enumeration); one line per suite on stdout.
 * flags bit 0 flips the mixing-weight abs transform (test hook: the
 * monotonicity suite must then fail). */
mmdmix_status mmdmix_selftest(unsigned flags);

/* Aggregates metrics.csv files from n_dirs run directories into median and
 * 25/75-percentile curves; writes CSV to out_csv_path, or to stdout when
 * out_csv_path is NULL. */
mmdmix_status mmdmix_summarize(const char* const* run_dirs, size_t n_dirs,
                               const char* out_csv_path);

/* Message for the most recent failure on this thread; never NULL. */
const char* mmdmix_last_error(void);

const char* mmdmix_version(void);

#ifdef __cplusplus
}
#endif

#endif /* MMDMIX_H */
