/* quadloco C API: 2-D quadruped locomotion simulator and PPO trainer.
 *
 * All functions return 0 on success, 1 on runtime failure and 2 on
 * usage/configuration errors. Error text is written to the caller-provided
 * buffer when one is given.
 */
#ifndef QUADLOCO_H
#define QUADLOCO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define QL_OK 0
#define QL_ERR_RUNTIME 1
#define QL_ERR_USAGE 2

#define QL_OBS_DIM 44
#define QL_ACT_DIM 8

/* episode outcome codes */
#define QL_RUNNING 0
#define QL_SUCCESS 1
#define QL_FELL 2
#define QL_TIMEOUT 3

/* ---- environment handle ---- */

typedef struct ql_env ql_env;

/* config_path may be NULL for the default environment configuration. */
ql_env* ql_env_create(const char* config_path, char* err, size_t err_len);
void ql_env_destroy(ql_env* env);

/* writes the initial 44-D observation */
int ql_env_reset(ql_env* env, uint64_t seed, double obs[QL_OBS_DIM]);

/* one 25 Hz control step; action entries are clamped to [-1, 1] */
int ql_env_step(ql_env* env, const double action[QL_ACT_DIM], double obs[QL_OBS_DIM],
                double* reward, int* done, int* outcome, char* err, size_t err_len);

/* ---- command-level API (what the CLI calls) ---- */

typedef struct ql_train_opts {
  const char* config_path; /* required */
  int64_t seed;            /* < 0: use the config's seed */
  int iterations;          /* < 0: use the config's iteration count */
  const char* out_dir;     /* NULL: resolved from config / QUADLOCO_OUT_ROOT */
  int workers;             /* < 1: use the config's worker count */
} ql_train_opts;

int ql_train(const ql_train_opts* opts, char* err, size_t err_len);

typedef struct ql_eval_opts {
  const char* checkpoint;  /* required */
  const char* terrain;     /* "flat" or "rough" */
  int episodes;
  uint64_t seed;
  const char* config_path; /* optional */
  const char* out_dir;     /* optional: report + per-episode CSV */
  int force;               /* nonzero: skip checkpoint/config hash check */
  int deterministic;       /* nonzero: mean action (the evaluation protocol) */
} ql_eval_opts;

typedef struct ql_eval_report {
  int episodes;
  double success_rate;
  double falling_rate;
  double timeout_rate;
  double mean_velocity;
} ql_eval_report;

int ql_eval(const ql_eval_opts* opts, ql_eval_report* report, char* err, size_t err_len);

int ql_replay(const char* checkpoint, uint64_t seed, const char* out_path,
              const char* config_path, int force, char* err, size_t err_len);

int ql_terrain(uint64_t seed, const char* mode, int obstacles, double length,
               const char* out_path, char* err, size_t err_len);

/* writes a human-readable summary into out */
int ql_inspect_checkpoint(const char* checkpoint, char* out, size_t out_len, char* err,
                          size_t err_len);

const char* ql_version(void);

#ifdef __cplusplus
}
#endif

#endif /* QUADLOCO_H */
