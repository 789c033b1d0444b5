/* C interface of the fracwave library. */
#ifndef FRACWAVE_H
#define FRACWAVE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fw_status {
  FW_OK = 0,
  FW_ERR_DOMAIN = 1,    /* invalid argument or violated invariant */
  FW_ERR_NUMERICAL = 2, /* quadrature non-convergence, blow-up */
  FW_ERR_IO = 3,
  FW_ERR_NULL = 4,      /* a required pointer was NULL */
  FW_ERR_INTERNAL = 5
} fw_status;

/* Message of the last failed call on this thread ("" if none). */
const char* fw_last_error(void);
const char* fw_version(void);

typedef struct fw_measure fw_measure;

fw_status fw_measure_riesz(double beta, int d, double constant, fw_measure** out); /* constant <= 0: classical */
fw_status fw_measure_flat(double level, int d, fw_measure** out);
/* locations: n_atoms * d row-major coordinates. */
fw_status fw_measure_atoms(int d, size_t n_atoms, const double* locations, const double* masses, fw_measure** out);
void fw_measure_free(fw_measure* m);

typedef struct fw_condition {
  double value;
  int holds;
  int status; /* 0 finite, 1 divergent, 2 inconclusive */
  int used_quadrature;
} fw_condition;

/* force_quadrature != 0 skips the analytic rule. */
fw_status fw_check_dalang(const fw_measure* mu, double k, double alpha, int force_quadrature, fw_condition* out);
fw_status fw_check_eta(const fw_measure* mu, double k, double alpha, double eta, int force_quadrature,
                       fw_condition* out);
fw_status fw_max_alpha(const fw_measure* mu, double k, double* out);

/* Quadrature functionals for Z = amplitude * exp(-|x|^2/2). */
fw_status fw_isometry_bump(const fw_measure* mu, double k, double alpha, double amplitude, double T, int reversed,
                           double* out);
fw_status fw_increment_moment_bump(const fw_measure* mu, double k, double alpha, double amplitude, double t1,
                                   double t2, double* out);

typedef struct fw_run_options {
  const char* config_path;
  const char* out_dir;          /* NULL: current directory */
  const char* const* overrides; /* key=value */
  size_t n_overrides;
  unsigned workers;             /* 0: hardware concurrency */
  int check;
  const char* env_seed;         /* value of FRACWAVE_SEED or NULL */
} fw_run_options;

/* Runs one experiment; *exit_code receives the process exit code
   (0 ok, 2 validation, 3 numerical, 4 check failed, 1 I/O).
   Diagnostics are written to stderr. */
fw_status fw_run(const fw_run_options* options, int* exit_code);

/* Acceptance suite. scale is "quick" or "full". One line per criterion is
   written to stdout; *failed receives the number of failing criteria. */
fw_status fw_self_test(const char* scale, unsigned workers, int* failed);

/* Sign-flip mutation of the solver kernel, for the self-test smoke check. */
void fw_set_fault_injection(int enabled);

#ifdef __cplusplus
}
#endif

#endif
