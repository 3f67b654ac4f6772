/* C interface to the l0cs core: sparse-recovery solvers (ASP, ASP_o, l1-AMP),
 * their state-evolution trackers, and the 1RSB free-energy predictions.
 *
 * All functions return l0cs_status; on failure a thread-local message is
 * available from l0cs_last_error() until the next failing call on the same
 * thread.  Objects are opaque handles freed with their _free function.
 */
#ifndef L0CS_H
#define L0CS_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  L0CS_OK = 0,
  L0CS_ERR_INVALID = 1, /* bad argument or config */
  L0CS_ERR_RUNTIME = 2, /* numerical or internal failure */
  L0CS_ERR_IO = 3       /* file read/write failure */
} l0cs_status;

const char* l0cs_version(void);
/* Message for the calling thread's most recent failure; never NULL. */
const char* l0cs_last_error(void);

/* ---- problem instances: y = F x_o, Gauss-Bernoulli x_o, F_ij ~ N(0,1/N) */

typedef struct l0cs_instance l0cs_instance;

l0cs_status l0cs_instance_create(int n, double alpha, double rho_o, uint64_t seed,
                                 l0cs_instance** out);
void l0cs_instance_free(l0cs_instance* inst);
l0cs_status l0cs_instance_save(const l0cs_instance* inst, const char* path);
l0cs_status l0cs_instance_load(const char* path, l0cs_instance** out);
/* n = signal dimension, m = number of measurements; either out may be NULL */
void l0cs_instance_dims(const l0cs_instance* inst, int* n, int* m);
/* copies the ground-truth signal into x_o (length n) */
l0cs_status l0cs_instance_signal(const l0cs_instance* inst, double* x_o, int n);

/* ---- geometric lambda-annealing schedule */

typedef struct {
  double lambda_max;       /* first penalty, > 0 */
  double lambda_min;       /* last penalty, in (0, lambda_max] */
  double ratio;            /* per-stage multiplier, in (0, 1) */
  int max_iters_per_stage; /* solver iterations per stage */
  double damping;          /* solver variance damping, in [0, 1) */
} l0cs_schedule;

/* 1.0 down to 1e-6, ratio 0.8, 1000 iterations, damping 0.3 */
void l0cs_schedule_default(l0cs_schedule* sched);

/* ---- solvers; algorithm is "asp", "aspo" or "lasso" */

typedef struct {
  double lambda;
  double m;       /* overlap with x_o */
  double q;       /* self overlap */
  double e;       /* residual mse |y - F x|^2 / N */
  double rho;     /* support density */
  double eps_rec; /* |x_o - x|^2 / N */
  double v;       /* variance order parameter */
  int iters;
  int converged;
  int aborted; /* stage diverged and was skipped */
} l0cs_trace_row;

/* Anneals lambda over the schedule, warm-starting each stage.  x_hat receives
 * the final estimate (length n).  One trace row per stage is written to rows
 * (up to max_rows; pass 0/NULL to skip); *n_rows gets the count written.
 * retune_interval applies to "asp" only: every how many iterations the cluster
 * exponent s is retuned (0 = frozen, negative = default). */
l0cs_status l0cs_solve(const l0cs_instance* inst, const char* algorithm, double xi,
                       const l0cs_schedule* sched, int retune_interval, double* x_hat,
                       int x_hat_len, l0cs_trace_row* rows, int max_rows, int* n_rows);

/* ---- state evolution (infinite-size limit of "aspo" / "lasso") */

typedef struct {
  double lambda;
  double m, q, v;
  int converged;
  int diverged;
} l0cs_se_row;

l0cs_status l0cs_se_anneal(double rho_o, double alpha, const char* algorithm, double xi,
                           const l0cs_schedule* sched, l0cs_se_row* rows, int max_rows,
                           int* n_rows);

/* Recovery threshold in alpha by bisection of the annealed SE, width tol_alpha. */
l0cs_status l0cs_se_threshold(double rho_o, const char* algorithm, double xi,
                              double tol_alpha, const l0cs_schedule* sched,
                              double* alpha_c);

/* ---- 1RSB equilibrium predictions */

typedef struct {
  double lambda;
  double m;
  double eps_rec;
  double rho;  /* support density */
  double e;    /* residual mse */
  double cost; /* e / lambda + rho */
  double v0;   /* intra-cluster variance */
  double s;    /* selected cluster exponent */
  int converged;
  int s_at_max;
} l0cs_replica_row;

/* Annealed equilibrium curve; schedule supplies the lambda grid (solver fields
 * are ignored).  informed nonzero starts the saddle on the signal; s is
 * selected per stage inside [s_min, s_max]. */
l0cs_status l0cs_replica_cost_curve(double rho_o, double alpha,
                                    const l0cs_schedule* sched, double s_min,
                                    double s_max, int informed, l0cs_replica_row* rows,
                                    int max_rows, int* n_rows);

/* Equilibrium recovery boundary alpha_c(rho_o) by bisection, width tol_alpha. */
l0cs_status l0cs_replica_boundary(double rho_o, double tol_alpha, double* alpha_c);

#ifdef __cplusplus
}
#endif

#endif /* L0CS_H */
