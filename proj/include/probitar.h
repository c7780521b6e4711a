/*
 * probitar - multivariate autoregressive probit binary time series:
 * simulation, pseudo-likelihood estimation and parametric bootstrap.
 *
 * C API over the C++ core. All objects are opaque handles owned by the
 * caller and released with the matching *_free function. Functions return
 * PAR_OK (0) on success or an error code; par_last_error() holds a
 * thread-local message for the last failing call on this thread.
 */
#ifndef PROBITAR_H
#define PROBITAR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define PAR_OK 0
#define PAR_EINVAL 1       /* invalid argument / dimension mismatch */
#define PAR_EPARSE 2       /* malformed CSV, JSON or trace file */
#define PAR_EIO 3          /* file cannot be read or written */
#define PAR_ENUMERIC 4     /* numerical failure (optimizer, bootstrap budget) */
#define PAR_EUNSUPPORTED 5 /* operation outside supported range */

const char* par_last_error(void);
void par_string_free(char* s);

typedef struct par_params par_params;   /* model parameters (A, B, C, R) */
typedef struct par_covspec par_covspec; /* covariate generator */
typedef struct par_panel par_panel;     /* assembled binary panel */
typedef struct par_raw par_raw;         /* long-format raw panel */
typedef struct par_fit par_fit;         /* estimation result */

/* ---- scalar kernels ---- */

double par_std_normal_cdf(double x);
double par_std_normal_quantile(double p);

/* P(Y_i = s_i, Y_j = s_j) for latent predictors lam and correlation r. */
int par_rect2(double lam_i, double lam_j, double r, int s_i, int s_j,
              double* prob);
int par_rect2_dr(double lam_i, double lam_j, double r, int s_i, int s_j,
                 double* deriv);
/* GHK estimate of the k-dimensional outcome probability; corr is k*k
 * row-major; n_draws >= 100; std_err may be NULL. */
int par_rect_ghk(int k, const double* lam, const double* corr, const int* s,
                 int n_draws, uint64_t seed, double* prob, double* std_err);

/* ---- model parameters ---- */

int par_params_create(int k, int p, int d, par_params** out);
int par_params_from_json(const char* text, par_params** out);
int par_params_to_json(const par_params* params, char** out);
int par_params_set_a(par_params* params, int lag /* 1-based */,
                     const double* a /* k*k row-major */);
int par_params_set_b(par_params* params, const double* b /* k*d row-major */);
int par_params_set_c(par_params* params, const double* c /* k */);
int par_params_set_r(par_params* params, const double* r /* k*k row-major */);
int par_params_dims(const par_params* params, int* k, int* p, int* d);
int par_params_validate(const par_params* params);
void par_params_free(par_params* params);

/* ---- covariate generators ---- */

/* d independent standardized ARMA processes. Fails for non-stationary AR. */
int par_covspec_arma(int d, const double* ar, int n_ar, const double* ma,
                     int n_ma, double innovation_sd, par_covspec** out);
int par_covspec_none(par_covspec** out);
void par_covspec_free(par_covspec* cov);

/* ---- simulation ---- */

int par_simulate_panel(const par_params* params, const par_covspec* cov,
                       int n_paths, int horizon, int burn_in, uint64_t seed,
                       par_panel** out);

/* Coupling-from-the-past draw from the stationary law of the lag state.
 * On coalescence *state_bits receives the encoded state (bit l*k+i holds
 * coordinate i of lag l); when max_lookback is exhausted without
 * coalescence, *state_bits is set to -1 (a normal outcome, not an error).
 * Requires k*p <= 16 (PAR_EUNSUPPORTED otherwise). */
int par_perfect_sample(const par_params* params, const par_covspec* cov,
                       int max_lookback, uint64_t seed, uint64_t draw_id,
                       int* state_bits);

/* ---- panels ---- */

int par_panel_dims(const par_panel* panel, int* n, int* horizon, int* k,
                   int* d);
int par_panel_response(const par_panel* panel, int path,
                       int* y /* T*k row-major */);
int par_panel_covariate(const par_panel* panel, int path,
                        double* x /* T*d row-major */);
int par_panel_save_csv(const par_panel* panel, const char* path);
int par_panel_load_csv(const char* path, par_panel** out);
int par_panel_save_trace(const par_panel* panel, int lag_order,
                         const char* path);
int par_panel_load_trace(const char* path, par_panel** out, int* lag_order);
void par_panel_free(par_panel* panel);

/* ---- raw long-format panels (prep pipeline) ---- */

int par_raw_load_csv(const char* path, par_raw** out);
int par_raw_save_csv(const par_raw* raw, const char* path);
int par_raw_binarize(const par_raw* raw, double quantile, par_raw** out);
int par_raw_impute(const par_raw* raw, uint64_t seed, par_raw** out,
                   par_raw** mask /* may be NULL */);
int par_raw_assemble(const par_raw* raw, const char* const* responses,
                     int n_responses, const char* const* covariates,
                     int n_covariates, par_panel** out);
void par_raw_free(par_raw* raw);

/* ---- estimation ---- */

typedef struct par_fit_options {
  int lag_order;   /* p >= 1 */
  int threads;     /* <= 0: PROBIT_AR_THREADS env var, else hardware */
  int ghk_draws;   /* one-step with k >= 3; <= 0 picks 2000 */
  uint64_t seed;   /* one-step GHK common random numbers */
  int max_iters;   /* <= 0 picks 2000*dim */
  double f_tol;    /* <= 0 picks 1e-9 */
  double x_tol;    /* <= 0 picks 1e-7 */
} par_fit_options;

void par_fit_options_defaults(par_fit_options* opts);

int par_fit_two_step(const par_panel* panel, const par_fit_options* opts,
                     par_fit** out);
int par_fit_one_step(const par_panel* panel, const par_fit_options* opts,
                     par_fit** out);

int par_fit_dims(const par_fit* fit, int* k, int* p, int* d);
/* gamma: length k(1+pk+d), columns of C, A_1..A_p, B. r: length k(k-1)/2. */
int par_fit_gamma(const par_fit* fit, double* gamma);
int par_fit_corr(const par_fit* fit, double* r);
int par_fit_objective(const par_fit* fit, double* value);
int par_fit_flags(const par_fit* fit, int* pd_repaired, int* any_boundary);
int par_fit_params(const par_fit* fit, par_params** out);
int par_fit_to_json(const par_fit* fit, char** out);
int par_fit_from_json(const char* text, par_fit** out);
/* Aligned human-readable tables. */
int par_fit_format_table(const par_fit* fit, char** out);
int par_fit_format_intervals(const par_fit* fit, char** out);
void par_fit_free(par_fit* fit);

/* ---- parametric bootstrap ---- */

/* Simulates b_replicates panels of the template's shape from the fitted
 * parameters and re-estimates each with the two-step method. Covariates are
 * regenerated from cov when non-NULL, else whole observed covariate paths
 * are resampled. Returns a copy of the fit with basic-bootstrap intervals
 * attached. b_replicates >= 100; more than 10% failed replicates is an
 * error. */
int par_bootstrap_ci(const par_fit* fit, const par_panel* template_panel,
                     const par_covspec* cov, int b_replicates, double level,
                     uint64_t seed, int threads, par_fit** out);
/* lo/hi have n_params = k(1+pk+d) + k(k-1)/2 entries (gamma order, then r). */
int par_fit_intervals(const par_fit* fit, double* lo, double* hi,
                      double* level);

/* ---- Monte-Carlo replication study ---- */

/* Runs n_sims rounds of simulate -> estimate and writes the per-parameter
 * table (rows in A, B, C, R order). Arrays must hold n_params entries;
 * names receives '\n'-joined parameter names (free with par_string_free).
 * method: 0 = two-step, 1 = one-step. */
int par_replicate(const par_params* truth, const par_covspec* cov,
                  int n_paths, int horizon, int burn_in, int n_sims,
                  int method, const par_fit_options* opts, uint64_t seed,
                  double* truth_out, double* mean, double* mse, double* bias,
                  double* variance, char** names);

#ifdef __cplusplus
}
#endif

#endif /* PROBITAR_H */
