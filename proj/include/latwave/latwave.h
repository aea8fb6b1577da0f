#ifndef LATWAVE_H
#define LATWAVE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every call; they match the CLI exit codes. */
typedef enum lw_status {
    LW_OK = 0,
    LW_ERR_VALIDATION = 2,
    LW_ERR_CONVERGENCE = 3,
    LW_ERR_VERIFICATION = 4,
    LW_ERR_SIMULATION = 5,
    LW_ERR_DOMAIN = 6,
    LW_ERR_ORDER = 7,
    LW_ERR_WINDOW = 8,
    LW_ERR_IO = 9,
    LW_ERR_INVALID_ARGUMENT = 10,
    LW_ERR_INTERNAL = 11
} lw_status;

typedef struct lw_model lw_model;     /* reaction model plus kernel */
typedef struct lw_profile lw_profile; /* solved travelling-wave profile */
typedef struct lw_track lw_track;     /* lattice simulation outcome */

const char* lw_version(void);
const char* lw_status_name(int status);

/* Message for the most recent failed call on this thread. Static storage,
 * overwritten by the next failure. */
const char* lw_last_error(void);

/* Frees strings returned through char** out parameters. */
void lw_free_string(char* s);

/* ---- models ------------------------------------------------------------ */

int lw_model_load(const char* path, lw_model** out);
int lw_model_parse(const char* text, lw_model** out);

/* Built-in model by name with parameter overrides; the kernel stays a point
 * mass. Use a model file for other kernels. */
int lw_model_bundled(const char* name, const char* const* keys, const double* values,
                     size_t n_params, double d, double tau, lw_model** out);

/* Copy of m with a different delay; delay-dependent equilibria are rebuilt. */
int lw_model_with_tau(const lw_model* m, double tau, lw_model** out);

void lw_model_free(lw_model* m);

/* One-line facts: name, d, tau, K, M, sigma, kernel kind. */
int lw_model_info_json(const lw_model* m, char** out_json);

/* Full hypothesis audit; *passed is 1 when every check holds. */
int lw_model_check_json(const lw_model* m, char** out_json, int* passed);

/* ---- dispersion ---------------------------------------------------------- */

int lw_kernel_mgf(const lw_model* m, double lambda, double* out);
int lw_dispersion_delta(const lw_model* m, double c, double lambda, double* out);
int lw_dispersion_delta_tilde(const lw_model* m, double c, double lambda, double* out);

/* Minimal wave speed and the double root of the dispersion function.
 * Residual pointers may be NULL. */
int lw_minimal_speed(const lw_model* m, double* c_star, double* lambda_star,
                     double* delta_residual, double* dlambda_residual);

/* Decay exponents at a supercritical speed c. */
int lw_lambda_roots(const lw_model* m, double c, double* lambda1, double* lambda2);

/* Decay exponent of K - phi on the right. */
int lw_upsilon(const lw_model* m, double c, double* out);

/* ---- profile solver ------------------------------------------------------ */

typedef struct lw_solve_options {
    long nodes_per_unit;     /* grid spacing is 1/nodes_per_unit */
    double half_length;      /* 0 picks a length resolving both tails */
    double tol;              /* sup step tolerance in units of K */
    long max_iterations;
    double q_factor;         /* bracketing coefficient, multiple of the threshold */
    double eta;              /* 0 picks the default exponent ratio */
    double xi_plus;
    double xi_minus;
    double min_gap;          /* refuse c below c_star*(1+min_gap) */
    int continuation_levels; /* critical solve: deepest halving level */
    int normalize;           /* pin phi(0) = K/2 */
} lw_solve_options;

void lw_solve_options_init(lw_solve_options* opt);

int lw_solve_profile(const lw_model* m, double c, const lw_solve_options* opt,
                     lw_profile** out);
int lw_solve_critical(const lw_model* m, const lw_solve_options* opt, lw_profile** out);
void lw_profile_free(lw_profile* p);

int lw_profile_summary_json(const lw_profile* p, char** out_json);
int lw_profile_eval(const lw_profile* p, double xi, double* out);
int lw_profile_write_csv(const lw_profile* p, const char* path);

/* Post-solve audit; *passed is 1 when the profile meets every check. */
int lw_profile_verify_json(const lw_profile* p, char** out_json, int* passed);

/* Sup distances between consecutive continuation levels of a critical solve.
 * Writes up to cap values, reports the full count in *n. */
int lw_profile_continuation(const lw_profile* p, double* buf, size_t cap, size_t* n);

/* ---- lattice simulation -------------------------------------------------- */

typedef struct lw_sim_options {
    long sites;
    double horizon;
    double record_dt;
    double dt;  /* 0 picks a stable step and snaps it to divide record_dt */
    long x0;    /* front seat, -1 picks sites/4 */
} lw_sim_options;

void lw_sim_options_init(lw_sim_options* opt);

int lw_simulate_step(const lw_model* m, const lw_sim_options* opt, lw_track** out);
int lw_simulate_profile(const lw_model* m, const lw_profile* p, const lw_sim_options* opt,
                        lw_track** out);
int lw_simulate_profile_csv(const lw_model* m, const char* csv_path,
                            const lw_sim_options* opt, lw_track** out);
void lw_track_free(lw_track* t);

int lw_track_size(const lw_track* t, size_t* out);
int lw_track_get(const lw_track* t, size_t i, double* time, double* x_front);

/* Front speed from the last half of the records; *valid is 0 when the run
 * had no measurable front (speed is then NaN). */
int lw_track_speed(const lw_track* t, double* speed, int* valid);

int lw_track_summary_json(const lw_track* t, char** out_json);
int lw_track_write_csv(const lw_track* t, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* LATWAVE_H */
