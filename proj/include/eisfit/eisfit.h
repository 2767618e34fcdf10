/*
 * eisfit C API: impedance spectrum simulation, equivalent-circuit parameter
 * identification, Cramer-Rao accuracy bounds and E-optimal frequency design
 * for a ten-parameter wide-band Li-ion cell model.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return EISFIT_OK (0) on success; on failure they return a
 * nonzero status and leave a human-readable message in eisfit_last_error()
 * (thread local). Parameter vectors are plain double[10] arrays in the
 * canonical order [R_s, Q_HF, phi_HF, R_1, Q_1, phi_1, R_2, Q_2, phi_2, Q_W].
 */
#ifndef EISFIT_H
#define EISFIT_H

#include <stddef.h>

#if defined(_WIN32)
#define EISFIT_API __declspec(dllexport)
#else
#define EISFIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define EISFIT_NPARAMS 10

typedef enum eisfit_status {
  EISFIT_OK = 0,
  EISFIT_ERR_ARGUMENT = 1,
  EISFIT_ERR_DOMAIN = 2,
  EISFIT_ERR_REGION = 3, /* (f, |Z|) outside every accuracy contour */
  EISFIT_ERR_NUMERIC = 4,
  EISFIT_ERR_IO = 5,
  EISFIT_ERR_NO_CONVERGENCE = 6
} eisfit_status;

typedef enum eisfit_coords {
  EISFIT_COORDS_POLAR = 0,
  EISFIT_COORDS_CARTESIAN = 1
} eisfit_coords;

typedef struct eisfit_noise eisfit_noise;
typedef struct eisfit_grid eisfit_grid;
typedef struct eisfit_spectrum eisfit_spectrum;
typedef struct eisfit_fit_result eisfit_fit_result;
typedef struct eisfit_crlb_report eisfit_crlb_report;
typedef struct eisfit_design_result eisfit_design_result;
typedef struct eisfit_mc_report eisfit_mc_report;

EISFIT_API const char* eisfit_version(void);
/* Message for the most recent failing call on this thread. */
EISFIT_API const char* eisfit_last_error(void);
/* Frees strings returned through char** out-parameters. */
EISFIT_API void eisfit_string_free(char* s);

/* Bundled demo cell parameters used by the default configurations. */
EISFIT_API eisfit_status eisfit_default_truth(double theta[EISFIT_NPARAMS]);
EISFIT_API const char* eisfit_param_name(int index);

/* ---- noise model ---- */
EISFIT_API eisfit_status eisfit_noise_single_region(double eps_rho_percent,
                                                    double eps_phi_deg,
                                                    eisfit_noise** out);
EISFIT_API eisfit_status eisfit_noise_load(const char* path,
                                           eisfit_noise** out);
EISFIT_API eisfit_status eisfit_noise_save(const eisfit_noise* m,
                                           const char* path);
EISFIT_API eisfit_status eisfit_noise_sigma_polar(const eisfit_noise* m,
                                                  double f_hz, double rho,
                                                  double* sigma_rho,
                                                  double* sigma_phi);
EISFIT_API void eisfit_noise_free(eisfit_noise* m);

/* ---- frequency grid ---- */
EISFIT_API eisfit_status eisfit_grid_logspace(double f_min_hz, double f_max_hz,
                                              int points_per_decade,
                                              eisfit_grid** out);
EISFIT_API eisfit_status eisfit_grid_logspace_n(double f_min_hz,
                                                double f_max_hz, int n_points,
                                                eisfit_grid** out);
EISFIT_API eisfit_status eisfit_grid_from_freqs(const double* freq_hz, int n,
                                                double f_min_hz,
                                                double f_max_hz,
                                                eisfit_grid** out);
EISFIT_API int eisfit_grid_size(const eisfit_grid* g);
EISFIT_API eisfit_status eisfit_grid_get_freqs(const eisfit_grid* g,
                                               double* freq_hz_out);
EISFIT_API void eisfit_grid_free(eisfit_grid* g);

/* ---- model evaluation ---- */
EISFIT_API eisfit_status eisfit_model_eval(const double theta[EISFIT_NPARAMS],
                                           const double* freq_hz, int n,
                                           double* re_out, double* im_out);

/* ---- spectra ---- */
EISFIT_API eisfit_status eisfit_spectrum_simulate(
    const double theta[EISFIT_NPARAMS], const eisfit_grid* g,
    const eisfit_noise* m, unsigned long long seed, int inject_noise,
    eisfit_spectrum** out);
EISFIT_API eisfit_status eisfit_spectrum_load_csv(const char* path,
                                                  eisfit_spectrum** out);
EISFIT_API eisfit_status eisfit_spectrum_save_csv(const eisfit_spectrum* s,
                                                  const char* path,
                                                  const char* config_hash);
EISFIT_API int eisfit_spectrum_size(const eisfit_spectrum* s);
EISFIT_API eisfit_status eisfit_spectrum_get(const eisfit_spectrum* s,
                                             int index, double* freq_hz,
                                             double* re, double* im,
                                             double* rho, double* phi,
                                             double* sigma_rho,
                                             double* sigma_phi);
EISFIT_API void eisfit_spectrum_free(eisfit_spectrum* s);

/* ---- initialization ---- */
/* diagnostics_json (optional) receives the per-stage report; free it with
 * eisfit_string_free. */
EISFIT_API eisfit_status eisfit_initialize(const eisfit_spectrum* s,
                                           const eisfit_noise* m,
                                           double theta0_out[EISFIT_NPARAMS],
                                           char** diagnostics_json);

/* ---- weighted CNLS fit ---- */
typedef struct eisfit_fit_config {
  int coordinates; /* eisfit_coords */
  int max_iterations;
  double gradient_tol;
  double step_tol;
  double cost_tol;
  double damping_init;
} eisfit_fit_config;

EISFIT_API void eisfit_fit_config_default(eisfit_fit_config* cfg);
EISFIT_API eisfit_status eisfit_fit(const eisfit_spectrum* s,
                                    const double theta0[EISFIT_NPARAMS],
                                    const eisfit_fit_config* cfg,
                                    eisfit_fit_result** out);
EISFIT_API eisfit_status eisfit_fit_result_theta(const eisfit_fit_result* r,
                                                 double theta[EISFIT_NPARAMS]);
EISFIT_API double eisfit_fit_result_cost(const eisfit_fit_result* r);
EISFIT_API int eisfit_fit_result_iterations(const eisfit_fit_result* r);
EISFIT_API int eisfit_fit_result_converged(const eisfit_fit_result* r);
EISFIT_API eisfit_status eisfit_fit_result_variances(
    const eisfit_fit_result* r, double var[EISFIT_NPARAMS]);
EISFIT_API eisfit_status eisfit_fit_result_json(const eisfit_fit_result* r,
                                                char** json_out);
EISFIT_API void eisfit_fit_result_free(eisfit_fit_result* r);

/* ---- Fisher information / CRLB ---- */
EISFIT_API eisfit_status eisfit_crlb(const double theta[EISFIT_NPARAMS],
                                     const eisfit_grid* g,
                                     const eisfit_noise* m, int coordinates,
                                     eisfit_crlb_report** out);
EISFIT_API eisfit_status eisfit_crlb_values(const eisfit_crlb_report* r,
                                            double crlb[EISFIT_NPARAMS]);
EISFIT_API eisfit_status eisfit_crlb_eigenvalues(const eisfit_crlb_report* r,
                                                 double eig[EISFIT_NPARAMS]);
EISFIT_API double eisfit_crlb_ellipsoid_volume(const eisfit_crlb_report* r);
EISFIT_API eisfit_status eisfit_crlb_fim(const eisfit_crlb_report* r,
                                         double fim_row_major[EISFIT_NPARAMS *
                                                              EISFIT_NPARAMS]);
EISFIT_API eisfit_status eisfit_crlb_json(const eisfit_crlb_report* r,
                                          char** json_out);
EISFIT_API void eisfit_crlb_free(eisfit_crlb_report* r);

/* Per-frequency contribution to the FIM (row-major 10x10). */
EISFIT_API eisfit_status eisfit_fim_contribution(
    const double theta[EISFIT_NPARAMS], double freq_hz, const eisfit_noise* m,
    int coordinates, double contrib_row_major[EISFIT_NPARAMS * EISFIT_NPARAMS]);

/* ---- E-optimal frequency design ---- */
typedef struct eisfit_design_config {
  double f_min_hz;
  double f_max_hz;
  int n_points;
  double mu;
  int coordinates; /* eisfit_coords */
  unsigned long long seed;
} eisfit_design_config;

EISFIT_API void eisfit_design_config_default(eisfit_design_config* cfg);
EISFIT_API eisfit_status eisfit_design_run(const double theta_true[EISFIT_NPARAMS],
                                           const eisfit_noise* m,
                                           const eisfit_design_config* cfg,
                                           eisfit_design_result** out);
/* Number of history rows (N adjustments + 1 terminal snapshot). */
EISFIT_API int eisfit_design_iterations(const eisfit_design_result* r);
EISFIT_API eisfit_status eisfit_design_history_row(
    const eisfit_design_result* r, int k, int* adjusted_index,
    double* freq_old_hz, double* freq_new_hz, double* lambda_before,
    double* lambda_after, double* volume_true, double* volume_est);
EISFIT_API eisfit_status eisfit_design_crlb_row(
    const eisfit_design_result* r, int k, double crlb_true[EISFIT_NPARAMS],
    double crlb_est[EISFIT_NPARAMS]);
/* Full grid at the start of iteration k (freq_hz_out sized n_points). */
EISFIT_API eisfit_status eisfit_design_grid_row(const eisfit_design_result* r,
                                                int k, double* freq_hz_out);
EISFIT_API eisfit_status eisfit_design_final_grid(const eisfit_design_result* r,
                                                  eisfit_grid** out);
EISFIT_API eisfit_status eisfit_design_final_fit_json(
    const eisfit_design_result* r, char** json_out);
EISFIT_API void eisfit_design_free(eisfit_design_result* r);

/* ---- Monte-Carlo harness ---- */
typedef struct eisfit_mc_config {
  double f_min_hz;
  double f_max_hz;
  int points_per_decade;
  int runs;
  unsigned long long seed;
  int coordinates;     /* eisfit_coords, coordinates for the report */
  int fit_both_coords; /* nonzero: run the polar and Cartesian fit per seed */
  int threads;         /* <= 0: hardware concurrency */
} eisfit_mc_config;

EISFIT_API void eisfit_mc_config_default(eisfit_mc_config* cfg);
EISFIT_API eisfit_status eisfit_montecarlo(const double theta_true[EISFIT_NPARAMS],
                                           const eisfit_noise* m,
                                           const eisfit_mc_config* cfg,
                                           eisfit_mc_report** out);
EISFIT_API int eisfit_mc_runs(const eisfit_mc_report* r);
EISFIT_API int eisfit_mc_failures(const eisfit_mc_report* r);
EISFIT_API eisfit_status eisfit_mc_param_stats(
    const eisfit_mc_report* r, int param, double* truth, double* mean_init,
    double* mean_init_err_pct, double* mean_est, double* mean_est_err_pct,
    double* emp_variance, double* crlb, double* variance_over_crlb);
EISFIT_API eisfit_status eisfit_mc_run_thetas(const eisfit_mc_report* r,
                                              int run, int* ok,
                                              double theta0[EISFIT_NPARAMS],
                                              double theta_polar[EISFIT_NPARAMS],
                                              double theta_cart[EISFIT_NPARAMS]);
EISFIT_API eisfit_status eisfit_mc_json(const eisfit_mc_report* r,
                                        char** json_out);
EISFIT_API void eisfit_mc_free(eisfit_mc_report* r);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EISFIT_H */
