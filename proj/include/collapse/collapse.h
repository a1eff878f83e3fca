/* C interface to the collapse-model library.
 *
 * Every function returns a clp_status. On failure clp_last_error() gives a
 * thread-local message that stays valid until the next call on that thread.
 * Handles are opaque and owned by the caller; release them with the matching
 * *_free function (passing NULL is allowed).
 */
#ifndef COLLAPSE_COLLAPSE_H
#define COLLAPSE_COLLAPSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CLP_API __declspec(dllexport)
#else
#define CLP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clp_status {
  CLP_OK = 0,
  CLP_ERR_DOMAIN = 1,
  CLP_ERR_INSTABILITY = 2,
  CLP_ERR_RESOLUTION = 3,
  CLP_ERR_CONTRACT = 4,
  CLP_ERR_TRAJECTORY_ABORT = 5,
  CLP_ERR_IO = 6,
  CLP_ERR_CONFIG = 7,
  CLP_ERR_VERIFICATION = 8,
  CLP_ERR_NULL_ARGUMENT = 9,
  CLP_ERR_INTERNAL = 99
} clp_status;

CLP_API const char* clp_last_error(void);
CLP_API const char* clp_version(void);

/* ---- model ---------------------------------------------------------- */

typedef struct clp_params {
  double mass;
  double lambda;
  double alpha;
  double hbar;
} clp_params;

typedef struct clp_fundamental {
  double lambda0;
  double alpha0;
  double m0;
  double hbar;
  double kB;
} clp_fundamental;

typedef struct clp_derived {
  double omega;
  double theta;
  double omega1;
  double omega2;
  double kappa;
  double a_inf_re;
  double a_inf_im;
  double sigma_q_bar;
  double sigma_p_bar;
  double sigma_qp_bar_sq;
  double E_inf;
  double temperature; /* only when derived with kB > 0 */
} clp_derived;

CLP_API clp_fundamental clp_default_fundamental(void);
CLP_API clp_status clp_scale_parameters(const clp_fundamental* base, double mass,
                                        clp_params* out);
/* Natural units for a body of mass_kg with length unit length_m. */
CLP_API clp_status clp_to_natural(const clp_params* si, double mass_kg, double length_m,
                                  clp_params* out);
CLP_API clp_status clp_derive_constants(const clp_params* p, double kB, clp_derived* out);

/* ---- Gaussian states ------------------------------------------------ */

CLP_API clp_status clp_a_closed_form(const clp_params* p, double a0_re, double a0_im, double t,
                                     double* a_re, double* a_im);

/* ---- tables --------------------------------------------------------- */

typedef struct clp_table clp_table;

CLP_API size_t clp_table_rows(const clp_table* t);
CLP_API size_t clp_table_cols(const clp_table* t);
CLP_API const char* clp_table_column(const clp_table* t, size_t col);
CLP_API double clp_table_value(const clp_table* t, size_t row, size_t col);
/* format: "csv" or "json". path NULL writes to stdout. */
CLP_API clp_status clp_table_write(const clp_table* t, const char* path, const char* format);
CLP_API void clp_table_free(clp_table* t);

/* One noise realization of the Gaussian-state means plus the deterministic
 * width and covariance-of-means. Columns: t, aR, aI, sigma_q, sigma_p, xbar,
 * kbar, C_qq, C_qp, C_pp, energy. */
CLP_API clp_status clp_gaussian_table(const clp_params* p, double a0_re, double a0_im,
                                      double xbar0, double kbar0, double t_final, double dt,
                                      size_t record_every, uint64_t seed, clp_table** out);

/* Coefficient flow of a Gaussian statistical operator. c0 holds c1..c6.
 * Columns: t, c1..c5, purity, energy. */
CLP_API clp_status clp_master_table(const clp_params* p, const double c0[6], double t_final,
                                    size_t n_points, clp_table** out);

/* Coefficients of the pure Gaussian exp[-a (x - xbar)^2 + i kbar x]. */
CLP_API clp_status clp_gaussian_coefficients(const clp_params* p, double a_re, double a_im,
                                             double xbar, double kbar, double c[6]);

typedef struct clp_packet {
  double weight_re;
  double weight_im;
  double a_re;
  double a_im;
  double xbar;
  double kbar;
} clp_packet;

/* Position density of a packet superposition at time t on the given points.
 * Columns: x, exact, expansion, smoothing, schrodinger. */
CLP_API clp_status clp_density_table(const clp_params* p, const clp_packet* packets,
                                     size_t n_packets, double t, const double* x, size_t n_x,
                                     double* beta_t, clp_table** out);

/* ---- experiments ---------------------------------------------------- */

typedef struct clp_config clp_config;
typedef struct clp_summary clp_summary;

CLP_API clp_status clp_config_new(clp_config** out);
CLP_API clp_status clp_config_load(const char* path, clp_config** out);
CLP_API clp_status clp_config_set(clp_config* cfg, const char* key, const char* value);
CLP_API clp_status clp_config_validate(const clp_config* cfg);
/* Text ("text") or JSON ("json") serialization; owned by cfg. */
CLP_API const char* clp_config_serialize(clp_config* cfg, const char* format);
CLP_API clp_status clp_config_params(const clp_config* cfg, clp_params* out);
CLP_API void clp_config_free(clp_config* cfg);

/* Moment records of one trajectory. Columns: t, q_mean, p_mean, sq_q, sq_p,
 * sq_qp, sigma_O_sq, energy, norm_sq. */
CLP_API clp_status clp_trajectory_table(const clp_config* cfg, uint64_t index, clp_table** out);

CLP_API clp_status clp_ensemble_run(const clp_config* cfg, clp_summary** out);
/* Writes summary files into the configured output directory. */
CLP_API clp_status clp_summary_write(const clp_summary* s, const clp_config* cfg);
/* Full summary serialization ("csv" or "json"); owned by s. */
CLP_API const char* clp_summary_serialize(clp_summary* s, const char* format);
CLP_API size_t clp_summary_times(const clp_summary* s);
CLP_API size_t clp_summary_completed(const clp_summary* s);
CLP_API size_t clp_summary_aborted(const clp_summary* s);
/* channel: one of the summary column stems, e.g. "energy", "sigma_O_sq". */
CLP_API clp_status clp_summary_stat(const clp_summary* s, size_t time_index, const char* channel,
                                    double* mean, double* se);
CLP_API clp_status clp_summary_compare_master(const clp_summary* s, const clp_config* cfg,
                                              double* max_abs_z, double* density_l1);
CLP_API void clp_summary_free(clp_summary* s);

/* ---- verification --------------------------------------------------- */

typedef struct clp_report clp_report;

CLP_API clp_status clp_verify(const clp_params* p, uint64_t seed, clp_report** out);
CLP_API size_t clp_report_size(const clp_report* r);
CLP_API const char* clp_report_name(const clp_report* r, size_t i);
CLP_API double clp_report_value(const clp_report* r, size_t i);
CLP_API double clp_report_tolerance(const clp_report* r, size_t i);
CLP_API int clp_report_passed(const clp_report* r, size_t i);
CLP_API void clp_report_free(clp_report* r);

#ifdef __cplusplus
}
#endif

#endif /* COLLAPSE_COLLAPSE_H */
