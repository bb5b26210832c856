/* C interface to the branchwave library. All handles are opaque; every call that can
 * fail returns a bw_status and leaves a message retrievable with bw_last_error(). */
#ifndef BRANCHWAVE_H
#define BRANCHWAVE_H

#include <stddef.h>

#if defined(_WIN32)
#define BW_API __declspec(dllexport)
#else
#define BW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bw_status {
  BW_OK = 0,
  BW_ERR_INVALID_ARGUMENT = 1,
  BW_ERR_SHAPE = 2,
  BW_ERR_DOMAIN = 3,
  BW_ERR_DEGENERATE_BASIS = 4,
  BW_ERR_OSCILLATORY_REGIME = 5,
  BW_ERR_IMAGINARY_ROOT = 6,
  BW_ERR_INVALID_SEGMENT = 7,
  BW_ERR_NOT_UNSTABLE = 8,
  BW_ERR_NON_CONVERGENCE = 9,
  BW_ERR_NEGATIVITY = 10,
  BW_ERR_BUDGET = 11,
  BW_ERR_BLOW_UP = 12,
  BW_ERR_CONTAMINATED = 13,
  BW_ERR_SPLITTING = 14,
  BW_ERR_RESOLUTION = 15,
  BW_ERR_INTERNAL = 99
} bw_status;

typedef struct bw_wave bw_wave;
typedef struct bw_series bw_series;
typedef struct bw_spectral bw_spectral;
typedef struct bw_winding bw_winding;
typedef struct bw_verify bw_verify;

BW_API const char* bw_version(void);
BW_API const char* bw_status_name(bw_status status);
/* Message of the most recent failure on the calling thread. */
BW_API const char* bw_last_error(void);

/* ---- closed forms ---- */
BW_API double bw_minimal_inactive_limit(double c);
BW_API bw_status bw_decay_rate(double i_limit, double c, double* out);
BW_API double bw_i_plus_infinity(double a0, double i0, double c, double r);
BW_API bw_status bw_alpha_threshold(double i0, double c, double r, double* out);
BW_API bw_status bw_a_star(double i0, double c, double r, double* out);
BW_API bw_status bw_a_at_first_max(double i_minus_inf, double i_z0, double c, double r, double* out);
BW_API double bw_limit_symmetry(double i_minus_inf);

typedef struct bw_general_params {
  double r_S, r_A, r_I, D;
} bw_general_params;

typedef struct bw_scaling {
  double time_factor, space_factor, density_factor;
} bw_scaling;

typedef struct bw_general_predictions {
  double i_c;
  double limit_sum;
  double c_min;
  double c_normalized;
} bw_general_predictions;

BW_API bw_status bw_normalize(const bw_general_params* g, double* r_out, bw_scaling* scaling_out);
BW_API bw_status bw_general_predictions_eval(const bw_general_params* g, double c, bw_general_predictions* out);
BW_API bw_status bw_general_decay_rate(const bw_general_params* g, double c, double level, double* out);

/* ---- traveling waves ---- */
typedef struct bw_shoot_options {
  double seed_eps;   /* <= 0 keeps the default */
  double z_budget;   /* <= 0 keeps the default */
} bw_shoot_options;

typedef struct bw_wave_summary {
  double c, r;
  double i_minus_inf, i_plus_inf;
  double a_max, i_at_max;
  double mu_minus, mu_plus;
  int critical_tail;       /* 1 when the +inf tail is sub-exponential */
  double tail_exponent;    /* NaN unless critical_tail */
  double z_used;
  int converged;
} bw_wave_summary;

typedef struct bw_wave_report {
  int i_monotone, a_nonnegative, single_maximum;
  double limit_sum_residual;
  double mass_res1, mass_res2, mass_res3, total_mass;
  double mu_minus_rel_error;
  double mu_plus_rel_error;      /* NaN when not applicable */
  double tail_exponent_error;    /* NaN when not applicable */
  double first_max_rel_error;
  int passed;
} bw_wave_report;

/* Heteroclinic wave leaving (0,0,i_minus_inf). opts may be NULL. On BW_ERR_NEGATIVITY,
 * *a_min_out (if given) receives the offending value of a. */
BW_API bw_status bw_wave_shoot(double c, double r, double i_minus_inf, const bw_shoot_options* opts,
                               bw_wave** out, double* a_min_out);
/* Trajectory from the first maximum (a0, 0, i0); the summary carries the measured limit. */
BW_API bw_status bw_wave_from_max(double c, double r, double a0, double i0, const bw_shoot_options* opts,
                                  bw_wave** out);
BW_API void bw_wave_destroy(bw_wave* w);
BW_API size_t bw_wave_size(const bw_wave* w);
/* Each array must hold bw_wave_size() values; any may be NULL. */
BW_API bw_status bw_wave_samples(const bw_wave* w, double* z, double* a, double* b, double* i);
BW_API bw_status bw_wave_summary_get(const bw_wave* w, bw_wave_summary* out);
BW_API bw_status bw_wave_verify(const bw_wave* w, bw_wave_report* out);

/* ---- PDE ---- */
BW_API bw_status bw_pde_simulate(const double* A0, const double* I0, size_t n, double x_min, double x_max, double r,
                                 double t_end, double snapshot_dt, bw_series** out);
BW_API void bw_series_destroy(bw_series* s);
BW_API size_t bw_series_count(const bw_series* s);
BW_API size_t bw_series_grid_size(const bw_series* s);
BW_API bw_status bw_series_grid(const bw_series* s, double* x);
BW_API bw_status bw_series_snapshot(const bw_series* s, size_t k, double* t, double* A, double* I);
BW_API bw_status bw_series_front(const bw_series* s, size_t k, double threshold, double* x_out);
BW_API bw_status bw_series_speed(const bw_series* s, double threshold, double t1, double t2, double* c_est,
                                 double* residual);
BW_API bw_status bw_series_plateau(const bw_series* s, size_t k, double threshold, double* level);
BW_API bw_status bw_series_mass_balance(const bw_series* s, double* residual);

/* ---- spectral ---- */
/* Critical wave at (c, r). L <= 0 keeps the default truncation. */
BW_API bw_status bw_spectral_create(double c, double r, double L, bw_spectral** out);
BW_API void bw_spectral_destroy(bw_spectral* s);
BW_API double bw_spectral_length(const bw_spectral* s);
BW_API bw_status bw_evans(const bw_spectral* s, double re, double im, double* re_out, double* im_out);
/* Writes up to cap points; *count receives the full contour length. */
BW_API bw_status bw_contour(double r_min, double r_max, size_t base_n, double* re, double* im, size_t cap,
                            size_t* count);
/* s == NULL winds the identity map instead of the Evans function. */
BW_API bw_status bw_winding_run(const bw_spectral* s, const double* re, const double* im, size_t n,
                                bw_winding** out);
BW_API void bw_winding_destroy(bw_winding* w);
BW_API int bw_winding_number(const bw_winding* w);
BW_API double bw_winding_deviation(const bw_winding* w);
BW_API double bw_winding_max_step(const bw_winding* w);
BW_API int bw_winding_depth(const bw_winding* w);
BW_API size_t bw_winding_sample_count(const bw_winding* w);
BW_API bw_status bw_winding_samples(const bw_winding* w, double* re_gamma, double* im_gamma, double* re_e,
                                    double* im_e);

/* ---- acceptance suite ---- */
typedef void (*bw_verify_callback)(int id, const char* tag, const char* title, int passed, const char* detail,
                                   double seconds, void* user);

/* only: comma-separated tags or NULL; tolerances: comma-separated name=value or NULL. */
BW_API bw_status bw_verify_run(unsigned long long seed, const char* only, const char* tolerances,
                               bw_verify_callback cb, void* user, bw_verify** out);
BW_API void bw_verify_destroy(bw_verify* v);
BW_API size_t bw_verify_count(const bw_verify* v);
BW_API int bw_verify_passed(const bw_verify* v, size_t k);
BW_API const char* bw_verify_tag(const bw_verify* v, size_t k);
BW_API const char* bw_verify_detail(const bw_verify* v, size_t k);

#ifdef __cplusplus
}
#endif

#endif
