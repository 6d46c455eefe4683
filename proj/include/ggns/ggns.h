#ifndef GGNS_H
#define GGNS_H

/* C interface to the gradient-guided nested sampler.
 *
 * All handles are opaque. Functions that can fail return a ggns_status; on
 * failure ggns_last_error() describes the problem (per thread, valid until the
 * next failing call on that thread). Output arguments are written only on
 * success. Destroy functions accept NULL. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define GGNS_API __declspec(dllexport)
#else
#define GGNS_API __attribute__((visibility("default")))
#endif

typedef enum ggns_status {
  GGNS_OK = 0,
  GGNS_ERR_INVALID_ARGUMENT = 1, /* bad name, key, value or NULL pointer */
  GGNS_ERR_NUMERICAL = 2,        /* non-finite density or sampler gave up */
  GGNS_ERR_IO = 3,               /* artifact writing failed */
  GGNS_ERR_UNAVAILABLE = 4,      /* quantity not defined for this object */
  GGNS_ERR_INTERNAL = 5
} ggns_status;

typedef struct ggns_problem ggns_problem;
typedef struct ggns_config ggns_config;
typedef struct ggns_result ggns_result;

/* Per-iteration record passed to the run observer. */
typedef struct ggns_iteration {
  int64_t iteration;
  int32_t n_clusters;
  double dt;
  double out_frac;
  double log_delta_xl;
  uint64_t n_like_calls;
  double log_x;
  double barrier;
  double max_log_like;
} ggns_iteration;

typedef double (*ggns_log_like_fn)(const double* theta, size_t dim, void* user);
typedef void (*ggns_grad_fn)(const double* theta, size_t dim, double* out, void* user);
typedef void (*ggns_iteration_fn)(const ggns_iteration* info, void* user);

GGNS_API const char* ggns_version(void);
GGNS_API const char* ggns_last_error(void);
GGNS_API const char* ggns_status_string(ggns_status status);

/* ---- problems ---- */

/* Built-in problem by name (gaussian, funnel, mixture9, mixture25, torus,
 * linear_gaussian, flat) with n_params numeric parameters such as "dim". */
GGNS_API ggns_status ggns_problem_create(const char* name, const char* const* keys,
                                         const double* values, size_t n_params,
                                         ggns_problem** out);

/* User density over the box [lower, upper]. grad may be NULL, in which case
 * central finite differences are used. The callbacks must be safe to call
 * from several threads when the run uses more than one worker. */
GGNS_API ggns_status ggns_problem_create_custom(const char* name, size_t dim, const double* lower,
                                                const double* upper, int periodic,
                                                ggns_log_like_fn log_like, ggns_grad_fn grad,
                                                void* user, ggns_problem** out);

GGNS_API void ggns_problem_destroy(ggns_problem* problem);
GGNS_API size_t ggns_problem_dim(const ggns_problem* problem);
GGNS_API ggns_status ggns_problem_log_like(const ggns_problem* problem, const double* theta,
                                           double* out);
GGNS_API ggns_status ggns_problem_grad(const ggns_problem* problem, const double* theta,
                                       double* out);
/* GGNS_ERR_UNAVAILABLE when no closed form is known. */
GGNS_API ggns_status ggns_problem_analytic_log_z(const ggns_problem* problem, double* out);
GGNS_API size_t ggns_problem_mode_count(const ggns_problem* problem);
/* Writes dim coordinates of centre `index`. */
GGNS_API ggns_status ggns_problem_mode_center(const ggns_problem* problem, size_t index,
                                              double* out);
GGNS_API double ggns_problem_mode_radius(const ggns_problem* problem);

/* log of the torus density integral over [0, 2 pi)^n (not box-normalized). */
GGNS_API ggns_status ggns_torus_log_norm(size_t n, double alpha, double beta, double c,
                                         double* out);

/* ---- configuration ---- */

GGNS_API ggns_status ggns_config_create(ggns_config** out);
GGNS_API void ggns_config_destroy(ggns_config* config);
GGNS_API ggns_status ggns_config_set(ggns_config* config, const char* key, const char* value);
/* Copies the text form of `key` into buf (NUL-terminated, truncated to
 * buf_len). *needed, if not NULL, receives the full length including NUL. */
GGNS_API ggns_status ggns_config_get(const ggns_config* config, const char* key, char* buf,
                                     size_t buf_len, size_t* needed);
GGNS_API ggns_status ggns_config_validate(const ggns_config* config);

/* ---- runs ---- */

/* observer may be NULL. */
GGNS_API ggns_status ggns_run(const ggns_problem* problem, const ggns_config* config,
                              ggns_iteration_fn observer, void* user, ggns_result** out);
GGNS_API void ggns_result_destroy(ggns_result* result);

GGNS_API double ggns_result_log_z(const ggns_result* result);
GGNS_API double ggns_result_log_z_err_kl(const ggns_result* result);
GGNS_API double ggns_result_log_z_err_moments(const ggns_result* result);
GGNS_API double ggns_result_d_kl(const ggns_result* result);
GGNS_API uint64_t ggns_result_n_like_calls(const ggns_result* result);
GGNS_API int64_t ggns_result_iterations(const ggns_result* result);
GGNS_API double ggns_result_wall_seconds(const ggns_result* result);
GGNS_API size_t ggns_result_dim(const ggns_result* result);
GGNS_API size_t ggns_result_n_dead(const ggns_result* result);
GGNS_API size_t ggns_result_n_clusters(const ggns_result* result);
GGNS_API const char* ggns_result_stop_reason(const ggns_result* result);

/* Dead point `index` in kill order; theta receives dim values. Any output
 * pointer may be NULL. */
GGNS_API ggns_status ggns_result_dead_point(const ggns_result* result, size_t index, double* theta,
                                            double* log_like, double* log_x, double* log_w,
                                            int32_t* cluster);
GGNS_API ggns_status ggns_result_posterior_mean(const ggns_result* result, double* out);
GGNS_API ggns_status ggns_result_effective_sample_size(const ggns_result* result, double* out);
/* count equally weighted draws into out (count * dim values, row major). */
GGNS_API ggns_status ggns_result_resample(const ggns_result* result, size_t count, uint64_t seed,
                                          double* out);

/* Writes dead_points.csv, diagnostics.csv and summary.json into dir. */
GGNS_API ggns_status ggns_result_write(const ggns_result* result, const char* dir);

/* Number of the n_centers centres with a sample within `radius`. */
GGNS_API ggns_status ggns_mode_coverage(const double* samples, size_t n_samples, size_t dim,
                                        const double* centers, size_t n_centers, double radius,
                                        int* out);

#ifdef __cplusplus
}
#endif

#endif /* GGNS_H */
