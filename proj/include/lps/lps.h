/* C interface to the low-rank plus sparse reconstruction library.
 *
 * Every object is an opaque handle owned by the caller and released with the
 * matching *_free function (NULL is accepted). Functions return an lps_status;
 * on failure lps_last_error() describes the problem for the calling thread.
 * Frame indices are 0-based.
 */
#ifndef LPS_LPS_H
#define LPS_LPS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LPS_API __declspec(dllexport)
#else
#define LPS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lps_status {
  LPS_OK = 0,
  LPS_ERR_VALIDATION = 1, /* bad argument or inconsistent shapes */
  LPS_ERR_FORMAT = 2,     /* malformed file */
  LPS_ERR_TRUNCATED = 3,  /* file shorter than its header promises */
  LPS_ERR_IO = 4,         /* open/read/write failure */
  LPS_ERR_DIMENSION = 5,  /* file dimensions differ from the expected ones */
  LPS_ERR_NUMERICAL = 6,  /* SVD failure or non-finite iterate */
  LPS_ERR_INTERNAL = 7,
  LPS_ERR_NULL_ARG = 8
} lps_status;

typedef enum lps_solver { LPS_SOLVER_LS = 0, LPS_SOLVER_PRIORI_LS = 1 } lps_solver;

typedef enum lps_component {
  LPS_COMPONENT_X = 0, /* L + S, or the noisy phantom frame */
  LPS_COMPONENT_L = 1,
  LPS_COMPONENT_S = 2
} lps_component;

typedef struct lps_volume lps_volume;
typedef struct lps_mask lps_mask;
typedef struct lps_kspace lps_kspace;
typedef struct lps_settings lps_settings;
typedef struct lps_results lps_results;
typedef struct lps_phantom lps_phantom;

typedef struct lps_result_info {
  int iterations;
  int converged;
  double final_change;  /* last relative change, 0 if no iterations ran */
  double data_residual; /* ||y - A(L + S)||_F */
  double lambda_L;      /* thresholds actually applied */
  double lambda_S;
} lps_result_info;

LPS_API const char* lps_last_error(void);
LPS_API const char* lps_status_name(lps_status status);
/* Returned by lps_psnr for an exact match. */
LPS_API double lps_psnr_sentinel(void);

/* Volumes. `data` holds nx*ny*nz interleaved (re, im) pairs, column-major
 * over the (nx*ny) x nz matrix; NULL gives a zero volume. */
LPS_API lps_status lps_volume_create(size_t nx, size_t ny, size_t nz, const double* data,
                                     lps_volume** out);
LPS_API lps_status lps_volume_load(const char* path, lps_volume** out);
LPS_API lps_status lps_volume_save(const lps_volume* v, const char* path);
LPS_API lps_status lps_volume_dims(const lps_volume* v, size_t* nx, size_t* ny, size_t* nz);
/* Copies 2*nx*ny*nz doubles; `capacity` is the length of `out` in doubles. */
LPS_API lps_status lps_volume_read(const lps_volume* v, double* out, size_t capacity);
LPS_API void lps_volume_free(lps_volume* v);

/* Masks. `layers` is 1 (shared by all slices) or the slice count. */
LPS_API lps_status lps_mask_generate(size_t nx, size_t ny, double rate, double density_falloff,
                                     uint64_t seed, size_t layers, lps_mask** out);
LPS_API lps_status lps_mask_load(const char* path, lps_mask** out);
LPS_API lps_status lps_mask_save(const lps_mask* m, const char* path);
LPS_API lps_status lps_mask_info(const lps_mask* m, size_t* nx, size_t* ny, size_t* layers,
                                 size_t* count);
LPS_API void lps_mask_free(lps_mask* m);

LPS_API lps_status lps_acquire(const lps_volume* x, const lps_mask* m, lps_kspace** out);
LPS_API lps_status lps_acquire_adjoint(const lps_kspace* y, lps_volume** out);
LPS_API void lps_kspace_free(lps_kspace* y);

/* Settings: the sections [phantom], [solver.ls], [solver.priori] and [sweep]
 * of a config file, plus overrides. Values are checked when used and by
 * lps_settings_validate. */
LPS_API lps_status lps_settings_create(lps_settings** out);
LPS_API lps_status lps_settings_load(const char* path, lps_settings** out);
LPS_API lps_status lps_settings_set(lps_settings* s, const char* section, const char* key,
                                    const char* value);
/* *value is NULL when the key is unset; the string lives until the settings
 * are modified or freed. */
LPS_API lps_status lps_settings_get(const lps_settings* s, const char* section, const char* key,
                                    const char** value);
LPS_API lps_status lps_settings_validate(const lps_settings* s);
LPS_API void lps_settings_free(lps_settings* s);

/* Baseline solve of one volume with [solver.ls]. */
LPS_API lps_status lps_solve(const lps_kspace* y, const lps_settings* s, lps_results** out);
/* Sequence solve. Frame 0 always uses plain L+S with [solver.ls]; later
 * frames use `solver`. On failure *failed_frame (if not NULL) receives the
 * failing index, or SIZE_MAX when the failure is not tied to one frame. */
LPS_API lps_status lps_solve_sequence(const lps_kspace* const* frames, size_t n_frames,
                                      const lps_settings* s, lps_solver solver,
                                      lps_results** out, size_t* failed_frame);
LPS_API size_t lps_results_count(const lps_results* r);
LPS_API lps_status lps_results_info(const lps_results* r, size_t index, lps_result_info* out);
LPS_API lps_status lps_results_component(const lps_results* r, size_t index,
                                         lps_component which, lps_volume** out);
LPS_API void lps_results_free(lps_results* r);

/* Phantom from the [phantom] section. */
LPS_API lps_status lps_phantom_generate(const lps_settings* s, lps_phantom** out);
LPS_API size_t lps_phantom_frames(const lps_phantom* p);
LPS_API lps_status lps_phantom_component(const lps_phantom* p, size_t frame,
                                         lps_component which, lps_volume** out);
LPS_API void lps_phantom_free(lps_phantom* p);

LPS_API lps_status lps_psnr(const lps_volume* reference, const lps_volume* estimate,
                            double* out);

/* Runs the sweep described by the settings and writes sweep.csv, summary.csv
 * and run.log to `output_dir` (NULL: the [sweep] output_dir). */
LPS_API lps_status lps_sweep_run(const lps_settings* s, const char* output_dir,
                                 size_t* failed_frame);

#ifdef __cplusplus
}
#endif

#endif /* LPS_LPS_H */
