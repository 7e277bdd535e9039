/* C interface to the calderon D-bar reconstruction library.
 *
 * All functions return a cal_status. On failure a description is available
 * from cal_last_error() until the next call on the same thread. Objects are
 * opaque handles released with the matching *_free function; passing NULL to
 * a free function is allowed.
 */
#ifndef CALDERON_H
#define CALDERON_H

#include <stddef.h>

#if defined(CALDERON_BUILDING_LIBRARY)
#define CAL_API __attribute__((visibility("default")))
#else
#define CAL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  CAL_OK = 0,
  CAL_ERR_PARAMETER = 1, /* invalid argument or configuration */
  CAL_ERR_DOMAIN = 2,    /* input outside its admissible set */
  CAL_ERR_IO = 3,        /* unreadable, unwritable or malformed file */
  CAL_ERR_NUMERICAL = 4, /* solver failure or ill-conditioning */
  CAL_ERR_INTERNAL = 5
} cal_status;

typedef enum { CAL_RULE_SQUARED_REAL_PART = 0, CAL_RULE_REAL_PART = 1 } cal_gamma_rule;

typedef struct cal_config cal_config;
typedef struct cal_dtn cal_dtn;
typedef struct cal_scattering cal_scattering;

typedef void (*cal_log_fn)(const char* message, void* user);

CAL_API const char* cal_version(void);
CAL_API const char* cal_last_error(void);
CAL_API const char* cal_status_name(cal_status status);

/* Progress messages from the pipeline functions; NULL disables. Process-wide. */
CAL_API void cal_set_log_callback(cal_log_fn fn, void* user);

/* ---- pipeline configuration ---------------------------------------------------- */

CAL_API cal_status cal_config_from_json(const char* json_text, cal_config** out);
CAL_API cal_status cal_config_load(const char* path, cal_config** out);
CAL_API void cal_config_free(cal_config* config);
CAL_API cal_status cal_config_set_output_dir(cal_config* config, const char* dir);
CAL_API cal_status cal_config_set_workers(cal_config* config, int workers);
/* Comma-separated subset of forward,traces,scattering,recon,metrics; also "all", "traces-only". */
CAL_API cal_status cal_config_set_stages(cal_config* config, const char* stages);
/* Writes the NUL-terminated canonical JSON of the configuration; *needed receives the size including NUL. */
CAL_API cal_status cal_config_to_json(const cal_config* config, char* buffer, size_t size, size_t* needed);
/* 16 hex digits plus NUL: buffer must hold at least 17 bytes. */
CAL_API cal_status cal_config_hash(const cal_config* config, char* buffer, size_t size);
CAL_API cal_status cal_config_output_dir(const cal_config* config, char* buffer, size_t size);

/* ---- pipeline stages ------------------------------------------------------------ */

/* Writes <out>/dtn.json; the path is copied to path_out when it is non-NULL. */
CAL_API cal_status cal_run_forward(const cal_config* config, char* path_out, size_t size);
/* Writes <out>/dtn_extended.json and <out>/extend_report.json. */
CAL_API cal_status cal_run_extend(const cal_config* config, const char* dtn_path, char* path_out, size_t size);
/* Runs the selected reconstruction stages. relative_l2 (may be NULL) receives the
 * metric when the metrics stage ran, NaN otherwise. */
CAL_API cal_status cal_run_reconstruct(const cal_config* config, const char* dtn_path, double* relative_l2);
/* Runs the invariant suites and writes <out>/verify.json. all_passed receives 0 or 1;
 * a readable summary is copied to summary (may be NULL). */
CAL_API cal_status cal_run_verify(const cal_config* config, int* all_passed, char* summary, size_t size);

/* ---- DtN maps -------------------------------------------------------------------- */

CAL_API cal_status cal_dtn_unit(int n_nodes, double radius, int max_mode, cal_dtn** out);
CAL_API cal_status cal_dtn_load(const char* path, cal_dtn** out);
CAL_API void cal_dtn_free(cal_dtn* map);
CAL_API cal_status cal_dtn_info(const cal_dtn* map, int* n_nodes, double* radius, int* max_mode);
/* Entry (m, n) in the Fourier basis, |m|, |n| <= max_mode. */
CAL_API cal_status cal_dtn_entry(const cal_dtn* map, int m, int n, double* re, double* im);

/* ---- CGO traces and scattering ---------------------------------------------------- */

/* psi11 and psi21 receive 2 * n_nodes doubles each (re, im interleaved); residual may be NULL. */
CAL_API cal_status cal_cgo_trace(const cal_dtn* map, double k_re, double k_im, double* psi11, double* psi21,
                                 double* residual);
/* S on the k-grid of side 2^m, truncated at |k| <= r_k (h_k <= 0 selects the default spacing). */
CAL_API cal_status cal_scattering_compute(const cal_dtn* map, int m, double r_k, double h_k, int workers,
                                          cal_scattering** out);
CAL_API cal_status cal_scattering_dual(const cal_scattering* grid, cal_scattering** out);
CAL_API void cal_scattering_free(cal_scattering* grid);
CAL_API cal_status cal_scattering_info(const cal_scattering* grid, int* side, double* h_k, double* r_k);
/* Values at node (ix, iy), k = h_k ((ix - side/2) + i (iy - side/2)); s12 and s21 receive (re, im). */
CAL_API cal_status cal_scattering_value(const cal_scattering* grid, int ix, int iy, double* s12, double* s21);
/* gamma at z = x + i y from a dual scattering grid. */
CAL_API cal_status cal_reconstruct_point(const cal_scattering* dual, double x, double y, cal_gamma_rule rule,
                                         double* gamma);

#ifdef __cplusplus
}
#endif

#endif
