/* C interface for the wigner-transport simulation engine. */

#ifndef WIGNER_TRANSPORT_H
#define WIGNER_TRANSPORT_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum wt_status {
  WT_OK = 0,
  WT_ERR_INVALID_ARG = 1,
  WT_ERR_CONFIG = 2,
  WT_ERR_DOMAIN = 3,
  WT_ERR_RESOURCE = 4,
  WT_ERR_NUMERICS = 5,
  WT_ERR_IO = 6,
  WT_ERR_PANIC = 7,
} wt_status;

/**
 * Opaque run-result handle: snapshot histograms plus scalar outcomes.
 */
typedef struct wt_result wt_result;

/**
 * Opaque scenario handle.
 */
typedef struct wt_scenario wt_scenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *wt_last_error(void);

/**
 * Version string of the underlying engine. Static storage; do not free.
 */
const char *wt_version(void);

/**
 * Creates a scenario from a built-in preset name.
 *
 * # Safety
 * `name` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to receive the handle. Free the handle with
 * [`wt_scenario_free`].
 */
enum wt_status wt_scenario_preset(const char *name, struct wt_scenario **out);

/**
 * Creates a scenario from a configuration file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must be valid.
 */
enum wt_status wt_scenario_from_config(const char *path, struct wt_scenario **out);

/**
 * Renders the scenario in the config format into `buf` (NUL-terminated,
 * truncated to `len`). The full length (excluding NUL) is written to
 * `written` when non-null; call with a null `buf` to size the buffer.
 *
 * # Safety
 * `scenario` must be a live handle; `buf` must point to `len` writable
 * bytes when non-null.
 */
enum wt_status wt_scenario_serialize(const struct wt_scenario *scenario,
                                     char *buf,
                                     size_t len,
                                     size_t *written);

/**
 * Overrides the random seed.
 *
 * # Safety
 * `scenario` must be a live handle from this library.
 */
enum wt_status wt_scenario_set_seed(struct wt_scenario *scenario, uint64_t seed);

/**
 * Overrides the particle budget (initial ensemble for transient runs,
 * injection batch for steady-state runs).
 *
 * # Safety
 * `scenario` must be a live handle from this library.
 */
enum wt_status wt_scenario_set_particles(struct wt_scenario *scenario, size_t particles);

/**
 * Releases a scenario handle (null is a no-op).
 *
 * # Safety
 * `scenario` must be null or a handle from this library, not yet freed.
 */
void wt_scenario_free(struct wt_scenario *scenario);

/**
 * Runs the scenario with `workers` threads (0 = default) and returns a
 * result handle: one snapshot per transient snapshot time, or a single
 * time-averaged entry for steady state.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be valid. Free the result
 * with [`wt_result_free`].
 */
enum wt_status wt_run(const struct wt_scenario *scenario, size_t workers, struct wt_result **out);

/**
 * Releases a result handle (null is a no-op).
 *
 * # Safety
 * `result` must be null or a handle from this library, not yet freed.
 */
void wt_result_free(struct wt_result *result);

/**
 * Number of snapshots held by a result.
 *
 * # Safety
 * `result` must be a live handle; `count` must be valid.
 */
enum wt_status wt_result_snapshot_count(const struct wt_result *result, size_t *count);

/**
 * Density grid dimensions (shared by all snapshots of a result).
 *
 * # Safety
 * `result` must be a live handle; `nx` and `ny` must be valid.
 */
enum wt_status wt_result_density_dims(const struct wt_result *result, size_t *nx, size_t *ny);

/**
 * Snapshot time in femtoseconds.
 *
 * # Safety
 * `result` must be a live handle; `t_fs` must be valid.
 */
enum wt_status wt_result_snapshot_time(const struct wt_result *result, size_t index, double *t_fs);

/**
 * Copies the density n(x, y) of one snapshot into `buf` (row-major along
 * y: `buf[iy * nx + ix]`). `len` is the buffer capacity in values.
 *
 * # Safety
 * `result` must be a live handle; `buf` must point to `len` writable f64.
 */
enum wt_status wt_result_density(const struct wt_result *result,
                                 size_t index,
                                 double *buf,
                                 size_t len);

/**
 * Copies a marginal profile along the chosen axis (0 = x, 1 = y).
 *
 * # Safety
 * `result` must be a live handle; `buf` must point to `len` writable f64.
 */
enum wt_status wt_result_marginal(const struct wt_result *result,
                                  size_t index,
                                  uint32_t axis,
                                  double *buf,
                                  size_t len);

/**
 * Copies the negativity profile along y of one snapshot.
 *
 * # Safety
 * `result` must be a live handle; `buf` must point to `len` writable f64.
 */
enum wt_status wt_result_negativity_y(const struct wt_result *result,
                                      size_t index,
                                      double *buf,
                                      size_t len);

/**
 * Transmitted weight fraction of a steady-state run (absorbed at the top
 * edge over injected weight, within the averaging window). NaN for
 * transient results.
 *
 * # Safety
 * `result` must be a live handle; `fraction` must be valid.
 */
enum wt_status wt_result_transmission(const struct wt_result *result, double *fraction);

/**
 * Tunneling oracle for a rectangular barrier: closed-form plane-wave
 * transmission and the split-step packet estimate for a packet of
 * spatial width `sigma_nm`.
 *
 * # Safety
 * Output pointers must each be valid or null (skipped).
 */
enum wt_status wt_oracle_transmission(double height_ev,
                                      double thickness_nm,
                                      double energy_ev,
                                      double m_eff_ratio,
                                      double sigma_nm,
                                      double *analytic,
                                      double *split_step);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WIGNER_TRANSPORT_H */
