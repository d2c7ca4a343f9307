#ifndef LAYERFLOW_H
#define LAYERFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum LfStatus {
  LF_STATUS_OK = 0,
  LF_STATUS_NULL_POINTER = 1,
  LF_STATUS_INVALID_UTF8 = 2,
  LF_STATUS_CONFIG = 3,
  LF_STATUS_INVALID_INPUT = 4,
  LF_STATUS_SOLVER_ABORT = 5,
  LF_STATUS_BUFFER_TOO_SMALL = 6,
  LF_STATUS_IO = 7,
  LF_STATUS_PANIC = 8,
} LfStatus;

/**
 * Opaque simulation handle.
 */
typedef struct LfSimulation LfSimulation;

/**
 * Integrated diagnostics of the current state.
 */
typedef struct LfEnergy {
  double time;
  /**
   * Total mechanical energy.
   */
  double total;
  /**
   * Exchange dissipation, never positive.
   */
  double exchange;
  /**
   * Viscous dissipation, never positive.
   */
  double viscous;
  double friction;
  /**
   * Integrated depth.
   */
  double mass;
} LfEnergy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a simulation from a NUL-terminated config text. On success
 * `*out` owns a handle to release with [`lf_simulation_free`].
 *
 * # Safety
 * `config` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum LfStatus lf_simulation_new(const char *config, struct LfSimulation **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sim` must be null or a handle from [`lf_simulation_new`] not yet freed.
 */
void lf_simulation_free(struct LfSimulation *sim);

/**
 * Takes one step of the stable size. The step used is written to `dt`
 * when it is not null.
 *
 * # Safety
 * `sim` must be a live handle; `dt` null or valid.
 */
enum LfStatus lf_simulation_step(struct LfSimulation *sim, double *dt);

/**
 * Steps until the simulation time equals `t_end` exactly. The number of
 * steps taken is written to `steps` when it is not null.
 *
 * # Safety
 * `sim` must be a live handle; `steps` null or valid.
 */
enum LfStatus lf_simulation_run_until(struct LfSimulation *sim, double t_end, size_t *steps);

/**
 * Current simulation time; NaN for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
double lf_simulation_time(const struct LfSimulation *sim);

/**
 * Final time from the config.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
double lf_simulation_t_end(const struct LfSimulation *sim);

/**
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t lf_simulation_n_cells(const struct LfSimulation *sim);

/**
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t lf_simulation_n_layers(const struct LfSimulation *sim);

/**
 * Copies the total depth of every cell into `buf` (at least n_cells long).
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum LfStatus lf_simulation_depth(const struct LfSimulation *sim, double *buf, size_t len);

/**
 * Copies the velocity of `layer` (0 is the bottom layer) into `buf`.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum LfStatus lf_simulation_velocity(const struct LfSimulation *sim,
                                     size_t layer,
                                     double *buf,
                                     size_t len);

/**
 * Evaluates the energy diagnostics of the current state.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum LfStatus lf_simulation_energy(const struct LfSimulation *sim, struct LfEnergy *out);

/**
 * Message of the last failure on this thread, empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *lf_last_error(void);

/**
 * Static description of a status code; "unknown status" for other values.
 */
const char *lf_status_name(int32_t code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAYERFLOW_H */
