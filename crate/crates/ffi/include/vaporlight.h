#ifndef VAPORLIGHT_H
#define VAPORLIGHT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum VlStatus {
  VL_STATUS_OK = 0,
  VL_STATUS_NULL_POINTER = 1,
  VL_STATUS_INVALID_INPUT = 2,
  VL_STATUS_CONFIGURATION = 3,
  VL_STATUS_NUMERICAL = 4,
  VL_STATUS_PARSE = 5,
  VL_STATUS_IO = 6,
  VL_STATUS_FIT = 7,
  VL_STATUS_BUFFER_TOO_SMALL = 8,
  VL_STATUS_PANIC = 9,
} VlStatus;

/*
 Parsed sweep configuration.
 */
typedef struct VlSweepConfig VlSweepConfig;

/*
 Completed sweep.
 */
typedef struct VlSweepResult VlSweepResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. The pointer
 stays valid until the next call into this library from the same thread.
 */
const char *vl_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *vl_version(void);

/*
 Total rubidium vapor density (cm^-3) at `temperature_k`.

 # Safety
 `out` must be null or point to writable memory for one `double`.
 */
enum VlStatus vl_killian_density(double temperature_k, double *out);

/*
 Ground-level Zeeman shift magnitude (rad/s) for a field in tesla.

 # Safety
 `out` must be null or point to writable memory for one `double`.
 */
enum VlStatus vl_zeeman_shift(double b_field_t, double *out);

/*
 Rabi frequency (rad/s) of a uniform beam of `power_w` watts and
 `diameter_m` metres with the built-in saturation intensity and decay rate.

 # Safety
 `out` must be null or point to writable memory for one `double`.
 */
enum VlStatus vl_rabi_from_power(double power_w, double diameter_m, double *out);

/*
 Analytic EIT susceptibility `κγδ / (Ω_c² − δ² − iγδ)`; all rates in
 rad/s.

 # Safety
 `re` and `im` must be null or point to writable `double`s.
 */
enum VlStatus vl_eit_susceptibility(double delta,
                                    double kappa,
                                    double gamma,
                                    double omega_c,
                                    double *re,
                                    double *im);

/*
 Parses a TOML sweep description.

 # Safety
 `toml` must be null or a NUL-terminated string; `out` must be null or
 writable. On success `*out` owns a handle for
 [`vl_sweep_config_free`].
 */
enum VlStatus vl_sweep_config_from_toml(const char *toml, struct VlSweepConfig **out);

/*
 Overrides the resolution multiplier of a configuration.

 # Safety
 `config` must be null or a live handle.
 */
enum VlStatus vl_sweep_config_set_grid_scale(struct VlSweepConfig *config, double scale);

/*
 # Safety
 `config` must be null or a handle from [`vl_sweep_config_from_toml`]
 not freed before.
 */
void vl_sweep_config_free(struct VlSweepConfig *config);

/*
 Runs a sweep on `workers` threads (0 = all cores). Row failures do not
 make the call fail; query them with [`vl_sweep_result_failures`].

 # Safety
 `config` must be null or a live handle; `out` must be null or writable.
 On success `*out` owns a handle for [`vl_sweep_result_free`].
 */
enum VlStatus vl_sweep_run(const struct VlSweepConfig *config,
                           size_t workers,
                           struct VlSweepResult **out);

/*
 Number of rows, or 0 for a null handle.

 # Safety
 `result` must be null or a live handle.
 */
size_t vl_sweep_result_rows(const struct VlSweepResult *result);

/*
 Failed rows plus a failed spot check, or 0 for a null handle.

 # Safety
 `result` must be null or a live handle.
 */
size_t vl_sweep_result_failures(const struct VlSweepResult *result);

/*
 Copies the CSV dataset into `buf` (NUL-terminated). `*needed` receives
 the required size including the terminator; a null `buf` or too small
 `capacity` writes nothing else and returns `BufferTooSmall`.

 # Safety
 `result` must be null or a live handle; `buf` must be null or writable
 for `capacity` bytes; `needed` must be null or writable.
 */
enum VlStatus vl_sweep_result_csv(const struct VlSweepResult *result,
                                  char *buf,
                                  size_t capacity,
                                  size_t *needed);

/*
 # Safety
 `result` must be null or a handle from [`vl_sweep_run`] not freed before.
 */
void vl_sweep_result_free(struct VlSweepResult *result);

/*
 Fits the transparency half-width (Hz) to a slowing-sweep CSV.

 # Safety
 `csv` must be null or NUL-terminated; the outputs must be null or
 writable.
 */
enum VlStatus vl_fit_window(const char *csv, double *window_hz, double *residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VAPORLIGHT_H */
