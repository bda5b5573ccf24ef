#ifndef AXIBOUSS_H
#define AXIBOUSS_H

/* Generated by cbindgen from axibouss-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Field selector for norm queries.
 */
typedef enum AxbField {
  AxbField_Rho = 0,
  AxbField_Zeta = 1,
} AxbField;

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum AxbStatus {
  AxbStatus_Ok = 0,
  AxbStatus_NullPointer = 1,
  AxbStatus_InvalidUtf8 = 2,
  AxbStatus_InvalidConfig = 3,
  AxbStatus_Numeric = 4,
  AxbStatus_BlowUp = 5,
  AxbStatus_Io = 6,
  AxbStatus_Internal = 7,
} AxbStatus;

typedef struct AxbConfig AxbConfig;

typedef struct AxbSim AxbSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message into `buf` (NUL terminated, truncating) and
 * returns the full message length in bytes, excluding the terminator.
 * Passing a null or empty buffer just queries the length.
 */
size_t axb_last_error(char *buf, size_t cap);

/**
 * Returns a handle holding the built-in default configuration.
 */
struct AxbConfig *axb_config_default(void);

/**
 * Parses a TOML configuration; returns null and sets the error on failure.
 */
struct AxbConfig *axb_config_parse(const char *text);

void axb_config_free(struct AxbConfig *cfg);

/**
 * Builds a simulation from the configured grid, scheme, and initial preset,
 * at the given diffusivity (which overrides the configured one).
 */
struct AxbSim *axb_sim_new(const struct AxbConfig *cfg, double kappa);

void axb_sim_free(struct AxbSim *sim);

/**
 * Advances one step, capped at `dt_cap` (pass a large value for no cap).
 */
enum AxbStatus axb_sim_step(struct AxbSim *sim, double dt_cap);

/**
 * Advances to `t_end` under the configured time step and CFL cap.
 */
enum AxbStatus axb_sim_run(struct AxbSim *sim, double t_end);

/**
 * Current simulation time; NaN on a null handle.
 */
double axb_sim_time(const struct AxbSim *sim);

/**
 * Writes the L^p norm (cylindrical measure; p = inf for the sup norm) of
 * the selected field into `out`.
 */
enum AxbStatus axb_sim_norm(const struct AxbSim *sim, enum AxbField field, double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AXIBOUSS_H */
