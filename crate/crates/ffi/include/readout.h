#ifndef READOUT_H
#define READOUT_H

/* Generated by cbindgen from readout-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum ReadoutStatus {
  READOUT_STATUS_OK = 0,
  READOUT_STATUS_NULL_POINTER = 1,
  READOUT_STATUS_INVALID_ARGUMENT = 2,
  READOUT_STATUS_ENGINE_FAILURE = 3,
} ReadoutStatus;

// Opaque simulation-parameter handle.
typedef struct ReadoutParams ReadoutParams;

// Fluorescence-readout result.
typedef struct FluorescenceResult {
  // Single-shot assignment fidelity.
  double fidelity;
  // Optimal photon-count threshold.
  uint32_t threshold_m;
  // Mean detected photons, spin up (dark).
  double n_ph_up;
  // Mean detected photons, spin down (bright).
  double n_ph_down;
  // Excited population of the bright manifold at the end of the pulse.
  double p_e;
  // Bright ground population after the first sequence.
  double p_g;
  // Cavity-coupled emission fraction of the resonant transition.
  double beta_cav;
  // Number of excite-collect repetitions.
  uint64_t n_cyc;
  // Total readout duration, seconds.
  double total_time_s;
} FluorescenceResult;

// Reflection-readout result.
typedef struct ReflectionResult {
  double fidelity;
  uint32_t threshold_m;
  double n_ph_up;
  double n_ph_down;
  // Weak-probe steady reflectivities at the operating point.
  double r_up;
  double r_down;
  double contrast;
  // Operating detunings, rad/s.
  double delta_a;
  double delta_c;
  // Pulse width = readout duration, seconds.
  double duration_s;
} ReflectionResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Allocate a parameter handle from a named preset (`"table3"` or
// `"fig2a"`); NULL on unknown names. Free with `readout_params_free`.
struct ReadoutParams *readout_params_new(const char *preset);

// Release a parameter handle. NULL is a no-op.
void readout_params_free(struct ReadoutParams *params);

// Set one parameter by schema key (e.g. `"Q"`, `"gamma_GHz"`,
// `"P_in_pW"`, `"t_pulse_ns"`); rejects unknown keys.
enum ReadoutStatus readout_params_set(struct ReadoutParams *params, const char *key, double value);

// Run the fluorescence protocol. `fast_wait != 0` selects the
// `7 tau_cav_on` collection window instead of `7 tau_cav_off`.
enum ReadoutStatus readout_fluorescence_run(const struct ReadoutParams *params,
                                            int fast_wait,
                                            struct FluorescenceResult *out);

// Run the reflection protocol. With `optimize != 0` (or when no explicit
// detunings were set) the operating detunings maximize the weak-probe
// contrast first.
enum ReadoutStatus readout_reflection_run(const struct ReadoutParams *params,
                                          int optimize,
                                          struct ReflectionResult *out);

// Copy the last error message (UTF-8, NUL-terminated) into `buf`,
// truncating to `len` bytes. Returns the full message length.
size_t readout_last_error(char *buf, size_t len);

// Engine version as a static NUL-terminated string.
const char *readout_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* READOUT_H */
