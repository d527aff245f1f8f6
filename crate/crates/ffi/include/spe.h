#ifndef SPE_H
#define SPE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum SpeStatus {
  SPE_STATUS_OK = 0,
  SPE_STATUS_INVALID_ARGUMENT = 1,
  SPE_STATUS_INVALID_DATA = 2,
  SPE_STATUS_ASSUMPTION_VIOLATION = 3,
  SPE_STATUS_BLOWUP = 4,
  SPE_STATUS_PARSE_ERROR = 5,
  SPE_STATUS_IO_ERROR = 6,
  SPE_STATUS_NULL_POINTER = 7,
  SPE_STATUS_OUT_OF_RANGE = 8,
  SPE_STATUS_PANIC = 9,
} SpeStatus;

// A resolved scenario: grid, data and solver configuration.
typedef struct SpeScenario SpeScenario;

// A completed run.
typedef struct SpeTrajectory SpeTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or NULL. The
// pointer stays valid until the next failing call on the same thread.
const char *spe_last_error_message(void);

// Parses and resolves a scenario from JSON text. Sample-file paths are
// resolved against `base_dir`, or the working directory when it is NULL.
//
// # Safety
// `json` and a non-NULL `base_dir` must be NUL-terminated strings; `out`
// must be writable.
enum SpeStatus spe_scenario_from_json(const char *json,
                                      const char *base_dir,
                                      struct SpeScenario **out);

// # Safety
// `scenario` must be NULL or a handle from [`spe_scenario_from_json`] not yet freed.
void spe_scenario_free(struct SpeScenario *scenario);

// Number of grid nodes of the scenario.
//
// # Safety
// `scenario` must be a live handle.
size_t spe_scenario_node_count(const struct SpeScenario *scenario);

// Integrates the scenario to its final time.
//
// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum SpeStatus spe_run(const struct SpeScenario *scenario, struct SpeTrajectory **out);

// # Safety
// `traj` must be NULL or a handle from [`spe_run`] not yet freed.
void spe_trajectory_free(struct SpeTrajectory *traj);

// Number of stored snapshots.
//
// # Safety
// `traj` must be a live handle.
size_t spe_trajectory_snapshot_count(const struct SpeTrajectory *traj);

// Time of snapshot `index`.
//
// # Safety
// `traj` must be a live handle; `t` must be writable.
enum SpeStatus spe_trajectory_snapshot_time(const struct SpeTrajectory *traj,
                                            size_t index,
                                            double *t);

// Copies `u` at snapshot `index` into `buf`, which holds `len` doubles
// (at least the node count).
//
// # Safety
// `traj` must be a live handle; `buf` must be writable for `len` doubles.
enum SpeStatus spe_trajectory_copy_u(const struct SpeTrajectory *traj,
                                     size_t index,
                                     double *buf,
                                     size_t len);

// Copies the primitive `P` at snapshot `index` into `buf`.
//
// # Safety
// As [`spe_trajectory_copy_u`].
enum SpeStatus spe_trajectory_copy_p(const struct SpeTrajectory *traj,
                                     size_t index,
                                     double *buf,
                                     size_t len);

// Invariants report of the run as a JSON array; free with [`spe_string_free`].
// `all_pass` receives 1 when every check passed and 0 otherwise.
//
// # Safety
// `traj` must be a live handle; `out` and `all_pass` must be writable.
enum SpeStatus spe_trajectory_invariants_json(const struct SpeTrajectory *traj,
                                              char **out,
                                              int32_t *all_pass);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void spe_string_free(char *s);

// `D₁ = −k/(2c₂)`, `D₂ = 1/(c₂k)`.
//
// # Safety
// `d1` and `d2` must be writable.
enum SpeStatus spe_scaling_constants(double k, double c2, double *d1, double *d2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPE_H */
