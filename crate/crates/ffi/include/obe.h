#ifndef OBE_H
#define OBE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum ObeStatus {
  OBE_STATUS_OK = 0,
  OBE_STATUS_NULL_POINTER = 1,
  OBE_STATUS_INVALID_ARGUMENT = 2,
  OBE_STATUS_CONFIG = 3,
  OBE_STATUS_IO = 4,
  OBE_STATUS_TABLE = 5,
  OBE_STATUS_MISSING_COEFFICIENTS = 6,
  OBE_STATUS_NUMERICAL = 7,
  OBE_STATUS_PANIC = 8,
} ObeStatus;

// Spectrum of one sector.
typedef struct ObeResult ObeResult;

// Coefficient tables.
typedef struct ObeTables ObeTables;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread; empty after success.
const char *obe_last_error(void);

// Build coefficient tables up to `qmax` quanta.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum ObeStatus obe_tables_build(uint32_t qmax, struct ObeTables **out);

// Load tables written by `obe_tables_save` or the `obe precompute` command.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum ObeStatus obe_tables_load(const char *path, struct ObeTables **out);

// # Safety
// `tables` must come from this library; `path` must be NUL-terminated.
enum ObeStatus obe_tables_save(const struct ObeTables *tables, const char *path);

// Largest quanta cutoff the tables cover.
//
// # Safety
// `tables` must come from this library or be NULL.
enum ObeStatus obe_tables_qmax(const struct ObeTables *tables, uint32_t *out);

// # Safety
// `tables` must come from this library or be NULL; it must not be used afterwards.
void obe_tables_free(struct ObeTables *tables);

// Solve the sector described by a TOML run configuration.
//
// # Safety
// `toml` must be NUL-terminated; `tables` from this library; `out` writable.
enum ObeStatus obe_solve_toml(const char *toml,
                              const struct ObeTables *tables,
                              struct ObeResult **out);

// Lowest `states` levels of a built-in system of three identical bosons at
// fixed scale `a`.
//
// # Safety
// `name` must be NUL-terminated; `tables` from this library; `out` writable.
enum ObeStatus obe_solve_builtin(const char *name,
                                 uint32_t l,
                                 int32_t parity,
                                 uint32_t qmax,
                                 double a,
                                 size_t states,
                                 const struct ObeTables *tables,
                                 struct ObeResult **out);

// Number of eigenvalues held.
//
// # Safety
// `result` must come from this library or be NULL.
size_t obe_result_len(const struct ObeResult *result);

// Basis size of the solved sector.
//
// # Safety
// `result` must come from this library or be NULL.
size_t obe_result_basis_size(const struct ObeResult *result);

// Energy and ⟨r12⟩ of state `index`. Either output may be NULL.
//
// # Safety
// `result` from this library; outputs NULL or writable.
enum ObeStatus obe_result_state(const struct ObeResult *result,
                                size_t index,
                                double *energy,
                                double *mean_r12);

// Frozen oscillator scales.
//
// # Safety
// `result` from this library; outputs NULL or writable.
enum ObeStatus obe_result_scales(const struct ObeResult *result, double *a, double *b);

// Whole result as JSON; release with `obe_string_free`.
//
// # Safety
// `result` from this library; `out` writable.
enum ObeStatus obe_result_json(const struct ObeResult *result, char **out);

// # Safety
// `result` must come from this library or be NULL; it must not be used afterwards.
void obe_result_free(struct ObeResult *result);

// # Safety
// `s` must come from this library or be NULL.
void obe_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OBE_H */
