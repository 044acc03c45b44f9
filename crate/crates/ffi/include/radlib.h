#ifndef RADLIB_H
#define RADLIB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RADLIB_FLAG_UNVALIDATED 1

#define RADLIB_FLAG_NO_UNCERTAINTY 2

#define RADLIB_FLAG_NO_INTENSITY 4

typedef enum RadlibStatus {
  RADLIB_STATUS_OK = 0,
  RADLIB_STATUS_NULL_ARGUMENT = 1,
  RADLIB_STATUS_INVALID_UTF8 = 2,
  RADLIB_STATUS_INVALID_ARGUMENT = 3,
  RADLIB_STATUS_IO = 4,
  RADLIB_STATUS_PARSE = 5,
  RADLIB_STATUS_DATA = 6,
  RADLIB_STATUS_INTERNAL = 7,
} RadlibStatus;

typedef enum RadlibRadiation {
  RADLIB_RADIATION_ALPHA = 0,
  RADLIB_RADIATION_BETA_MINUS = 1,
  RADLIB_RADIATION_BETA_PLUS_EC = 2,
  RADLIB_RADIATION_GAMMA = 3,
  RADLIB_RADIATION_ELECTRON = 4,
  RADLIB_RADIATION_XRAY = 5,
} RadlibRadiation;

/**
 * Opaque run configuration.
 */
typedef struct RadlibConfig RadlibConfig;

/**
 * Opaque library handle.
 */
typedef struct RadlibLibrary RadlibLibrary;

/**
 * Opaque result of `radlib_qualify`.
 */
typedef struct RadlibMatches RadlibMatches;

/**
 * One library line. Missing intensity and unknown half-life are NaN; stable is +infinity.
 */
typedef struct RadlibEntry {
  enum RadlibRadiation radiation;
  double energy_kev;
  double energy_unc_kev;
  double intensity_pct;
  double intensity_unc_pct;
  double half_life_s;
  double parent_level_kev;
  uint32_t flags;
} RadlibEntry;

/**
 * Closed intervals; the half-life axis applies only when `use_half_life` is nonzero.
 */
typedef struct RadlibBounds {
  double energy_lo_kev;
  double energy_hi_kev;
  double intensity_lo_pct;
  double intensity_hi_pct;
  int32_t use_half_life;
  double half_life_lo_s;
  double half_life_hi_s;
} RadlibBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or NULL. Valid until the next failing call on this thread.
 */
const char *radlib_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void radlib_string_free(char *s);

/**
 * Canonical id of a nuclide written in any accepted notation.
 *
 * # Safety
 * `id` must be a NUL-terminated string; `out` must be writable.
 */
enum RadlibStatus radlib_nuclide_canonical(const char *id, char **out);

/**
 * Reads a library CSV written by the exporter.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RadlibStatus radlib_library_read_csv(const char *path, struct RadlibLibrary **out);

/**
 * Number of entries; 0 for NULL.
 *
 * # Safety
 * `lib` must be NULL or a live handle.
 */
size_t radlib_library_len(const struct RadlibLibrary *lib);

/**
 * Copies entry `index` into `out`.
 *
 * # Safety
 * `lib` must be a live handle; `out` must be writable.
 */
enum RadlibStatus radlib_library_entry(const struct RadlibLibrary *lib,
                                       size_t index,
                                       struct RadlibEntry *out);

/**
 * Canonical id of the emitter of entry `index`.
 *
 * # Safety
 * `lib` must be a live handle; `out` must be writable.
 */
enum RadlibStatus radlib_library_entry_nuclide(const struct RadlibLibrary *lib,
                                               size_t index,
                                               char **out);

/**
 * New handle holding the entries of `lib` inside `bounds`.
 *
 * # Safety
 * `lib` and `bounds` must be valid; `out` must be writable.
 */
enum RadlibStatus radlib_library_prune(const struct RadlibLibrary *lib,
                                       const struct RadlibBounds *bounds,
                                       struct RadlibLibrary **out);

/**
 * Writes `lib` as `csv`, `html`, `xml`, `tex` or `json`.
 *
 * # Safety
 * `lib` must be a live handle; strings must be NUL-terminated.
 */
enum RadlibStatus radlib_library_write(const struct RadlibLibrary *lib,
                                       const char *format,
                                       const char *path);

/**
 * # Safety
 * `lib` must be NULL or a handle not yet freed.
 */
void radlib_library_free(struct RadlibLibrary *lib);

/**
 * Matches `n` peak centroids against `lib` within `tol_kev`.
 *
 * # Safety
 * `centroids` must point to `n` doubles (may be NULL when `n` is 0); `out` must be writable.
 */
enum RadlibStatus radlib_qualify(const struct RadlibLibrary *lib,
                                 const double *centroids,
                                 size_t n,
                                 double tol_kev,
                                 struct RadlibMatches **out);

/**
 * Number of peaks; 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t radlib_matches_len(const struct RadlibMatches *m);

/**
 * Number of candidates of peak `peak`; 0 when out of range (unassigned).
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t radlib_matches_candidate_count(const struct RadlibMatches *m, size_t peak);

/**
 * Copies candidate `k` (best first) of peak `peak`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum RadlibStatus radlib_matches_candidate(const struct RadlibMatches *m,
                                           size_t peak,
                                           size_t k,
                                           struct RadlibEntry *out);

/**
 * Canonical id of candidate `k` of peak `peak`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum RadlibStatus radlib_matches_candidate_nuclide(const struct RadlibMatches *m,
                                                   size_t peak,
                                                   size_t k,
                                                   char **out);

/**
 * # Safety
 * `m` must be NULL or a handle not yet freed.
 */
void radlib_matches_free(struct RadlibMatches *m);

/**
 * Loads and validates a YAML run configuration.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum RadlibStatus radlib_config_load(const char *path, struct RadlibConfig **out);

/**
 * Runs every job, writing outputs and reports into `out_dir`; `report_json` receives the run report.
 * Returns `Data` when any job failed (the report is still produced).
 *
 * # Safety
 * `cfg` must be a live handle; `out_dir` NUL-terminated; `report_json` writable or NULL.
 */
enum RadlibStatus radlib_config_run(const struct RadlibConfig *cfg,
                                    const char *out_dir,
                                    int32_t offline,
                                    char **report_json);

/**
 * # Safety
 * `cfg` must be NULL or a handle not yet freed.
 */
void radlib_config_free(struct RadlibConfig *cfg);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADLIB_H */
