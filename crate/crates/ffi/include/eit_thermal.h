#ifndef EIT_THERMAL_H
#define EIT_THERMAL_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EitStatus {
  EIT_STATUS_OK = 0,
  EIT_STATUS_NULL_POINTER = 1,
  EIT_STATUS_INVALID_PARAMETER = 2,
  EIT_STATUS_DOMAIN = 3,
  EIT_STATUS_OVERFLOW = 4,
  EIT_STATUS_NON_CONVERGENCE = 5,
  EIT_STATUS_GRID_TOO_NARROW = 6,
  EIT_STATUS_NO_CROSSING = 7,
  EIT_STATUS_RESOLUTION = 8,
  EIT_STATUS_NON_STATIONARY = 9,
  EIT_STATUS_FORMAT = 10,
  EIT_STATUS_IO = 11,
  EIT_STATUS_PANIC = 12,
} EitStatus;

/**
 * Opaque complex 2D field.
 */
typedef struct EitField EitField;

/**
 * Vapour constants; rates in s^-1, `coupling` in 1/(m s).
 */
typedef struct EitMedium {
  double v_th;
  double gamma;
  double gamma_d;
  double gamma_21;
  double omega_21;
  double coupling;
} EitMedium;

/**
 * Beam geometry; wave numbers in 1/m.
 */
typedef struct EitBeams {
  double q1;
  double delta_q[3];
  double omega_2_re;
  double omega_2_im;
  double delta_1;
  double delta;
} EitBeams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *eit_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *eit_version(void);

/**
 * General susceptibility `chi_31`; writes `(re, im)` to `out[0..2]`.
 *
 * # Safety
 * `medium`, `beams` and `k_perp` (three doubles) must be valid for reads,
 * `out` valid for two double writes.
 */
enum EitStatus eit_chi31_general(const struct EitMedium *medium,
                                 const struct EitBeams *beams,
                                 const double *k_perp,
                                 double omega,
                                 double *out);

/**
 * Diffusion-limit susceptibility; same contract as [`eit_chi31_general`].
 *
 * # Safety
 * See [`eit_chi31_general`].
 */
enum EitStatus eit_chi31_dicke(const struct EitMedium *medium,
                               const struct EitBeams *beams,
                               const double *k_perp,
                               double omega,
                               double *out);

/**
 * Motional EIT width for transverse wave number `k`.
 *
 * # Safety
 * `medium` valid for reads, `out` valid for one double write.
 */
enum EitStatus eit_fwhm_analytic(double k, const struct EitMedium *medium, double *out);

/**
 * Finite-beam correction `S_D(delta)`; `cylinder` non-zero selects the 2D beam.
 *
 * # Safety
 * `out` valid for two double writes.
 */
enum EitStatus eit_ramsey_s_correction(double delta,
                                       double a,
                                       int cylinder,
                                       double gamma,
                                       double k_pow,
                                       double d,
                                       double *out);

/**
 * Creates a field from `2 nx ny` interleaved doubles.
 *
 * # Safety
 * `values` valid for `2 nx ny` double reads, `out` valid for one pointer write.
 */
enum EitStatus eit_field_new(size_t nx,
                             size_t ny,
                             double dx,
                             double dy,
                             const double *values,
                             struct EitField **out);

/**
 * Reads a CF64 file.
 *
 * # Safety
 * `path` is a NUL-terminated string, `out` valid for one pointer write.
 */
enum EitStatus eit_field_read(const char *path, struct EitField **out);

/**
 * Writes a CF64 file (atomically) with unit string `unit`.
 *
 * # Safety
 * `field` is a live handle; `path` and `unit` are NUL-terminated strings.
 */
enum EitStatus eit_field_write(const struct EitField *field, const char *path, const char *unit);

/**
 * Grid size of a field.
 *
 * # Safety
 * `field` is a live handle; `nx` and `ny` valid for writes.
 */
enum EitStatus eit_field_shape(const struct EitField *field, size_t *nx, size_t *ny);

/**
 * Copies the `2 nx ny` interleaved values into `buf` of length `len` doubles.
 *
 * # Safety
 * `field` is a live handle; `buf` valid for `len` double writes.
 */
enum EitStatus eit_field_values(const struct EitField *field, double *buf, size_t len);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `field` is null or a handle not yet freed.
 */
void eit_field_free(struct EitField *field);

/**
 * Propagates a probe image through `propagation_length` metres of medium
 * (exact Lorentzian window).
 *
 * # Safety
 * `field` is a live handle, `medium`/`beams` valid for reads, `out` valid for one pointer write.
 */
enum EitStatus eit_filter_apply(const struct EitField *field,
                                const struct EitMedium *medium,
                                const struct EitBeams *beams,
                                int include_diffraction,
                                double propagation_length,
                                struct EitField **out);

/**
 * Evolves a stored coherence for `dt` seconds.
 *
 * # Safety
 * `field` is a live handle, `medium` valid for reads, `out` valid for one pointer write.
 */
enum EitStatus eit_evolve_stored(const struct EitField *field,
                                 const struct EitMedium *medium,
                                 double dt,
                                 struct EitField **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EIT_THERMAL_H */
