#ifndef STARKPRUFER_H
#define STARKPRUFER_H

/* Generated by cbindgen from the starkprufer-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_ARGUMENT = 1,
  SP_STATUS_INVALID_PARAMETER = 2,
  SP_STATUS_DOMAIN_ERROR = 3,
  SP_STATUS_RESOURCE_LIMIT = 4,
  SP_STATUS_PRECISION_LOSS = 5,
  SP_STATUS_INTERNAL_ERROR = 6,
} SpStatus;

/**
 * Opaque reference-solution handle.
 */
typedef struct SpReference SpReference;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Airy functions: out = [Ai, Bi, Ai', Bi'] at x. Validated for
 * -1e4 <= x <= 104.
 *
 * # Safety
 * `out` must point to at least 4 writable doubles.
 */
SpStatus sp_airy(double x, double *out);

/**
 * Build a reference-solution handle for field strength F > 0, energy E and
 * coupling lambda. On success *out owns the handle.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
SpStatus sp_reference_new(double field_strength, double energy, double coupling, SpReference **out);

/**
 * Build a handle with the exact rational field F = pi^2 q/(3 p), gcd(p,q)=1.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
SpStatus sp_reference_new_rational(uint64_t p,
                                   uint64_t q,
                                   double energy,
                                   double coupling,
                                   SpReference **out);

/**
 * Release a handle created by one of the constructors. Null is a no-op.
 *
 * # Safety
 * `handle` must have come from sp_reference_new(_rational) and not have been
 * freed before.
 */
void sp_reference_free(SpReference *handle);

/**
 * zeta(x) and zeta'(x): out = [Re zeta, Im zeta, Re zeta', Im zeta'].
 *
 * # Safety
 * `handle` must be a live handle; `out` must hold 4 doubles.
 */
SpStatus sp_zeta(const SpReference *handle, double x, double *out);

/**
 * Continuous phase data: out = [gamma, gamma', gamma''] at x.
 *
 * # Safety
 * `handle` must be a live handle; `out` must hold 3 doubles.
 */
SpStatus sp_gamma_phase(const SpReference *handle, double x, double *out);

/**
 * Leading asymptotics of gamma (order 0), gamma' (1) or gamma'' (2) at x > 0.
 *
 * # Safety
 * `out` must be a valid double pointer.
 */
SpStatus sp_gamma_asymptotic(double field_strength,
                             double energy,
                             double x,
                             uint8_t order,
                             double *out);

/**
 * Resonant point X_l (gamma'(X_l) = pi l) and sampling point x_l.
 *
 * # Safety
 * `handle` must be live; `out_resonant`, `out_sampling` must be valid.
 */
SpStatus sp_resonance_points(const SpReference *handle,
                             uint32_t l,
                             double *out_resonant,
                             double *out_sampling);

/**
 * Run the exact Prufer recursion from boundary angle theta0 up to cell
 * n_max. Couplings are g_n = lambda when use_random is 0, otherwise drawn
 * from the counter-based sampler (family: 0 gaussian, 1 rademacher,
 * 2 uniform). out = [log R(n_max), eta(n_max)].
 *
 * # Safety
 * `handle` must be live; `out` must hold 2 doubles.
 */
SpStatus sp_prufer_run(const SpReference *handle,
                       double theta0,
                       int64_t n_max,
                       int use_random,
                       int family,
                       uint64_t seed,
                       uint64_t realization,
                       double *out);

/**
 * Cubic Gauss sum w(E, lambda, q, p); with has_m nonzero the exceptional
 * form with integer index m is evaluated. out = [Re w, Im w].
 *
 * # Safety
 * `out` must hold 2 doubles.
 */
SpStatus sp_cubic_gauss_sum(uint64_t p,
                            uint64_t q,
                            double energy,
                            double coupling,
                            int has_m,
                            int64_t m,
                            double *out);

/**
 * Monte Carlo estimate of the Prufer radius growth exponent
 * (theory lambda^2/(8F)). out = [mean, stderr].
 *
 * # Safety
 * `handle` must be live; `out` must hold 2 doubles.
 */
SpStatus sp_mc_radius_exponent(const SpReference *handle,
                               int family,
                               uint64_t seed,
                               int64_t n_max,
                               uint32_t trials,
                               double *out);

/**
 * Subordinate-branch detection on one realization:
 * out = [decay_exp, generic_exp, boundary_angle]. Returns SP_DOMAIN_ERROR
 * when no contracting direction exists (e.g. lambda = 0).
 *
 * # Safety
 * `handle` must be live; `out` must hold 3 doubles.
 */
SpStatus sp_detect_subordinate(const SpReference *handle,
                               int family,
                               uint64_t seed,
                               uint64_t realization,
                               int64_t n_max,
                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STARKPRUFER_H */
