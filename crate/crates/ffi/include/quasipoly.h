#ifndef QUASIPOLY_H
#define QUASIPOLY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define QP_OK 0

/**
 * A required pointer argument was null.
 */
#define QP_ERR_NULL -1

/**
 * A string argument was not UTF-8.
 */
#define QP_ERR_UTF8 -2

/**
 * The library panicked; this is a bug.
 */
#define QP_ERR_PANIC -3

#define QP_FROBENIUS_NUMBER 0

#define QP_FROBENIUS_NOT_COPRIME 1

#define QP_FROBENIUS_ALL_COVERED 2

/**
 * A parametric Presburger family.
 */
typedef struct QpFamily QpFamily;

/**
 * A parametric polyhedron `{x : A(t)x ≤ b(t)}`.
 */
typedef struct QpPolyhedron QpPolyhedron;

/**
 * A quasi-polynomial in `t`.
 */
typedef struct QpQuasiPoly QpQuasiPoly;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; valid until the next call.
 */
const char *qp_last_error(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void qp_string_free(char *s);

/**
 * Parses a polynomial string or quasi-polynomial JSON.
 *
 * # Safety
 * `src` is a NUL-terminated string; `out` is writable.
 */
int32_t qp_quasipoly_parse(const char *src, struct QpQuasiPoly **out);

/**
 * # Safety
 * `h` comes from this library or is null.
 */
void qp_quasipoly_free(struct QpQuasiPoly *h);

/**
 * # Safety
 * `h` is a live handle.
 */
uint64_t qp_quasipoly_period(const struct QpQuasiPoly *h);

/**
 * Display form, e.g. `{0: t; 1: t + 1} mod 2`.
 *
 * # Safety
 * `h` is a live handle; `out` is writable.
 */
int32_t qp_quasipoly_to_string(const struct QpQuasiPoly *h, char **out);

/**
 * Value at `t` as `p/q`.
 *
 * # Safety
 * `h` is a live handle; `out` is writable.
 */
int32_t qp_quasipoly_eval(const struct QpQuasiPoly *h, uint64_t t, char **out);

/**
 * Per-class gcd `d = p·f + q·g`, valid for `t ≥ *threshold`.
 *
 * # Safety
 * `f`, `g` are live handles; every out pointer is writable.
 */
int32_t qp_gcd(const struct QpQuasiPoly *f,
               const struct QpQuasiPoly *g,
               struct QpQuasiPoly **d,
               struct QpQuasiPoly **p,
               struct QpQuasiPoly **q,
               uint64_t *threshold);

/**
 * `⌊f(t)/g(t)⌋` for polynomials `f`, `g`.
 *
 * # Safety
 * `f`, `g` are live handles; out pointers are writable.
 */
int32_t qp_floor_ratio(const struct QpQuasiPoly *f,
                       const struct QpQuasiPoly *g,
                       struct QpQuasiPoly **out,
                       uint64_t *threshold);

/**
 * Parses polyhedron text, one inequality per line.
 *
 * # Safety
 * `src` is a NUL-terminated string; `out` is writable.
 */
int32_t qp_polyhedron_parse(const char *src, struct QpPolyhedron **out);

/**
 * # Safety
 * `h` comes from this library or is null.
 */
void qp_polyhedron_free(struct QpPolyhedron *h);

/**
 * `|P_t ∩ Z^d|`.
 *
 * # Safety
 * `h` is a live handle; `out` is writable.
 */
int32_t qp_count_points(const struct QpPolyhedron *h, uint64_t t, uint64_t *out);

/**
 * Fits the lattice-point count over `[t0, t1]`, holding out the last third.
 *
 * # Safety
 * `h` is a live handle; out pointers are writable.
 */
int32_t qp_ehrhart_fit(const struct QpPolyhedron *h,
                       uint64_t t0,
                       uint64_t t1,
                       struct QpQuasiPoly **out,
                       uint64_t *threshold);

/**
 * Frobenius number of fixed generators. `*kind` receives one of the
 * `QP_FROBENIUS_*` values; `*out` is set only for `QP_FROBENIUS_NUMBER`.
 *
 * # Safety
 * `gens` points to `n` values; out pointers are writable.
 */
int32_t qp_frobenius(const uint64_t *gens, uintptr_t n, int64_t *out, int32_t *kind);

/**
 * Parses a formula in the family DSL.
 *
 * # Safety
 * `src` is a NUL-terminated string; `out` is writable.
 */
int32_t qp_family_parse(const char *src, struct QpFamily **out);

/**
 * # Safety
 * `h` comes from this library or is null.
 */
void qp_family_free(struct QpFamily *h);

/**
 * Runs a property checker over `[t0, t1]` and returns the report as JSON.
 * `property` is one of `"1"`, `"2"`, `"3"` or `"4"`; property 4 constructs
 * its own candidate.
 *
 * # Safety
 * `h` is a live handle; `property` is a NUL-terminated string; `out` is writable.
 */
int32_t qp_family_check(const struct QpFamily *h,
                        const char *property,
                        uint64_t t0,
                        uint64_t t1,
                        char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUASIPOLY_H */
