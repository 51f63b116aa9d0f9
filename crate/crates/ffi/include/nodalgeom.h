#ifndef NODALGEOM_H
#define NODALGEOM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NgDomainKind {
  NG_DOMAIN_KIND_RECTANGLE = 0,
  NG_DOMAIN_KIND_TORUS = 1,
  NG_DOMAIN_KIND_DISK = 2,
  NG_DOMAIN_KIND_STADIUM = 3,
} NgDomainKind;

typedef enum NgStatus {
  NG_STATUS_OK = 0,
  NG_STATUS_NULL_POINTER = 1,
  NG_STATUS_INVALID_ARGUMENT = 2,
  NG_STATUS_INVALID_DOMAIN = 3,
  NG_STATUS_RESOLUTION = 4,
  NG_STATUS_CONVERGENCE = 5,
  NG_STATUS_NO_NODAL_SET = 6,
  NG_STATUS_PRECONDITION = 7,
  NG_STATUS_UNSUPPORTED = 8,
  NG_STATUS_IO = 9,
  NG_STATUS_PANIC = 10,
  NG_STATUS_OTHER = 11,
} NgStatus;

// Nodal domains of a field.
typedef struct NgDecomposition NgDecomposition;

// Sampled field with its eigenvalue.
typedef struct NgField NgField;

typedef struct NgComponent {
  size_t id;
  int32_t sign;
  size_t node_count;
  double volume;
  double inradius;
  double deepest[3];
} NgComponent;

// Missing statistics are NaN.
typedef struct NgAsymmetrySummary {
  size_t probes;
  size_t unclipped;
  double min;
  double p05;
  double min_scaled;
} NgAsymmetrySummary;

typedef struct NgCapacity {
  double computed;
  double exact;
  double relative_error;
} NgCapacity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *ng_last_error(void);

// Library version as a static NUL-terminated string.
const char *ng_version(void);

// Samples a closed-form eigenfunction. `dims` holds the box sides for
// rectangles and tori, one entry per axis for disks (only the count is
// used) and the straight length for stadiums. `cells` is the number of
// cells along the longest side.
//
// # Safety
// `dims` and `mode` must point to `ndim` and `nmode` values; `out` must be
// a valid pointer.
enum NgStatus ng_field_closed_form(enum NgDomainKind kind,
                                   const double *dims,
                                   size_t ndim,
                                   double radius,
                                   const int64_t *mode,
                                   size_t nmode,
                                   size_t cells,
                                   struct NgField **out);

// Computes the `index`-th (1-based) Dirichlet eigenpair numerically.
//
// # Safety
// As for [`ng_field_closed_form`].
enum NgStatus ng_field_eigen(enum NgDomainKind kind,
                             const double *dims,
                             size_t ndim,
                             double radius,
                             size_t cells,
                             size_t index,
                             struct NgField **out);

// # Safety
// `field` must be null or a handle from this library not yet freed.
void ng_field_free(struct NgField *field);

// # Safety
// `field` must be a live handle; `lambda` and `len` must be valid or null.
enum NgStatus ng_field_info(const struct NgField *field, double *lambda, size_t *len);

// Copies the node values (first axis fastest) into `buf`, which must hold
// at least the length reported by [`ng_field_info`].
//
// # Safety
// `buf` must point to `cap` writable values.
enum NgStatus ng_field_values(const struct NgField *field, double *buf, size_t cap);

// Splits the field into nodal domains.
//
// # Safety
// `field` must be a live handle and `out` valid.
enum NgStatus ng_nodal_decompose(const struct NgField *field,
                                 double zero_tol,
                                 struct NgDecomposition **out);

// # Safety
// `d` must be null or a live handle.
void ng_nodal_free(struct NgDecomposition *d);

// # Safety
// `d` must be a live handle and `count` valid.
enum NgStatus ng_nodal_count(const struct NgDecomposition *d, size_t *count);

// Component `id`, counted from 1.
//
// # Safety
// `d` must be a live handle and `out` valid.
enum NgStatus ng_nodal_component(const struct NgDecomposition *d,
                                 size_t id,
                                 struct NgComponent *out);

// Asymmetry of balls of the given radii around subsampled nodal points.
//
// # Safety
// `radii` must point to `nradii` values; `field` live; `out` valid.
enum NgStatus ng_asymmetry_scan(const struct NgField *field,
                                const double *radii,
                                size_t nradii,
                                size_t max_centers,
                                uint64_t seed,
                                struct NgAsymmetrySummary *out);

// Capacity of concentric balls on a lattice with `cells` cells per axis.
//
// # Safety
// `out` must be valid.
enum NgStatus ng_concentric_capacity(size_t dim,
                                     size_t cells,
                                     double inner,
                                     double outer,
                                     struct NgCapacity *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NODALGEOM_H */
