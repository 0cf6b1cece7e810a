#ifndef BUBBLELAB_H
#define BUBBLELAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BlStatus {
  BL_STATUS_OK = 0,
  BL_STATUS_NULL_POINTER = 1,
  BL_STATUS_INVALID_PARAMETER = 2,
  BL_STATUS_NON_CONVERGENCE = 3,
  BL_STATUS_BUFFER_TOO_SMALL = 4,
  BL_STATUS_PANIC = 5,
} BlStatus;

typedef enum BlModel {
  BL_MODEL_ROUND_SPHERE = 0,
  BL_MODEL_ANTIPODAL_QUOTIENT = 1,
} BlModel;

typedef enum BlTriangulation {
  BL_TRIANGULATION_CIRCLE = 0,
  BL_TRIANGULATION_SPHERE2 = 1,
} BlTriangulation;

typedef struct BlComplex BlComplex;

typedef struct BlConfiguration BlConfiguration;

typedef struct BlConstants BlConstants;

// Scalar constants for one (n, k).
typedef struct BlConstantsView {
  uint32_t n;
  uint32_t k;
  double two_star;
  double c;
  double b;
  double y;
  double norm_two_star;
  double norm_two_star_minus_one;
} BlConstantsView;

// Sum energy of a configuration with its quadrature error and thresholds.
typedef struct BlEnergy {
  double j;
  double j_error;
  double threshold_strict;
  double threshold_loose;
  double epsilon_sum;
} BlEnergy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `cap` bytes). Returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or point to `cap` writable bytes.
size_t bl_last_error(char *buf, size_t cap);

// Library version as a static NUL-terminated string.
const char *bl_version(void);

// # Safety
// `out` must be a valid pointer to a handle slot.
enum BlStatus bl_constants_new(uint32_t n, uint32_t k, struct BlConstants **out);

// # Safety
// `h` must come from `bl_constants_new` and `out` must be valid.
enum BlStatus bl_constants_view(const struct BlConstants *h, struct BlConstantsView *out);

// # Safety
// `h` must be null or come from `bl_constants_new`, and not be used afterwards.
void bl_constants_free(struct BlConstants *h);

// Green's function of P_g between two unit vectors of length n+1.
//
// # Safety
// `x` and `y` must point to `len` doubles and `out` must be valid.
enum BlStatus bl_green(enum BlModel model,
                       uint32_t k,
                       const double *x,
                       const double *y,
                       size_t len,
                       double *out);

// # Safety
// `out` must be a valid pointer to a handle slot.
enum BlStatus bl_configuration_new(enum BlModel model,
                                   uint32_t n,
                                   uint32_t k,
                                   struct BlConfiguration **out);

// Adds a bubble centred at the unit vector `center` (n+1 doubles).
//
// # Safety
// `h` must come from `bl_configuration_new`; `center` must point to `len` doubles.
enum BlStatus bl_configuration_add_bubble(struct BlConfiguration *h,
                                          const double *center,
                                          size_t len,
                                          double mu,
                                          double delta,
                                          double weight);

// Number of bubbles in the configuration.
//
// # Safety
// `h` must come from `bl_configuration_new`.
size_t bl_configuration_len(const struct BlConfiguration *h);

// Sum energy 𝒥 of the configuration at relative quadrature tolerance `rel_tol`.
//
// # Safety
// `h` must come from `bl_configuration_new` and `out` must be valid.
enum BlStatus bl_configuration_energy(const struct BlConfiguration *h,
                                      double rel_tol,
                                      struct BlEnergy *out);

// # Safety
// `h` must be null or come from `bl_configuration_new`, and not be used afterwards.
void bl_configuration_free(struct BlConfiguration *h);

// Builds ℬ_d(M) for a triangulated model M with its subcomplex ℬ_{d-1}(M).
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum BlStatus bl_complex_new(enum BlTriangulation kind,
                             uint32_t resolution,
                             uint32_t d,
                             struct BlComplex **out);

// Z₂ Betti numbers of ℬ_d(M), or of the pair (ℬ_d, ℬ_{d-1}) when `relative` is
// nonzero. Writes up to `cap` values and stores the full count in `len`.
//
// # Safety
// `h` must come from `bl_complex_new`; `buf` must hold `cap` values; `len` must be valid.
enum BlStatus bl_complex_betti(const struct BlComplex *h,
                               int32_t relative,
                               uint64_t *buf,
                               size_t cap,
                               size_t *len);

// Writes the simplex list of the complex into `buf` as NUL-terminated text.
// Stores the required size including the NUL in `len`.
//
// # Safety
// `h` must come from `bl_complex_new`; `buf` must hold `cap` bytes; `len` must be valid.
enum BlStatus bl_complex_simplex_list(const struct BlComplex *h,
                                      char *buf,
                                      size_t cap,
                                      size_t *len);

// # Safety
// `h` must be null or come from `bl_complex_new`, and not be used afterwards.
void bl_complex_free(struct BlComplex *h);

// Parses a model name ("sphere", "quotient", ...) into `out`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` must be valid.
enum BlStatus bl_model_from_name(const char *name, enum BlModel *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BUBBLELAB_H */
